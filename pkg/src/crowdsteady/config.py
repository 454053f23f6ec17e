"""Run configuration: flat key=value sections, INI-style.

Default parameters follow the regimes of the bifurcation study:
delta = 1e-3, kappa = 5e-4 (Model I) or 1e-2 (Model II).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields

from .models import Domain, Model, Params


class ConfigError(ValueError):
    pass


DEFAULT_KAPPA = {Model.I: 5e-4, Model.II: 1e-2}


@dataclass
class RunConfig:
    model: Model = Model.I
    dim: int = 1
    kappa: float | None = None            # None -> model default
    delta: float = 1e-3
    n_grid: int = 1024
    scan_cells: int = 2000
    n_modes: int = 128
    slope_tol: float = 1e-10
    residual_tol: float = 1e-8
    merge_tol: float = 1e-7
    out_dir: str = "out"
    seed: int = 0
    # command-specific knobs
    phi0: float | None = None
    phi0_count: int = 400
    mass: float | None = None
    direction: str = "increasing"
    scenario: str = "perturbed_plateau"
    amplitude: float = 1e-3
    t_final: float = 5.0
    dt0: float = 1e-4
    quick: bool = False

    def resolved_kappa(self) -> float:
        return DEFAULT_KAPPA[self.model] if self.kappa is None else self.kappa

    def params(self) -> Params:
        if self.delta <= 0 or self.resolved_kappa() <= 0:
            raise ConfigError("kappa and delta must be positive")
        return Params(kappa=self.resolved_kappa(), delta=self.delta)

    def domain(self) -> Domain:
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        return Domain(self.dim, self.n_grid)

    def as_items(self) -> list[tuple[str, str]]:
        out = [("model", self.model.value), ("kappa", repr(self.resolved_kappa()))]
        for f in fields(self):
            if f.name in ("model", "kappa"):
                continue
            out.append((f.name, repr(getattr(self, f.name))))
        return out


_FLOAT_KEYS = {"kappa", "delta", "slope_tol", "residual_tol", "merge_tol", "phi0",
               "mass", "amplitude", "t_final", "dt0"}
_INT_KEYS = {"dim", "n_grid", "scan_cells", "n_modes", "seed", "phi0_count"}
_STR_KEYS = {"out_dir", "direction", "scenario"}
_BOOL_KEYS = {"quick"}
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _BOOL_KEYS | {"model"}


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an INI file plus flag overrides.

    Unknown keys raise ConfigError naming the offending key; sections are
    cosmetic (all keys share one namespace).
    """
    cfg = RunConfig()
    raw: dict[str, str] = {}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            for key, value in parser.items(section):
                raw[key] = value
        raw.update({k: v for k, v in parser.defaults().items()})
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    for key, value in raw.items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key: {key!r}")
        try:
            if key == "model":
                cfg.model = Model.parse(str(value))
            elif key in _FLOAT_KEYS:
                setattr(cfg, key, float(value))
            elif key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in _BOOL_KEYS:
                setattr(cfg, key, str(value).strip().lower() in ("1", "true", "yes", "on"))
            else:
                setattr(cfg, key, str(value))
        except ValueError as exc:
            raise ConfigError(f"bad value for config key {key!r}: {value!r}") from exc

    for name in ("slope_tol", "residual_tol", "merge_tol", "dt0"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"config key {name!r} must be positive")
    if cfg.dim not in (1, 2):
        raise ConfigError(f"config key 'dim' must be 1 or 2, got {cfg.dim}")
    return cfg
