/** Regenerates every diagram type from the shipped solver datasets. */

import { existsSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { FigureSpecSchema } from "../src/figspec.js";
import { render } from "../src/render.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const DATA = join(HERE, "..", "..", "data");
const M1 = join(DATA, "modelI-d1");
const M2 = join(DATA, "modelII-d1");

describe("shipped acceptance datasets", () => {
  it("datasets are present", () => {
    expect(existsSync(join(M1, "diagram.csv"))).toBe(true);
    expect(existsSync(join(M2, "diagram.csv"))).toBe(true);
  });

  it("renders the Model I mass diagram (log mass, dotted unstable)", () => {
    const svg = render(
      FigureSpecSchema.parse({
        figure: "mass_diagram",
        inputs: { diagram: join(M1, "diagram.csv") },
        log_mass: true,
      }),
    );
    expect(svg).toContain("mass (log)");
    expect(svg).toMatch(/1e-?\d/);
    expect(svg).toContain('stroke-dasharray="4 4"'); // unstable part past turning
    expect(svg).toContain('stroke-width="2.4"');
  });

  it("renders the Model II mass diagram", () => {
    const svg = render(
      FigureSpecSchema.parse({
        figure: "mass_diagram",
        inputs: { diagram: join(M2, "diagram.csv") },
      }),
    );
    // middle constants are unstable between the folds: dotted styling present
    expect(svg).toContain('stroke-dasharray="4 4"');
    expect(svg).toContain('stroke-width="2.4"');
  });

  it("renders the branch parametrization over phi0", () => {
    const svg = render(
      FigureSpecSchema.parse({
        figure: "branches_phi0",
        inputs: { diagram: join(M1, "diagram.csv") },
      }),
    );
    expect((svg.match(/<polyline/g) ?? []).length).toBeGreaterThan(3);
  });

  it("renders the constant-solution curves", () => {
    const svg = render(
      FigureSpecSchema.parse({
        figure: "constant_curves",
        inputs: { constants: join(M1, "constants.csv") },
      }),
    );
    expect(svg).toContain("polyline");
  });

  it("renders the profile families", () => {
    const svg = render(
      FigureSpecSchema.parse({
        figure: "profiles",
        inputs: { profiles: join(M1, "branch_profiles.csv") },
      }),
    );
    expect((svg.match(/<polyline/g) ?? []).length).toBeGreaterThan(5);
  });

  it("renders the stability-criteria comparison", () => {
    const svg = render(
      FigureSpecSchema.parse({
        figure: "stability_criteria",
        inputs: { diagram: join(M1, "diagram.csv") },
      }),
    );
    expect(svg).toContain(">mu1</text>");
    expect(svg).toContain(">Lambda</text>");
  });

  it("renders the shifted Model I energy comparison", () => {
    const svg = render(
      FigureSpecSchema.parse({
        figure: "energy_comparison",
        inputs: { diagram: join(M1, "diagram.csv") },
        energy_shift: true,
      }),
    );
    expect(svg).toContain("shifted energy");
  });
});
