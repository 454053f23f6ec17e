import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { column, MissingColumnError, parseCsv } from "../src/csv.js";
import { FigureSpecSchema } from "../src/figspec.js";
import { render } from "../src/render.js";

const DIAGRAM_HEADER =
  "model,dim,kappa,delta,phi0,a,mass,mass_fraction,energy,lambda_var,mu1," +
  "branch_id,monotone_dir,stable_dyn,stable_var";

function diagramCsv(rows: string[]): string {
  return ["# model = I", DIAGRAM_HEADER, ...rows].join("\n") + "\n";
}

function writeTmp(name: string, text: string): string {
  const dir = mkdtempSync(join(tmpdir(), "figtest-"));
  const path = join(dir, name);
  writeFileSync(path, text, "utf-8");
  return path;
}

const SAMPLE = diagramCsv([
  "I,1,0.0005,0.001,10,-5,0.01,0.01,1.0,0.1,0.002,const-lower,constant,1,1",
  "I,1,0.0005,0.001,20,-6,0.02,0.02,1.1,0.1,0.002,const-lower,constant,1,1",
  "I,1,0.0005,0.001,30,-7,0.04,0.04,1.2,0.1,0.002,const-lower,constant,1,1",
  "I,1,0.0005,0.001,10,-4,0.10,0.10,0.9,0.05,0.001,branch-0-increasing,increasing,1,1",
  "I,1,0.0005,0.001,20,-4.5,0.30,0.30,0.8,0.01,0.001,branch-0-increasing,increasing,1,1",
  "I,1,0.0005,0.001,30,-5.0,0.50,0.50,0.7,-0.01,-0.002,branch-0-increasing,increasing,0,0",
  "I,1,0.0005,0.001,40,-5.5,0.45,0.45,0.6,-0.02,-0.004,branch-0-increasing,increasing,0,0",
]);

describe("csv", () => {
  it("parses comment headers and columns", () => {
    const t = parseCsv(SAMPLE, "sample.csv");
    expect(t.columns).toContain("mass");
    expect(t.rows.length).toBe(7);
    expect(column(t, "phi0")[0]).toBe(10);
  });

  it("raises a named error on a missing column", () => {
    const t = parseCsv(SAMPLE, "sample.csv");
    expect(() => column(t, "no_such_column")).toThrowError(MissingColumnError);
    expect(() => column(t, "no_such_column")).toThrowError(/no_such_column/);
  });
});

describe("mass diagram", () => {
  it("draws solid stable and dotted unstable segments, bold branches", () => {
    const path = writeTmp("diagram.csv", SAMPLE);
    const spec = FigureSpecSchema.parse({
      figure: "mass_diagram",
      inputs: { diagram: path },
    });
    const svg = render(spec);
    expect(svg).toContain("<svg");
    expect(svg).toContain('stroke-dasharray="4 4"');     // unstable tail dotted
    expect(svg).toContain('stroke-width="2.4"');          // plateau bold
    expect(svg).toContain('stroke-width="1"');            // constants thin
  });

  it("uses a logarithmic mass axis when asked", () => {
    const path = writeTmp("diagram.csv", SAMPLE);
    const spec = FigureSpecSchema.parse({
      figure: "mass_diagram",
      inputs: { diagram: path },
      log_mass: true,
    });
    const svg = render(spec);
    expect(svg).toContain("mass (log)");
    expect(svg).toMatch(/1e-?\d/);                        // decade tick labels
  });

  it("renders axes plus a warning for an empty dataset", () => {
    const path = writeTmp("diagram.csv", diagramCsv([]));
    const spec = FigureSpecSchema.parse({
      figure: "mass_diagram",
      inputs: { diagram: path },
    });
    const svg = render(spec);
    expect(svg).toContain("empty dataset");
    expect(svg).toContain("<line");                       // axes still drawn
  });

  it("re-renders byte-identically", () => {
    const path = writeTmp("diagram.csv", SAMPLE);
    const spec = FigureSpecSchema.parse({
      figure: "mass_diagram",
      inputs: { diagram: path },
    });
    expect(render(spec)).toEqual(render(spec));
  });
});

describe("energy comparison", () => {
  it("applies the Model I display shift delta/2 phi0^2 |Omega|", () => {
    const path = writeTmp("diagram.csv", SAMPLE);
    const base = render(
      FigureSpecSchema.parse({
        figure: "energy_comparison",
        inputs: { diagram: path },
      }),
    );
    const shifted = render(
      FigureSpecSchema.parse({
        figure: "energy_comparison",
        inputs: { diagram: path },
        energy_shift: true,
      }),
    );
    expect(shifted).toContain("shifted energy");
    expect(shifted).not.toEqual(base);
  });
});

describe("stability criteria", () => {
  it("plots mu1 and Lambda for branch rows only", () => {
    const path = writeTmp("diagram.csv", SAMPLE);
    const svg = render(
      FigureSpecSchema.parse({
        figure: "stability_criteria",
        inputs: { diagram: path },
      }),
    );
    expect(svg).toContain(">mu1</text>");
    expect(svg).toContain(">Lambda</text>");
  });
});

describe("constant curves and profiles", () => {
  it("renders the constant-solution multivalued curve", () => {
    const text = [
      "phi0,phi,rho,mass,branch_label,variationally_unstable,mu1_re,mu1_im,mu2_re,mu2_im,degenerate",
      "10,-9,0.1,0.1,lower,0,0.1,0,0.2,0,0",
      "20,-12,0.05,0.05,lower,0,0.1,0,0.2,0,0",
      "10,-3,0.3,0.3,middle,1,-0.1,0,0.2,0,0",
      "20,-2,0.4,0.4,middle,1,-0.1,0,0.2,0,0",
    ].join("\n");
    const path = writeTmp("constants.csv", text);
    const svg = render(
      FigureSpecSchema.parse({
        figure: "constant_curves",
        inputs: { constants: path },
      }),
    );
    expect(svg).toContain("polyline");
  });

  it("renders profile families", () => {
    const text = [
      "branch_id,point,phi0,r,phi",
      "0,0,100,0,-4", "0,0,100,0.5,-2", "0,0,100,1,1",
      "0,5,140,0,-5", "0,5,140,0.5,-1", "0,5,140,1,2",
    ].join("\n");
    const path = writeTmp("profiles.csv", text);
    const svg = render(
      FigureSpecSchema.parse({
        figure: "profiles",
        inputs: { profiles: path },
      }),
    );
    const count = (svg.match(/<polyline/g) ?? []).length;
    expect(count).toBeGreaterThanOrEqual(2);
  });

  it("names the missing input key", () => {
    expect(() =>
      render(
        FigureSpecSchema.parse({ figure: "profiles", inputs: {} }),
      ),
    ).toThrowError(/profiles/);
  });
});
