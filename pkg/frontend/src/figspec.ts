/** Figure specifications: which diagram to draw from which solver outputs.
 *
 * Conventions follow the solver's published CSV schema: stability styling is
 * solid = dynamically stable, dotted = unstable; mass axes may be logarithmic;
 * constant branches draw thin, plateau branches bold.
 */

import { readFileSync } from "node:fs";
import { z } from "zod";

export const FigureId = z.enum([
  "constant_curves",      // phi of constant solutions vs phi0
  "branches_phi0",        // center value a vs phi0, plateau bold
  "profiles",             // phi(r) families along a branch
  "mass_diagram",         // mass vs phi0 with stability dashes
  "stability_criteria",   // mu1 and Lambda along the branch
  "energy_comparison",    // energy vs phi0, optional Model I display shift
]);
export type FigureId = z.infer<typeof FigureId>;

export const FigureSpecSchema = z.object({
  figure: FigureId,
  inputs: z.record(z.string(), z.string()),
  log_mass: z.boolean().default(false),
  energy_shift: z.boolean().default(false),   // + delta/2 * phi0^2 * |Omega|
  x: z.string().optional(),                   // stability_criteria abscissa
  title: z.string().optional(),
});
export type FigureSpec = z.infer<typeof FigureSpecSchema>;

export function loadSpec(path: string): FigureSpec {
  const raw = JSON.parse(readFileSync(path, "utf-8"));
  return FigureSpecSchema.parse(raw);
}
