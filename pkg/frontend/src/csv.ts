/** CSV tables written by the solver CLI: '#' comment header, then a header
 * row, comma separator, '.' decimal point, UTF-8. */

import { readFileSync } from "node:fs";

export class MissingColumnError extends Error {
  constructor(column: string, path: string) {
    super(`column '${column}' missing from ${path}`);
    this.name = "MissingColumnError";
  }
}

export interface Table {
  path: string;
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string, path = "<string>"): Table {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.length > 0 && !line.startsWith("#"));
  if (lines.length === 0) {
    return { path, columns: [], rows: [] };
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  return { path, columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf-8"), path);
}

/** Numeric column accessor; unknown names raise MissingColumnError. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(name, table.path);
  }
  return table.rows.map((row) => Number(row[idx]));
}

export function textColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new MissingColumnError(name, table.path);
  }
  return table.rows.map((row) => row[idx]);
}

/** Split row indices by the value of a key column (insertion-ordered). */
export function groupBy(table: Table, name: string): Map<string, number[]> {
  const keys = textColumn(table, name);
  const groups = new Map<string, number[]>();
  keys.forEach((key, i) => {
    const bucket = groups.get(key);
    if (bucket) {
      bucket.push(i);
    } else {
      groups.set(key, [i]);
    }
  });
  return groups;
}
