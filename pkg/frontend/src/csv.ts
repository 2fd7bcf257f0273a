/**
 * Strict readers for the solver's CSV outputs.
 *
 * Schemas (produced by the `arcscreen` command-line runner):
 *   solution_N<k>.csv   columns s,U,psi          (1024 sample rows)
 *   table_<method>.csv  columns N,error,order    (order blank on level 1)
 *   field.csv           columns x,y,u,masked     (u blank where masked=1)
 */

import { existsSync, readFileSync } from "node:fs";
import Papa from "papaparse";

export class InputError extends Error {}

export interface SolutionCurve {
  s: number[];
  U: number[];
  psi: number[];
}

export interface ConvergenceRow {
  N: number;
  error: number;
  order: number | null;
}

export interface FieldData {
  /** Unique ascending grid coordinates. */
  xs: number[];
  ys: number[];
  /** u[iy][ix]; NaN where masked. */
  u: number[][];
  masked: boolean[][];
}

function readText(path: string, hint: string): string {
  if (!existsSync(path)) {
    throw new InputError(
      `missing input file: ${path}\n  ${hint}`
    );
  }
  return readFileSync(path, "utf-8");
}

function parseRows(path: string, text: string, columns: string[]): string[][] {
  const parsed = Papa.parse<string[]>(text.trim(), { delimiter: "," });
  if (parsed.errors.length > 0) {
    throw new InputError(
      `${path}: malformed CSV (${parsed.errors[0].message})`
    );
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new InputError(`${path}: file is empty`);
  }
  const header = rows[0].map((c) => c.trim());
  if (header.join(",") !== columns.join(",")) {
    throw new InputError(
      `${path}: expected columns "${columns.join(",")}" but found ` +
        `"${header.join(",")}"`
    );
  }
  for (const [i, row] of rows.slice(1).entries()) {
    if (row.length !== columns.length) {
      throw new InputError(
        `${path}: row ${i + 2} has ${row.length} fields, expected ` +
          `${columns.length} (${columns.join(",")})`
      );
    }
  }
  return rows.slice(1);
}

function toNumber(path: string, row: number, column: string, text: string): number {
  const value = Number(text);
  if (text.trim() === "" || !Number.isFinite(value)) {
    throw new InputError(
      `${path}: row ${row} column "${column}" is not a finite number: "${text}"`
    );
  }
  return value;
}

export function readSolutionCsv(path: string): SolutionCurve {
  const text = readText(
    path,
    "solution curves are produced by `arcscreen run`; point this tool at " +
      "the run's output directory"
  );
  const rows = parseRows(path, text, ["s", "U", "psi"]);
  const curve: SolutionCurve = { s: [], U: [], psi: [] };
  rows.forEach((row, i) => {
    curve.s.push(toNumber(path, i + 2, "s", row[0]));
    curve.U.push(toNumber(path, i + 2, "U", row[1]));
    curve.psi.push(toNumber(path, i + 2, "psi", row[2]));
  });
  if (curve.s.length < 2) {
    throw new InputError(`${path}: needs at least 2 sample rows`);
  }
  return curve;
}

export function readTableCsv(path: string): ConvergenceRow[] {
  const text = readText(
    path,
    "convergence tables are produced by `arcscreen run` / `arcscreen sweep`"
  );
  const rows = parseRows(path, text, ["N", "error", "order"]);
  return rows.map((row, i) => ({
    N: toNumber(path, i + 2, "N", row[0]),
    error: toNumber(path, i + 2, "error", row[1]),
    order: row[2].trim() === "" ? null : toNumber(path, i + 2, "order", row[2]),
  }));
}

export function readFieldCsv(path: string): FieldData {
  const text = readText(
    path,
    "field grids are produced by `arcscreen field` or `arcscreen run --field`"
  );
  const rows = parseRows(path, text, ["x", "y", "u", "masked"]);
  const xs: number[] = [];
  const ys: number[] = [];
  const points = rows.map((row, i) => {
    const x = toNumber(path, i + 2, "x", row[0]);
    const y = toNumber(path, i + 2, "y", row[1]);
    const masked = row[3].trim() === "1";
    if (!masked && row[3].trim() !== "0") {
      throw new InputError(
        `${path}: row ${i + 2} column "masked" must be 0 or 1, got "${row[3]}"`
      );
    }
    const u = masked ? NaN : toNumber(path, i + 2, "u", row[2]);
    if (!xs.includes(x)) xs.push(x);
    if (!ys.includes(y)) ys.push(y);
    return { x, y, u, masked };
  });
  xs.sort((a, b) => a - b);
  ys.sort((a, b) => a - b);
  if (points.length !== xs.length * ys.length) {
    throw new InputError(
      `${path}: expected a full ${xs.length} x ${ys.length} grid, ` +
        `found ${points.length} rows`
    );
  }
  const u = ys.map(() => new Array<number>(xs.length).fill(NaN));
  const masked = ys.map(() => new Array<boolean>(xs.length).fill(true));
  for (const p of points) {
    const ix = xs.indexOf(p.x);
    const iy = ys.indexOf(p.y);
    u[iy][ix] = p.u;
    masked[iy][ix] = p.masked;
  }
  return { xs, ys, u, masked };
}
