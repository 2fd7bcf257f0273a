/**
 * Renders the surface solution U(s) and the layer density psi(s) of a
 * completed run directory as a two-panel SVG, overlaying the standard and
 * enriched discretizations.
 *
 * Usage: node dist/plot_solutions.js <run-dir> [--N <k>] [--out <file.svg>]
 *
 * Reads <run-dir>/<method>/solution_N<k>.csv (method in {standard,
 * enriched}; either may be absent, but at least one must exist).
 */

import { writeFileSync } from "node:fs";
import { join } from "node:path";
import { parseArgs } from "node:util";

import { InputError, readSolutionCsv, SolutionCurve } from "./csv.js";
import { linearScale, PanelBox, SvgDocument } from "./svg.js";

const METHOD_STYLE: Record<string, { stroke: string; dash?: string }> = {
  standard: { stroke: "#c02020", dash: "5,3" },
  enriched: { stroke: "#1040c0" },
};

interface Curves {
  [method: string]: SolutionCurve;
}

export function loadCurves(runDir: string, N: number): Curves {
  const curves: Curves = {};
  const tried: string[] = [];
  for (const method of ["standard", "enriched"]) {
    const path = join(runDir, method, `solution_N${N}.csv`);
    tried.push(path);
    try {
      curves[method] = readSolutionCsv(path);
    } catch (err) {
      if (err instanceof InputError && err.message.startsWith("missing")) {
        continue; // a single-method run is fine
      }
      throw err;
    }
  }
  if (Object.keys(curves).length === 0) {
    throw new InputError(
      `no solution curves for N=${N} under ${runDir}\n` +
        `  looked for:\n    ${tried.join("\n    ")}\n` +
        `  generate them with: arcscreen run --out ${runDir}`
    );
  }
  return curves;
}

/**
 * Robust plot range: central 98% of the pooled values, padded.  The
 * enriched density is unbounded toward the arc endpoints; percentile
 * limits keep the interior structure visible while the divergent tails
 * leave the panel through its clip rectangle.
 */
export function robustRange(values: number[]): [number, number] {
  const sorted = [...values].sort((a, b) => a - b);
  const n = sorted.length;
  const trim = n > 8 ? Math.max(1, Math.floor(0.01 * n)) : 0;
  let lo = sorted[trim];
  let hi = sorted[n - 1 - trim];
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.05 * (hi - lo);
  return [lo - pad, hi + pad];
}

function drawPanel(
  doc: SvgDocument,
  box: PanelBox,
  curves: Curves,
  field: "U" | "psi",
  yLabel: string
): void {
  const allS = Object.values(curves).flatMap((c) => c.s);
  const allV = Object.values(curves).flatMap((c) => c[field]);
  const xScale = linearScale(
    [Math.min(...allS), Math.max(...allS)],
    [box.left, box.left + box.width]
  );
  const yScale = linearScale(robustRange(allV), [
    box.top + box.height,
    box.top,
  ]);
  doc.axes(box, xScale, yScale, { x: "s", y: yLabel, title: yLabel });
  const clipId = doc.clipRect(box);
  for (const [method, curve] of Object.entries(curves)) {
    const style = METHOD_STYLE[method];
    doc.polyline(
      curve.s.map(xScale),
      curve[field].map(yScale),
      style.stroke,
      { dash: style.dash, clipId }
    );
  }
  doc.legend(box, Object.keys(curves).map((method) => ({
    label: method,
    ...METHOD_STYLE[method],
  })));
}

export function renderSolutions(curves: Curves): string {
  const panel = { width: 360, height: 280 };
  const margin = { left: 64, right: 24, top: 36, bottom: 48, gap: 70 };
  const width = margin.left + panel.width + margin.gap + panel.width + margin.right;
  const height = margin.top + panel.height + margin.bottom;
  const doc = new SvgDocument(width, height);
  drawPanel(
    doc,
    { left: margin.left, top: margin.top, ...panel },
    curves,
    "U",
    "U"
  );
  drawPanel(
    doc,
    {
      left: margin.left + panel.width + margin.gap,
      top: margin.top,
      ...panel,
    },
    curves,
    "psi",
    "psi"
  );
  return doc.render();
}

export function main(argv: string[]): number {
  const { values, positionals } = parseArgs({
    args: argv,
    options: {
      N: { type: "string", default: "64" },
      out: { type: "string" },
    },
    allowPositionals: true,
  });
  if (positionals.length !== 1) {
    console.error(
      "usage: plot_solutions <run-dir> [--N <elements>] [--out <file.svg>]"
    );
    return 2;
  }
  const runDir = positionals[0];
  const N = Number(values.N);
  if (!Number.isInteger(N) || N <= 0) {
    console.error(`--N must be a positive integer, got "${values.N}"`);
    return 2;
  }
  try {
    const curves = loadCurves(runDir, N);
    const outPath = values.out ?? join(runDir, `solutions_N${N}.svg`);
    writeFileSync(outPath, renderSolutions(curves));
    console.log(`wrote ${outPath}`);
    return 0;
  } catch (err) {
    if (err instanceof InputError) {
      console.error(err.message);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("plot_solutions.js")) {
  process.exit(main(process.argv.slice(2)));
}
