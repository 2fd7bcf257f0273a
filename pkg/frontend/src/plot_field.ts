/**
 * Renders the exterior potential grid of a run directory as a heatmap SVG.
 * Cells flagged as masked (too close to the arc for reliable evaluation)
 * are left blank, which makes the arc itself visible as a gap.
 *
 * Usage: node dist/plot_field.js <run-dir> [--out <file.svg>]
 *
 * Reads <run-dir>/field.csv.
 */

import { writeFileSync } from "node:fs";
import { join } from "node:path";
import { parseArgs } from "node:util";

import { FieldData, InputError, readFieldCsv } from "./csv.js";
import { divergingColor, formatTick, linearScale, SvgDocument } from "./svg.js";

export function renderField(field: FieldData): string {
  const { xs, ys, u, masked } = field;
  const box = { left: 64, top: 36, width: 420, height: 420 };
  const width = box.left + box.width + 96;
  const height = box.top + box.height + 52;
  const doc = new SvgDocument(width, height);

  const values = u.flat().filter((v) => Number.isFinite(v));
  const allMasked = values.length === 0;
  if (allMasked) {
    console.warn(
      "warning: every grid cell is masked; emitting an empty frame"
    );
  }
  const vMax = allMasked ? 1 : Math.max(...values.map(Math.abs), 1e-300);

  const xScale = linearScale(
    [xs[0], xs[xs.length - 1]],
    [box.left, box.left + box.width]
  );
  const yScale = linearScale(
    [ys[0], ys[ys.length - 1]],
    [box.top + box.height, box.top]
  );

  const cellEdges = (coords: number[], scale: (v: number) => number) => {
    const edges = [scale(coords[0])];
    for (let i = 0; i + 1 < coords.length; i++) {
      edges.push(scale((coords[i] + coords[i + 1]) / 2));
    }
    edges.push(scale(coords[coords.length - 1]));
    return edges;
  };
  const xEdges = cellEdges(xs, xScale);
  const yEdges = cellEdges(ys, yScale);

  for (let iy = 0; iy < ys.length; iy++) {
    for (let ix = 0; ix < xs.length; ix++) {
      if (masked[iy][ix]) continue; // blank cell
      const t = 0.5 + u[iy][ix] / (2 * vMax);
      doc.rect(
        xEdges[ix],
        yEdges[iy + 1],
        xEdges[ix + 1] - xEdges[ix],
        yEdges[iy] - yEdges[iy + 1],
        divergingColor(t)
      );
    }
  }
  doc.axes(box, xScale, yScale, { x: "x", y: "y", title: "potential u" });

  // color bar
  const barLeft = box.left + box.width + 24;
  const barWidth = 16;
  const steps = 64;
  for (let i = 0; i < steps; i++) {
    const y0 = box.top + (box.height * (steps - 1 - i)) / steps;
    doc.rect(barLeft, y0, barWidth, box.height / steps + 0.5,
      divergingColor((i + 0.5) / steps));
  }
  doc.raw(
    `<rect x="${barLeft}" y="${box.top}" width="${barWidth}" ` +
      `height="${box.height}" fill="none" stroke="#222"/>`
  );
  doc.text(formatTick(vMax), barLeft + barWidth + 4, box.top + 10, { size: 10 });
  doc.text("0", barLeft + barWidth + 4, box.top + box.height / 2 + 3, {
    size: 10,
  });
  doc.text(formatTick(-vMax), barLeft + barWidth + 4, box.top + box.height, {
    size: 10,
  });
  return doc.render();
}

export function main(argv: string[]): number {
  const { values, positionals } = parseArgs({
    args: argv,
    options: { out: { type: "string" } },
    allowPositionals: true,
  });
  if (positionals.length !== 1) {
    console.error("usage: plot_field <run-dir> [--out <file.svg>]");
    return 2;
  }
  const runDir = positionals[0];
  try {
    const field = readFieldCsv(join(runDir, "field.csv"));
    const outPath = values.out ?? join(runDir, "field.svg");
    writeFileSync(outPath, renderField(field));
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

if (process.argv[1] && process.argv[1].endsWith("plot_field.js")) {
  process.exit(main(process.argv.slice(2)));
}
