/** Minimal deterministic SVG emission: scales, axes, curves, heatmaps. */

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(
  domain: [number, number],
  range: [number, number]
): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) =>
    r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const step = Math.pow(10, Math.floor(Math.log10((hi - lo) / count)));
  const err = (hi - lo) / (count * step);
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const s = step * factor;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / s) * s; v <= hi + 1e-12 * s; v += s) {
    ticks.push(Math.abs(v) < 1e-12 * s ? 0 : v);
  }
  return ticks;
}

export function formatTick(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e4 || abs < 1e-3) return value.toExponential(1);
  return parseFloat(value.toPrecision(6)).toString();
}

export interface PanelBox {
  left: number;
  top: number;
  width: number;
  height: number;
}

export class SvgDocument {
  private parts: string[] = [];
  private clipCounter = 0;

  constructor(readonly width: number, readonly height: number) {}

  raw(fragment: string): void {
    this.parts.push(fragment);
  }

  text(
    content: string,
    x: number,
    y: number,
    options: { size?: number; anchor?: string; rotate?: boolean } = {}
  ): void {
    const size = options.size ?? 11;
    const anchor = options.anchor ?? "start";
    const transform = options.rotate
      ? ` transform="rotate(-90 ${x} ${y})"`
      : "";
    this.parts.push(
      `<text x="${x}" y="${y}" font-size="${size}" ` +
        `font-family="sans-serif" text-anchor="${anchor}"${transform}>` +
        `${escapeXml(content)}</text>`
    );
  }

  /** Returns the id of a fresh rectangular clip path. */
  clipRect(box: PanelBox): string {
    const id = `clip${this.clipCounter++}`;
    this.parts.push(
      `<clipPath id="${id}"><rect x="${box.left}" y="${box.top}" ` +
        `width="${box.width}" height="${box.height}"/></clipPath>`
    );
    return id;
  }

  polyline(
    xs: number[],
    ys: number[],
    stroke: string,
    options: { width?: number; dash?: string; clipId?: string } = {}
  ): void {
    const pts = xs
      .map((x, i) => `${round2(x)},${round2(ys[i])}`)
      .join(" ");
    const dash = options.dash ? ` stroke-dasharray="${options.dash}"` : "";
    const clip = options.clipId ? ` clip-path="url(#${options.clipId})"` : "";
    this.parts.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" ` +
        `stroke-width="${options.width ?? 1.5}"${dash}${clip}/>`
    );
  }

  rect(
    x: number,
    y: number,
    w: number,
    h: number,
    fill: string,
    stroke = "none"
  ): void {
    this.parts.push(
      `<rect x="${round2(x)}" y="${round2(y)}" width="${round2(w)}" ` +
        `height="${round2(h)}" fill="${fill}" stroke="${stroke}"/>`
    );
  }

  axes(
    box: PanelBox,
    xScale: Scale,
    yScale: Scale,
    labels: { x: string; y: string; title?: string }
  ): void {
    const bottom = box.top + box.height;
    const right = box.left + box.width;
    this.rect(box.left, box.top, box.width, box.height, "none", "#222");
    for (const t of niceTicks(xScale.domain[0], xScale.domain[1])) {
      const px = xScale(t);
      if (px < box.left - 0.5 || px > right + 0.5) continue;
      this.raw(
        `<line x1="${round2(px)}" y1="${bottom}" x2="${round2(px)}" ` +
          `y2="${bottom + 4}" stroke="#222"/>`
      );
      this.text(formatTick(t), px, bottom + 16, { anchor: "middle", size: 10 });
    }
    for (const t of niceTicks(yScale.domain[0], yScale.domain[1])) {
      const py = yScale(t);
      if (py < box.top - 0.5 || py > bottom + 0.5) continue;
      this.raw(
        `<line x1="${box.left - 4}" y1="${round2(py)}" x2="${box.left}" ` +
          `y2="${round2(py)}" stroke="#222"/>`
      );
      this.text(formatTick(t), box.left - 7, py + 3.5, {
        anchor: "end",
        size: 10,
      });
    }
    this.text(labels.x, box.left + box.width / 2, bottom + 32, {
      anchor: "middle",
    });
    this.text(labels.y, box.left - 42, box.top + box.height / 2, {
      anchor: "middle",
      rotate: true,
    });
    if (labels.title) {
      this.text(labels.title, box.left + box.width / 2, box.top - 8, {
        anchor: "middle",
        size: 13,
      });
    }
  }

  legend(
    box: PanelBox,
    entries: { label: string; stroke: string; dash?: string }[]
  ): void {
    let y = box.top + 14;
    for (const entry of entries) {
      const dash = entry.dash ? ` stroke-dasharray="${entry.dash}"` : "";
      this.raw(
        `<line x1="${box.left + 8}" y1="${y - 4}" x2="${box.left + 34}" ` +
          `y2="${y - 4}" stroke="${entry.stroke}" stroke-width="1.5"${dash}/>`
      );
      this.text(entry.label, box.left + 40, y, { size: 11 });
      y += 16;
    }
  }

  render(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" ` +
      `height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">` +
      `<rect width="${this.width}" height="${this.height}" fill="white"/>` +
      this.parts.join("\n") +
      `</svg>`
    );
  }
}

function round2(value: number): number {
  return Math.round(value * 100) / 100;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** Diverging blue-white-red map for t in [0, 1]. */
export function divergingColor(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  const mix = (a: number, b: number, w: number) => Math.round(a + (b - a) * w);
  let r: number, g: number, b: number;
  if (clamped < 0.5) {
    const w = clamped * 2;
    [r, g, b] = [mix(33, 247, w), mix(102, 247, w), mix(172, 247, w)];
  } else {
    const w = clamped * 2 - 1;
    [r, g, b] = [mix(247, 178, w), mix(247, 24, w), mix(247, 43, w)];
  }
  return `rgb(${r},${g},${b})`;
}
