/** String-assembled SVG primitives and axis scales. Deterministic by
 * construction: same inputs, same markup, same bytes. */

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Fixed-precision pixel coordinates keep the markup independent of
 * platform float printing quirks. */
export function px(value: number): string {
  return value.toFixed(2);
}

export interface Scale {
  at(value: number): number;
}

export class LinearScale implements Scale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {}

  at(value: number): number {
    const t = (value - this.d0) / (this.d1 - this.d0);
    return this.r0 + t * (this.r1 - this.r0);
  }
}

export class LogScale implements Scale {
  constructor(
    readonly d0: number,
    readonly d1: number,
    readonly r0: number,
    readonly r1: number,
  ) {
    if (d0 <= 0 || d1 <= 0) {
      throw new RangeError("log scale domain must be positive");
    }
  }

  at(value: number): number {
    const t = (Math.log10(value) - Math.log10(this.d0)) /
      (Math.log10(this.d1) - Math.log10(this.d0));
    return this.r0 + t * (this.r1 - this.r0);
  }
}

/** Round-numbered ticks (1/2/5 steps) covering [min, max]. */
export function linearTicks(min: number, max: number, target = 5): number[] {
  if (!(max > min)) {
    max = min + 1;
  }
  const raw = (max - min) / target;
  const mag = 10 ** Math.floor(Math.log10(raw));
  const norm = raw / mag;
  const step = mag * (norm <= 1 ? 1 : norm <= 2 ? 2 : norm <= 5 ? 5 : 10);
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

/** Powers of ten spanning [min, max]; for log axes. */
export function decadeTicks(min: number, max: number): number[] {
  const lo = Math.floor(Math.log10(min));
  const hi = Math.ceil(Math.log10(max));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e++) {
    ticks.push(10 ** e);
  }
  return ticks;
}

export function fmtTick(value: number): string {
  if (value === 0) {
    return "0";
  }
  const abs = Math.abs(value);
  if (abs >= 1e-3 && abs < 1e6) {
    return Number(value.toPrecision(10)).toString();
  }
  const exp = value.toExponential();
  return exp.replace(/e([+-])(\d)$/, "e$1$2").replace("e+", "e");
}

export function line(x1: number, y1: number, x2: number, y2: number,
                     stroke: string, width = 1, dash = ""): string {
  const d = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" ` +
    `stroke="${stroke}" stroke-width="${width}"${d}/>`;
}

export function rect(x: number, y: number, w: number, h: number,
                     fill: string, stroke = "none"): string {
  return `<rect x="${px(x)}" y="${px(y)}" width="${px(w)}" height="${px(h)}" ` +
    `fill="${fill}" stroke="${stroke}"/>`;
}

export type Anchor = "start" | "middle" | "end";

export function text(x: number, y: number, content: string, size = 12,
                     anchor: Anchor = "middle", extra = ""): string {
  return `<text x="${px(x)}" y="${px(y)}" font-size="${size}" ` +
    `text-anchor="${anchor}"${extra ? " " + extra : ""}>${esc(content)}</text>`;
}

export function polyline(points: Array<[number, number]>, stroke: string,
                         width = 2, dash = ""): string {
  const pts = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  const d = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline points="${pts}" fill="none" stroke="${stroke}" ` +
    `stroke-width="${width}"${d}/>`;
}

export function circle(x: number, y: number, r: number, fill: string): string {
  return `<circle cx="${px(x)}" cy="${px(y)}" r="${r}" fill="${fill}"/>`;
}

export function document(width: number, height: number, body: string): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" ` +
    `xmlns:xlink="http://www.w3.org/1999/xlink" width="${width}" ` +
    `height="${height}" font-family="DejaVu Sans, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    body +
    `\n</svg>\n`;
}

export interface PanelRect {
  x: number;
  y: number;
  width: number;
  height: number;
}

export interface AxisTick {
  value: number;
  label: string;
}

/** Plot frame: border, tick marks with labels, optional axis titles. */
export function panelFrame(rect_: PanelRect, xTicks: AxisTick[], xScale: Scale,
                           yTicks: AxisTick[], yScale: Scale,
                           xLabel = "", yLabel = ""): string {
  const parts: string[] = [];
  const { x, y, width, height } = rect_;
  parts.push(
    `<rect x="${px(x)}" y="${px(y)}" width="${px(width)}" height="${px(height)}" ` +
    `fill="none" stroke="#333" stroke-width="1"/>`,
  );
  for (const tick of yTicks) {
    const ty = yScale.at(tick.value);
    parts.push(line(x, ty, x + width, ty, "#ddd"));
    parts.push(line(x - 4, ty, x, ty, "#333"));
    parts.push(text(x - 7, ty + 4, tick.label, 11, "end"));
  }
  for (const tick of xTicks) {
    const tx = xScale.at(tick.value);
    parts.push(line(tx, y + height, tx, y + height + 4, "#333"));
    parts.push(text(tx, y + height + 16, tick.label, 11));
  }
  if (xLabel) {
    parts.push(text(x + width / 2, y + height + 34, xLabel, 12));
  }
  if (yLabel) {
    const cx = x - 38;
    const cy = y + height / 2;
    parts.push(text(cx, cy, yLabel, 12, "middle",
      `transform="rotate(-90 ${px(cx)} ${px(cy)})"`));
  }
  return parts.join("\n");
}

/** Color-keyed legend box anchored at its top-left corner. */
export function legend(x: number, y: number,
                       entries: Array<{ label: string; color: string; dash?: string }>): string {
  const lineHeight = 17;
  const boxWidth = Math.max(...entries.map((e) => e.label.length)) * 6.8 + 38;
  const boxHeight = entries.length * lineHeight + 8;
  const parts = [rect(x, y, boxWidth, boxHeight, "white", "#999")];
  entries.forEach((entry, i) => {
    const ly = y + 12 + i * lineHeight;
    parts.push(line(x + 6, ly, x + 26, ly, entry.color, 2, entry.dash ?? ""));
    parts.push(text(x + 31, ly + 4, entry.label, 11, "start"));
  });
  return parts.join("\n");
}
