import { basename } from "node:path";
import { numbers, readTable, requireColumns, strings, Table } from "./csv.js";
import { agreeToSigDigits, fitNlogN, toSigDigits } from "./fit.js";
import { readPgm, toDataUri } from "./pgm.js";
import {
  AxisTick,
  decadeTicks,
  document,
  circle,
  fmtTick,
  legend,
  linearTicks,
  LinearScale,
  LogScale,
  panelFrame,
  polyline,
  px,
  rect,
  text,
} from "./svg.js";

export type FigureKind = "bars" | "scaling" | "convergence" | "grid";

export const FIGURE_KINDS: FigureKind[] = ["bars", "scaling", "convergence", "grid"];

export interface FigureSpec {
  kind: FigureKind;
  /** CSV paths, except `grid` which takes PGM paths. */
  inputs: string[];
  title?: string;
  xLabel?: string;
  yLabel?: string;
}

const PALETTE = ["#4878a8", "#e0883a", "#6aa56a", "#b65f5f", "#8a7bb5"];

function fmtDecade(value: number): string {
  const e = Math.round(Math.log10(value));
  return e >= -2 && e <= 2 ? fmtTick(value) : `1e${e}`;
}

function titleLine(width: number, title?: string): string {
  return title ? text(width / 2, 26, title, 15) : "";
}

/** Two bar panels from one CSV: a linear-axis one and a log-axis one.
 * Row labels come from the first column, bar heights from the other two. */
function barsFigure(table: Table, spec: FigureSpec): string {
  requireColumns(table, ["arch", "latency_ms", "bandwidth_MBps"]);
  const archs = strings(table, "arch");
  const panels: Array<{ column: string; log: boolean }> = [
    { column: "latency_ms", log: false },
    { column: "bandwidth_MBps", log: true },
  ];
  const width = 880;
  const height = 460;
  const plotW = 330;
  const plotH = 320;
  const parts: string[] = [titleLine(width, spec.title)];
  panels.forEach((panel, p) => {
    const values = numbers(table, panel.column);
    const x0 = p === 0 ? 80 : 500;
    const y0 = 60;
    let yScale: LinearScale | LogScale;
    let yTicks: AxisTick[];
    let base: number;
    if (panel.log) {
      const positive = values.filter((v) => v > 0);
      const lo = positive.length ? 10 ** Math.floor(Math.log10(Math.min(...positive))) : 0.1;
      const hi = positive.length ? 10 ** Math.ceil(Math.log10(Math.max(...positive))) : 1;
      yScale = new LogScale(lo, hi === lo ? lo * 10 : hi, y0 + plotH, y0);
      yTicks = decadeTicks(lo, hi === lo ? lo * 10 : hi)
        .map((v) => ({ value: v, label: fmtDecade(v) }));
      base = lo;
    } else {
      const top = values.length ? Math.max(...values) * 1.1 : 1;
      yScale = new LinearScale(0, top, y0 + plotH, y0);
      yTicks = linearTicks(0, top).map((v) => ({ value: v, label: fmtTick(v) }));
      base = 0;
    }
    const band = plotW / Math.max(archs.length, 1);
    const xTicks = archs.map((name, i) => ({ value: i + 0.5, label: name }));
    const xScale = new LinearScale(0, Math.max(archs.length, 1), x0, x0 + plotW);
    parts.push(panelFrame({ x: x0, y: y0, width: plotW, height: plotH },
      xTicks.map((t) => ({ value: t.value, label: t.label })), xScale,
      yTicks, yScale, spec.xLabel ?? "arch", spec.yLabel ?? panel.column));
    values.forEach((value, i) => {
      if (panel.log && value <= 0) {
        return; // nothing to draw on a log axis
      }
      const barW = band * 0.55;
      const cx = xScale.at(i + 0.5);
      const top = yScale.at(value);
      const bottom = yScale.at(base);
      parts.push(rect(cx - barW / 2, top, barW, bottom - top,
        PALETTE[i % PALETTE.length]));
      parts.push(text(cx, top - 6, table.rows[i][panel.column], 11));
    });
    parts.push(text(x0 + plotW / 2, y0 - 12, panel.column, 13));
  });
  return document(width, height, parts.filter(Boolean).join("\n"));
}

export interface ScalingRender {
  svg: string;
  /** Coefficient refit from the timing rows; what the overlay draws. */
  refit: number | null;
  /** Coefficient recorded in the companion fit CSV, when one was given. */
  recorded: number | null;
}

/** Log-log runtime curve with the refit a*N*log2(N) overlay. An optional
 * second CSV carries the producer's recorded coefficient for cross-checking. */
export function scalingFigure(table: Table, fitTable: Table | null,
                              spec: FigureSpec): ScalingRender {
  requireColumns(table, ["n_pixels", "seconds"]);
  const n = numbers(table, "n_pixels");
  const seconds = numbers(table, "seconds");
  let recorded: number | null = null;
  if (fitTable) {
    requireColumns(fitTable, ["coefficient"]);
    const coeffs = numbers(fitTable, "coefficient");
    if (coeffs.length !== 1) {
      throw new RangeError(`${fitTable.path}: expected exactly one fit row`);
    }
    recorded = coeffs[0];
  }
  const width = 640;
  const height = 460;
  const x0 = 80;
  const y0 = 60;
  const plotW = 500;
  const plotH = 320;
  const xLo = n.length ? 10 ** Math.floor(Math.log10(Math.min(...n))) : 1e3;
  const xHi = n.length ? 10 ** Math.ceil(Math.log10(Math.max(...n))) : 1e6;
  const yLo = seconds.length ? 10 ** Math.floor(Math.log10(Math.min(...seconds))) : 1e-3;
  const yHi = seconds.length ? 10 ** Math.ceil(Math.log10(Math.max(...seconds))) : 1;
  const xScale = new LogScale(xLo, xHi, x0, x0 + plotW);
  const yScale = new LogScale(yLo, yHi, y0 + plotH, y0);
  const parts: string[] = [titleLine(width, spec.title)];
  parts.push(panelFrame({ x: x0, y: y0, width: plotW, height: plotH },
    decadeTicks(xLo, xHi).map((v) => ({ value: v, label: fmtDecade(v) })), xScale,
    decadeTicks(yLo, yHi).map((v) => ({ value: v, label: fmtDecade(v) })), yScale,
    spec.xLabel ?? "n_pixels", spec.yLabel ?? "seconds"));

  let refit: number | null = null;
  if (n.length > 0) {
    const pts: Array<[number, number]> = n.map((ni, i) =>
      [xScale.at(ni), yScale.at(seconds[i])]);
    parts.push(polyline(pts, PALETTE[0]));
    for (const [cx, cy] of pts) {
      parts.push(circle(cx, cy, 3.5, PALETTE[0]));
    }
    refit = fitNlogN(n, seconds).coefficient;
    const lo = Math.min(...n);
    const hi = Math.max(...n);
    const curve: Array<[number, number]> = [];
    for (let i = 0; i <= 60; i++) {
      const ni = lo * (hi / lo) ** (i / 60);
      curve.push([xScale.at(ni), yScale.at(refit * ni * Math.log2(ni))]);
    }
    parts.push(polyline(curve, "#d04545", 2, "6,4"));
    const fitLabel = `fit a*N*log2(N), a = ${toSigDigits(refit, 3)}` +
      (recorded !== null ? ` (recorded ${toSigDigits(recorded, 3)})` : "");
    parts.push(legend(x0 + 14, y0 + 12, [
      { label: "seconds (measured)", color: PALETTE[0] },
      { label: fitLabel, color: "#d04545", dash: "6,4" },
    ]));
  }
  return { svg: document(width, height, parts.filter(Boolean).join("\n")), refit, recorded };
}

/** Two accuracy-per-round curves with a legend named after the columns.
 * A header-only CSV still renders: empty axes, exit 0. */
function convergenceFigure(table: Table, spec: FigureSpec): string {
  requireColumns(table, ["round", "federated_acc", "centralized_acc"]);
  const rounds = numbers(table, "round");
  const series: Array<{ column: string; dash: string }> = [
    { column: "federated_acc", dash: "" },
    { column: "centralized_acc", dash: "6,3" },
  ];
  const width = 640;
  const height = 460;
  const x0 = 80;
  const y0 = 60;
  const plotW = 500;
  const plotH = 320;
  const xMax = rounds.length ? Math.max(...rounds) : 1;
  const xMin = rounds.length ? Math.min(1, Math.min(...rounds)) : 0;
  const xScale = new LinearScale(xMin, Math.max(xMax, xMin + 1), x0, x0 + plotW);
  const yScale = new LinearScale(0, 1, y0 + plotH, y0);
  const xTicks = linearTicks(xMin, Math.max(xMax, xMin + 1))
    .filter((v) => Number.isInteger(v))
    .map((v) => ({ value: v, label: fmtTick(v) }));
  const yTicks = [0, 0.2, 0.4, 0.6, 0.8, 1]
    .map((v) => ({ value: v, label: fmtTick(v) }));
  const parts: string[] = [titleLine(width, spec.title)];
  parts.push(panelFrame({ x: x0, y: y0, width: plotW, height: plotH },
    xTicks, xScale, yTicks, yScale,
    spec.xLabel ?? "round", spec.yLabel ?? "accuracy"));
  series.forEach((s, i) => {
    const values = numbers(table, s.column);
    if (values.length > 0) {
      const pts: Array<[number, number]> = rounds.map((r, j) =>
        [xScale.at(r), yScale.at(values[j])]);
      parts.push(polyline(pts, PALETTE[i], 2, s.dash));
      for (const [cx, cy] of pts) {
        parts.push(circle(cx, cy, 2.5, PALETTE[i]));
      }
    }
  });
  parts.push(legend(x0 + plotW - 160, y0 + plotH - 54, series.map((s, i) =>
    ({ label: s.column, color: PALETTE[i], dash: s.dash || undefined }))));
  return document(width, height, parts.filter(Boolean).join("\n"));
}

/** Grayscale image tiles (one per PGM input) captioned by file name. */
function gridFigure(paths: string[], spec: FigureSpec): string {
  const cell = 200;
  const captionH = 22;
  const pad = 16;
  const margin = 20;
  const topMargin = spec.title ? 44 : margin;
  const cols = Math.min(3, paths.length);
  const rows = Math.ceil(paths.length / cols);
  const width = 2 * margin + cols * cell + (cols - 1) * pad;
  const height = topMargin + rows * (cell + captionH) + (rows - 1) * pad + margin;
  const parts: string[] = [titleLine(width, spec.title)];
  paths.forEach((path, i) => {
    const col = i % cols;
    const row = Math.floor(i / cols);
    const x = margin + col * (cell + pad);
    const y = topMargin + row * (cell + captionH + pad);
    const img = readPgm(path);
    parts.push(`<image x="${px(x)}" y="${px(y)}" width="${cell}" height="${cell}" ` +
      `preserveAspectRatio="xMidYMid meet" image-rendering="pixelated" ` +
      `xlink:href="${toDataUri(img)}"/>`);
    parts.push(`<rect x="${px(x)}" y="${px(y)}" width="${cell}" height="${cell}" ` +
      `fill="none" stroke="#333"/>`);
    parts.push(text(x + cell / 2, y + cell + 15,
      basename(path).replace(/\.pgm$/i, ""), 12));
  });
  return document(width, height, parts.filter(Boolean).join("\n"));
}

function requireInputs(spec: FigureSpec, min: number, max: number): void {
  const n = spec.inputs.length;
  if (n < min || n > max) {
    const want = min === max ? `${min}` : `${min}..${max}`;
    throw new RangeError(`kind ${spec.kind} takes ${want} input file(s), got ${n}`);
  }
}

export function buildSvg(spec: FigureSpec): string {
  switch (spec.kind) {
    case "bars":
      requireInputs(spec, 1, 1);
      return barsFigure(readTable(spec.inputs[0]), spec);
    case "scaling": {
      requireInputs(spec, 1, 2);
      const fitTable = spec.inputs.length === 2 ? readTable(spec.inputs[1]) : null;
      return scalingFigure(readTable(spec.inputs[0]), fitTable, spec).svg;
    }
    case "convergence":
      requireInputs(spec, 1, 1);
      return convergenceFigure(readTable(spec.inputs[0]), spec);
    case "grid":
      requireInputs(spec, 1, 12);
      return gridFigure(spec.inputs, spec);
  }
}

/** Refit-vs-recorded check for the scaling kind: the overlay coefficient
 * refit from the timing rows must agree with the producer's recorded one. */
export function scalingCoefficientsAgree(timingPath: string, fitPath: string): boolean {
  const render = scalingFigure(readTable(timingPath), readTable(fitPath),
    { kind: "scaling", inputs: [timingPath, fitPath] });
  return render.refit !== null && render.recorded !== null &&
    agreeToSigDigits(render.refit, render.recorded, 3);
}
