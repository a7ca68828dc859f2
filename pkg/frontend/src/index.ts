export { readTable, requireColumns, numbers, strings, SchemaError } from "./csv.js";
export type { Table } from "./csv.js";
export { fitNlogN, toSigDigits, agreeToSigDigits } from "./fit.js";
export type { ScalingFit } from "./fit.js";
export { readPgm, toPng, toDataUri } from "./pgm.js";
export type { GrayImage } from "./pgm.js";
export { buildSvg, scalingFigure, scalingCoefficientsAgree, FIGURE_KINDS } from "./figures.js";
export type { FigureKind, FigureSpec, ScalingRender } from "./figures.js";
export { svgToPng } from "./render.js";
export { runCli } from "./cli.js";
