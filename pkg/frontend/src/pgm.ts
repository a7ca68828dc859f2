import { readFileSync } from "node:fs";
import { PNG } from "pngjs";
import { SchemaError } from "./csv.js";

/** Grayscale raster decoded from a binary PGM (P5) file. */
export interface GrayImage {
  width: number;
  height: number;
  maxval: number;
  /** Row-major samples in 0..maxval. */
  samples: Uint32Array;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d;
}

// PGM headers are whitespace-separated tokens with '#' comments to end of line.
function nextToken(data: Buffer, pos: number, path: string): { token: string; end: number } {
  let i = pos;
  for (;;) {
    while (i < data.length && isSpace(data[i])) i++;
    if (i < data.length && data[i] === 0x23) {
      while (i < data.length && data[i] !== 0x0a) i++;
      continue;
    }
    break;
  }
  let j = i;
  while (j < data.length && !isSpace(data[j])) j++;
  if (i === j) {
    throw new SchemaError(`${path}: truncated PGM header`);
  }
  return { token: data.toString("ascii", i, j), end: j };
}

export function readPgm(path: string): GrayImage {
  const data = readFileSync(path);
  const magic = nextToken(data, 0, path);
  if (magic.token !== "P5") {
    throw new SchemaError(`${path}: not a binary PGM (magic ${JSON.stringify(magic.token)})`);
  }
  const w = nextToken(data, magic.end, path);
  const h = nextToken(data, w.end, path);
  const m = nextToken(data, h.end, path);
  const width = Number(w.token);
  const height = Number(h.token);
  const maxval = Number(m.token);
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 1 || height < 1) {
    throw new SchemaError(`${path}: bad PGM dimensions ${w.token} x ${h.token}`);
  }
  if (!Number.isInteger(maxval) || maxval < 1 || maxval > 65535) {
    throw new SchemaError(`${path}: bad PGM maxval ${m.token}`);
  }
  // Exactly one whitespace byte separates the header from the raster.
  const start = m.end + 1;
  const perSample = maxval > 255 ? 2 : 1;
  const expected = width * height * perSample;
  if (data.length - start < expected) {
    throw new SchemaError(
      `${path}: PGM raster truncated (${data.length - start} of ${expected} bytes)`,
    );
  }
  const samples = new Uint32Array(width * height);
  if (perSample === 1) {
    for (let i = 0; i < samples.length; i++) samples[i] = data[start + i];
  } else {
    for (let i = 0; i < samples.length; i++) {
      samples[i] = data.readUInt16BE(start + 2 * i);
    }
  }
  return { width, height, maxval, samples };
}

/** Lossless-for-display grayscale PNG of the raster, scaled to 8 bits. */
export function toPng(img: GrayImage): Buffer {
  const png = new PNG({ width: img.width, height: img.height });
  for (let i = 0; i < img.samples.length; i++) {
    const v = Math.round((img.samples[i] / img.maxval) * 255);
    png.data[4 * i] = v;
    png.data[4 * i + 1] = v;
    png.data[4 * i + 2] = v;
    png.data[4 * i + 3] = 255;
  }
  return PNG.sync.write(png);
}

export function toDataUri(img: GrayImage): string {
  return `data:image/png;base64,${toPng(img).toString("base64")}`;
}
