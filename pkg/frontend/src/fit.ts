export interface ScalingFit {
  coefficient: number;
  rSquared: number;
}

/**
 * Least-squares fit of t = a * N * log2(N) through the origin.
 * R^2 is measured against the mean-only model, so a flat line scores 0.
 */
export function fitNlogN(nPixels: number[], seconds: number[]): ScalingFit {
  if (nPixels.length !== seconds.length || nPixels.length === 0) {
    throw new RangeError("fit needs matching, non-empty samples");
  }
  const x = nPixels.map((n) => n * Math.log2(n));
  let xt = 0;
  let xx = 0;
  for (let i = 0; i < x.length; i++) {
    xt += x[i] * seconds[i];
    xx += x[i] * x[i];
  }
  const a = xt / xx;
  const mean = seconds.reduce((s, t) => s + t, 0) / seconds.length;
  let ssRes = 0;
  let ssTot = 0;
  for (let i = 0; i < x.length; i++) {
    ssRes += (seconds[i] - a * x[i]) ** 2;
    ssTot += (seconds[i] - mean) ** 2;
  }
  return { coefficient: a, rSquared: ssTot > 0 ? 1 - ssRes / ssTot : 1 };
}

export function toSigDigits(value: number, digits: number): string {
  return value.toPrecision(digits);
}

/**
 * True when both values agree to `digits` significant digits: either they
 * print identically at that precision, or they differ by less than half a
 * unit in the last kept digit (guards against rounding-boundary flicker).
 */
export function agreeToSigDigits(a: number, b: number, digits: number): boolean {
  if (Number(a.toPrecision(digits)) === Number(b.toPrecision(digits))) {
    return true;
  }
  const scale = Math.max(Math.abs(a), Math.abs(b));
  return scale > 0 && Math.abs(a - b) / scale < 0.5 * 10 ** (1 - digits);
}
