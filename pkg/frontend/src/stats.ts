/** Order statistics used for seed aggregation. */

/** Median of the standard middle-of-sorted convention. */
export function median(values: number[]): number {
  if (values.length === 0) {
    throw new Error("median of an empty sample");
  }
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 === 0
    ? (sorted[mid - 1] + sorted[mid]) / 2
    : sorted[mid];
}

/**
 * Quantile with linear interpolation between order statistics
 * (the common "linear" convention: position p * (n - 1)).
 */
export function quantile(values: number[], p: number): number {
  if (values.length === 0) {
    throw new Error("quantile of an empty sample");
  }
  if (p < 0 || p > 1) {
    throw new Error("quantile level must lie in [0, 1]");
  }
  const sorted = [...values].sort((a, b) => a - b);
  const pos = p * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) {
    return sorted[lo];
  }
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

export interface Band {
  median: number;
  q1: number;
  q3: number;
}

/** Median plus interquartile band of one sample. */
export function iqrBand(values: number[]): Band {
  return {
    median: median(values),
    q1: quantile(values, 0.25),
    q3: quantile(values, 0.75),
  };
}
