/** Order statistics and moments used by the figure aggregations. */

export function median(values: number[]): number {
  if (values.length === 0) throw new Error("median of an empty list");
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 === 1 ? sorted[mid] : (sorted[mid - 1] + sorted[mid]) / 2;
}

/** Linearly interpolated percentile (rank (n-1)p), p in [0, 1]. */
export function percentile(values: number[], p: number): number {
  if (values.length === 0) throw new Error("percentile of an empty list");
  if (p < 0 || p > 1) throw new Error("percentile level must lie in [0, 1]");
  const sorted = [...values].sort((a, b) => a - b);
  const rank = (sorted.length - 1) * p;
  const lo = Math.floor(rank);
  const hi = Math.ceil(rank);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (rank - lo) * (sorted[hi] - sorted[lo]);
}

export function mean(values: number[]): number {
  if (values.length === 0) throw new Error("mean of an empty list");
  return values.reduce((acc, v) => acc + v, 0) / values.length;
}

/** Population standard deviation. */
export function std(values: number[]): number {
  const m = mean(values);
  return Math.sqrt(mean(values.map((v) => (v - m) * (v - m))));
}
