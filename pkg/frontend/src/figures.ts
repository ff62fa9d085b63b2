/** Aggregation of the experiment CSVs into plottable panels.
 *
 * The same structures are serialised verbatim into the figure's JSON sidecar,
 * so every plotted point is testable without touching the image.
 */

import { CsvTable, requireColumns } from "./csv.js";
import { mean, median, percentile, std } from "./stats.js";

export type FigureKind = "error_curves" | "dna_bars";

export interface Point {
  n: number;
  y: number;
  lo: number;
  hi: number;
  count: number;
}

export interface Series {
  key: string;
  points: Point[];
}

export interface Panel {
  key: string;
  series: Series[];
}

export interface FigureData {
  kind: FigureKind;
  yLabel: string;
  panels: Panel[];
  excludedZeroRows: number;
  excludedErrorRows: number;
}

const EXP1_REQUIRED = ["experiment", "kernel", "estimator", "N", "Q", "abs_error"];
const DNA_REQUIRED = ["pair", "N", "estimator", "diff"];

function groupBy<T>(items: T[], keyOf: (item: T) => string): Map<string, T[]> {
  const out = new Map<string, T[]>();
  for (const item of items) {
    const key = keyOf(item);
    const bucket = out.get(key);
    if (bucket) bucket.push(item);
    else out.set(key, [item]);
  }
  return out;
}

function sortedKeys<T>(groups: Map<string, T[]>): string[] {
  return [...groups.keys()].sort();
}

/** Median and quartiles of ln(abs_error) per (kernel+experiment, estimator+Q, N). */
export function buildErrorCurves(table: CsvTable): FigureData {
  requireColumns(table, EXP1_REQUIRED);
  const hasError = table.columns.includes("error");
  let excludedZero = 0;
  let excludedError = 0;
  const usable: { panel: string; series: string; n: number; logErr: number }[] = [];
  for (const row of table.rows) {
    if (hasError && row["error"] !== "") {
      excludedError += 1;
      continue;
    }
    const absError = Number(row["abs_error"]);
    if (row["abs_error"] === "" || Number.isNaN(absError)) {
      excludedError += 1;
      continue;
    }
    if (absError <= 0) {
      excludedZero += 1;
      continue;
    }
    usable.push({
      panel: `${row["kernel"]} | ${row["experiment"]}`,
      series: `${row["estimator"]} Q=${row["Q"]}`,
      n: Number(row["N"]),
      logErr: Math.log(absError),
    });
  }
  const panels: Panel[] = [];
  const byPanel = groupBy(usable, (r) => r.panel);
  for (const panelKey of sortedKeys(byPanel)) {
    const bySeries = groupBy(byPanel.get(panelKey)!, (r) => r.series);
    const series: Series[] = [];
    for (const seriesKey of sortedKeys(bySeries)) {
      const byN = groupBy(bySeries.get(seriesKey)!, (r) => String(r.n));
      const points = [...byN.values()]
        .map((rows) => {
          const logs = rows.map((r) => r.logErr);
          return {
            n: rows[0].n,
            y: median(logs),
            lo: percentile(logs, 0.25),
            hi: percentile(logs, 0.75),
            count: logs.length,
          };
        })
        .sort((a, b) => a.n - b.n);
      series.push({ key: seriesKey, points });
    }
    panels.push({ key: panelKey, series });
  }
  return {
    kind: "error_curves",
    yLabel: "ln |estimate - true MMD| (median, quartiles)",
    panels,
    excludedZeroRows: excludedZero,
    excludedErrorRows: excludedError,
  };
}

/** Mean and +-1 std of (statistic - quantile) per (pair, estimator, N). */
export function buildDnaBars(table: CsvTable): FigureData {
  requireColumns(table, DNA_REQUIRED);
  const hasError = table.columns.includes("error");
  let excludedError = 0;
  const usable: { panel: string; series: string; n: number; diff: number }[] = [];
  for (const row of table.rows) {
    if (hasError && row["error"] !== "") {
      excludedError += 1;
      continue;
    }
    const diff = Number(row["diff"]);
    if (row["diff"] === "" || Number.isNaN(diff)) {
      excludedError += 1;
      continue;
    }
    usable.push({
      panel: row["pair"],
      series: row["estimator"],
      n: Number(row["N"]),
      diff,
    });
  }
  const panels: Panel[] = [];
  const byPanel = groupBy(usable, (r) => r.panel);
  for (const panelKey of sortedKeys(byPanel)) {
    const bySeries = groupBy(byPanel.get(panelKey)!, (r) => r.series);
    const series: Series[] = [];
    for (const seriesKey of sortedKeys(bySeries)) {
      const byN = groupBy(bySeries.get(seriesKey)!, (r) => String(r.n));
      const points = [...byN.values()]
        .map((rows) => {
          const diffs = rows.map((r) => r.diff);
          const m = mean(diffs);
          const s = std(diffs);
          return { n: rows[0].n, y: m, lo: m - s, hi: m + s, count: diffs.length };
        })
        .sort((a, b) => a.n - b.n);
      series.push({ key: seriesKey, points });
    }
    panels.push({ key: panelKey, series });
  }
  return {
    kind: "dna_bars",
    yLabel: "statistic - null quantile (mean +- std)",
    panels,
    excludedZeroRows: 0,
    excludedErrorRows: excludedError,
  };
}

export function buildFigure(kind: FigureKind, table: CsvTable): FigureData {
  return kind === "error_curves" ? buildErrorCurves(table) : buildDnaBars(table);
}
