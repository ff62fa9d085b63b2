export { CsvTable, SchemaError, parseCsv, requireColumns } from "./csv.js";
export {
  FigureData,
  FigureKind,
  Panel,
  Point,
  Series,
  buildDnaBars,
  buildErrorCurves,
  buildFigure,
} from "./figures.js";
export { mean, median, percentile, std } from "./stats.js";
export { RenderOptions, renderSvg } from "./svg.js";
export { run } from "./cli.js";
