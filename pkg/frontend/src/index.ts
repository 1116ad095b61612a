export { column, parseCsv, readCsv, SUPPORTED_SCHEMA_VERSIONS, Table } from "./csv";
export { MissingColumn, MissingData, SchemaMismatch } from "./errors";
export { fitLine, fitLogLog, matchesTwoDecimals } from "./fit";
export { PlotKind, PlotSpec, render, RenderResult } from "./render";
