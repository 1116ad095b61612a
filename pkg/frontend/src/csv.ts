/**
 * Reader for the experiment CSV format: leading "# key=value" comment lines
 * (schema_version, config_hash), one header row, numeric cells.
 */

import { readFileSync } from "fs";
import { MissingColumn, SchemaMismatch } from "./errors";

export const SUPPORTED_SCHEMA_VERSIONS = [1];

export interface Table {
  schemaVersion: number;
  configHash: string;
  columns: string[];
  rows: number[][];
}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  const meta: Record<string, string> = {};
  let i = 0;
  while (i < lines.length && lines[i].startsWith("#")) {
    const m = lines[i].slice(1).trim().match(/^(\w+)=(.*)$/);
    if (m) meta[m[1]] = m[2];
    i += 1;
  }
  const version = Number(meta["schema_version"]);
  if (!SUPPORTED_SCHEMA_VERSIONS.includes(version)) {
    throw new SchemaMismatch(
      `schema_version ${meta["schema_version"] ?? "(absent)"} not supported`,
    );
  }
  if (i >= lines.length) {
    throw new SchemaMismatch("no header row");
  }
  const columns = lines[i].split(",").map((c) => c.trim());
  const rows: number[][] = [];
  for (let k = i + 1; k < lines.length; k++) {
    rows.push(lines[k].split(",").map(Number));
  }
  return {
    schemaVersion: version,
    configHash: meta["config_hash"] ?? "",
    columns,
    rows,
  };
}

export function readCsv(path: string): Table {
  return parseCsv(readFileSync(path, "utf8"));
}

/** Column values by name; throws MissingColumn when absent. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new MissingColumn(`column "${name}" not in [${table.columns}]`);
  }
  return table.rows.map((r) => r[idx]);
}
