import { readFileSync } from "node:fs";
import Papa from "papaparse";

export const EXPECTED_SCHEMA = "sync-sim-log-v1";

/** Raised when the CSV does not carry the expected schema or columns. */
export class SchemaError extends Error {}

export interface LogTable {
  schema: string;
  columns: string[];
  /** column name -> column values, one entry per record */
  data: Map<string, Float64Array>;
  rows: number;
}

/**
 * Parse a simulation log CSV.
 *
 * The first line is the column header; it may carry a trailing
 * " # <schema>" tag, which is validated against the expected version.
 */
export function parseLogCsv(path: string): LogTable {
  const text = readFileSync(path, "utf-8");
  return parseLogText(text);
}

export function parseLogText(text: string): LogTable {
  const firstBreak = text.indexOf("\n");
  const headerLine = (firstBreak < 0 ? text : text.slice(0, firstBreak)).trim();
  if (headerLine.length === 0) {
    throw new SchemaError("empty CSV: no header line");
  }
  const [headerPart, ...comment] = headerLine.split(" # ");
  const schema = comment.join(" # ").trim();
  if (schema !== EXPECTED_SCHEMA) {
    throw new SchemaError(
      `schema mismatch: expected "${EXPECTED_SCHEMA}", found "${schema || "none"}"`);
  }
  const columns = headerPart.split(",").map((c) => c.trim());
  if (columns.some((c) => c.length === 0)) {
    throw new SchemaError("header contains an empty column name");
  }

  const body = (firstBreak < 0 ? "" : text.slice(firstBreak + 1)).trim();
  let rows: number[][] = [];
  if (body.length > 0) {
    const parsed = Papa.parse<number[]>(body, {
      dynamicTyping: true,
      skipEmptyLines: true,
      delimiter: ",",
    });
    if (parsed.errors.length > 0) {
      const e = parsed.errors[0];
      throw new SchemaError(`CSV parse error at row ${e.row}: ${e.message}`);
    }
    rows = parsed.data;
  }
  const data = new Map<string, Float64Array>();
  for (let j = 0; j < columns.length; j++) {
    data.set(columns[j], new Float64Array(rows.length));
  }
  rows.forEach((row, i) => {
    if (row.length !== columns.length) {
      throw new SchemaError(
        `row ${i + 2} has ${row.length} fields, expected ${columns.length}`);
    }
    for (let j = 0; j < columns.length; j++) {
      const v = row[j];
      if (typeof v !== "number" || !Number.isFinite(v)) {
        throw new SchemaError(`row ${i + 2}, column "${columns[j]}": not a finite number`);
      }
      data.get(columns[j])![i] = v;
    }
  });
  return { schema, columns, data, rows: rows.length };
}

/** Fetch a column, raising a SchemaError that names what is missing. */
export function requireColumn(table: LogTable, name: string): Float64Array {
  const col = table.data.get(name);
  if (col === undefined) {
    throw new SchemaError(`missing required column "${name}"`);
  }
  return col;
}
