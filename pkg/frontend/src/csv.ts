import { readFileSync } from "node:fs";
import Papa from "papaparse";

/** An input file lacks the columns (or values) a figure needs. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface Table {
  path: string;
  columns: string[];
  rows: Record<string, string>[];
}

export function readTable(path: string): Table {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new SchemaError(`${path}: malformed CSV (${first.message})`);
  }
  return { path, columns: parsed.meta.fields ?? [], rows: parsed.data };
}

export function requireColumns(table: Table, needed: string[]): void {
  const missing = needed.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    const have = table.columns.join(", ") || "none";
    throw new SchemaError(
      `${table.path}: missing column(s) ${missing.join(", ")} (have: ${have})`,
    );
  }
}

/** Column as floats; any non-numeric cell is a schema error, not a NaN. */
export function numbers(table: Table, column: string): number[] {
  requireColumns(table, [column]);
  return table.rows.map((row, i) => {
    const value = Number(row[column]);
    if (!Number.isFinite(value)) {
      throw new SchemaError(
        `${table.path}: row ${i + 1}, column ${column} is not numeric: ${JSON.stringify(row[column])}`,
      );
    }
    return value;
  });
}

export function strings(table: Table, column: string): string[] {
  requireColumns(table, [column]);
  return table.rows.map((row) => row[column] ?? "");
}
