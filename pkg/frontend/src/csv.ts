/** Minimal CSV reader for the experiment outputs (RFC-4180 quoting). */

export interface CsvTable {
  columns: string[];
  rows: Record<string, string>[];
}

export class SchemaError extends Error {
  constructor(
    message: string,
    readonly missing: string[],
    readonly found: string[],
  ) {
    super(message);
    this.name = "SchemaError";
  }
}

export function parseCsv(text: string): CsvTable {
  const records: string[][] = [];
  let field = "";
  let record: string[] = [];
  let inQuotes = false;
  let i = 0;
  const pushField = () => {
    record.push(field);
    field = "";
  };
  const pushRecord = () => {
    pushField();
    records.push(record);
    record = [];
  };
  while (i < text.length) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i += 1;
        continue;
      }
      field += ch;
      i += 1;
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      i += 1;
    } else if (ch === ",") {
      pushField();
      i += 1;
    } else if (ch === "\n") {
      pushRecord();
      i += 1;
    } else if (ch === "\r") {
      if (text[i + 1] === "\n") i += 1;
      pushRecord();
      i += 1;
    } else {
      field += ch;
      i += 1;
    }
  }
  if (field.length > 0 || record.length > 0) pushRecord();
  if (records.length === 0) return { columns: [], rows: [] };

  const columns = records[0];
  const rows = records.slice(1).map((rec) => {
    const row: Record<string, string> = {};
    columns.forEach((col, idx) => {
      row[col] = rec[idx] ?? "";
    });
    return row;
  });
  return { columns, rows };
}

/** Throw a SchemaError naming the column diff when any required column is absent. */
export function requireColumns(table: CsvTable, required: string[]): void {
  const missing = required.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `missing columns [${missing.join(", ")}]; file has [${table.columns.join(", ")}]`,
      missing,
      table.columns,
    );
  }
}
