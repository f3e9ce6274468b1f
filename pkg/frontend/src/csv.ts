/** Strict reader for the simulation CLI's CSV output. */

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export class CsvError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new CsvError("CSV is empty");
  }
  const columns = lines[0].split(",");
  if (lines.length === 1) {
    throw new CsvError("CSV has a header but no data rows");
  }
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(
        `row ${i + 1} has ${cells.length} cells, header has ${columns.length}`
      );
    }
    return Object.fromEntries(columns.map((c, k) => [c, cells[k]]));
  });
  return { columns, rows };
}

/** Numeric view of one column; rejects missing columns and non-finite cells. */
export function numeric(table: Table, column: string): number[] {
  if (!table.columns.includes(column)) {
    throw new CsvError(`missing column ${column}; have ${table.columns.join(", ")}`);
  }
  return table.rows.map((row, i) => {
    const value = Number(row[column]);
    if (!Number.isFinite(value)) {
      throw new CsvError(`row ${i + 1}, column ${column}: not a number: ${row[column]}`);
    }
    return value;
  });
}

export function requireColumns(table: Table, needed: string[]): void {
  for (const column of needed) {
    if (!table.columns.includes(column)) {
      throw new CsvError(`missing column ${column}; have ${table.columns.join(", ")}`);
    }
  }
}
