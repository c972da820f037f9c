/**
 * Minimal CSV reader for the experiment result schema.
 *
 * The result files are plain comma-separated values with a header row,
 * '.' decimal separators and no quoting, so no full CSV dialect handling
 * is needed. Ragged rows and empty files are rejected loudly.
 */

export interface CsvTable {
  header: string[];
  rows: Record<string, string>[];
}

export function parseCsv(text: string): CsvTable {
  const lines = text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV: no header row");
  }
  const header = lines[0].split(",").map((h) => h.trim());
  if (header.some((name) => name.length === 0)) {
    throw new Error("malformed CSV header");
  }
  const rows: Record<string, string>[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== header.length) {
      throw new Error(
        `row ${i + 1} has ${cells.length} cells, expected ${header.length}`,
      );
    }
    const row: Record<string, string> = {};
    header.forEach((name, j) => {
      row[name] = cells[j].trim();
    });
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new Error("empty CSV: header but no data rows");
  }
  return { header, rows };
}

export function requireColumns(table: CsvTable, columns: string[]): void {
  const missing = columns.filter((c) => !table.header.includes(c));
  if (missing.length > 0) {
    throw new Error(`CSV is missing required columns: ${missing.join(", ")}`);
  }
}
