/**
 * Reader for the simulator's CSV dialect.
 *
 * Files carry `# key = value` metadata lines (anywhere, typically a leading
 * block and sometimes a trailing certificate block), then one header row,
 * then numeric data rows in scientific notation.
 */

export interface CsvTable {
  /** column names from the header row, in file order */
  columns: string[];
  /** one entry per data row; row[i] aligns with columns[i] */
  rows: number[][];
  /** `# key = value` lines, first occurrence wins */
  metadata: Record<string, string>;
}

export function parseCsv(text: string): CsvTable {
  const columns: string[] = [];
  const rows: number[][] = [];
  const metadata: Record<string, string> = {};
  let haveHeader = false;

  for (const rawLine of text.split("\n")) {
    const line = rawLine.trim();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      const body = line.replace(/^#\s*/, "");
      const eq = body.indexOf("=");
      if (eq > 0) {
        const key = body.slice(0, eq).trim();
        if (!(key in metadata)) metadata[key] = body.slice(eq + 1).trim();
      }
      continue;
    }
    if (!haveHeader) {
      columns.push(...line.split(",").map((c) => c.trim()));
      haveHeader = true;
      continue;
    }
    const values = line.split(",").map((c) => {
      const v = Number(c);
      if (!Number.isFinite(v)) {
        throw new Error(`non-numeric cell ${JSON.stringify(c)}`);
      }
      return v;
    });
    if (values.length !== columns.length) {
      throw new Error(
        `row has ${values.length} cells, header has ${columns.length}`,
      );
    }
    rows.push(values);
  }
  if (!haveHeader) throw new Error("no header row found");
  return { columns, rows, metadata };
}

/** Extract one column by name as a plain array. */
export function column(table: CsvTable, name: string): number[] {
  const i = table.columns.indexOf(name);
  if (i < 0) {
    throw new Error(
      `no column ${JSON.stringify(name)}; have ${table.columns.join(", ")}`,
    );
  }
  return table.rows.map((r) => r[i]);
}

/** Column names matching a prefix, in file order (e.g. the T_p* family). */
export function columnsWithPrefix(table: CsvTable, prefix: string): string[] {
  return table.columns.filter((c) => c.startsWith(prefix));
}
