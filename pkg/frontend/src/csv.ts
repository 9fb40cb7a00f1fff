import { readFileSync } from "fs";
import Papa from "papaparse";

/** Column order of the simulator's result CSVs; reference tables use the
 * same header with only the rate columns filled in. */
export const COLUMNS = [
  "ebn0_db",
  "layer",
  "frames",
  "frame_errors",
  "fer",
  "fer_ci_lo",
  "fer_ci_hi",
  "bit_errors",
  "bits",
  "ber",
  "avg_iters",
  "metric_evals",
  "seconds",
  "seed",
] as const;

export interface ResultRow {
  ebn0_db: number;
  layer: string;
  fer: number | null;
  ber: number | null;
}

export class SchemaError extends Error {}

function parseCell(
  path: string,
  line: number,
  column: string,
  raw: string,
): number | null {
  if (raw === "") {
    return null;
  }
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new SchemaError(
      `${path} line ${line}, column ${column}: not a number: "${raw}"`,
    );
  }
  return value;
}

/** Read one result CSV, checking the header column by column. */
export function readResultCsv(path: string): ResultRow[] {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  const got = parsed.meta.fields ?? [];
  const missing = COLUMNS.filter((c) => !got.includes(c));
  const extra = got.filter((c) => !(COLUMNS as readonly string[]).includes(c));
  if (missing.length > 0 || extra.length > 0) {
    const parts = [];
    if (missing.length > 0) parts.push(`missing column(s) ${missing.join(", ")}`);
    if (extra.length > 0) parts.push(`unexpected column(s) ${extra.join(", ")}`);
    throw new SchemaError(`${path}: ${parts.join("; ")}`);
  }
  return parsed.data.map((record, i) => {
    const line = i + 2;
    const ebn0 = parseCell(path, line, "ebn0_db", record.ebn0_db);
    if (ebn0 === null) {
      throw new SchemaError(`${path} line ${line}, column ebn0_db: empty`);
    }
    if (record.layer === "") {
      throw new SchemaError(`${path} line ${line}, column layer: empty`);
    }
    return {
      ebn0_db: ebn0,
      layer: record.layer,
      fer: parseCell(path, line, "fer", record.fer),
      ber: parseCell(path, line, "ber", record.ber),
    };
  });
}
