/**
 * Parsing and validation for sweep result CSVs.
 *
 * The expected schema is the one the simulation harness writes: twelve fixed
 * columns, in order, starting with the decoder name and ending with the mean
 * iteration count. Files may append extra columns (they are carried through
 * untouched and ignored by the plotter), but the twelve known columns must
 * lead the header verbatim.
 */

/** Columns every input must start with, in this exact order. */
export const REQUIRED_COLUMNS = [
  "decoder",
  "M",
  "channel",
  "ebn0_db",
  "frames",
  "bits",
  "bit_errors",
  "frame_errors",
  "ber",
  "fer",
  "elapsed_s",
  "iters_mean",
] as const;

/** The input file does not follow the sweep CSV schema. */
export class SchemaMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatch";
  }
}

/** The input carries no data rows at all. */
export class EmptyInput extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EmptyInput";
  }
}

/** One measured point from a sweep. */
export interface BerRow {
  decoder: string;
  M: number;
  channel: string;
  ebn0Db: number;
  frames: number;
  bits: number;
  bitErrors: number;
  frameErrors: number;
  ber: number;
  fer: number;
  elapsedS: number;
  itersMean: number;
  /** Values of any columns beyond the required twelve, keyed by header name. */
  extra: Record<string, string>;
}

function numeric(field: string, raw: string, where: string): number {
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new SchemaMismatch(`${where}: column ${field} has non-numeric value ${JSON.stringify(raw)}`);
  }
  return value;
}

/**
 * Parse one CSV text into rows. `source` names the input in error messages.
 *
 * Throws SchemaMismatch when the header or any row deviates from the schema
 * (including a negative bit error rate), and EmptyInput when the file has a
 * valid header but no data rows.
 */
export function parseBerCsv(text: string, source = "input"): BerRow[] {
  const lines = text.split(/\r?\n/).filter((ln) => ln.trim() !== "");
  if (lines.length === 0) {
    throw new EmptyInput(`${source}: file is empty`);
  }
  const header = (lines[0] ?? "").split(",").map((h) => h.trim());
  for (let i = 0; i < REQUIRED_COLUMNS.length; i++) {
    if (header[i] !== REQUIRED_COLUMNS[i]) {
      throw new SchemaMismatch(
        `${source}: header column ${i + 1} is ${JSON.stringify(header[i] ?? "")}, expected ${JSON.stringify(
          REQUIRED_COLUMNS[i],
        )}`,
      );
    }
  }
  const body = lines.slice(1);
  if (body.length === 0) {
    throw new EmptyInput(`${source}: no data rows`);
  }

  const rows: BerRow[] = [];
  body.forEach((line, i) => {
    const where = `${source}: row ${i + 1}`;
    const f = line.split(",").map((v) => v.trim());
    if (f.length !== header.length) {
      throw new SchemaMismatch(`${where}: has ${f.length} fields, header has ${header.length}`);
    }
    const row: BerRow = {
      decoder: f[0]!,
      M: numeric("M", f[1]!, where),
      channel: f[2]!,
      ebn0Db: numeric("ebn0_db", f[3]!, where),
      frames: numeric("frames", f[4]!, where),
      bits: numeric("bits", f[5]!, where),
      bitErrors: numeric("bit_errors", f[6]!, where),
      frameErrors: numeric("frame_errors", f[7]!, where),
      ber: numeric("ber", f[8]!, where),
      fer: numeric("fer", f[9]!, where),
      elapsedS: numeric("elapsed_s", f[10]!, where),
      itersMean: numeric("iters_mean", f[11]!, where),
      extra: {},
    };
    if (row.ber < 0) {
      throw new SchemaMismatch(`${where}: negative bit error rate ${row.ber}`);
    }
    for (let c = REQUIRED_COLUMNS.length; c < header.length; c++) {
      row.extra[header[c]!] = f[c]!;
    }
    rows.push(row);
  });
  return rows;
}
