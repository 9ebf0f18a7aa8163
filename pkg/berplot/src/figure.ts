/**
 * SVG rendering of BER-vs-Eb/N0 comparison figures.
 *
 * One curve per (decoder, M, channel) group on a logarithmic y axis, with a
 * marker at every measured point. Points with zero measured errors are drawn
 * as open markers at a configurable display floor, and a footnote says so.
 * Output depends only on the rows and options — no timestamps, locales, or
 * randomness — so repeated renders are byte-identical.
 */

import { BerRow, EmptyInput } from "./csv.js";

export interface RenderOptions {
  /** Smallest BER drawn; rows with ber = 0 are clipped up to this. */
  floor?: number;
  /** Figure title. */
  title?: string;
}

export interface CurveGroup {
  /** Internal grouping key: decoder, M, channel. */
  key: string;
  /** Legend text: "OMA L=2" for baselines, "<decoder> M=<M>" otherwise. */
  label: string;
  /** Rows of this group in ascending Eb/N0 order. */
  rows: BerRow[];
}

export const DEFAULT_FLOOR = 1e-7;

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#e377c2",
  "#17becf",
  "#bcbd22",
  "#7f7f7f",
];

const W = 840;
const H = 560;
const PLOT = { left: 68, top: 46, right: 616, bottom: 498 };
const LEGEND_X = 632;

/** Legend text for one curve. */
export function legendLabel(decoder: string, m: number): string {
  const oma = /^oma-l(\d+)$/.exec(decoder);
  if (oma) {
    return `OMA L=${oma[1]}`;
  }
  return `${decoder} M=${m}`;
}

/** Split rows into curves, keeping first-appearance order of the groups. */
export function groupRows(rows: BerRow[]): CurveGroup[] {
  const byKey = new Map<string, CurveGroup>();
  for (const row of rows) {
    const key = `${row.decoder} | M=${row.M} | ${row.channel}`;
    let group = byKey.get(key);
    if (!group) {
      group = { key, label: legendLabel(row.decoder, row.M), rows: [] };
      byKey.set(key, group);
    }
    group.rows.push(row);
  }
  const groups = [...byKey.values()];
  for (const g of groups) {
    g.rows.sort((a, b) => a.ebn0Db - b.ebn0Db);
  }
  return groups;
}

/** Fixed-point coordinate formatting so output bytes are reproducible. */
function px(v: number): string {
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : r.toString();
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

/** Render rows to a complete standalone SVG document. */
export function renderSvg(rows: BerRow[], options: RenderOptions = {}): string {
  if (rows.length === 0) {
    throw new EmptyInput("no rows to plot");
  }
  const floor = options.floor ?? DEFAULT_FLOOR;
  if (!(floor > 0)) {
    throw new RangeError(`display floor must be > 0, got ${floor}`);
  }
  const title = options.title ?? "BER vs Eb/N0";
  const groups = groupRows(rows);

  const xs = rows.map((r) => r.ebn0Db);
  const ys = rows.map((r) => Math.max(r.ber, floor));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const xSpan = xMax > xMin ? xMax - xMin : 1;
  let loDecade = Math.floor(Math.log10(Math.min(...ys)));
  let hiDecade = Math.ceil(Math.log10(Math.max(...ys)));
  if (hiDecade <= loDecade) {
    hiDecade = loDecade + 1;
  }

  const plotW = PLOT.right - PLOT.left;
  const plotH = PLOT.bottom - PLOT.top;
  const x = (v: number) => PLOT.left + ((v - xMin) / xSpan) * plotW;
  const y = (v: number) => PLOT.top + ((hiDecade - Math.log10(v)) / (hiDecade - loDecade)) * plotH;

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}" ` +
      `data-y-scale="log10" font-family="Helvetica, Arial, sans-serif">`,
  );
  out.push(`<rect width="${W}" height="${H}" fill="#ffffff"/>`);
  out.push(`<text class="title" x="${px((PLOT.left + PLOT.right) / 2)}" y="26" text-anchor="middle" ` +
    `font-size="17">${escapeXml(title)}</text>`);

  // decade gridlines and y tick labels
  for (let d = hiDecade; d >= loDecade; d--) {
    const gy = y(10 ** d);
    out.push(
      `<line class="grid" x1="${PLOT.left}" y1="${px(gy)}" x2="${PLOT.right}" y2="${px(gy)}" ` +
        `stroke="#d8d8d8" stroke-width="1"/>`,
    );
    out.push(
      `<text class="ytick" x="${PLOT.left - 8}" y="${px(gy + 4)}" text-anchor="end" font-size="12">` +
        `1e${d}</text>`,
    );
  }

  // x ticks at the distinct measured grid values
  const distinctX = [...new Set(xs)].sort((a, b) => a - b);
  const stride = Math.max(1, Math.ceil(distinctX.length / 13));
  distinctX.forEach((v, i) => {
    if (i % stride !== 0 && i !== distinctX.length - 1) {
      return;
    }
    const gx = x(v);
    out.push(
      `<line class="grid" x1="${px(gx)}" y1="${PLOT.top}" x2="${px(gx)}" y2="${PLOT.bottom}" ` +
        `stroke="#eeeeee" stroke-width="1"/>`,
    );
    out.push(
      `<text class="xtick" x="${px(gx)}" y="${PLOT.bottom + 18}" text-anchor="middle" font-size="12">` +
        `${v}</text>`,
    );
  });

  out.push(
    `<rect x="${PLOT.left}" y="${PLOT.top}" width="${plotW}" height="${plotH}" fill="none" ` +
      `stroke="#444444" stroke-width="1"/>`,
  );
  out.push(
    `<text x="${px((PLOT.left + PLOT.right) / 2)}" y="${H - 22}" text-anchor="middle" font-size="14">` +
      `Eb/N0 (dB)</text>`,
  );
  out.push(
    `<text x="20" y="${px((PLOT.top + PLOT.bottom) / 2)}" text-anchor="middle" font-size="14" ` +
      `transform="rotate(-90 20 ${px((PLOT.top + PLOT.bottom) / 2)})">bit error rate</text>`,
  );

  let anyClipped = false;
  groups.forEach((group, gi) => {
    const color = PALETTE[gi % PALETTE.length]!;
    const pts = group.rows.map((r) => `${px(x(r.ebn0Db))},${px(y(Math.max(r.ber, floor)))}`);
    out.push(
      `<polyline class="curve" data-label="${escapeXml(group.label)}" points="${pts.join(" ")}" ` +
        `fill="none" stroke="${color}" stroke-width="1.8"/>`,
    );
    for (const r of group.rows) {
      const cx = px(x(r.ebn0Db));
      const cy = px(y(Math.max(r.ber, floor)));
      if (r.ber === 0) {
        anyClipped = true;
        out.push(
          `<circle class="pt floor" cx="${cx}" cy="${cy}" r="3.4" fill="#ffffff" ` +
            `stroke="${color}" stroke-width="1.6"/>`,
        );
      } else {
        out.push(`<circle class="pt" cx="${cx}" cy="${cy}" r="3" fill="${color}"/>`);
      }
    }
    const ly = PLOT.top + 14 + gi * 22;
    out.push(
      `<line x1="${LEGEND_X}" y1="${px(ly - 4)}" x2="${LEGEND_X + 26}" y2="${px(ly - 4)}" ` +
        `stroke="${color}" stroke-width="1.8"/>`,
    );
    out.push(`<circle cx="${px(LEGEND_X + 13)}" cy="${px(ly - 4)}" r="3" fill="${color}"/>`);
    out.push(
      `<text class="legend-label" x="${LEGEND_X + 32}" y="${px(ly)}" font-size="13">` +
        `${escapeXml(group.label)}</text>`,
    );
  });

  if (anyClipped) {
    out.push(
      `<text class="floor-note" x="${PLOT.left}" y="${H - 4}" font-size="11" fill="#555555">` +
        `open markers: zero measured errors, shown at the ${floor.toExponential()} display floor</text>`,
    );
  }
  out.push(`</svg>`);
  return out.join("\n") + "\n";
}
