import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { BerRow, EmptyInput, parseBerCsv } from "../src/csv.js";
import {
  DEFAULT_FLOOR,
  groupRows,
  legendLabel,
  renderSvg,
} from "../src/figure.js";

const GOLDEN = fileURLToPath(new URL("./golden/ber.csv", import.meta.url));
const GOLDEN_ROWS = parseBerCsv(readFileSync(GOLDEN, "utf8"), "golden");

function row(overrides: Partial<BerRow>): BerRow {
  return {
    decoder: "spa",
    M: 4,
    channel: "rayleigh",
    ebn0Db: 0,
    frames: 1000,
    bits: 12000,
    bitErrors: 120,
    frameErrors: 90,
    ber: 0.01,
    fer: 0.09,
    elapsedS: 0,
    itersMean: 10,
    extra: {},
    ...overrides,
  };
}

function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}

describe("legendLabel", () => {
  it("names orthogonal baselines by diversity order", () => {
    expect(legendLabel("oma-l1", 4)).toBe("OMA L=1");
    expect(legendLabel("oma-l2", 4)).toBe("OMA L=2");
    expect(legendLabel("oma-l12", 4)).toBe("OMA L=12");
  });

  it("names decoders with their alphabet size", () => {
    expect(legendLabel("spa", 4)).toBe("spa M=4");
    expect(legendLabel("maxlog", 16)).toBe("maxlog M=16");
  });
});

describe("groupRows", () => {
  it("keeps first-appearance order and sorts each curve by Eb/N0", () => {
    const rows = [
      row({ decoder: "maxlog", ebn0Db: 4 }),
      row({ decoder: "spa", ebn0Db: 8 }),
      row({ decoder: "maxlog", ebn0Db: 0 }),
      row({ decoder: "spa", ebn0Db: 2 }),
    ];
    const groups = groupRows(rows);
    expect(groups.map((g) => g.label)).toEqual(["maxlog M=4", "spa M=4"]);
    expect(groups[0]!.rows.map((r) => r.ebn0Db)).toEqual([0, 4]);
    expect(groups[1]!.rows.map((r) => r.ebn0Db)).toEqual([2, 8]);
  });

  it("separates identical decoders on different channels", () => {
    const rows = [row({}), row({ channel: "awgn" })];
    expect(groupRows(rows)).toHaveLength(2);
  });
});

describe("renderSvg on the golden sweep", () => {
  const svg = renderSvg(GOLDEN_ROWS);

  it("draws one curve per decoder group", () => {
    expect(count(svg, 'class="curve"')).toBe(4);
  });

  it("marks the y axis as logarithmic with decade labels", () => {
    expect(svg).toContain('data-y-scale="log10"');
    expect(svg).toContain(">1e-2<");
    expect(svg).toContain(">1e-1<");
  });

  it("draws a marker for every measured point", () => {
    expect(count(svg, 'class="pt"') + count(svg, 'class="pt floor"')).toBe(28);
  });

  it("labels every curve in the legend", () => {
    expect(count(svg, 'class="legend-label"')).toBe(4);
    expect(svg).toContain("spa M=4");
    expect(svg).toContain("maxlog M=4");
    expect(svg).toContain("OMA L=1");
    expect(svg).toContain("OMA L=2");
  });

  it("is byte-identical across repeated renders", () => {
    expect(renderSvg(GOLDEN_ROWS)).toBe(svg);
    expect(renderSvg(GOLDEN_ROWS)).toBe(svg);
  });

  it("uses the default title and accepts an override", () => {
    expect(svg).toContain("BER vs Eb/N0");
    const titled = renderSvg(GOLDEN_ROWS, { title: "desk check" });
    expect(titled).toContain("desk check");
    expect(titled).not.toContain("BER vs Eb/N0");
  });
});

describe("renderSvg floor handling", () => {
  const rows = [
    row({ ebn0Db: 0, ber: 0.01 }),
    row({ ebn0Db: 2, ber: 0.001 }),
    row({ ebn0Db: 4, ber: 0, bitErrors: 0 }),
  ];

  it("clips zero-error points to the display floor as open markers", () => {
    const svg = renderSvg(rows);
    expect(count(svg, 'class="pt floor"')).toBe(1);
    expect(count(svg, 'class="pt"')).toBe(2);
    expect(svg).toContain('class="floor-note"');
    expect(svg).toContain(DEFAULT_FLOOR.toExponential());
  });

  it("honours a custom floor", () => {
    const svg = renderSvg(rows, { floor: 1e-5 });
    expect(svg).toContain("1e-5");
    expect(svg).not.toContain("1e-7");
  });

  it("omits the footnote when no point is clipped", () => {
    const svg = renderSvg(rows.slice(0, 2));
    expect(svg).not.toContain("floor-note");
  });

  it("rejects a non-positive floor", () => {
    expect(() => renderSvg(rows, { floor: 0 })).toThrow(RangeError);
    expect(() => renderSvg(rows, { floor: -1 })).toThrow(RangeError);
  });

  it("rejects an empty row list", () => {
    expect(() => renderSvg([])).toThrow(EmptyInput);
  });
});
