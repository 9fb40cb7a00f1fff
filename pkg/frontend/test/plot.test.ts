import { execFileSync } from "child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { fileURLToPath } from "url";
import { describe, expect, it } from "vitest";
import { readResultCsv } from "../src/csv.js";
import { PlotError, render, renderToFile } from "../src/plot.js";
import { buildSpec } from "../src/spec.js";

const HERE = fileURLToPath(new URL(".", import.meta.url));
const FIX = join(HERE, "fixtures");
const RUN = join(FIX, "fig4_run.csv");
const ML = join(FIX, "fig4_ml.csv");
const MMSE = join(FIX, "fig4_mmse.csv");
const REF = join(FIX, "fig4_ref.csv");

function scratch(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

describe("csv reader", () => {
  it("types a result file", () => {
    const rows = readResultCsv(RUN);
    expect(rows).toHaveLength(15);
    expect(rows[0].ebn0_db).toBe(6);
    expect(rows[0].layer).toBe("base");
    expect(rows[0].fer).toBeCloseTo(22 / 150, 12);
  });

  it("reads reference tables with empty count columns", () => {
    const rows = readResultCsv(REF);
    expect(rows.some((r) => r.layer === "single_mmse")).toBe(true);
    expect(rows[0].fer).toBe(1);
    expect(rows[0].ber).toBeNull();
  });

  it("names missing columns", () => {
    const path = join(scratch(), "broken.csv");
    writeFileSync(path, "ebn0_db,layer,fer\n1,base,0.5\n");
    expect(() => readResultCsv(path)).toThrowError(/missing column\(s\).*frames/);
  });

  it("names unexpected columns", () => {
    const header = readFileSync(RUN, "utf8").split("\n")[0];
    const path = join(scratch(), "extra.csv");
    writeFileSync(path, `${header},bogus\n`);
    expect(() => readResultCsv(path)).toThrowError(/unexpected column\(s\) bogus/);
  });

  it("points at bad cells by line and column", () => {
    const text = readFileSync(RUN, "utf8").split("\n");
    const path = join(scratch(), "cell.csv");
    writeFileSync(path, `${text[0]}\n${text[1].replace(/^6/, "six")}\n`);
    expect(() => readResultCsv(path)).toThrowError(/line 2, column ebn0_db/);
  });
});

describe("render", () => {
  const overlay = (out: string) => ({
    inputs: [RUN, ML, MMSE],
    ref: REF,
    out,
    title: "2x2 coded comparison",
  });

  it("draws the full overlay: four solid and four dashed curves", () => {
    const svg = render(overlay("unused.svg"));
    expect(svg.startsWith("<svg")).toBe(true);
    const paths = svg.match(/<path /g) ?? [];
    expect(paths).toHaveLength(8);
    const dashed = svg.match(/<path [^>]*stroke-dasharray/g) ?? [];
    expect(dashed).toHaveLength(4);
    for (const label of [
      "fig4_run:base",
      "fig4_run:enh1",
      "fig4_ml:single",
      "fig4_mmse:single",
      "fig4_ref:base",
      "fig4_ref:enh1",
      "fig4_ref:single_mmse",
      "fig4_ref:single_ml",
    ]) {
      expect(svg).toContain(`>${label}</text>`);
    }
    expect(svg).not.toContain("overall");
  });

  it("writes the file only on success", () => {
    const dir = scratch();
    const good = join(dir, "overlay.svg");
    renderToFile(overlay(good));
    expect(readFileSync(good, "utf8")).toContain("</svg>");

    const bad = join(dir, "never.svg");
    expect(() =>
      renderToFile({ inputs: [RUN], series: ["no_such_layer"], out: bad }),
    ).toThrowError(PlotError);
    expect(existsSync(bad)).toBe(false);
  });

  it("is deterministic", () => {
    expect(render(overlay("a.svg"))).toBe(render(overlay("b.svg")));
  });

  it("honors an explicit log range down to 1e-5", () => {
    const svg = render({
      inputs: [RUN],
      out: "unused.svg",
      yRange: [1e-5, 1],
    });
    expect(svg).toContain(">1e-5</text>");
    expect(svg).toContain(">1</text>");
  });

  it("selects series by layer name across files", () => {
    const svg = render({
      inputs: [RUN],
      ref: REF,
      series: ["base"],
      out: "unused.svg",
    });
    expect(svg.match(/<path /g)).toHaveLength(2);
    expect(svg).toContain("fig4_run:base");
    expect(svg).toContain("fig4_ref:base");
    expect(svg).not.toContain("enh1");
  });

  it("includes the overall summary only when asked by label", () => {
    const svg = render({
      inputs: [RUN],
      series: ["fig4_run:overall"],
      out: "unused.svg",
    });
    expect(svg.match(/<path /g)).toHaveLength(1);
    expect(svg).toContain("fig4_run:overall");
  });

  it("falls back to BER columns and labels the axis accordingly", () => {
    const header = readFileSync(RUN, "utf8").split("\n")[0];
    const path = join(scratch(), "uncoded.csv");
    writeFileSync(
      path,
      `${header}\n10,base,,,,,,,,0.01,,,,\n20,base,,,,,,,,0.001,,,,\n`,
    );
    const svg = render({ inputs: [path], out: "unused.svg" });
    expect(svg).toContain(">BER</text>");
    expect(svg.match(/<path /g)).toHaveLength(1);
  });

  it("rejects bad ranges by name", () => {
    expect(() =>
      render({ inputs: [RUN], out: "x.svg", yRange: [0, 1] }),
    ).toThrowError(/y-range.*positive/);
    expect(() =>
      render({ inputs: [RUN], out: "x.svg", xRange: [5, 5] }),
    ).toThrowError(/x-range/);
  });
});

describe("spec builder", () => {
  it("maps CLI arguments through", () => {
    const spec = buildSpec({
      in: [RUN, ML],
      ref: REF,
      out: "o.svg",
      series: ["base"],
      xmin: 0,
      xmax: 14,
      ymin: 1e-5,
      ymax: 1,
    });
    expect(spec.inputs).toEqual([RUN, ML]);
    expect(spec.xRange).toEqual([0, 14]);
    expect(spec.yRange).toEqual([1e-5, 1]);
  });

  it("requires both bounds of a range", () => {
    expect(() => buildSpec({ in: [RUN], out: "o.svg", xmin: 3 })).toThrowError(
      /x-range.*both/,
    );
  });
});

describe("command line", () => {
  const CLI = join(HERE, "..", "dist", "cli.js");

  function status(args: string[]): number {
    try {
      execFileSync("node", [CLI, ...args], { stdio: "pipe" });
      return 0;
    } catch (err) {
      return (err as { status: number }).status;
    }
  }

  it("renders the overlay end to end", () => {
    const out = join(scratch(), "cli.svg");
    const code = status([
      "--in", RUN, "--in", ML, "--in", MMSE,
      "--ref", REF,
      "--out", out,
      "--ymin", "1e-5", "--ymax", "1",
    ]);
    expect(code).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("exits 1 on an empty selection", () => {
    const code = status([
      "--in", RUN, "--series", "nope", "--out", join(scratch(), "x.svg"),
    ]);
    expect(code).toBe(1);
  });

  it("exits 2 when an input is unreadable", () => {
    const code = status([
      "--in", "no-such-file.csv", "--out", join(scratch(), "x.svg"),
    ]);
    expect(code).toBe(2);
  });
});
