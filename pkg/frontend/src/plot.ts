import { writeFileSync } from "fs";
import { basename } from "path";
import { readResultCsv, ResultRow } from "./csv.js";

export interface PlotSpec {
  /** Result CSVs, one or more; every (file, layer) pair becomes a curve. */
  inputs: string[];
  /** Optional reference CSV; its curves render dashed. */
  ref?: string;
  /** Exact-match selection by layer or "stem:layer" label; omit for all. */
  series?: string[];
  xRange?: [number, number];
  yRange?: [number, number];
  title?: string;
  out: string;
}

export class PlotError extends Error {}

interface Series {
  label: string;
  layer: string;
  dashed: boolean;
  metric: "fer" | "ber";
  points: { x: number; y: number }[];
}

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

const WIDTH = 720;
const HEIGHT = 520;
const MARGIN = { left: 70, right: 20, top: 40, bottom: 50 };

function stem(path: string): string {
  return basename(path).replace(/\.[^.]*$/, "");
}

function seriesFromFile(path: string, dashed: boolean): Series[] {
  const rows = readResultCsv(path);
  const order: string[] = [];
  const grouped = new Map<string, ResultRow[]>();
  for (const row of rows) {
    if (!grouped.has(row.layer)) {
      order.push(row.layer);
      grouped.set(row.layer, []);
    }
    grouped.get(row.layer)!.push(row);
  }
  return order.map((layer) => {
    const members = grouped.get(layer)!;
    const metric = members.some((r) => r.fer !== null) ? "fer" : "ber";
    const points = members
      .map((r) => ({ x: r.ebn0_db, y: r[metric] }))
      .filter((p): p is { x: number; y: number } => p.y !== null && p.y > 0)
      .sort((a, b) => a.x - b.x);
    return { label: `${stem(path)}:${layer}`, layer, dashed, metric, points };
  });
}

function selectSeries(spec: PlotSpec): Series[] {
  const all = spec.inputs.flatMap((path) => seriesFromFile(path, false));
  if (spec.ref !== undefined) {
    all.push(...seriesFromFile(spec.ref, true));
  }
  let kept: Series[];
  if (spec.series === undefined) {
    kept = all.filter((s) => s.layer !== "overall");
  } else {
    const wanted = new Set(spec.series);
    kept = all.filter((s) => wanted.has(s.layer) || wanted.has(s.label));
  }
  kept = kept.filter((s) => s.points.length > 0);
  if (kept.length === 0) {
    throw new PlotError("no series selected");
  }
  return kept;
}

function checkRange(name: string, range: [number, number] | undefined, log: boolean) {
  if (range === undefined) return;
  const [lo, hi] = range;
  if (!Number.isFinite(lo) || !Number.isFinite(hi) || lo >= hi) {
    throw new PlotError(`${name}: need finite low < high, got ${lo}..${hi}`);
  }
  if (log && lo <= 0) {
    throw new PlotError(`${name}: log axis needs positive bounds, got ${lo}`);
  }
}

function niceStride(span: number): number {
  const raw = span / 10;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (m * mag >= raw) return m * mag;
  }
  return 10 * mag;
}

function fmt(v: number): string {
  return v.toFixed(2).replace(/\.?0+$/, "") || "0";
}

/** Build the SVG text for a spec; reads inputs, writes nothing. */
export function render(spec: PlotSpec): string {
  checkRange("x-range", spec.xRange, false);
  checkRange("y-range", spec.yRange, true);
  const series = selectSeries(spec);

  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ys = series.flatMap((s) => s.points.map((p) => p.y));
  const xLo = spec.xRange ? spec.xRange[0] : Math.floor(Math.min(...xs));
  const xHi = spec.xRange ? spec.xRange[1] : Math.ceil(Math.max(...xs));
  const yLo = spec.yRange
    ? spec.yRange[0]
    : Math.pow(10, Math.floor(Math.log10(Math.min(...ys))));
  const yHi = spec.yRange
    ? spec.yRange[1]
    : Math.pow(10, Math.ceil(Math.log10(Math.max(...ys))));

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) =>
    MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const logLo = Math.log10(yLo);
  const logHi = Math.log10(yHi);
  const sy = (y: number) =>
    MARGIN.top + ((logHi - Math.log10(y)) / (logHi - logLo)) * plotH;

  const out: string[] = [];
  out.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
  );
  out.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  out.push(
    `<clipPath id="plotarea"><rect x="${MARGIN.left}" y="${MARGIN.top}" ` +
      `width="${plotW}" height="${plotH}"/></clipPath>`,
  );
  if (spec.title !== undefined) {
    out.push(
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="15">` +
        `${escapeXml(spec.title)}</text>`,
    );
  }

  // y decades: gridlines, tick labels, minor ticks
  const kLo = Math.ceil(logLo - 1e-9);
  const kHi = Math.floor(logHi + 1e-9);
  for (let k = kLo; k <= kHi; k++) {
    const y = sy(Math.pow(10, k));
    out.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" ` +
        `y2="${fmt(y)}" stroke="#dddddd"/>`,
    );
    const label = k === 0 ? "1" : `1e${k}`;
    out.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end">${label}</text>`,
    );
  }
  if (kHi - kLo <= 8) {
    for (let k = kLo - 1; k <= kHi; k++) {
      for (let m = 2; m <= 9; m++) {
        const v = m * Math.pow(10, k);
        if (v <= yLo || v >= yHi) continue;
        const y = sy(v);
        out.push(
          `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + 5}" ` +
            `y2="${fmt(y)}" stroke="#aaaaaa"/>`,
        );
      }
    }
  }

  // x ticks
  const stride = niceStride(xHi - xLo);
  for (let x = Math.ceil(xLo / stride) * stride; x <= xHi + 1e-9; x += stride) {
    const px = sx(x);
    out.push(
      `<line x1="${fmt(px)}" y1="${MARGIN.top}" x2="${fmt(px)}" ` +
        `y2="${MARGIN.top + plotH}" stroke="#eeeeee"/>`,
    );
    out.push(
      `<text x="${fmt(px)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle">` +
        `${fmt(x)}</text>`,
    );
  }

  // frame and axis titles
  out.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#000000"/>`,
  );
  out.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle">` +
      `Eb/N0 [dB]</text>`,
  );
  const metrics = new Set(series.map((s) => s.metric));
  const yTitle = metrics.size > 1 ? "error rate" : metrics.has("ber") ? "BER" : "FER";
  out.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${yTitle}</text>`,
  );

  // curves
  out.push(`<g clip-path="url(#plotarea)">`);
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const d = s.points
      .map((p, j) => `${j === 0 ? "M" : "L"}${fmt(sx(p.x))} ${fmt(sy(p.y))}`)
      .join(" ");
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    out.push(
      `<path d="${d}" fill="none" stroke="${color}" stroke-width="1.5"${dash}/>`,
    );
    if (!s.dashed) {
      for (const p of s.points) {
        out.push(
          `<circle cx="${fmt(sx(p.x))}" cy="${fmt(sy(p.y))}" r="2.5" ` +
            `fill="${color}"/>`,
        );
      }
    }
  });
  out.push(`</g>`);

  // legend
  const labelW = Math.max(...series.map((s) => s.label.length)) * 6.5 + 40;
  const legX = MARGIN.left + plotW - labelW - 10;
  const legY = MARGIN.top + 10;
  out.push(
    `<rect x="${fmt(legX)}" y="${legY}" width="${fmt(labelW)}" ` +
      `height="${series.length * 18 + 8}" fill="#ffffff" stroke="#999999"/>`,
  );
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = legY + 14 + i * 18;
    const dash = s.dashed ? ` stroke-dasharray="6 4"` : "";
    out.push(
      `<line x1="${fmt(legX + 6)}" y1="${y - 4}" x2="${fmt(legX + 30)}" ` +
        `y2="${y - 4}" stroke="${color}" stroke-width="1.5"${dash}/>`,
    );
    out.push(
      `<text x="${fmt(legX + 36)}" y="${y}">${escapeXml(s.label)}</text>`,
    );
  });

  out.push(`</svg>`);
  return out.join("\n") + "\n";
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** Render and write; nothing is written when rendering fails. */
export function renderToFile(spec: PlotSpec): void {
  const svg = render(spec);
  writeFileSync(spec.out, svg);
}
