import { PlotError, PlotSpec } from "./plot.js";

export interface CliArgs {
  in: (string | number)[];
  ref?: string;
  out: string;
  series?: (string | number)[];
  title?: string;
  xmin?: number;
  xmax?: number;
  ymin?: number;
  ymax?: number;
}

function pair(
  name: string,
  lo: number | undefined,
  hi: number | undefined,
): [number, number] | undefined {
  if (lo === undefined && hi === undefined) return undefined;
  if (lo === undefined || hi === undefined) {
    throw new PlotError(`${name}: need both bounds or neither`);
  }
  return [lo, hi];
}

export function buildSpec(argv: CliArgs): PlotSpec {
  const spec: PlotSpec = {
    inputs: argv.in.map(String),
    out: argv.out,
  };
  if (argv.ref !== undefined) spec.ref = argv.ref;
  if (argv.series !== undefined) spec.series = argv.series.map(String);
  if (argv.title !== undefined) spec.title = argv.title;
  const x = pair("x-range", argv.xmin, argv.xmax);
  if (x !== undefined) spec.xRange = x;
  const y = pair("y-range", argv.ymin, argv.ymax);
  if (y !== undefined) spec.yRange = y;
  return spec;
}
