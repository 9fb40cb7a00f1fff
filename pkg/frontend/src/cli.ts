#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { SchemaError } from "./csv.js";
import { PlotError, renderToFile } from "./plot.js";
import { buildSpec, CliArgs } from "./spec.js";

const argv = yargs(hideBin(process.argv))
  .usage("$0 --in result.csv [--in more.csv] [--ref reference.csv] --out plot.svg")
  .option("in", {
    type: "array",
    demandOption: true,
    describe: "result CSV(s) to plot",
  })
  .option("ref", { type: "string", describe: "reference CSV, drawn dashed" })
  .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
  .option("series", {
    type: "array",
    describe: "layers or stem:layer labels to keep (default, all but overall)",
  })
  .option("title", { type: "string" })
  .option("xmin", { type: "number" })
  .option("xmax", { type: "number" })
  .option("ymin", { type: "number" })
  .option("ymax", { type: "number" })
  .strict()
  .parseSync();

try {
  renderToFile(buildSpec(argv as CliArgs));
} catch (err) {
  if (err instanceof SchemaError || err instanceof PlotError) {
    console.error(`error: ${err.message}`);
    process.exit(1);
  }
  if (err instanceof Error && "code" in err) {
    console.error(`error: ${err.message}`);
    process.exit(2);
  }
  throw err;
}
