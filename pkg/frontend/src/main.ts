#!/usr/bin/env node
/**
 * Render the three standard figures from solver CSV output.
 *
 *   ddmintime-figures --traj out/trajectory.csv --slack out/slack.csv \
 *       --traj2 out/baseline_trajectory.csv --dt 10 --out figures
 *
 * Writes outputs.svg, inputs.svg and slack.svg to the output
 * directory.  Exit codes: 0 success, 1 unreadable or malformed CSV
 * (the message names the offending line), 2 bad arguments.
 */

import { mkdirSync, writeFileSync } from 'fs';
import { basename, join } from 'path';
import { pathToFileURL } from 'url';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { CsvError, firstSettled, readSlackCsv, readTrajectoryCsv } from './csv.js';
import { FigureRequest, inputsFigure, outputsFigure, slackFigure } from './figures.js';

export interface Options {
  traj: string;
  traj2?: string;
  slack: string;
  dt: number;
  tol: number;
  out: string;
}

class ArgumentError extends Error {}

/** Parse CLI arguments, or null when only help/version was requested. */
export function parseOptions(argv: string[]): Options | null {
  const parsed = yargs(argv)
    .usage('Usage: $0 --traj trajectory.csv --slack slack.csv [options]')
    .option('traj', {
      type: 'string',
      demandOption: true,
      describe: 'solution trajectory CSV (t,u_1..u_m,y_1..y_p)',
    })
    .option('traj2', {
      type: 'string',
      describe: 'second trajectory CSV to overlay, e.g. the model-based baseline',
    })
    .option('slack', {
      type: 'string',
      demandOption: true,
      describe: 'slack schedule CSV (t,eps_l1)',
    })
    .option('dt', {
      type: 'number',
      default: 1,
      describe: 'sampling period in seconds for the time axis',
    })
    .option('tol', {
      type: 'number',
      default: 1e-3,
      describe: 'settling threshold marked on the slack figure',
    })
    .option('out', {
      type: 'string',
      default: '.',
      describe: 'directory for the rendered SVG files',
    })
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw new ArgumentError(msg ?? err?.message ?? 'bad arguments');
    })
    .parseSync();
  if (parsed.help === true || parsed.version === true) return null;
  return {
    traj: parsed.traj,
    traj2: parsed.traj2,
    slack: parsed.slack,
    dt: parsed.dt,
    tol: parsed.tol,
    out: parsed.out,
  };
}

export interface RenderResult {
  files: string[];
  /** First settled sample per the slack schedule, or null. */
  settled: number | null;
}

/** Read the CSVs and write the three figures. */
export function render(options: Options): RenderResult {
  const traj = readTrajectoryCsv(options.traj);
  const slack = readSlackCsv(options.slack);
  const request: FigureRequest = {
    traj,
    trajLabel: basename(options.traj),
    traj2: options.traj2 === undefined ? undefined : readTrajectoryCsv(options.traj2),
    traj2Label: options.traj2 === undefined ? undefined : basename(options.traj2),
    slack,
    dt: options.dt,
    tol: options.tol,
  };
  mkdirSync(options.out, { recursive: true });
  const figures: Array<[string, string]> = [
    ['outputs.svg', outputsFigure(request)],
    ['inputs.svg', inputsFigure(request)],
    ['slack.svg', slackFigure(request)],
  ];
  const files = figures.map(([name, markup]) => {
    const path = join(options.out, name);
    writeFileSync(path, markup);
    return path;
  });
  return { files, settled: firstSettled(slack, options.tol) };
}

/** CLI body; returns the process exit code. */
export function main(argv: string[]): number {
  let options: Options | null;
  try {
    options = parseOptions(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  if (options === null) return 0;
  try {
    const result = render(options);
    console.log(`wrote ${result.files.join(', ')}`);
    console.log(
      result.settled === null
        ? 'slack never settles below the tolerance'
        : `slack settles at t = ${result.settled}`,
    );
    return 0;
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (import.meta.url === pathToFileURL(process.argv[1] ?? '').href) {
  process.exit(main(hideBin(process.argv)));
}
