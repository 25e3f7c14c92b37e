/**
 * Parsers for the two CSV formats the solver CLI writes.
 *
 * Trajectories use a `t,u_1,...,u_m,y_1,...,y_p` header with one row
 * per sample and consecutive integer sample indices (solutions start
 * at a negative index to keep the pinned initialization window on its
 * natural samples).  Slack schedules use a `t,eps_l1` header.  Every
 * parse error names the offending line.
 */

import { readFileSync } from 'fs';
import Papa from 'papaparse';

/** A malformed input file; the message names the file and the line. */
export class CsvError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'CsvError';
  }
}

export interface Trajectory {
  /** Sample index of the first row. */
  startIndex: number;
  /** Sample indices, consecutive integers. */
  t: number[];
  /** Inputs, one row per sample, m columns. */
  u: number[][];
  /** Outputs, one row per sample, p columns. */
  y: number[][];
  m: number;
  p: number;
}

export interface SlackSchedule {
  /** Sample indices, strictly increasing. */
  t: number[];
  /** L1 norm of the target slack at each sample. */
  eps: number[];
}

const INTEGER = /^[+-]?\d+$/;

function parseInteger(field: string, source: string, lineno: number): number {
  if (!INTEGER.test(field.trim())) {
    throw new CsvError(`${source}: line ${lineno}: non-numeric field`);
  }
  return Number(field);
}

function parseNumber(field: string, source: string, lineno: number): number {
  const value = Number(field.trim() === '' ? NaN : field);
  if (!Number.isFinite(value)) {
    throw new CsvError(`${source}: line ${lineno}: non-numeric field`);
  }
  return value;
}

/**
 * Split CSV text into rows paired with their 1-based line numbers,
 * dropping blank lines (including the one after a trailing newline).
 */
function rows(text: string, source: string): Array<{ lineno: number; fields: string[] }> {
  const parsed = Papa.parse<string[]>(text, { delimiter: ',', skipEmptyLines: false });
  for (const err of parsed.errors) {
    if (err.row !== undefined) {
      throw new CsvError(`${source}: line ${err.row + 1}: ${err.message}`);
    }
  }
  const out: Array<{ lineno: number; fields: string[] }> = [];
  parsed.data.forEach((fields, index) => {
    if (fields.length === 1 && fields[0].trim() === '') return;
    out.push({ lineno: index + 1, fields });
  });
  return out;
}

function expectedHeader(m: number, p: number): string[] {
  const names = ['t'];
  for (let i = 1; i <= m; i++) names.push(`u_${i}`);
  for (let j = 1; j <= p; j++) names.push(`y_${j}`);
  return names;
}

/** Parse trajectory CSV text; `source` names the file in errors. */
export function parseTrajectoryCsv(text: string, source: string): Trajectory {
  const lines = rows(text, source);
  if (lines.length === 0) {
    throw new CsvError(`${source}: empty file`);
  }
  const header = lines[0].fields.map((h) => h.trim());
  const m = header.filter((h) => h.startsWith('u_')).length;
  const p = header.filter((h) => h.startsWith('y_')).length;
  const expected = expectedHeader(m, p);
  const matches = m > 0 && p > 0 && header.length === expected.length
    && header.every((h, i) => h === expected[i]);
  if (!matches) {
    throw new CsvError(
      `${source}: line 1: expected header t,u_1..u_m,y_1..y_p, got ${header.join(',')}`,
    );
  }
  const t: number[] = [];
  const u: number[][] = [];
  const y: number[][] = [];
  for (const { lineno, fields } of lines.slice(1)) {
    if (fields.length !== 1 + m + p) {
      throw new CsvError(
        `${source}: line ${lineno}: expected ${1 + m + p} fields, got ${fields.length}`,
      );
    }
    t.push(parseInteger(fields[0], source, lineno));
    const values = fields.slice(1).map((f) => parseNumber(f, source, lineno));
    u.push(values.slice(0, m));
    y.push(values.slice(m));
  }
  if (t.length === 0) {
    throw new CsvError(`${source}: no data rows`);
  }
  for (let k = 1; k < t.length; k++) {
    if (t[k] !== t[0] + k) {
      throw new CsvError(`${source}: sample indices must be consecutive integers`);
    }
  }
  return { startIndex: t[0], t, u, y, m, p };
}

/** Parse slack schedule CSV text; `source` names the file in errors. */
export function parseSlackCsv(text: string, source: string): SlackSchedule {
  const lines = rows(text, source);
  if (lines.length === 0) {
    throw new CsvError(`${source}: empty file`);
  }
  const header = lines[0].fields.map((h) => h.trim());
  if (header.length !== 2 || header[0] !== 't' || header[1] !== 'eps_l1') {
    throw new CsvError(`${source}: line 1: expected header t,eps_l1, got ${header.join(',')}`);
  }
  const t: number[] = [];
  const eps: number[] = [];
  for (const { lineno, fields } of lines.slice(1)) {
    if (fields.length !== 2) {
      throw new CsvError(`${source}: line ${lineno}: expected 2 fields, got ${fields.length}`);
    }
    t.push(parseInteger(fields[0], source, lineno));
    eps.push(parseNumber(fields[1], source, lineno));
  }
  if (t.length === 0) {
    throw new CsvError(`${source}: no data rows`);
  }
  for (let k = 1; k < t.length; k++) {
    if (t[k] <= t[k - 1]) {
      throw new CsvError(`${source}: sample indices must be strictly increasing`);
    }
  }
  return { t, eps };
}

export function readTrajectoryCsv(path: string): Trajectory {
  return parseTrajectoryCsv(readText(path), path);
}

export function readSlackCsv(path: string): SlackSchedule {
  return parseSlackCsv(readText(path), path);
}

function readText(path: string): string {
  try {
    return readFileSync(path, 'utf8');
  } catch (err) {
    throw new CsvError(`cannot read ${path}: ${(err as Error).message}`);
  }
}

/**
 * The first sample whose slack L1 norm is below `tol`, or null when no
 * sample settles.
 */
export function firstSettled(slack: SlackSchedule, tol: number): number | null {
  for (let k = 0; k < slack.t.length; k++) {
    if (slack.eps[k] < tol) return slack.t[k];
  }
  return null;
}
