/**
 * The three standard figures for a minimum-time run: output
 * trajectories, input time histories, and the slack schedule whose
 * first sub-tolerance sample is the detected arrival time.
 *
 * A second trajectory (typically the model-based baseline) can be
 * overlaid for comparison; it is drawn dashed in the same per-channel
 * colors.  The time axis is the sample index times `dt`.
 */

import { firstSettled, SlackSchedule, Trajectory } from './csv.js';
import { ChartSpec, LegendItem, renderChart, Series } from './svg.js';

export interface FigureRequest {
  traj: Trajectory;
  /** Legend name for `traj`, e.g. the file name. */
  trajLabel: string;
  traj2?: Trajectory;
  traj2Label?: string;
  slack: SlackSchedule;
  /** Sampling period; the time axis shows t * dt. */
  dt: number;
  /** Settling threshold on the slack L1 norm. */
  tol: number;
}

/** Per-channel line colors; the sole styling knob of the figures. */
export const PALETTE = ['#c23b22', '#1f6fb2', '#2e8540', '#8a5fbf', '#b8860b', '#3aa6a6'];

const LINE_WIDTH = 1.5;
const OVERLAY_DASH = '6 4';

function channelColor(index: number): string {
  return PALETTE[index % PALETTE.length];
}

function channelSeries(
  traj: Trajectory,
  signal: 'u' | 'y',
  dt: number,
  dash?: string,
): Series[] {
  const columns = signal === 'u' ? traj.u : traj.y;
  const channels = signal === 'u' ? traj.m : traj.p;
  const x = traj.t.map((t) => t * dt);
  const series: Series[] = [];
  for (let c = 0; c < channels; c++) {
    series.push({
      label: `${signal}_${c + 1}`,
      x,
      y: columns.map((row) => row[c]),
      style: { stroke: channelColor(c), width: LINE_WIDTH, dash },
    });
  }
  return series;
}

function timeLabel(dt: number): string {
  return dt === 1 ? 'sample' : 'time [s]';
}

/**
 * Legend for a channel figure: one entry per channel, plus two
 * neutral entries naming the solid and dashed line styles when a
 * comparison trajectory is overlaid.  A single solo series needs no
 * legend at all.
 */
function channelLegend(request: FigureRequest, channels: number, prefix: 'u' | 'y'): LegendItem[] {
  if (request.traj2 === undefined && channels === 1) return [];
  const legend: LegendItem[] = [];
  for (let c = 0; c < channels; c++) {
    legend.push({
      label: `${prefix}_${c + 1}`,
      style: { stroke: channelColor(c), width: LINE_WIDTH },
    });
  }
  if (request.traj2 !== undefined) {
    legend.push({ label: request.trajLabel, style: { stroke: '#333', width: LINE_WIDTH } });
    legend.push({
      label: request.traj2Label ?? 'comparison',
      style: { stroke: '#333', width: LINE_WIDTH, dash: OVERLAY_DASH },
    });
  }
  return legend;
}

function channelFigure(request: FigureRequest, signal: 'u' | 'y'): ChartSpec {
  const series = channelSeries(request.traj, signal, request.dt);
  if (request.traj2 !== undefined) {
    series.push(...channelSeries(request.traj2, signal, request.dt, OVERLAY_DASH));
  }
  const channels = signal === 'u' ? request.traj.m : request.traj.p;
  return {
    title: signal === 'u' ? 'Input time histories' : 'Output trajectories',
    xLabel: timeLabel(request.dt),
    yLabel: signal === 'u' ? 'input' : 'output',
    series,
    legend: channelLegend(request, channels, signal),
  };
}

/** SVG markup for the output trajectories figure. */
export function outputsFigure(request: FigureRequest): string {
  return renderChart(channelFigure(request, 'y'));
}

/** SVG markup for the input time histories figure. */
export function inputsFigure(request: FigureRequest): string {
  return renderChart(channelFigure(request, 'u'));
}

/**
 * SVG markup for the slack schedule figure.  The first sample whose
 * L1 norm falls below the tolerance is marked with a vertical rule;
 * when no sample settles there is no mark.
 */
export function slackFigure(request: FigureRequest): string {
  const settled = firstSettled(request.slack, request.tol);
  const spec: ChartSpec = {
    title: 'Slack schedule',
    xLabel: timeLabel(request.dt),
    yLabel: 'slack L1 norm',
    series: [{
      label: 'eps_l1',
      x: request.slack.t.map((t) => t * request.dt),
      y: request.slack.eps,
      style: { stroke: channelColor(0), width: LINE_WIDTH },
    }],
    legend: [],
  };
  if (settled !== null) {
    spec.marker = {
      x: settled * request.dt,
      label: request.dt === 1 ? `t* = ${settled}` : `t* = ${settled} (${settled * request.dt} s)`,
    };
  }
  return renderChart(spec);
}
