import { describe, expect, it } from 'vitest';

import { SlackSchedule, Trajectory } from '../src/csv.js';
import { FigureRequest, inputsFigure, outputsFigure, slackFigure } from '../src/figures.js';

function trajectory(samples: number, m: number, p: number, start = 0, scale = 1): Trajectory {
  const t = Array.from({ length: samples }, (_, k) => start + k);
  return {
    startIndex: start,
    t,
    u: t.map((tk) => Array.from({ length: m }, (_, c) => scale * Math.sin(tk + c))),
    y: t.map((tk) => Array.from({ length: p }, (_, c) => scale * (tk - c))),
    m,
    p,
  };
}

const SLACK: SlackSchedule = {
  t: [0, 1, 2, 3, 4, 5],
  eps: [5, 2, 1, 0.5, 0.0005, 0],
};

function request(overrides: Partial<FigureRequest> = {}): FigureRequest {
  return {
    traj: trajectory(6, 2, 1, -1),
    trajLabel: 'trajectory.csv',
    slack: SLACK,
    dt: 1,
    tol: 1e-3,
    ...overrides,
  };
}

function polylines(svg: string): string[] {
  return [...svg.matchAll(/<polyline[^>]*\/>/g)].map((m) => m[0]);
}

describe('outputsFigure', () => {
  it('draws one line per output channel without a legend when solo', () => {
    const svg = outputsFigure(request());
    expect(polylines(svg)).toHaveLength(1);
    expect(svg).not.toContain('>y_1</text>');
  });

  it('overlays a comparison trajectory dashed, with a legend naming both files', () => {
    const svg = outputsFigure(request({
      traj2: trajectory(4, 2, 1, 0),
      traj2Label: 'baseline_trajectory.csv',
    }));
    const lines = polylines(svg);
    expect(lines).toHaveLength(2);
    expect(lines.filter((l) => l.includes('stroke-dasharray'))).toHaveLength(1);
    expect(svg).toContain('>trajectory.csv</text>');
    expect(svg).toContain('>baseline_trajectory.csv</text>');
  });

  it('shares channel colors between the solid and dashed passes', () => {
    const svg = outputsFigure(request({ traj2: trajectory(4, 2, 1, 0) }));
    const strokes = polylines(svg).map((l) => /stroke="([^"]+)"/.exec(l)![1]);
    expect(strokes[0]).toBe(strokes[1]);
  });
});

describe('inputsFigure', () => {
  it('draws one line per input channel with channel legend entries', () => {
    const svg = inputsFigure(request());
    expect(polylines(svg)).toHaveLength(2);
    expect(svg).toContain('>u_1</text>');
    expect(svg).toContain('>u_2</text>');
  });

  it('scales the time axis by dt without touching the values', () => {
    const unit = inputsFigure(request({ dt: 1 }));
    const scaled = inputsFigure(request({ dt: 10 }));
    // same pixel geometry either way: only the axis labels change
    expect(polylines(scaled)).toEqual(polylines(unit));
    expect(unit).toContain('>sample</text>');
    expect(scaled).toContain('>time [s]</text>');
  });
});

describe('slackFigure', () => {
  it('marks the first sample below the tolerance', () => {
    const svg = slackFigure(request());
    expect(svg).toContain('>t* = 4</text>');
  });

  it('labels the mark with seconds when dt is not one', () => {
    const svg = slackFigure(request({ dt: 10 }));
    expect(svg).toContain('>t* = 4 (40 s)</text>');
  });

  it('draws no mark when nothing settles', () => {
    const svg = slackFigure(request({ tol: 1e-9, slack: { t: [0, 1], eps: [1, 0.5] } }));
    expect(svg).not.toContain('t* =');
  });

  it('keeps the mark on the settling sample as the tolerance loosens', () => {
    const svg = slackFigure(request({ tol: 0.75 }));
    expect(svg).toContain('>t* = 3</text>');
  });
});
