/**
 * Minimal static SVG line charts.
 *
 * Each axis maps values to pixels through one affine transform; the
 * data is drawn exactly as given (no smoothing, no resampling) and the
 * axis limits fit the data.  Everything returns plain SVG markup
 * strings, so the output is deterministic and easy to test.
 */

export interface LineStyle {
  stroke: string;
  width: number;
  /** SVG dash pattern, e.g. '6 4'; undefined draws a solid line. */
  dash?: string;
}

export interface Series {
  label: string;
  x: number[];
  y: number[];
  style: LineStyle;
}

export interface LegendItem {
  label: string;
  style: LineStyle;
}

/** A labelled vertical rule, e.g. the detected arrival time. */
export interface Marker {
  x: number;
  label: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  /** Legend entries; an empty list draws no legend. */
  legend: LegendItem[];
  marker?: Marker;
  width?: number;
  height?: number;
}

export interface LinearScale {
  (value: number): number;
}

/** The affine map sending [d0, d1] onto [r0, r1]. */
export function linearScale(d0: number, d1: number, r0: number, r1: number): LinearScale {
  const slope = (r1 - r0) / (d1 - d0);
  return (value: number) => r0 + (value - d0) * slope;
}

/**
 * Round tick positions inside [min, max] with a step of 1, 2 or 5
 * times a power of ten, aiming for `count` ticks.
 */
export function niceTicks(min: number, max: number, count = 6): number[] {
  if (!(max > min)) return [min];
  const raw = (max - min) / count;
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  const ratio = raw / power;
  const step = power * (ratio >= 7.5 ? 10 : ratio >= 3.5 ? 5 : ratio >= 1.5 ? 2 : 1);
  // Integer multiples of the step, so a tick at zero is exactly zero.
  const first = Math.ceil(min / step - 1e-9);
  const last = Math.floor(max / step + 1e-9);
  const ticks: number[] = [];
  for (let k = first; k <= last; k++) {
    ticks.push(Number((k * step).toPrecision(12)));
  }
  return ticks;
}

/** Compact decimal label for a tick value. */
export function formatTick(value: number): string {
  if (value === 0) return '0';
  return String(Number(value.toPrecision(10)));
}

function escapeXml(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

function px(value: number): string {
  return value.toFixed(2).replace(/\.?0+$/, '');
}

interface Extent {
  min: number;
  max: number;
}

function extentOf(values: number[], previous?: Extent): Extent {
  let { min, max } = previous ?? { min: Infinity, max: -Infinity };
  for (const v of values) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  return { min, max };
}

/** Widen a degenerate extent and add a small readability margin. */
function padded(extent: Extent): Extent {
  let { min, max } = extent;
  if (!(max > min)) {
    const pad = Math.max(1, Math.abs(min));
    return { min: min - pad, max: max + pad };
  }
  const pad = 0.04 * (max - min);
  return { min: min - pad, max: max + pad };
}

function strokeAttrs(style: LineStyle): string {
  const dash = style.dash === undefined ? '' : ` stroke-dasharray="${style.dash}"`;
  return `stroke="${style.stroke}" stroke-width="${style.width}"${dash}`;
}

const FONT = 'font-family="sans-serif"';
const MARGIN = { top: 34, right: 18, bottom: 46, left: 70 };

/** Render a complete standalone SVG document for one chart. */
export function renderChart(spec: ChartSpec): string {
  const width = spec.width ?? 640;
  const height = spec.height ?? 400;
  const left = MARGIN.left;
  const right = width - MARGIN.right;
  const top = MARGIN.top;
  const bottom = height - MARGIN.bottom;

  let xExtent: Extent | undefined;
  let yExtent: Extent | undefined;
  for (const series of spec.series) {
    xExtent = extentOf(series.x, xExtent);
    yExtent = extentOf(series.y, yExtent);
  }
  if (xExtent === undefined || yExtent === undefined || !Number.isFinite(xExtent.min)) {
    throw new Error('a chart needs at least one sample');
  }
  if (spec.marker !== undefined) {
    xExtent = extentOf([spec.marker.x], xExtent);
  }
  const xDomain = padded(xExtent);
  const yDomain = padded(yExtent);
  const xScale = linearScale(xDomain.min, xDomain.max, left, right);
  const yScale = linearScale(yDomain.min, yDomain.max, bottom, top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" `
    + `viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${px((left + right) / 2)}" y="20" text-anchor="middle" ${FONT} `
    + `font-size="15">${escapeXml(spec.title)}</text>`,
  );

  for (const tick of niceTicks(xDomain.min, xDomain.max)) {
    const x = px(xScale(tick));
    parts.push(`<line x1="${x}" y1="${px(bottom)}" x2="${x}" y2="${px(bottom + 5)}" stroke="black"/>`);
    parts.push(
      `<text x="${x}" y="${px(bottom + 18)}" text-anchor="middle" ${FONT} font-size="12">`
      + `${formatTick(tick)}</text>`,
    );
  }
  for (const tick of niceTicks(yDomain.min, yDomain.max)) {
    const y = px(yScale(tick));
    parts.push(`<line x1="${px(left - 5)}" y1="${y}" x2="${px(left)}" y2="${y}" stroke="black"/>`);
    parts.push(
      `<text x="${px(left - 8)}" y="${px(yScale(tick) + 4)}" text-anchor="end" ${FONT} `
      + `font-size="12">${formatTick(tick)}</text>`,
    );
  }
  parts.push(
    `<rect x="${px(left)}" y="${px(top)}" width="${px(right - left)}" height="${px(bottom - top)}" `
    + 'fill="none" stroke="black"/>',
  );
  parts.push(
    `<text x="${px((left + right) / 2)}" y="${px(height - 8)}" text-anchor="middle" ${FONT} `
    + `font-size="13">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="16" y="${px((top + bottom) / 2)}" text-anchor="middle" ${FONT} font-size="13" `
    + `transform="rotate(-90 16 ${px((top + bottom) / 2)})">${escapeXml(spec.yLabel)}</text>`,
  );

  for (const series of spec.series) {
    if (series.x.length !== series.y.length) {
      throw new Error(`series ${series.label}: x and y lengths differ`);
    }
    if (series.x.length === 1) {
      parts.push(
        `<circle cx="${px(xScale(series.x[0]))}" cy="${px(yScale(series.y[0]))}" r="3" `
        + `fill="${series.style.stroke}"/>`,
      );
      continue;
    }
    const points = series.x
      .map((x, k) => `${px(xScale(x))},${px(yScale(series.y[k]))}`)
      .join(' ');
    parts.push(`<polyline fill="none" ${strokeAttrs(series.style)} points="${points}"/>`);
  }

  if (spec.marker !== undefined) {
    const x = xScale(spec.marker.x);
    parts.push(
      `<line x1="${px(x)}" y1="${px(top)}" x2="${px(x)}" y2="${px(bottom)}" stroke="#555" `
      + 'stroke-width="1" stroke-dasharray="3 3"/>',
    );
    const anchor = x > (left + right) / 2 ? 'end' : 'start';
    const offset = anchor === 'end' ? -6 : 6;
    parts.push(
      `<text x="${px(x + offset)}" y="${px(top + 14)}" text-anchor="${anchor}" ${FONT} `
      + `font-size="12" fill="#333">${escapeXml(spec.marker.label)}</text>`,
    );
  }

  spec.legend.forEach((item, k) => {
    const y = top + 10 + 16 * k;
    const x0 = right - 150;
    parts.push(
      `<line x1="${px(x0)}" y1="${px(y)}" x2="${px(x0 + 22)}" y2="${px(y)}" `
      + `${strokeAttrs(item.style)}/>`,
    );
    parts.push(
      `<text x="${px(x0 + 28)}" y="${px(y + 4)}" ${FONT} font-size="12">`
      + `${escapeXml(item.label)}</text>`,
    );
  });

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
