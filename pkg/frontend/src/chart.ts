/** Dependency-free SVG chart rendering for point trajectories.
 *
 * Pure string generation so the chart contract is testable without a DOM:
 * solid polyline for trusted samples, gray for the discarded first step,
 * red markers at violation times.
 */

import type { PointView } from './planView.js';

export interface ChartGeometry {
  width: number;
  height: number;
  padding: number;
}

const DEFAULT_GEOMETRY: ChartGeometry = { width: 640, height: 180, padding: 24 };

interface Scale {
  x: (t: number) => number;
  y: (v: number) => number;
}

function makeScale(point: PointView, g: ChartGeometry): Scale {
  const ts = point.samples.map((s) => s.t);
  const vs = point.samples.map((s) => s.v);
  const t0 = Math.min(...ts);
  const t1 = Math.max(...ts);
  let v0 = Math.min(...vs);
  let v1 = Math.max(...vs);
  if (v1 === v0) {
    v0 -= 1;
    v1 += 1;
  }
  const innerW = g.width - 2 * g.padding;
  const innerH = g.height - 2 * g.padding;
  return {
    x: (t) => g.padding + ((t - t0) / (t1 - t0 || 1)) * innerW,
    y: (v) => g.height - g.padding - ((v - v0) / (v1 - v0)) * innerH,
  };
}

function polyline(
  samples: { t: number; v: number }[],
  scale: Scale,
  cls: string,
): string {
  if (samples.length === 0) return '';
  const pts = samples
    .map((s) => `${scale.x(s.t).toFixed(1)},${scale.y(s.v).toFixed(1)}`)
    .join(' ');
  return `<polyline class="${cls}" fill="none" points="${pts}"/>`;
}

export function renderPointChart(
  point: PointView,
  geometry: ChartGeometry = DEFAULT_GEOMETRY,
): string {
  const scale = makeScale(point, geometry);
  const discarded = point.samples.filter((s) => s.discarded);
  const trusted = point.samples.filter((s) => !s.discarded);
  // bridge the gray and solid segments so the line is continuous
  if (discarded.length > 0 && trusted.length > 0) {
    discarded.push(trusted[0]);
  }
  const parts = [
    `<svg viewBox="0 0 ${geometry.width} ${geometry.height}" `
      + `data-point="${point.pointId}" data-unit="${point.unit}">`,
    polyline(discarded, scale, 'discarded'),
    polyline(trusted, scale, 'trusted'),
  ];
  for (const m of point.markers) {
    parts.push(
      `<circle class="violation" r="4" cx="${scale.x(m.t).toFixed(1)}" `
        + `cy="${scale.y(m.value).toFixed(1)}">`
        + `<title>${m.variable} ${m.bound} ${m.limit}</title></circle>`,
    );
  }
  parts.push('</svg>');
  return parts.filter((p) => p !== '').join('\n');
}
