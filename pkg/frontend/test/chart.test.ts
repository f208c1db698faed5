import { describe, expect, it } from 'vitest';

import { renderPointChart } from '../src/chart.js';
import { buildPlanView } from '../src/planView.js';
import { makePlan, makeTrajectory } from './fixtures.js';

function pointView(violations = 0) {
  const plan = makePlan({
    violations: Array.from({ length: violations }, (_, i) => ({
      element_id: 'N5', variable: 'pressure', time: (i + 2) * 3600,
      bound: 'min' as const, limit: 4.6e6, value: 4.5e6, magnitude: 1e5,
    })),
  });
  const view = buildPlanView(plan, makeTrajectory());
  return view.points.find((p) => p.pointId === 'PT-N5')!;
}

describe('renderPointChart', () => {
  it('draws gray and solid segments plus violation markers', () => {
    const svg = renderPointChart(pointView(2));
    expect(svg).toContain('class="discarded"');
    expect(svg).toContain('class="trusted"');
    expect(svg.match(/class="violation"/g)).toHaveLength(2);
    expect(svg).toContain('data-point="PT-N5"');
    expect(svg).toContain('data-unit="Pa"');
  });

  it('omits the gray segment when nothing is discarded', () => {
    const plan = makePlan();
    const traj = makeTrajectory({ discard_before: 0 });
    const view = buildPlanView(plan, traj);
    const svg = renderPointChart(view.points[0]);
    expect(svg).not.toContain('class="discarded"');
  });

  it('keeps the line continuous across the trust boundary', () => {
    const svg = renderPointChart(pointView());
    const discarded = svg.match(/class="discarded"[^/]*points="([^"]*)"/)![1];
    const trusted = svg.match(/class="trusted"[^/]*points="([^"]*)"/)![1];
    expect(discarded.split(' ').pop()).toBe(trusted.split(' ')[0]);
  });

  it('survives a flat series', () => {
    const view = buildPlanView(makePlan(), makeTrajectory());
    const flat = view.points.find((p) => p.pointId === 'FT-C1')!;
    expect(renderPointChart(flat)).toContain('class="trusted"');
  });
});
