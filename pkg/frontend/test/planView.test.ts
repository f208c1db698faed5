import { describe, expect, it } from 'vitest';

import {
  STALE_AFTER_S, buildPlanView, markersAreConsistent,
} from '../src/planView.js';
import type { Violation } from '../src/types.js';
import { makePlan, makeTrajectory } from './fixtures.js';

const N5_VIOLATION: Violation = {
  element_id: 'N5',
  variable: 'pressure',
  time: 7200,
  bound: 'min',
  limit: 4.0e6,
  value: 3.9e6,
  magnitude: 1e5,
};

describe('buildPlanView', () => {
  it('derives the view model without inventing numbers', () => {
    const view = buildPlanView(makePlan(), makeTrajectory());
    expect(view).toMatchSnapshot();
  });

  it('covers the full horizon with one sample per step', () => {
    const view = buildPlanView(makePlan(), makeTrajectory());
    expect(view.horizonSeconds).toBe(24 * 3600);
    for (const p of view.points) {
      expect(p.samples.length).toBe(25);
      expect(p.samples[p.samples.length - 1].t - p.samples[0].t)
        .toBeGreaterThanOrEqual(view.horizonSeconds);
    }
  });

  it('grays out exactly the untrusted first step', () => {
    const view = buildPlanView(makePlan(), makeTrajectory());
    const flags = view.points[0].samples.map((s) => s.discarded);
    expect(flags[0]).toBe(true);
    expect(flags.slice(1).every((d) => !d)).toBe(true);
  });

  it('places violation markers on the charted point', () => {
    const plan = makePlan({ violations: [N5_VIOLATION] });
    const view = buildPlanView(plan, makeTrajectory());
    const pt = view.points.find((p) => p.pointId === 'PT-N5')!;
    expect(pt.markers).toEqual([{
      t: 7200, variable: 'pressure', bound: 'min',
      limit: 4.0e6, value: 3.9e6,
    }]);
    expect(view.unchartedViolations).toEqual([]);
    expect(markersAreConsistent(view, plan)).toBe(true);
  });

  it('routes violations without a charted point to the summary list', () => {
    const orphan = { ...N5_VIOLATION, element_id: 'N99' };
    const plan = makePlan({ violations: [orphan] });
    const view = buildPlanView(plan, makeTrajectory());
    expect(view.points.every((p) => p.markers.length === 0)).toBe(true);
    expect(view.unchartedViolations).toEqual([orphan]);
    expect(markersAreConsistent(view, plan)).toBe(true);
  });

  it('flags staleness from plan age, never by default', () => {
    const plan = makePlan({ lineage: { created_at: 1000 } });
    const fresh = buildPlanView(plan, makeTrajectory(), 1000 + 60);
    const old = buildPlanView(plan, makeTrajectory(),
      1000 + STALE_AFTER_S + 1);
    expect(fresh.stale).toBe(false);
    expect(old.stale).toBe(true);
    expect(buildPlanView(plan, makeTrajectory()).stale).toBe(false);
  });
});
