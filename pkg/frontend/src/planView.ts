/** View-model derivation for the plan screen.
 *
 * Pure functions from API payloads to render-ready structures; all values
 * are carried through unchanged so every displayed number traces back to a
 * server response.
 */

import type { PlanDoc, TrajectoryDoc, Violation } from './types.js';

export interface Sample {
  t: number;
  v: number;
  /** True for the initial transient step that state estimation cannot
   * vouch for; rendered grayed out, never hidden. */
  discarded: boolean;
}

export interface ViolationMarker {
  t: number;
  variable: string;
  bound: 'min' | 'max';
  limit: number;
  value: number;
}

export interface PointView {
  pointId: string;
  targetId: string;
  unit: string;
  samples: Sample[];
  markers: ViolationMarker[];
}

export interface PlanView {
  planId: string;
  objective: number;
  penalty: number;
  value: number;
  createdAt: number | null;
  stale: boolean;
  horizonSeconds: number;
  points: PointView[];
  /** Violations whose element has no charted measurement point; shown in
   * the summary strip instead of inline. */
  unchartedViolations: Violation[];
}

export const STALE_AFTER_S = 2 * 3600;

export function buildPlanView(
  plan: PlanDoc,
  trajectory: TrajectoryDoc,
  nowEpochS: number | null = null,
): PlanView {
  const byTarget = new Map<string, Violation[]>();
  for (const v of plan.violations) {
    const list = byTarget.get(v.element_id) ?? [];
    list.push(v);
    byTarget.set(v.element_id, list);
  }

  const chartedTargets = new Set<string>();
  const points: PointView[] = Object.entries(trajectory.points)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([pointId, s]) => {
      chartedTargets.add(s.target_id);
      const samples = s.times.map((t, i) => ({
        t,
        v: s.values[i],
        discarded: t < trajectory.discard_before,
      }));
      const markers = (byTarget.get(s.target_id) ?? []).map((v) => ({
        t: v.time,
        variable: v.variable,
        bound: v.bound,
        limit: v.limit,
        value: v.value,
      }));
      return { pointId, targetId: s.target_id, unit: s.unit, samples, markers };
    });

  const createdAt = typeof plan.lineage['created_at'] === 'number'
    ? (plan.lineage['created_at'] as number)
    : null;
  const stale = nowEpochS !== null && createdAt !== null
    && nowEpochS - createdAt > STALE_AFTER_S;

  return {
    planId: plan.plan_id,
    objective: plan.objective,
    penalty: plan.penalty,
    value: plan.value,
    createdAt,
    stale,
    horizonSeconds: trajectory.t_end - trajectory.t0,
    points,
    unchartedViolations: plan.violations.filter(
      (v) => !chartedTargets.has(v.element_id),
    ),
  };
}

/** Every inline marker must reference a charted point; anything else must
 * have landed in the uncharted list. Used by tests and as a render guard. */
export function markersAreConsistent(view: PlanView, plan: PlanDoc): boolean {
  const inline = view.points.reduce((n, p) => n + p.markers.length, 0);
  return inline + view.unchartedViolations.length >= plan.violations.length;
}
