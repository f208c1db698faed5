/** What-if exploration: launch a sandboxed optimize job and compare its
 * outcome against the active plan. What-if plans are never published, so
 * the production view is untouched. */

import type { ApiClient } from './api.js';
import { pollJob, type PollOptions } from './jobs.js';
import type { OptimizeResult, PlanDoc, WhatIfOverrides } from './types.js';

export interface Comparison {
  activePlanId: string;
  whatIfPlanId: string;
  activeObjective: number;
  whatIfObjective: number;
  /** What-if minus active, in Nm3 of fuel over the horizon. */
  objectiveDelta: number;
  /** Signed relative change; 0 when the active objective is 0. */
  relativeDelta: number;
  budgetLimited: boolean;
  label: string;
}

export async function runWhatIf(
  client: ApiClient,
  overrides: WhatIfOverrides,
  poll: PollOptions = {},
): Promise<OptimizeResult> {
  const { job_id } = await client.optimize(overrides);
  const job = await pollJob(client, job_id, poll);
  if (!job.result) throw new Error(`job ${job_id} finished without a result`);
  return job.result;
}

export function compareToActive(
  active: PlanDoc,
  whatIf: OptimizeResult,
): Comparison {
  const delta = whatIf.objective - active.objective;
  const relative = active.objective !== 0 ? delta / active.objective : 0;
  return {
    activePlanId: active.plan_id,
    whatIfPlanId: whatIf.plan_id,
    activeObjective: active.objective,
    whatIfObjective: whatIf.objective,
    objectiveDelta: delta,
    relativeDelta: relative,
    budgetLimited: whatIf.budget_limited,
    label: describeComparison(delta, relative, whatIf.budget_limited),
  };
}

export function describeComparison(
  delta: number,
  relative: number,
  budgetLimited: boolean,
): string {
  let text: string;
  if (delta === 0) {
    text = 'no change in fuel use';
  } else {
    const pct = (Math.abs(relative) * 100).toFixed(1);
    text = delta < 0
      ? `saves ${(-delta).toFixed(1)} Nm3 (${pct}%)`
      : `costs ${delta.toFixed(1)} Nm3 more (${pct}%)`;
  }
  return budgetLimited ? `${text} — budget-limited` : text;
}
