/** Compressor activation decisions: form validation, submission, and
 * waiting for the next plan that reflects the decision. */

import { ApiClient, ApiError } from './api.js';
import { pollJob } from './jobs.js';
import type { MileageDoc, PlanDoc } from './types.js';

export interface DecisionForm {
  station: string;
  active: boolean;
  note: string;
}

export interface DecisionConflict {
  kind: 'conflict';
  detail: string;
}

export interface DecisionAccepted {
  kind: 'accepted';
  jobId: string;
  plan: PlanDoc;
}

export function validateDecisionForm(
  form: DecisionForm,
  mileage: MileageDoc,
): string[] {
  const errors: string[] = [];
  const known = mileage.stations.map((s) => s.station_id);
  if (!form.station) {
    errors.push('station is required');
  } else if (!known.includes(form.station)) {
    errors.push(`unknown station '${form.station}'`);
  }
  const current = mileage.activation[form.station];
  if (current !== undefined && current === form.active) {
    errors.push(`station '${form.station}' is already `
      + (form.active ? 'active' : 'deactivated'));
  }
  if (form.note.length > 500) errors.push('note too long (max 500 chars)');
  return errors;
}

/** Submit and wait for the plan that reflects the decision. A 409 from a
 * conflicting pending decision is surfaced verbatim, not retried. */
export async function submitActivation(
  client: ApiClient,
  form: DecisionForm,
): Promise<DecisionAccepted | DecisionConflict> {
  let jobId: string;
  try {
    ({ job_id: jobId } = await client.activation(
      form.station, form.active, form.note));
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      return { kind: 'conflict', detail: err.detail };
    }
    throw err;
  }
  const job = await pollJob(client, jobId);
  if (!job.result) throw new Error(`activation job ${jobId} had no result`);
  const plan = await client.plan(job.result.plan_id);
  return { kind: 'accepted', jobId, plan };
}

/** True when the plan holds the station in bypass for its whole horizon. */
export function planReflectsDeactivation(
  plan: PlanDoc,
  station: string,
): boolean {
  const forced = plan.lineage['forced_bypass'];
  if (Array.isArray(forced) && forced.includes(station)) return true;
  const { stations, values } = plan.control;
  const j = stations.indexOf(station);
  if (j < 0) return false;
  const flows = values.filter((_, i) => i % stations.length === j);
  return flows.every((f) => f === 0);
}
