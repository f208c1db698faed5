/** Console wiring: poll the latest plan, render charts and forms.
 *
 * Deliberately frameworkless — the view models and API client carry the
 * logic; this file only touches the DOM.
 */

import { ApiClient, ApiError } from './api.js';
import {
  planReflectsDeactivation, submitActivation, validateDecisionForm,
} from './activation.js';
import { renderPointChart } from './chart.js';
import { buildPlanView, type PlanView } from './planView.js';
import type { MileageDoc, PlanDoc } from './types.js';
import { compareToActive, runWhatIf } from './whatif.js';

const POLL_INTERVAL_MS = 15 * 60 * 1000; // one control cycle

export class Console {
  private activePlan: PlanDoc | null = null;
  private inFlight = new Set<string>();

  constructor(
    private readonly client: ApiClient,
    private readonly root: Document,
  ) {}

  async refresh(): Promise<void> {
    if (this.inFlight.has('plan')) return;
    this.inFlight.add('plan');
    try {
      const plan = await this.client.latestPlan();
      const trajectory = await this.client.trajectory(plan.plan_id);
      this.activePlan = plan;
      this.renderPlan(buildPlanView(plan, trajectory, Date.now() / 1000));
      this.clearBanner();
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.showEmptyState();
      } else {
        // keep whatever was on screen, but mark it untrustworthy
        this.showBanner(`service unreachable: ${String(err)}`);
        this.root.getElementById('plan')?.classList.add('stale');
      }
    } finally {
      this.inFlight.delete('plan');
    }
  }

  start(): void {
    void this.refresh();
    setInterval(() => void this.refresh(), POLL_INTERVAL_MS);
  }

  private renderPlan(view: PlanView): void {
    const el = this.root.getElementById('plan');
    if (!el) return;
    el.classList.toggle('stale', view.stale);
    const summary = `plan ${view.planId} — fuel ${view.objective.toFixed(1)}`
      + ` Nm3, penalty ${view.penalty.toFixed(1)}`
      + (view.stale ? ' (STALE)' : '');
    const charts = view.points
      .map((p) => `<figure><figcaption>${p.pointId} [${p.unit}]`
        + `</figcaption>${renderPointChart(p)}</figure>`)
      .join('\n');
    const uncharted = view.unchartedViolations
      .map((v) => `<li>${v.element_id} ${v.variable} ${v.bound}</li>`)
      .join('');
    el.innerHTML = `<h2>${summary}</h2>${charts}`
      + (uncharted ? `<ul class="violations">${uncharted}</ul>` : '');
  }

  async submitDecision(station: string, active: boolean, note: string):
      Promise<void> {
    const mileage = await this.client.mileage();
    const errors = validateDecisionForm({ station, active, note }, mileage);
    if (errors.length > 0) {
      this.showBanner(errors.join('; '));
      return;
    }
    this.showBanner(`decision for ${station} pending…`);
    const outcome = await submitActivation(this.client,
      { station, active, note });
    if (outcome.kind === 'conflict') {
      this.showBanner(`rejected: ${outcome.detail}`);
      return;
    }
    const applied = !active
      ? planReflectsDeactivation(outcome.plan, station)
      : true;
    this.showBanner(applied
      ? `plan ${outcome.plan.plan_id} reflects the decision`
      : `plan ${outcome.plan.plan_id} published, check station state`);
    await this.refresh();
  }

  async runComparison(overrides: Record<string, unknown>): Promise<void> {
    if (!this.activePlan) {
      this.showBanner('no active plan to compare against');
      return;
    }
    const result = await runWhatIf(this.client, overrides);
    const cmp = compareToActive(this.activePlan, result);
    this.showBanner(`what-if ${cmp.whatIfPlanId}: ${cmp.label}`);
  }

  renderMileage(doc: MileageDoc): string {
    return doc.stations
      .map((s) => {
        const hours = Object.entries(s.hours)
          .map(([m, h]) => `${m}: ${h} h`)
        .join(', ');
        const hint = s.suggestion
          ? ` — suggest running ${s.suggestion.activate}, `
            + `resting ${s.suggestion.rest}`
          : '';
        return `<div>${s.station_id} (${hours})${hint}</div>`;
      })
      .join('\n');
  }

  private showBanner(text: string): void {
    const el = this.root.getElementById('banner');
    if (el) {
      el.textContent = text;
      el.classList.remove('hidden');
    }
  }

  private clearBanner(): void {
    this.root.getElementById('banner')?.classList.add('hidden');
  }

  private showEmptyState(): void {
    const el = this.root.getElementById('plan');
    if (el) {
      el.innerHTML = '<p>No plan published yet. '
        + '<button onclick="location.reload()">Retry</button></p>';
    }
  }
}

export function main(): void {
  const base = (window as { GRIDPRESS_API?: string }).GRIDPRESS_API
    ?? 'http://127.0.0.1:8080';
  new Console(new ApiClient(base), document).start();
}
