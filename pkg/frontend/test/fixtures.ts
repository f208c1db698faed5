import type { JobDoc, OptimizeResult, PlanDoc, TrajectoryDoc } from '../src/types.js';

export function makePlan(overrides: Partial<PlanDoc> = {}): PlanDoc {
  return {
    plan_id: 'plan-abc',
    control: {
      stations: ['C1', 'C2'],
      n_steps: 2,
      dt: 43_200,
      t0: 0,
      values: [210_000, 100_000, 200_000, 90_000],
    },
    objective: 4000,
    penalty: 0,
    value: 4000,
    violations: [],
    lineage: { created_at: 0, forced_bypass: [] },
    ...overrides,
  };
}

export function makeTrajectory(
  overrides: Partial<TrajectoryDoc> = {},
): TrajectoryDoc {
  const times = Array.from({ length: 25 }, (_, i) => i * 3600);
  return {
    points: {
      'PT-N5': {
        target_id: 'N5',
        variable: 'pressure',
        unit: 'Pa',
        times,
        values: times.map((t) => 4.5e6 + 1e5 * Math.sin(t / 7200)),
      },
      'FT-C1': {
        target_id: 'C1',
        variable: 'flow',
        unit: 'Nm3/h',
        times,
        values: times.map(() => 210_000),
      },
    },
    t0: 0,
    t_end: 24 * 3600,
    discard_before: 3600,
    ...overrides,
  };
}

export function makeResult(
  overrides: Partial<OptimizeResult> = {},
): OptimizeResult {
  return {
    plan_id: 'plan-whatif',
    objective: 3800,
    penalty: 0,
    value: 3800,
    violations: 0,
    evaluations: 40,
    stop_reason: 'converged',
    budget_limited: false,
    published: false,
    ...overrides,
  };
}

export function makeJob(overrides: Partial<JobDoc> = {}): JobDoc {
  return {
    id: 'job-1',
    kind: 'what-if',
    status: 'done',
    submitted: 0,
    overrides: {},
    result: makeResult(),
    error: null,
    ...overrides,
  };
}

/** Minimal fetch stub: maps "METHOD path" to a responder. */
export function fakeFetch(
  routes: Record<string, (body?: unknown) => { status?: number; json: unknown }>,
) {
  const calls: { path: string; init?: RequestInit }[] = [];
  const fn = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET';
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    calls.push({ path, init });
    const route = routes[`${method} ${path}`];
    if (!route) {
      return new Response(JSON.stringify({ detail: 'not found' }),
        { status: 404 });
    }
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    const out = route(body);
    return new Response(JSON.stringify(out.json),
      { status: out.status ?? 200 });
  };
  return { fn, calls };
}
