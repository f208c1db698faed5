/** Thin typed HTTP client. Every number the console shows comes through
 * here: the UI never derives plan data locally. */

import type {
  JobDoc, MileageDoc, PlanDoc, TrajectoryDoc, WhatIfOverrides,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
    public readonly path: string,
  ) {
    super(`${status} on ${path}: ${detail}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = await res.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail, path);
    }
    return res.json() as Promise<T>;
  }

  get<T>(path: string): Promise<T> {
    return this.request<T>(path);
  }

  post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  latestPlan(): Promise<PlanDoc> {
    return this.get('/plan/latest');
  }

  plan(planId: string): Promise<PlanDoc> {
    return this.get(`/plan/${encodeURIComponent(planId)}`);
  }

  trajectory(planId: string): Promise<TrajectoryDoc> {
    return this.get(`/trajectory/${encodeURIComponent(planId)}`);
  }

  job(jobId: string): Promise<JobDoc> {
    return this.get(`/jobs/${encodeURIComponent(jobId)}`);
  }

  mileage(): Promise<MileageDoc> {
    return this.get('/mileage');
  }

  optimize(overrides: WhatIfOverrides): Promise<{ job_id: string }> {
    return this.post('/optimize', overrides);
  }

  activation(station: string, active: boolean, note: string):
      Promise<{ job_id: string }> {
    return this.post('/operator/activation', { station, active, note });
  }
}
