/** Wire types for the gridpress dispatcher API. */

export interface ControlSchedule {
  stations: string[];
  n_steps: number;
  dt: number;
  t0: number;
  values: number[];
}

export interface Violation {
  element_id: string;
  variable: string;
  time: number;
  bound: 'min' | 'max';
  limit: number;
  value: number;
  magnitude: number;
}

export interface PlanDoc {
  plan_id: string;
  control: ControlSchedule;
  objective: number;
  penalty: number;
  value: number;
  violations: Violation[];
  lineage: Record<string, unknown>;
}

export interface PointSeries {
  target_id: string;
  variable: string;
  unit: string;
  times: number[];
  values: number[];
}

export interface TrajectoryDoc {
  points: Record<string, PointSeries>;
  t0: number;
  t_end: number;
  discard_before: number;
}

export interface OptimizeResult {
  plan_id: string;
  objective: number;
  penalty: number;
  value: number;
  violations: number;
  evaluations: number;
  stop_reason: string;
  budget_limited: boolean;
  published: boolean;
}

export interface JobDoc {
  id: string;
  kind: string;
  status: 'queued' | 'running' | 'done' | 'failed';
  submitted: number;
  overrides: Record<string, unknown>;
  result: OptimizeResult | null;
  error: string | null;
}

export interface MileageStation {
  station_id: string;
  hours: Record<string, number>;
  suggestion: {
    station_id: string;
    activate: string;
    rest: string;
    spread: number;
  } | null;
}

export interface MileageDoc {
  stations: MileageStation[];
  activation: Record<string, boolean>;
}

export interface WhatIfOverrides {
  budget_evals?: number;
  budget_seconds?: number;
  intake_pressure_factor?: number;
  demand_factor?: number;
  activation?: Record<string, boolean>;
}
