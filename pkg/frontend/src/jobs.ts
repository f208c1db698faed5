/** Polling for long-running optimize jobs. The API answers immediately
 * with a job id; the console polls until a terminal state. */

import type { ApiClient } from './api.js';
import type { JobDoc } from './types.js';

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  onUpdate?: (job: JobDoc) => void;
}

export class JobFailedError extends Error {
  constructor(public readonly job: JobDoc) {
    super(job.error ?? `job ${job.id} failed`);
  }
}

export async function pollJob(
  client: ApiClient,
  jobId: string,
  opts: PollOptions = {},
): Promise<JobDoc> {
  const interval = opts.intervalMs ?? 1000;
  const deadline = Date.now() + (opts.timeoutMs ?? 300_000);
  for (;;) {
    const job = await client.job(jobId);
    opts.onUpdate?.(job);
    if (job.status === 'done') return job;
    if (job.status === 'failed') throw new JobFailedError(job);
    if (Date.now() >= deadline) {
      throw new Error(`job ${jobId} still ${job.status} after timeout`);
    }
    await sleep(interval);
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
