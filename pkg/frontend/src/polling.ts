/** Job polling with a monotone progress reducer. */

import type { Api } from './api.js';
import type { JobSnapshot } from './types.js';

export const POLL_INTERVAL_MS = 1500;
export const TERMINAL_STAGES = ['done', 'failed'];

export interface ProgressView {
  stage: string;
  percent: number; // never decreases within one job view
  error: string | null;
  terminal: boolean;
}

export const initialProgress: ProgressView = {
  stage: 'queued',
  percent: 0,
  error: null,
  terminal: false,
};

/**
 * Fold one polled snapshot into the progress view. The bar never moves
 * backwards even if responses arrive late or out of order.
 */
export function reduceProgress(view: ProgressView, snapshot: JobSnapshot): ProgressView {
  if (view.terminal) return view;
  return {
    stage: snapshot.stage,
    percent: Math.max(view.percent, snapshot.percent),
    error: snapshot.error,
    terminal: TERMINAL_STAGES.includes(snapshot.stage),
  };
}

export function replayTrace(snapshots: JobSnapshot[]): ProgressView[] {
  const views: ProgressView[] = [];
  let view = initialProgress;
  for (const snapshot of snapshots) {
    view = reduceProgress(view, snapshot);
    views.push(view);
  }
  return views;
}

export class JobPoller {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private view: ProgressView = initialProgress;

  constructor(
    private readonly api: Api,
    private readonly jobId: string,
    private readonly onUpdate: (view: ProgressView) => void,
    private readonly intervalMs: number = POLL_INTERVAL_MS,
  ) {}

  start(): void {
    void this.tick();
  }

  stop(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }

  private async tick(): Promise<void> {
    let snapshot: JobSnapshot;
    try {
      snapshot = await this.api.job(this.jobId);
    } catch (error) {
      this.view = { ...this.view, error: String(error), terminal: true };
      this.onUpdate(this.view);
      return;
    }
    this.view = reduceProgress(this.view, snapshot);
    this.onUpdate(this.view);
    if (!this.view.terminal) {
      this.timer = setTimeout(() => void this.tick(), this.intervalMs);
    }
  }
}
