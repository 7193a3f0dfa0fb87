/**
 * Run monitor: polls one run until it reaches a terminal state.
 *
 * Displayed counts are clamped to never decrease. Polls can arrive out of
 * order (a slow response overtaking a fast one), and a progress bar that
 * moves backwards reads as a bug even when the data is merely stale.
 */

import type { ApiClient } from "./api.js";
import type { RunCounts, RunDoc, RunState } from "./types.js";

export const DEFAULT_POLL_MS = 2000;

const TERMINAL: RunState[] = ["completed", "completed_with_errors", "failed", "cancelled"];

export function isTerminal(state: RunState): boolean {
  return TERMINAL.includes(state);
}

export interface MonitorOptions {
  intervalMs?: number;
  onUpdate?: (doc: RunDoc, displayed: RunCounts) => void;
  /** injected in tests; window.setInterval otherwise */
  schedule?: (fn: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

export class RunMonitor {
  private readonly api: ApiClient;
  private readonly runId: string;
  private readonly options: MonitorOptions;
  private handle: unknown = null;
  private displayed: RunCounts = { total_items: 0, succeeded: 0, failed_items: 0 };
  latest: RunDoc | null = null;

  constructor(api: ApiClient, runId: string, options: MonitorOptions = {}) {
    this.api = api;
    this.runId = runId;
    this.options = options;
  }

  get intervalMs(): number {
    return this.options.intervalMs ?? DEFAULT_POLL_MS;
  }

  get counts(): RunCounts {
    return { ...this.displayed };
  }

  /** Fetch once and fold the reply into the monotone view. */
  async tick(): Promise<RunDoc> {
    const doc = await this.api.getRun(this.runId);
    this.latest = doc;
    this.displayed = {
      total_items: Math.max(this.displayed.total_items, doc.counts.total_items),
      succeeded: Math.max(this.displayed.succeeded, doc.counts.succeeded),
      failed_items: Math.max(this.displayed.failed_items, doc.counts.failed_items),
    };
    this.options.onUpdate?.(doc, this.counts);
    if (isTerminal(doc.state)) this.stop();
    return doc;
  }

  start(): void {
    if (this.handle !== null) return;
    const schedule = this.options.schedule ?? ((fn, ms) => setInterval(fn, ms));
    this.handle = schedule(() => {
      void this.tick().catch(() => this.stop());
    }, this.intervalMs);
  }

  stop(): void {
    if (this.handle === null) return;
    const cancel = this.options.cancel ?? ((h) => clearInterval(h as number));
    cancel(this.handle);
    this.handle = null;
  }

  get running(): boolean {
    return this.handle !== null;
  }
}
