/**
 * De-identification review model.
 *
 * Loads the masked session plus its residual report, gates the approve
 * button on a clean report, and applies verify decisions by updating local
 * state from the POST response alone; the status chip flips without a
 * reload or refetch.
 */

import type { ApiClient } from "./api.js";
import type { DeidHit, DeidReport, SessionDoc } from "./types.js";

export interface Warning {
  category: string;
  location: string; // "utterance 3, chars 10-24"
}

function describeHit(hit: DeidHit): Warning {
  return {
    category: hit.category,
    location: `utterance ${hit.utterance_index}, chars ${hit.char_start}-${hit.char_end}`,
  };
}

export class DeidReview {
  private readonly api: ApiClient;
  session: SessionDoc | null = null;
  report: DeidReport | null = null;
  error: string | null = null;

  constructor(api: ApiClient) {
    this.api = api;
  }

  async load(sessionId: string): Promise<void> {
    this.session = await this.api.getSession(sessionId);
    this.report = null;
    this.error = null;
    if (this.session.deid_status !== "raw") {
      this.report = await this.api.deidReport(sessionId);
    }
  }

  get status(): string {
    return this.session?.deid_status ?? "unknown";
  }

  /** Raw sessions have nothing to review yet. */
  get needsMasking(): boolean {
    return this.session?.deid_status === "raw";
  }

  get warnings(): Warning[] {
    if (!this.report) return [];
    return [...this.report.residual_hits, ...this.report.leaked_originals].map(describeHit);
  }

  get canApprove(): boolean {
    return (
      this.session?.deid_status === "masked" &&
      this.report !== null &&
      this.report.status === "clean"
    );
  }

  get canReject(): boolean {
    return this.session?.deid_status === "masked" || this.session?.deid_status === "verified";
  }

  async approve(notes = ""): Promise<void> {
    if (!this.session) return;
    this.session = await this.api.deidVerify(this.session.id, "approve", notes);
  }

  async reject(notes = ""): Promise<void> {
    if (!this.session) return;
    this.session = await this.api.deidVerify(this.session.id, "reject", notes);
    this.report = null; // the mask map is gone; the old report is stale
  }
}
