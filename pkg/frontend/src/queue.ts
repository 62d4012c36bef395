// Review queue view-model. The server owns the ordering; this model
// preserves it verbatim, buffers refreshes while the reviewer is
// interacting with a row, and marks data stale when the API is down.

import { ApiClient } from "./api.js";
import { CaseSummary, QueueFilters } from "./types.js";

export interface QueueState {
  rows: CaseSummary[];
  stale: boolean;
  error: string | null;
  lastRefreshed: number | null;
}

export class QueueView {
  state: QueueState = { rows: [], stale: false, error: null, lastRefreshed: null };
  filters: QueueFilters = { state: "open" };
  private interacting = false;
  private pending: CaseSummary[] | null = null;

  constructor(private api: ApiClient, private now: () => number = Date.now) {}

  async refresh(): Promise<QueueState> {
    try {
      const rows = await this.api.listCases(this.filters);
      if (this.interacting) {
        this.pending = rows;   // applied after the interaction ends
      } else {
        this.state.rows = rows;
        this.state.lastRefreshed = this.now();
      }
      this.state.stale = false;
      this.state.error = null;
    } catch (err) {
      this.state.stale = true;
      this.state.error = err instanceof Error ? err.message : String(err);
    }
    return this.state;
  }

  beginInteraction(): void {
    this.interacting = true;
  }

  endInteraction(): void {
    this.interacting = false;
    if (this.pending !== null) {
      this.state.rows = this.pending;
      this.state.lastRefreshed = this.now();
      this.pending = null;
    }
  }
}

const SOURCE_LABELS: Record<string, string> = {
  screening_blocking: "frozen output",
  screening_retrospective: "retrospective flag",
  monitor_escalation: "behavior escalation",
  access_request_referral: "access referral",
};

export function formatAge(seconds: number): string {
  if (seconds < 90) return `${Math.round(seconds)}s`;
  if (seconds < 5400) return `${Math.round(seconds / 60)}m`;
  if (seconds < 172800) return `${Math.round(seconds / 3600)}h`;
  return `${Math.round(seconds / 86400)}d`;
}

export function escapeHtml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderQueue(state: QueueState): string {
  const banner = state.stale
    ? `<div class="banner error">API unreachable — showing stale data` +
      `${state.error ? `: ${escapeHtml(state.error)}` : ""}</div>`
    : "";
  if (state.rows.length === 0) {
    return `${banner}<div class="empty-state">No cases match the current filter.</div>`;
  }
  const rows = state.rows.map((c) => `
    <tr class="case-row state-${c.state}" data-case-id="${escapeHtml(c.case_id)}">
      <td class="priority">${c.priority}</td>
      <td>${escapeHtml(SOURCE_LABELS[c.source] ?? c.source)}</td>
      <td class="mono">${escapeHtml(c.principal_id)}</td>
      <td>${c.state}${c.reviewer_id ? ` (${escapeHtml(c.reviewer_id)})` : ""}</td>
      <td class="age">${formatAge(c.age_seconds)}</td>
      <td>${c.frozen_output ? "❄ frozen" : ""}</td>
    </tr>`).join("");
  return `${banner}
  <table class="queue">
    <thead><tr><th>priority</th><th>source</th><th>principal</th>
      <th>state</th><th>age</th><th></th></tr></thead>
    <tbody>${rows}</tbody>
  </table>`;
}
