// Per-principal risk dashboard. Scores and weights are displayed
// exactly as the API returns them; the console never recomputes decay
// or any other policy number.

import { sparkline, renderTimeline } from "./caseview.js";
import { escapeHtml } from "./queue.js";
import { RiskProfile } from "./types.js";

export function cumulativeWeights(profile: RiskProfile): number[] {
  // plotting aid only: running sum of reported raw weights, no decay math
  const values: number[] = [];
  let total = 0;
  for (const e of profile.events) {
    total += e.weight;
    values.push(total);
  }
  return values;
}

export function renderDashboard(profile: RiskProfile): string {
  const trend = cumulativeWeights(profile);
  const flagged = profile.events.filter((e) =>
    e.kind === "output_flagged_compatible" || e.kind === "output_flagged_incompatible");
  return `
  <section class="dashboard" data-principal-id="${escapeHtml(profile.principal_id)}">
    <h2>principal <span class="mono">${escapeHtml(profile.principal_id)}</span></h2>
    <p class="score-line">current risk score
      <b class="risk-score">${profile.score}</b>
      <span class="muted">(half-life ${profile.half_life_days} days)</span>
    </p>
    <p>${profile.events.length} events ·
       <span class="flag-count">${flagged.length}</span> flagged</p>
    ${trend.length >= 2 ? sparkline(trend) : ""}
    ${renderTimeline(profile.events)}
  </section>`;
}

export function renderNotFound(principalId: string): string {
  return `<div class="empty-state">principal ` +
    `<span class="mono">${escapeHtml(principalId)}</span> not found</div>`;
}
