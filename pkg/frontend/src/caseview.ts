// Case detail rendering: alignment spans highlighted on the query
// sequence, fired motifs, the principal's event timeline and a risk
// sparkline. Values render exactly as the API reports them.

import { escapeHtml, formatAge } from "./queue.js";
import { CaseDetail, DecisionEffects, RiskEvent, Verdict } from "./types.js";

export const DECISION_ACTIONS = [
  "release_output",
  "deny_output",
  "revoke_grant",
  "revoke_principal",
  "revoke_institution",
  "no_action",
] as const;

/** Split [0, length) into plain/highlighted segments from hit spans. */
export function highlightSegments(length: number,
                                  spans: Array<[number, number]>): Array<{
  start: number; end: number; hit: boolean;
}> {
  const marks = new Array(length).fill(false);
  for (const [s, e] of spans) {
    for (let i = Math.max(0, s); i < Math.min(length, e); i++) marks[i] = true;
  }
  const segments: Array<{ start: number; end: number; hit: boolean }> = [];
  let start = 0;
  for (let i = 1; i <= length; i++) {
    if (i === length || marks[i] !== marks[start]) {
      segments.push({ start, end: i, hit: marks[start] });
      start = i;
    }
  }
  return length === 0 ? [] : segments;
}

export function renderSequence(sequence: string, verdict: Verdict): string {
  const spans = verdict.hits.map((h) => h.query_span);
  const segments = highlightSegments(sequence.length, spans);
  const parts = segments.map(({ start, end, hit }) => {
    const chunk = escapeHtml(sequence.slice(start, end));
    return hit ? `<mark class="hit-span">${chunk}</mark>` : chunk;
  });
  return `<pre class="sequence">${parts.join("")}</pre>`;
}

export function renderHitsTable(verdict: Verdict): string {
  if (verdict.hits.length === 0) return `<p class="muted">no alignment hits</p>`;
  const rows = verdict.hits.map((h) => `
    <tr>
      <td class="mono">${escapeHtml(h.hazard_id)}</td>
      <td>${h.score}</td>
      <td>${h.identity}</td>
      <td>${h.hazard_coverage}</td>
      <td class="mono">[${h.query_span[0]}, ${h.query_span[1]})</td>
      <td class="mono">[${h.hazard_span[0]}, ${h.hazard_span[1]})</td>
    </tr>`).join("");
  return `<table class="hits">
    <thead><tr><th>hazard</th><th>score</th><th>identity</th>
      <th>coverage</th><th>query span</th><th>hazard span</th></tr></thead>
    <tbody>${rows}</tbody></table>`;
}

export function renderMotifs(verdict: Verdict): string {
  const tags = Object.entries(verdict.function_tags);
  if (tags.length === 0) return "";
  const items = tags.map(([tag, positions]) =>
    `<li><span class="tag">${escapeHtml(tag)}</span> at ${positions.join(", ")}</li>`);
  return `<ul class="motifs">${items.join("")}</ul>`;
}

/** Polyline sparkline over per-event decayed scores reported by the API. */
export function sparkline(values: number[], width = 160, height = 28): string {
  if (values.length < 2) return "";
  const max = Math.max(...values, 1e-9);
  const points = values.map((v, i) => {
    const x = (i / (values.length - 1)) * width;
    const y = height - (v / max) * (height - 4) - 2;
    return `${x.toFixed(1)},${y.toFixed(1)}`;
  }).join(" ");
  return `<svg class="sparkline" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}"><polyline points="${points}" ` +
    `fill="none" stroke="currentColor" stroke-width="1.5"/></svg>`;
}

export function renderTimeline(events: RiskEvent[]): string {
  if (events.length === 0) return `<p class="muted">no recorded activity</p>`;
  const rows = events.slice(-50).map((e) => `
    <li class="kind-${escapeHtml(e.kind)}">
      <time>${new Date(e.at * 1000).toISOString()}</time>
      <span>${escapeHtml(e.kind)}</span>
      <span class="weight">w=${e.weight}</span>
    </li>`).join("");
  return `<ol class="timeline">${rows}</ol>`;
}

export function renderCaseDetail(detail: CaseDetail, frozenSequence: string | null,
                                 riskTrend: number[]): string {
  const verdictBlock = detail.verdict ? `
    <section class="evidence">
      <h3>screening verdict <span class="mono">${escapeHtml(detail.verdict.verdict_id.slice(0, 12))}</span></h3>
      <p>status <b>${escapeHtml(detail.verdict.status)}</b>,
         disposition <b>${escapeHtml(detail.verdict.disposition)}</b>,
         purpose mismatch <b>${detail.verdict.purpose_mismatch}</b></p>
      ${frozenSequence ? renderSequence(frozenSequence, detail.verdict) : ""}
      ${renderHitsTable(detail.verdict)}
      ${renderMotifs(detail.verdict)}
    </section>` : "";
  const escalationBlock = detail.escalation ? `
    <section class="evidence">
      <h3>escalation ${escapeHtml(detail.escalation.escalation_id)}</h3>
      <p>rule <b>${escapeHtml(detail.escalation.rule_id)}</b>,
         ${detail.escalation.evidence.length} evidence events</p>
    </section>` : "";
  return `
  <article class="case-detail" data-case-id="${escapeHtml(detail.case_id)}">
    <header>
      <h2>case ${escapeHtml(detail.case_id)}</h2>
      <p>source ${escapeHtml(detail.source)} · priority ${detail.priority} ·
         state ${detail.state} · age ${formatAge(detail.age_seconds)}</p>
      <p>principal <span class="mono">${escapeHtml(detail.principal_id)}</span> ·
         risk score <b class="risk-score">${detail.risk_score}</b>
         ${sparkline(riskTrend)}</p>
    </header>
    ${verdictBlock}
    ${escalationBlock}
  </article>`;
}

export function renderEffects(effects: DecisionEffects): string {
  const lines: string[] = [`decision ${escapeHtml(effects.decision_id)}: ` +
                           `${escapeHtml(effects.action)}`];
  if (effects.released_output) lines.push("frozen output released to requester");
  if (effects.discarded_output) lines.push("frozen output discarded");
  if (effects.revoked_grants.length) {
    lines.push(`${effects.revoked_grants.length} grant(s) revoked`);
  }
  if (effects.revoked_principal) lines.push("principal revoked");
  if (effects.revoked_institution) lines.push("institution revoked");
  if (effects.federation_records.length) {
    lines.push(`${effects.federation_records.length} federation record(s) published`);
  }
  return `<div class="toast success">${lines.map((l) => `<p>${l}</p>`).join("")}</div>`;
}

/** Client-side precondition mirroring the server rule: no empty rationale. */
export function canSubmitDecision(action: string, rationale: string): boolean {
  return DECISION_ACTIONS.includes(action as typeof DECISION_ACTIONS[number])
    && rationale.trim().length > 0;
}
