// Browser entry: hash routing between queue, case detail and dashboard,
// with a 5s auto-refresh on the queue. All policy judgments render
// straight from API responses; conflicts from concurrent reviewers are
// surfaced as banners, never retried automatically.

import { ApiClient, ConsoleSession } from "./api.js";
import {
  canSubmitDecision,
  DECISION_ACTIONS,
  renderCaseDetail,
  renderEffects,
} from "./caseview.js";
import { renderDashboard, renderNotFound } from "./dashboard.js";
import { escapeHtml, QueueView, renderQueue } from "./queue.js";
import { ApiError } from "./types.js";

const root = document.getElementById("app")!;
const session: ConsoleSession = {
  reviewerId: localStorage.getItem("reviewer_id") ?? "reviewer",
  baseUrl: "",
  authToken: localStorage.getItem("auth_token") ?? undefined,
};
const api = new ApiClient(session);
const queue = new QueueView(api);

function banner(kind: "error" | "info", text: string): string {
  return `<div class="banner ${kind}">${escapeHtml(text)}</div>`;
}

async function showQueue(): Promise<void> {
  await queue.refresh();
  root.innerHTML = `
    <div class="toolbar">
      <label>filter
        <select id="source-filter">
          <option value="">all sources</option>
          <option value="screening_blocking">frozen outputs</option>
          <option value="screening_retrospective">retrospective</option>
          <option value="monitor_escalation">escalations</option>
          <option value="access_request_referral">referrals</option>
        </select>
      </label>
      <label>reviewer <input id="reviewer" value="${escapeHtml(session.reviewerId)}"></label>
    </div>
    <div id="queue-body">${renderQueue(queue.state)}</div>`;
  const select = document.getElementById("source-filter") as HTMLSelectElement;
  select.value = queue.filters.source ?? "";
  select.onchange = () => {
    queue.filters.source = select.value || undefined;
    void showQueue();
  };
  const reviewer = document.getElementById("reviewer") as HTMLInputElement;
  reviewer.onchange = () => {
    session.reviewerId = reviewer.value.trim() || "reviewer";
    localStorage.setItem("reviewer_id", session.reviewerId);
  };
  for (const row of root.querySelectorAll<HTMLElement>(".case-row")) {
    row.onclick = () => { location.hash = `#/case/${row.dataset.caseId}`; };
    row.onmouseenter = () => queue.beginInteraction();
    row.onmouseleave = () => queue.endInteraction();
  }
}

async function showCase(caseId: string): Promise<void> {
  const detail = await api.caseDetail(caseId);
  const risk = await api.riskProfile(detail.principal_id).catch(() => null);
  const trend = risk ? risk.events.map((_, i) =>
    risk.events.slice(0, i + 1).reduce((acc, e) => acc + e.weight, 0)) : [];
  const actions = DECISION_ACTIONS.map((a) =>
    `<option value="${a}">${a.replace(/_/g, " ")}</option>`).join("");
  root.innerHTML = `
    <p><a href="#/">← queue</a> ·
       <a href="#/principal/${escapeHtml(detail.principal_id)}">risk dashboard</a></p>
    <div id="case-banner"></div>
    ${renderCaseDetail(detail, null, trend)}
    <form id="decide-form" class="decide">
      <button type="button" id="claim-btn"
        ${detail.state !== "open" ? "disabled" : ""}>claim</button>
      <select id="action">${actions}</select>
      <input id="rationale" placeholder="rationale (required)">
      <button type="submit" id="decide-btn" disabled>decide</button>
    </form>`;
  const bannerBox = document.getElementById("case-banner")!;
  const rationale = document.getElementById("rationale") as HTMLInputElement;
  const action = document.getElementById("action") as HTMLSelectElement;
  const decideBtn = document.getElementById("decide-btn") as HTMLButtonElement;
  const claimBtn = document.getElementById("claim-btn") as HTMLButtonElement;

  const sync = () => {
    decideBtn.disabled = !canSubmitDecision(action.value, rationale.value);
  };
  rationale.oninput = sync;
  action.onchange = sync;

  claimBtn.onclick = async () => {
    try {
      await api.claimCase(caseId);
      await showCase(caseId);
    } catch (err) {
      bannerBox.innerHTML = banner("error", conflictText(err));
    }
  };

  (document.getElementById("decide-form") as HTMLFormElement).onsubmit =
    async (ev) => {
      ev.preventDefault();
      if (!canSubmitDecision(action.value, rationale.value)) return;
      try {
        const effects = await api.decideCase(caseId, action.value, rationale.value);
        bannerBox.innerHTML = renderEffects(effects);
        setTimeout(() => { location.hash = "#/"; }, 900);
      } catch (err) {
        bannerBox.innerHTML = banner("error", conflictText(err));
      }
    };
}

function conflictText(err: unknown): string {
  if (err instanceof ApiError) {
    if (err.code === "conflict") return `claimed by another reviewer: ${err.message}`;
    if (err.code === "invalid-state") return `case already resolved: ${err.message}`;
    return `${err.code}: ${err.message}`;
  }
  return String(err);
}

async function showDashboard(principalId: string): Promise<void> {
  try {
    const profile = await api.riskProfile(principalId);
    root.innerHTML = `<p><a href="#/">← queue</a></p>${renderDashboard(profile)}`;
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      root.innerHTML = `<p><a href="#/">← queue</a></p>${renderNotFound(principalId)}`;
    } else {
      root.innerHTML = banner("error", conflictText(err));
    }
  }
}

async function route(): Promise<void> {
  const hash = location.hash || "#/";
  const caseMatch = hash.match(/^#\/case\/(.+)$/);
  const principalMatch = hash.match(/^#\/principal\/(.+)$/);
  if (caseMatch) return showCase(decodeURIComponent(caseMatch[1]));
  if (principalMatch) return showDashboard(decodeURIComponent(principalMatch[1]));
  return showQueue();
}

window.addEventListener("hashchange", () => void route());
setInterval(() => {
  if ((location.hash || "#/") === "#/") {
    void queue.refresh().then(() => {
      const body = document.getElementById("queue-body");
      if (body) body.innerHTML = renderQueue(queue.state);
    });
  }
}, 5000);
void route();
