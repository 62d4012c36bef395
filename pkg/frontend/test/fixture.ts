// In-memory fixture gateway speaking the /v1 wire shapes, for smoke
// tests. It mimics server-side claim/decide semantics including
// conflicts, but contains none of the real policy engine.

import { FetchLike } from "../src/api.js";
import { CaseDetail, RiskProfile } from "../src/types.js";

export interface FixtureState {
  cases: CaseDetail[];
  frozen: Record<string, string>;          // payload ref -> sequence
  risk: Record<string, RiskProfile>;
  requests: Array<{ method: string; path: string; body: unknown }>;
}

export function makeFixture(): FixtureState {
  return { cases: [], frozen: {}, risk: {}, requests: [] };
}

function json(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function fixtureFetch(state: FixtureState): FetchLike {
  return async (url: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    state.requests.push({ method, path, body });

    if (path === "/v1/healthz") return json({ status: "ok" });

    if (path.startsWith("/v1/cases") && method === "GET") {
      const caseMatch = path.match(/^\/v1\/cases\/([^/?]+)$/);
      if (caseMatch) {
        const found = state.cases.find((c) => c.case_id === caseMatch[1]);
        return found ? json(found) : json({ error: "not-found" }, 404);
      }
      const params = new URLSearchParams(path.split("?")[1] ?? "");
      let rows = state.cases;
      const stateFilter = params.get("state");
      const sourceFilter = params.get("source");
      if (stateFilter) rows = rows.filter((c) => c.state === stateFilter);
      if (sourceFilter) rows = rows.filter((c) => c.source === sourceFilter);
      return json({ cases: rows });
    }

    const claim = path.match(/^\/v1\/cases\/([^/]+)\/claim$/);
    if (claim && method === "POST") {
      const found = state.cases.find((c) => c.case_id === claim[1]);
      if (!found) return json({ error: "not-found" }, 404);
      if (found.state === "resolved") return json({ error: "invalid-state" }, 409);
      if (found.state === "in_review") {
        return json({ error: "conflict",
                      message: `claimed by ${found.reviewer_id}` }, 409);
      }
      found.state = "in_review";
      found.reviewer_id = (body as { reviewer_id: string }).reviewer_id;
      return json(found);
    }

    const decide = path.match(/^\/v1\/cases\/([^/]+)\/decide$/);
    if (decide && method === "POST") {
      const found = state.cases.find((c) => c.case_id === decide[1]);
      const req = body as { reviewer_id: string; action: string; rationale: string };
      if (!found) return json({ error: "not-found" }, 404);
      if (found.state === "resolved") {
        return json({ error: "invalid-state", message: "already resolved" }, 409);
      }
      if (found.reviewer_id !== req.reviewer_id) {
        return json({ error: "forbidden", message: "not your claim" }, 403);
      }
      if (!req.rationale.trim()) return json({ error: "invalid-decision" }, 400);
      found.state = "resolved";
      const released = req.action === "release_output" && found.frozen_output
        ? { ref: found.frozen_output,
            sequence: state.frozen[found.frozen_output] ?? null }
        : null;
      return json({
        decision_id: `dec-${found.case_id}`,
        case_id: found.case_id,
        action: req.action,
        released_output: released,
        discarded_output: req.action === "deny_output" ? found.frozen_output : null,
        revoked_grants: req.action === "revoke_grant" ? [found.grant_id] : [],
        revoked_principal:
          req.action === "revoke_principal" ? found.principal_id : null,
        revoked_institution: null,
        federation_records: req.action === "revoke_principal" ? ["rec-1"] : [],
      });
    }

    const risk = path.match(/^\/v1\/principals\/([^/]+)\/risk$/);
    if (risk && method === "GET") {
      const profile = state.risk[decodeURIComponent(risk[1])];
      return profile ? json(profile) : json({ error: "not-found" }, 404);
    }

    return json({ error: "not-found", message: path }, 404);
  };
}

let nextCase = 0;

export function addCase(state: FixtureState, overrides: Partial<CaseDetail> = {}): CaseDetail {
  const id = `case-${nextCase++}`;
  const doc: CaseDetail = {
    case_id: id,
    source: "screening_blocking",
    principal_id: "pr-1",
    evidence: `verdict-${id}`,
    priority: 25,
    state: "open",
    created_at: 1_700_000_000,
    age_seconds: 60,
    frozen_output: null,
    reviewer_id: null,
    grant_id: "grant-1",
    risk_score: 0,
    verdict: null,
    escalation: null,
    ...overrides,
  };
  state.cases.push(doc);
  return doc;
}
