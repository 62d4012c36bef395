// Thin typed client for the gateway /v1 API. Fetch is injected so the
// smoke suite can run against a fixture gateway.

import {
  ApiError,
  CaseDetail,
  CaseSummary,
  DecisionEffects,
  Institution,
  QueueFilters,
  RiskProfile,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ConsoleSession {
  reviewerId: string;
  baseUrl: string;
  authToken?: string;
}

export class ApiClient {
  constructor(private session: ConsoleSession,
              private fetchImpl: FetchLike = fetch.bind(globalThis)) {}

  get reviewerId(): string {
    return this.session.reviewerId;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.session.authToken) {
      headers["authorization"] = `Bearer ${this.session.authToken}`;
    }
    const resp = await this.fetchImpl(`${this.session.baseUrl}${path}`, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const doc = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, doc.error ?? "error", doc.message ?? resp.statusText);
    }
    return doc as T;
  }

  async listCases(filters: QueueFilters = {}): Promise<CaseSummary[]> {
    const params = new URLSearchParams();
    if (filters.state) params.set("state", filters.state);
    if (filters.source) params.set("source", filters.source);
    if (filters.principal_id) params.set("principal_id", filters.principal_id);
    const qs = params.toString();
    const doc = await this.request<{ cases: CaseSummary[] }>(
      "GET", `/v1/cases${qs ? `?${qs}` : ""}`);
    return doc.cases;
  }

  caseDetail(caseId: string): Promise<CaseDetail> {
    return this.request("GET", `/v1/cases/${caseId}`);
  }

  claimCase(caseId: string): Promise<CaseSummary> {
    return this.request("POST", `/v1/cases/${caseId}/claim`,
                        { reviewer_id: this.session.reviewerId });
  }

  decideCase(caseId: string, action: string, rationale: string): Promise<DecisionEffects> {
    // every enforcement action round-trips through this endpoint
    return this.request("POST", `/v1/cases/${caseId}/decide`, {
      reviewer_id: this.session.reviewerId,
      action,
      rationale,
    });
  }

  riskProfile(principalId: string): Promise<RiskProfile> {
    return this.request("GET", `/v1/principals/${principalId}/risk`);
  }

  async institutions(): Promise<Institution[]> {
    const doc = await this.request<{ institutions: Institution[] }>(
      "GET", "/v1/registry/institutions");
    return doc.institutions;
  }

  async health(): Promise<boolean> {
    try {
      await this.request("GET", "/v1/healthz");
      return true;
    } catch {
      return false;
    }
  }
}
