// Wire types mirroring the gateway /v1 API. The console never derives
// policy values itself; everything displayed comes from these shapes.

export interface CaseSummary {
  case_id: string;
  source: string;
  principal_id: string;
  evidence: string;
  priority: number;
  state: "open" | "in_review" | "resolved";
  created_at: number;
  age_seconds: number;
  frozen_output: string | null;
  reviewer_id: string | null;
  grant_id: string | null;
}

export interface AlignmentHit {
  hazard_id: string;
  score: number;
  identity: number;
  query_span: [number, number];
  hazard_span: [number, number];
  hazard_coverage: number;
}

export interface Verdict {
  verdict_id: string;
  status: string;
  hits: AlignmentHit[];
  function_tags: Record<string, number[]>;
  purpose_mismatch: boolean;
  disposition: string;
  triggering_categories: string[];
  triggering_tags: string[];
  principal_id?: string;
  grant_id?: string;
  model_id?: string;
}

export interface EscalationDetail {
  escalation_id: string;
  rule_id: string;
  evidence: string[];
  created_at: number;
}

export interface CaseDetail extends CaseSummary {
  verdict?: Verdict | null;
  escalation?: EscalationDetail | null;
  risk_score: number;
}

export interface RiskEvent {
  event_id: string;
  at: number;
  kind: string;
  weight: number;
}

export interface RiskProfile {
  principal_id: string;
  score: number;
  half_life_days: number;
  events: RiskEvent[];
}

export interface DecisionEffects {
  decision_id: string;
  case_id: string;
  action: string;
  released_output: { ref: string; sequence: string | null } | null;
  discarded_output: string | null;
  revoked_grants: string[];
  revoked_principal: string | null;
  revoked_institution: string | null;
  federation_records: string[];
}

export interface Institution {
  institution_id: string;
  legal_name: string;
  aliases: string[];
  trust_level: number;
  status: string;
}

export interface QueueFilters {
  state?: string;
  source?: string;
  principal_id?: string;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}
