"""Versioned HTTP surface over the gateway service.

Policy outcomes (denied, held) are normal 200 responses carrying a
machine-readable status; transport and caller errors map to 4xx with a
stable reason code.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..errors import (
    BiogateError,
    ConflictError,
    ForbiddenError,
    InvalidStateError,
    NotFoundError,
    TransportError,
)
from ..federation import RevocationRecord
from ..registry import DeclaredPurpose, Denial, OversightProfile
from ..review import CaseSource, CaseState, DecisionAction, ReviewCase
from .service import GatewayService

_STATUS = {
    NotFoundError: 404,
    ConflictError: 409,
    InvalidStateError: 409,
    ForbiddenError: 403,
    TransportError: 502,
}


class GenerateBody(BaseModel):
    token: str
    model_id: str
    prompt: str = ""
    n: int = Field(default=1, ge=1)


class PurposeBody(BaseModel):
    tags: list[str]
    statement: str = ""


class VoucherBody(BaseModel):
    institution_id: str
    signature: str


class AccessRequestBody(BaseModel):
    principal_id: str
    model_id: str
    declared_purpose: PurposeBody
    voucher: VoucherBody


class OversightBody(BaseModel):
    has_biosafety_committee: bool = False
    federally_funded: bool = False
    prior_violations: int = 0


class InstitutionBody(BaseModel):
    legal_name: str
    endorsement_key: str
    aliases: list[str] = Field(default_factory=list)
    oversight: OversightBody = Field(default_factory=OversightBody)


class OpenCaseBody(BaseModel):
    source: str
    principal_id: str
    evidence: str
    risk_tier: int = Field(default=1, ge=1, le=4)
    frozen_payload: str | None = None
    grant_id: str | None = None


class ClaimBody(BaseModel):
    reviewer_id: str


class DecideBody(BaseModel):
    reviewer_id: str
    action: str
    rationale: str


class PullBody(BaseModel):
    since: int = 0


def case_to_dict(case: ReviewCase, now: float) -> dict:
    return {
        "case_id": case.case_id,
        "source": case.source.value,
        "principal_id": case.principal_id,
        "evidence": case.evidence,
        "priority": case.priority,
        "state": case.state.value,
        "created_at": case.created_at,
        "age_seconds": max(0.0, now - case.created_at),
        "frozen_output": case.frozen_output,
        "reviewer_id": case.reviewer_id,
        "grant_id": case.grant_id,
    }


def create_app(service: GatewayService) -> FastAPI:
    app = FastAPI(title="biogate", version="0.1.0")
    app.state.service = service

    @app.exception_handler(BiogateError)
    async def biogate_error(request: Request, exc: BiogateError):
        return JSONResponse(
            status_code=_STATUS.get(type(exc), 400),
            content={"error": exc.code, "message": str(exc), **exc.details})

    @app.get("/v1/healthz")
    def healthz():
        return {"status": "ok", "host_id": service.config.host_id}

    @app.post("/v1/generate")
    def generate(body: GenerateBody):
        return service.handle_generate(body.token, body.model_id,
                                       body.prompt, body.n).to_dict()

    @app.post("/v1/requests")
    def submit_request(body: AccessRequestBody):
        req = service.registry.submit_access_request(
            body.principal_id, body.model_id,
            DeclaredPurpose(tags=frozenset(body.declared_purpose.tags),
                            statement=body.declared_purpose.statement),
            voucher_institution_id=body.voucher.institution_id,
            voucher_signature=body.voucher.signature)
        return {"request_id": req.request_id, "state": req.state.value}

    @app.post("/v1/requests/{request_id}/adjudicate")
    def adjudicate(request_id: str):
        result = service.adjudicate(request_id)
        if isinstance(result, Denial):
            return {"outcome": "denied", "reason": result.reason.value,
                    "entries": list(result.entries),
                    "sources": list(result.sources)}
        grant, token = result
        return {"outcome": "granted",
                "grant": {"grant_id": grant.grant_id,
                          "principal_id": grant.principal_id,
                          "model_id": grant.model_id,
                          "issued_at": grant.issued_at,
                          "expires_at": grant.expires_at},
                "token": token}

    @app.get("/v1/cases")
    def list_cases(state: str | None = None, source: str | None = None,
                   principal_id: str | None = None):
        cases = service.review.list_queue(
            state=CaseState(state) if state else None,
            source=CaseSource(source) if source else None,
            principal_id=principal_id)
        now = service.clock()
        return {"cases": [case_to_dict(c, now) for c in cases]}

    @app.post("/v1/cases")
    def open_case(body: OpenCaseBody):
        source = CaseSource(body.source)
        if source in (CaseSource.SCREENING_BLOCKING,
                      CaseSource.SCREENING_RETROSPECTIVE):
            exists = body.evidence in service.verdicts
        elif source == CaseSource.MONITOR_ESCALATION:
            exists = body.evidence in service.escalations
        else:
            exists = body.evidence in service.registry.requests
        case = service.review.open_case(
            source, body.principal_id, body.evidence,
            risk_tier=body.risk_tier, frozen_payload=body.frozen_payload,
            evidence_exists=exists, grant_id=body.grant_id)
        return case_to_dict(case, service.clock())

    @app.get("/v1/cases/{case_id}")
    def case_detail(case_id: str):
        case = service.review.cases.get(case_id)
        if case is None:
            raise NotFoundError(f"case {case_id!r} not found")
        doc = case_to_dict(case, service.clock())
        if case.source in (CaseSource.SCREENING_BLOCKING,
                           CaseSource.SCREENING_RETROSPECTIVE):
            doc["verdict"] = service.verdicts.get(case.evidence)
        elif case.source == CaseSource.MONITOR_ESCALATION:
            esc = service.escalations.get(case.evidence)
            if esc is not None:
                doc["escalation"] = {
                    "escalation_id": esc.escalation_id,
                    "rule_id": esc.rule_id,
                    "evidence": list(esc.evidence),
                    "created_at": esc.created_at,
                }
        doc["risk_score"] = service.risk_score(case.principal_id)
        return doc

    @app.post("/v1/cases/{case_id}/claim")
    def claim(case_id: str, body: ClaimBody):
        case = service.review.claim_case(case_id, body.reviewer_id)
        return case_to_dict(case, service.clock())

    @app.post("/v1/cases/{case_id}/decide")
    def decide(case_id: str, body: DecideBody):
        effects = service.review.decide(case_id, body.reviewer_id,
                                        DecisionAction(body.action),
                                        body.rationale)
        released = None
        if effects.released_payload:
            payload = service.review.payload_content(effects.released_payload)
            released = {"ref": effects.released_payload,
                        "sequence": payload[0] if payload else None}
        return {
            "decision_id": effects.decision.decision_id,
            "case_id": case_id,
            "action": effects.decision.action.value,
            "released_output": released,
            "discarded_output": effects.discarded_payload,
            "revoked_grants": effects.revoked_grants,
            "revoked_principal": effects.revoked_principal,
            "revoked_institution": effects.revoked_institution,
            "federation_records": effects.federation_records,
        }

    @app.get("/v1/registry/institutions")
    def list_institutions():
        return {"institutions": [
            {"institution_id": i.institution_id, "legal_name": i.legal_name,
             "aliases": sorted(i.aliases), "trust_level": i.trust_level,
             "status": i.status.value}
            for i in sorted(service.registry.institutions.values(),
                            key=lambda x: x.legal_name)]}

    @app.post("/v1/registry/institutions")
    def add_institution(body: InstitutionBody):
        inst = service.registry.register_institution(
            body.legal_name, body.endorsement_key, aliases=body.aliases,
            oversight=OversightProfile(**body.oversight.model_dump()),
            extra_exclusions=service.federation.as_exclusion_entries())
        return {"institution_id": inst.institution_id,
                "trust_level": inst.trust_level, "status": inst.status.value}

    @app.get("/v1/principals/{principal_id}/risk")
    def principal_risk(principal_id: str):
        if principal_id not in service.registry.principals:
            raise NotFoundError(f"principal {principal_id!r} not found")
        ledger = service.ledgers.get(principal_id)
        events = ledger.events if ledger else []
        return {
            "principal_id": principal_id,
            "score": service.risk_score(principal_id),
            "half_life_days": service.config.half_life_days,
            "events": [{"event_id": e.event_id, "at": e.at,
                        "kind": e.kind.value, "weight": e.weight}
                       for e in events],
        }

    @app.post("/v1/federation/pull")
    def federation_pull(body: PullBody):
        records = service.federation.records_since(body.since)
        return {"records": [r.to_dict() for r in records]}

    @app.get("/v1/audit/verify")
    def audit_verify():
        return service.audit.verify().to_dict()

    return app
