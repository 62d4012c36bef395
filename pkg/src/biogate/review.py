"""Human-in-the-loop review: the only path from flags to enforcement.

Flags and escalations open cases; a named human reviewer claims a case
and records exactly one Decision. Revocations, output releases and
federation publications all hang off that Decision, never off automated
logic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

from .canonical import new_id, sha256_hex
from .errors import (
    ConflictError,
    ForbiddenError,
    InvalidDecisionError,
    InvalidStateError,
    NotFoundError,
)
from .registry import RegistryService
from .storage import Journal

BLOCKING_PRIORITY_BUMP = 5


class CaseSource(str, Enum):
    SCREENING_BLOCKING = "screening_blocking"
    SCREENING_RETROSPECTIVE = "screening_retrospective"
    MONITOR_ESCALATION = "monitor_escalation"
    ACCESS_REQUEST_REFERRAL = "access_request_referral"


class CaseState(str, Enum):
    OPEN = "open"
    IN_REVIEW = "in_review"
    RESOLVED = "resolved"


class DecisionAction(str, Enum):
    RELEASE_OUTPUT = "release_output"
    DENY_OUTPUT = "deny_output"
    REVOKE_GRANT = "revoke_grant"
    REVOKE_PRINCIPAL = "revoke_principal"
    REVOKE_INSTITUTION = "revoke_institution"
    NO_ACTION = "no_action"


@dataclass
class ReviewCase:
    case_id: str
    source: CaseSource
    principal_id: str
    evidence: str                   # verdict_id | escalation_id | request_id
    priority: int
    state: CaseState
    created_at: float
    frozen_output: str | None = None   # payload reference, blocking cases only
    reviewer_id: str | None = None
    grant_id: str | None = None        # grant in whose context the flag arose


@dataclass(frozen=True)
class Decision:
    decision_id: str
    case_id: str
    reviewer_id: str
    action: DecisionAction
    rationale: str
    decided_at: float


@dataclass
class DecisionEffects:
    decision: Decision
    released_payload: str | None = None
    discarded_payload: str | None = None
    revoked_grants: list[str] = field(default_factory=list)
    revoked_principal: str | None = None
    revoked_institution: str | None = None
    federation_records: list[str] = field(default_factory=list)


def case_priority(risk_tier: int, blocking: bool) -> int:
    return risk_tier * 10 + (BLOCKING_PRIORITY_BUMP if blocking else 0)


class ReviewService:
    """Case queue with compare-and-set claims and decision-gated effects."""

    def __init__(self, registry: RegistryService,
                 journal: Journal | None = None,
                 clock: Callable[[], float] = time.time,
                 publish_revocation: Callable[[str, tuple[str, ...], str], str] | None = None,
                 audit=None):
        self._registry = registry
        self._journal = journal or Journal(None)
        self._clock = clock
        # (subject_name, aliases, subject_kind) -> federation record id
        self._publish = publish_revocation
        self._audit = audit or (lambda actor, action, payload: None)
        self.cases: dict[str, ReviewCase] = {}
        self.decisions: dict[str, Decision] = {}
        # frozen payload store: ref -> (content, state open|delivered|discarded)
        self.payloads: dict[str, tuple[str, str]] = {}

    # -- persistence -------------------------------------------------------

    def apply(self, rec: dict) -> None:
        kind = rec["t"]
        if kind == "case":
            case = ReviewCase(
                case_id=rec["case_id"],
                source=CaseSource(rec["source"]),
                principal_id=rec["principal_id"],
                evidence=rec["evidence"],
                priority=rec["priority"],
                state=CaseState.OPEN,
                created_at=rec["created_at"],
                frozen_output=rec["frozen_output"],
                grant_id=rec.get("grant_id"),
            )
            self.cases[case.case_id] = case
            if rec.get("payload_content") is not None:
                self.payloads[rec["frozen_output"]] = (rec["payload_content"], "open")
        elif kind == "case_claimed":
            case = self.cases[rec["case_id"]]
            self.cases[case.case_id] = replace(
                case, state=CaseState.IN_REVIEW, reviewer_id=rec["reviewer_id"])
        elif kind == "case_decided":
            case = self.cases[rec["case_id"]]
            self.cases[case.case_id] = replace(case, state=CaseState.RESOLVED)
            decision = Decision(
                decision_id=rec["decision_id"],
                case_id=rec["case_id"],
                reviewer_id=rec["reviewer_id"],
                action=DecisionAction(rec["action"]),
                rationale=rec["rationale"],
                decided_at=rec["decided_at"],
            )
            self.decisions[decision.decision_id] = decision
            if rec.get("payload_state") and case.frozen_output:
                content, _ = self.payloads[case.frozen_output]
                self.payloads[case.frozen_output] = (content, rec["payload_state"])
        else:
            raise ValueError(f"unknown review record {kind!r}")

    def _commit(self, rec: dict) -> None:
        self._journal.append(rec)
        self.apply(rec)

    # -- operations ----------------------------------------------------------

    def open_case(self, source: CaseSource, principal_id: str, evidence: str,
                  risk_tier: int = 1, frozen_payload: str | None = None,
                  evidence_exists: bool = True,
                  grant_id: str | None = None) -> ReviewCase:
        if not evidence_exists:
            raise NotFoundError(f"evidence {evidence!r} not found")
        blocking = source == CaseSource.SCREENING_BLOCKING
        if blocking and frozen_payload is None:
            raise InvalidStateError("blocking case requires a frozen payload")
        if not blocking and frozen_payload is not None:
            raise InvalidStateError("only blocking cases carry frozen payloads")
        case_id = new_id("case")
        payload_ref = None
        if frozen_payload is not None:
            payload_ref = "frozen-" + sha256_hex(frozen_payload.encode("utf-8"))[:24]
        self._commit({
            "t": "case",
            "case_id": case_id,
            "source": source.value,
            "principal_id": principal_id,
            "evidence": evidence,
            "priority": case_priority(risk_tier, blocking),
            "created_at": self._clock(),
            "frozen_output": payload_ref,
            "payload_content": frozen_payload,
            "grant_id": grant_id,
        })
        self._audit("review", "case_opened",
                    {"case_id": case_id, "source": source.value,
                     "principal_id": principal_id, "evidence": evidence})
        return self.cases[case_id]

    def claim_case(self, case_id: str, reviewer_id: str) -> ReviewCase:
        case = self._get(case_id)
        if case.state == CaseState.RESOLVED:
            raise InvalidStateError(f"case {case_id!r} already resolved")
        if case.state == CaseState.IN_REVIEW:
            raise ConflictError(
                f"case {case_id!r} already claimed by {case.reviewer_id!r}")
        self._commit({"t": "case_claimed", "case_id": case_id,
                      "reviewer_id": reviewer_id})
        self._audit(reviewer_id, "case_claimed", {"case_id": case_id})
        return self.cases[case_id]

    def decide(self, case_id: str, reviewer_id: str, action: DecisionAction,
               rationale: str) -> DecisionEffects:
        case = self._get(case_id)
        if case.state == CaseState.RESOLVED:
            raise InvalidStateError(f"case {case_id!r} already resolved")
        if case.state != CaseState.IN_REVIEW:
            raise InvalidStateError(f"case {case_id!r} not claimed")
        if case.reviewer_id != reviewer_id:
            raise ForbiddenError(
                f"case {case_id!r} is claimed by {case.reviewer_id!r}")
        if not reviewer_id or reviewer_id == "system":
            raise InvalidDecisionError("decisions require a human reviewer")
        if not rationale.strip():
            raise InvalidDecisionError("rationale must not be empty")
        action = DecisionAction(action)
        if action in (DecisionAction.RELEASE_OUTPUT, DecisionAction.DENY_OUTPUT) \
                and case.frozen_output is None:
            raise InvalidDecisionError(f"{action.value} needs a frozen payload")

        decision_id = new_id("dec")
        payload_state = None
        if action == DecisionAction.RELEASE_OUTPUT:
            payload_state = "delivered"
        elif action == DecisionAction.DENY_OUTPUT:
            payload_state = "discarded"
        self._commit({
            "t": "case_decided",
            "case_id": case_id,
            "decision_id": decision_id,
            "reviewer_id": reviewer_id,
            "action": action.value,
            "rationale": rationale,
            "decided_at": self._clock(),
            "payload_state": payload_state,
        })
        decision = self.decisions[decision_id]
        self._audit(reviewer_id, "decision_recorded",
                    {"decision_id": decision_id, "case_id": case_id,
                     "action": action.value})
        return self._enforce(self.cases[case_id], decision)

    def _enforce(self, case: ReviewCase, decision: Decision) -> DecisionEffects:
        effects = DecisionEffects(decision=decision)
        action = decision.action
        reg = self._registry

        if action == DecisionAction.RELEASE_OUTPUT:
            effects.released_payload = case.frozen_output
            self._audit(decision.reviewer_id, "frozen_output_released",
                        {"case_id": case.case_id, "payload": case.frozen_output})
        elif action == DecisionAction.DENY_OUTPUT:
            effects.discarded_payload = case.frozen_output
            self._audit(decision.reviewer_id, "frozen_output_discarded",
                        {"case_id": case.case_id, "payload": case.frozen_output})
        elif action == DecisionAction.REVOKE_GRANT:
            if case.grant_id is not None:
                targets = [case.grant_id]
            else:
                targets = sorted(g.grant_id for g in reg.grants.values()
                                 if g.principal_id == case.principal_id
                                 and g.status.value != "revoked")
            for grant_id in targets:
                reg.revoke_grant(grant_id, decision.decision_id,
                                 decision.reviewer_id)
                effects.revoked_grants.append(grant_id)
        elif action == DecisionAction.REVOKE_PRINCIPAL:
            principal = reg.principals[case.principal_id]
            effects.revoked_grants = reg.revoke_principal(
                case.principal_id, decision.decision_id, decision.reviewer_id)
            effects.revoked_principal = case.principal_id
            self._publish_revocation(effects, principal.display_name,
                                     tuple(sorted(principal.aliases)), "principal")
        elif action == DecisionAction.REVOKE_INSTITUTION:
            principal = reg.principals[case.principal_id]
            institution = reg.institutions[principal.institution_id]
            effects.revoked_grants = reg.revoke_institution(
                institution.institution_id, decision.decision_id,
                decision.reviewer_id)
            effects.revoked_institution = institution.institution_id
            self._publish_revocation(effects, institution.legal_name,
                                     tuple(sorted(institution.aliases)), "institution")
        return effects

    def _publish_revocation(self, effects: DecisionEffects, name: str,
                            aliases: tuple[str, ...], kind: str) -> None:
        if self._publish is not None:
            record_id = self._publish(name, aliases, kind)
            effects.federation_records.append(record_id)
            self._audit("federation", "revocation_published",
                        {"record_id": record_id, "subject_kind": kind})

    # -- queries -------------------------------------------------------------

    def list_queue(self, state: CaseState | str | None = None,
                   source: CaseSource | str | None = None,
                   principal_id: str | None = None) -> list[ReviewCase]:
        cases = self.cases.values()
        if state is not None:
            state = CaseState(state)
            cases = (c for c in cases if c.state == state)
        if source is not None:
            source = CaseSource(source)
            cases = (c for c in cases if c.source == source)
        if principal_id is not None:
            cases = (c for c in cases if c.principal_id == principal_id)
        return sorted(cases, key=lambda c: (-c.priority, c.created_at, c.case_id))

    def payload_content(self, ref: str) -> tuple[str, str] | None:
        return self.payloads.get(ref)

    def _get(self, case_id: str) -> ReviewCase:
        case = self.cases.get(case_id)
        if case is None:
            raise NotFoundError(f"case {case_id!r} not found")
        return case
