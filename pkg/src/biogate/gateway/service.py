"""The policy-enforcement point.

One service object owns every tier: the Tier-I registry, the immutable
Tier-II index, Tier-III ledgers, the review queue, the federation
registry, the audit chain and the upstream backend. ``handle_generate``
runs the full pipeline per request; every externally visible state
change is journaled and audited before the response leaves.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

import httpx

from ..errors import NotFoundError, TransportError
from ..federation import RevocationRecord, SharedRegistry, SubjectKind, publish_revocation
from ..monitor import (
    Escalation,
    EventKind,
    MonitorRule,
    RiskLedger,
    UsageEvent,
    current_score,
    evaluate_rules,
    record_event,
)
from ..registry import (
    AccessGrant,
    Denial,
    RegistryService,
    RiskTier,
    screen_exclusions,
)
from ..review import CaseSource, CaseState, ReviewService
from ..screening import (
    ScreeningVerdict,
    Sequence,
    VerdictStatus,
    build_index,
    load_annotation_rules,
    load_hazard_db,
    parse_fasta,
    screen_output,
)
from ..storage import Journal
from .audit import AuditLog
from .backend import HttpBackend, ModelBackend, StubBackend
from .config import GatewayConfig


@dataclass
class DeliveredOutput:
    sequence: str
    verdict_id: str
    status: str


@dataclass
class HeldOutput:
    case_id: str
    verdict_id: str
    notice: str = "output frozen pending human review"


@dataclass
class GenerationResponse:
    status: str                      # delivered | held | denied | error
    delivered: list[DeliveredOutput] = field(default_factory=list)
    held: list[HeldOutput] = field(default_factory=list)
    reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "delivered": [vars(d) for d in self.delivered],
            "held": [vars(h) for h in self.held],
            "reason": self.reason,
        }


class GatewayService:
    def __init__(self, config: GatewayConfig,
                 backend: ModelBackend | None = None,
                 clock: Callable[[], float] = time.time):
        self.config = config
        self.clock = clock
        data_dir = Path(config.data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)

        self.audit = AuditLog(data_dir / "audit.jsonl", clock=clock)

        # Tier II: immutable after load
        self.hazard_db = load_hazard_db(config.hazard_db.fasta,
                                        config.hazard_db.metadata,
                                        config.hazard_db.alphabet)
        self.rules = (load_annotation_rules(config.annotation_rules)
                      if config.annotation_rules else [])
        self.index = build_index(self.hazard_db, config.effective_k)

        self.registry = RegistryService(
            journal=Journal(data_dir / "registry.jsonl"), clock=clock,
            grant_lifetime_days=config.grant_lifetime_days,
            audit=self.audit.append)
        self.registry.replay()

        self._journal = Journal(data_dir / "events.jsonl")
        self.federation = SharedRegistry(
            peer_keys={pid: p.public_key for pid, p in config.peers.items()},
            journal=self._journal, audit=self.audit.append)
        self._signing_key = self._load_signing_key(data_dir)
        self.review = ReviewService(
            self.registry, journal=self._journal, clock=clock,
            publish_revocation=self._publish_revocation,
            audit=self.audit.append)

        self.ledgers: dict[str, RiskLedger] = {}
        self.escalations: dict[str, Escalation] = {}
        self.verdicts: dict[str, dict] = {}
        self._replay_events()

        if backend is not None:
            self.backend = backend
        elif config.backend.kind == "http":
            self.backend = HttpBackend(config.backend.url)
        else:
            corpus = list(config.backend.corpus)
            if config.backend.corpus_fasta:
                with open(config.backend.corpus_fasta, "rb") as fh:
                    corpus += [seq.residues for _, seq in
                               parse_fasta(fh.read(), config.hazard_db.alphabet)]
            self.backend = StubBackend(corpus or ["ACDEFGHIKLMNPQRSTVWY"],
                                       seed=config.backend.seed)

        self._lock = threading.Lock()
        if not self.registry.models:
            for m in config.models:
                self.registry.add_model(m.model_id, RiskTier(m.risk_tier), m.backend_ref)
        if not self.registry.exclusions:
            for path in config.exclusion_lists:
                self.registry.load_exclusion_file(path)

    def _load_signing_key(self, data_dir: Path) -> Ed25519PrivateKey:
        """Configured key, or a host identity provisioned once under data_dir."""
        if self.config.signing_key:
            return Ed25519PrivateKey.from_private_bytes(
                bytes.fromhex(self.config.signing_key))
        key_path = data_dir / "host_key.hex"
        if key_path.exists():
            return Ed25519PrivateKey.from_private_bytes(
                bytes.fromhex(key_path.read_text().strip()))
        key = Ed25519PrivateKey.generate()
        key_path.write_text(key.private_bytes_raw().hex(), encoding="utf-8")
        key_path.chmod(0o600)
        return key

    # -- persistence ---------------------------------------------------------

    def _replay_events(self) -> None:
        for rec in self._journal.replay():
            kind = rec["t"]
            if kind in ("case", "case_claimed", "case_decided"):
                self.review.apply(rec)
            elif kind in ("fed_record", "fed_cursor"):
                self.federation.apply(rec)
            elif kind == "usage_event":
                ev = UsageEvent(event_id=rec["event_id"],
                                principal_id=rec["principal_id"],
                                at=rec["at"], kind=EventKind(rec["kind"]),
                                weight=rec["weight"])
                ledger = self.ledgers.setdefault(ev.principal_id,
                                                 RiskLedger(ev.principal_id))
                ledger.events.append(ev)
            elif kind == "escalation":
                esc = Escalation(escalation_id=rec["escalation_id"],
                                 principal_id=rec["principal_id"],
                                 rule_id=rec["rule_id"],
                                 evidence=tuple(rec["evidence"]),
                                 created_at=rec["created_at"])
                self.escalations[esc.escalation_id] = esc
            elif kind == "verdict":
                self.verdicts[rec["verdict"]["verdict_id"]] = rec["verdict"]

    def close(self) -> None:
        self.audit.close()
        self._journal.close()

    # -- exclusion view --------------------------------------------------------

    def merged_exclusions(self):
        return (list(self.registry.exclusions.values())
                + self.federation.as_exclusion_entries())

    # -- tier III ---------------------------------------------------------------

    def record_usage(self, principal_id: str, kind: EventKind | str) -> UsageEvent:
        ledger = self.ledgers.setdefault(principal_id, RiskLedger(principal_id))
        event = UsageEvent.make(principal_id, kind, self.clock(),
                                weights=self.config.weights)
        stored = record_event(ledger, event)
        self._journal.append({"t": "usage_event", "event_id": stored.event_id,
                              "principal_id": principal_id, "at": stored.at,
                              "kind": stored.kind.value, "weight": stored.weight})
        self.audit.append("monitor", "usage_event",
                          {"event_id": stored.event_id, "kind": stored.kind.value,
                           "principal_id": principal_id})
        return stored

    def risk_score(self, principal_id: str, now: float | None = None) -> float:
        ledger = self.ledgers.get(principal_id)
        if ledger is None:
            return 0.0
        return current_score(ledger, now if now is not None else self.clock(),
                             self.config.half_life_days)

    def _open_monitor_keys(self) -> frozenset[tuple[str, str]]:
        keys = set()
        for case in self.review.cases.values():
            if (case.source == CaseSource.MONITOR_ESCALATION
                    and case.state != CaseState.RESOLVED):
                esc = self.escalations.get(case.evidence)
                if esc is not None:
                    keys.add((case.principal_id, esc.rule_id))
        return frozenset(keys)

    def run_monitor_rules(self, principal_id: str) -> list[Escalation]:
        """Evaluate Tier-III rules and open a review case per new signal."""
        ledger = self.ledgers.get(principal_id)
        if ledger is None or not self.config.monitor_rules:
            return []
        fired = evaluate_rules(ledger, self.config.monitor_rules, self.clock(),
                               half_life_days=self.config.half_life_days,
                               open_keys=self._open_monitor_keys())
        for esc in fired:
            self.escalations[esc.escalation_id] = esc
            self._journal.append({"t": "escalation",
                                  "escalation_id": esc.escalation_id,
                                  "principal_id": esc.principal_id,
                                  "rule_id": esc.rule_id,
                                  "evidence": list(esc.evidence),
                                  "created_at": esc.created_at})
            self.audit.append("monitor", "escalation_raised",
                              {"escalation_id": esc.escalation_id,
                               "rule_id": esc.rule_id,
                               "principal_id": esc.principal_id})
            self.review.open_case(CaseSource.MONITOR_ESCALATION,
                                  esc.principal_id, esc.escalation_id,
                                  risk_tier=self._principal_risk_tier(esc.principal_id))
        return fired

    def _principal_risk_tier(self, principal_id: str) -> int:
        tiers = [int(self.registry.models[g.model_id].risk_tier)
                 for g in self.registry.grants.values()
                 if g.principal_id == principal_id
                 and g.model_id in self.registry.models]
        return max(tiers, default=1)

    # -- federation ---------------------------------------------------------------

    def _publish_revocation(self, name: str, aliases: tuple[str, ...],
                            kind: str) -> str:
        rec = publish_revocation(name, aliases, SubjectKind(kind),
                                 self.config.host_id, self._signing_key,
                                 issued_at=int(self.clock()))
        # a host always trusts records it signed itself
        self.federation.peer_keys.setdefault(
            self.config.host_id,
            self._signing_key.public_key().public_bytes_raw().hex())
        self.federation.merge([rec])
        return rec.record_id

    def pull_peer(self, peer_id: str, fetch=None):
        """Pull from one configured peer and merge; default fetch is HTTP."""
        if fetch is None:
            fetch = self._http_fetch
        report = self.federation.pull_from(peer_id, fetch)
        self.audit.append("federation", "peer_pulled",
                          {"peer": peer_id, "accepted": report.accepted,
                           "rejected": report.rejected})
        return report

    def _http_fetch(self, peer_id: str, since: int):
        peer = self.config.peers.get(peer_id)
        if peer is None:
            raise NotFoundError(f"peer {peer_id!r} not configured")
        try:
            resp = httpx.post(f"{peer.url.rstrip('/')}/v1/federation/pull",
                              json={"since": since}, timeout=30.0)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise TransportError(f"peer {peer_id!r} unreachable: {exc}")
        return [RevocationRecord.from_dict(d) for d in resp.json()["records"]]

    # -- adjudication wrapper ----------------------------------------------------

    def adjudicate(self, request_id: str):
        result = self.registry.adjudicate_request(
            request_id, extra_exclusions=self.federation.as_exclusion_entries())
        if isinstance(result, Denial):
            request = self.registry.requests.get(request_id)
            if request is not None:
                self.record_usage(request.principal_id, EventKind.REQUEST_DENIED)
                self.run_monitor_rules(request.principal_id)
        return result

    # -- the pipeline ---------------------------------------------------------------

    def handle_generate(self, token: str, model_id: str, prompt: str,
                        n: int = 1) -> GenerationResponse:
        n = max(1, min(int(n), self.config.max_outputs))
        self.audit.append("gateway", "generate_requested",
                          {"model_id": model_id, "prompt_len": len(prompt), "n": n})

        # (1) bearer token -> active grant
        grant = self.registry.grant_by_token(token)
        if grant is None or not self.registry.grant_is_active(grant, self.clock()):
            self.audit.append("gateway", "generate_denied",
                              {"reason": "invalid_or_revoked_grant"})
            return GenerationResponse(status="denied",
                                      reason="invalid_or_revoked_grant")

        # (2) grant scope
        if grant.model_id != model_id:
            self.audit.append("gateway", "generate_denied",
                              {"reason": "scope", "grant_id": grant.grant_id})
            self.record_usage(grant.principal_id, EventKind.REQUEST_DENIED)
            self.run_monitor_rules(grant.principal_id)
            return GenerationResponse(status="denied", reason="scope")

        # (3) exclusion re-check against the merged registry
        principal = self.registry.principals[grant.principal_id]
        institution = self.registry.institutions[principal.institution_id]
        view = self.merged_exclusions()
        hit = screen_exclusions(principal.display_name, principal.aliases, view)
        inst_hit = screen_exclusions(institution.legal_name, institution.aliases, view)
        if hit.matched or inst_hit.matched:
            self.registry.suspend_grant(grant.grant_id)
            self.review.open_case(
                CaseSource.ACCESS_REQUEST_REFERRAL, grant.principal_id,
                grant.request_id,
                risk_tier=int(self.registry.models[grant.model_id].risk_tier),
                grant_id=grant.grant_id)
            self.record_usage(grant.principal_id, EventKind.REQUEST_DENIED)
            self.run_monitor_rules(grant.principal_id)
            self.audit.append("gateway", "generate_denied",
                              {"reason": "excluded_subject",
                               "grant_id": grant.grant_id,
                               "entries": sorted(hit.entries | inst_hit.entries)})
            return GenerationResponse(status="denied", reason="excluded_subject")

        # (4) upstream call
        try:
            sequences = self.backend.generate(model_id, prompt, n)
        except TransportError as exc:
            self.audit.append("gateway", "backend_failed",
                              {"grant_id": grant.grant_id, "error": str(exc)})
            return GenerationResponse(status="error", reason="backend_unavailable")

        self.record_usage(grant.principal_id, EventKind.GENERATE_OK)

        # (5)-(7) screen, log, split
        response = GenerationResponse(status="delivered")
        for residues in sequences:
            query = Sequence(self.config.hazard_db.alphabet, residues)
            verdict = screen_output(query, grant.declared_purpose.tags,
                                    self.index, self.hazard_db, self.rules,
                                    self.config.thresholds, xdrop=self.config.xdrop)
            self._store_verdict(verdict, grant)
            if verdict.status == VerdictStatus.CLEAR:
                response.delivered.append(DeliveredOutput(
                    residues, verdict.verdict_id, verdict.status.value))
            elif verdict.status == VerdictStatus.FLAGGED_COMPATIBLE:
                self.record_usage(grant.principal_id,
                                  EventKind.OUTPUT_FLAGGED_COMPATIBLE)
                self.review.open_case(
                    CaseSource.SCREENING_RETROSPECTIVE, grant.principal_id,
                    verdict.verdict_id,
                    risk_tier=int(self.registry.models[grant.model_id].risk_tier),
                    grant_id=grant.grant_id)
                response.delivered.append(DeliveredOutput(
                    residues, verdict.verdict_id, verdict.status.value))
            else:
                self.record_usage(grant.principal_id,
                                  EventKind.OUTPUT_FLAGGED_INCOMPATIBLE)
                if verdict.purpose_mismatch:
                    self.record_usage(grant.principal_id, EventKind.PURPOSE_MISMATCH)
                case = self.review.open_case(
                    CaseSource.SCREENING_BLOCKING, grant.principal_id,
                    verdict.verdict_id,
                    risk_tier=int(self.registry.models[grant.model_id].risk_tier),
                    frozen_payload=residues, grant_id=grant.grant_id)
                response.held.append(HeldOutput(case.case_id, verdict.verdict_id))

        # (6) longitudinal rules after this batch of signals
        self.run_monitor_rules(grant.principal_id)

        if response.held:
            response.status = "held"
        self.audit.append("gateway", "generate_completed",
                          {"grant_id": grant.grant_id, "status": response.status,
                           "delivered": len(response.delivered),
                           "held": len(response.held)})
        return response

    def _store_verdict(self, verdict: ScreeningVerdict, grant: AccessGrant) -> None:
        doc = verdict.to_dict()
        doc["principal_id"] = grant.principal_id
        doc["grant_id"] = grant.grant_id
        doc["model_id"] = grant.model_id
        self._journal.append({"t": "verdict", "verdict": doc})
        self.verdicts[verdict.verdict_id] = doc
        self.audit.append("screening", "verdict_issued",
                          {"verdict_id": verdict.verdict_id,
                           "status": verdict.status.value,
                           "disposition": verdict.disposition.value})
