"""Tier I: institutional gatekeeping.

Institutions vouch for researchers; the host keeps the trust ledger,
screens every subject against the merged exclusion registry, and issues
bounded access grants. Exclusion matching is a bright-line rule and
dominates every other check. All mutations are serialized through a
single lock and journaled for replay.
"""

from __future__ import annotations

import hashlib
import secrets
import threading
import time
import unicodedata
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PublicKey

from .canonical import canonical_json, new_id
from .errors import (
    DuplicateInstitutionError,
    ExcludedSubjectError,
    InvalidNameError,
    InvalidStateError,
    InvalidVoucherError,
    MissingPurposeError,
    NotFoundError,
    SponsorUnavailableError,
    VoucherMismatchError,
)
from .storage import Journal, read_jsonl

DEFAULT_GRANT_LIFETIME_DAYS = 180.0
_DAY = 86400.0


class SubjectStatus(str, Enum):
    ACTIVE = "active"
    SUSPENDED = "suspended"
    REVOKED = "revoked"


class RiskTier(int, Enum):
    LOW = 1
    MODERATE = 2
    HIGH = 3
    CRITICAL = 4


#: Minimum institutional trust level required per model risk tier.
REQUIRED_TRUST = {
    RiskTier.LOW: 1,
    RiskTier.MODERATE: 2,
    RiskTier.HIGH: 3,
    RiskTier.CRITICAL: 4,
}


class PurposeTag(str, Enum):
    VACCINE_DEVELOPMENT = "vaccine-development"
    ANTIBODY_DESIGN = "antibody-design"
    ENZYME_ENGINEERING = "enzyme-engineering"
    GENOME_ANALYSIS = "genome-analysis"
    PROTEIN_STRUCTURE_RESEARCH = "protein-structure-research"
    OTHER = "other"


class ReasonCode(str, Enum):
    SANCTIONS = "sanctions"
    TERRORISM = "terrorism"
    BIO_WEAPONS_CONVICTION = "bio_weapons_conviction"
    HOST_REVOCATION = "host_revocation"


class RequestState(str, Enum):
    PENDING = "pending"
    GRANTED = "granted"
    DENIED = "denied"


class DenialReason(str, Enum):
    EXCLUDED_SUBJECT = "excluded_subject"
    INSUFFICIENT_INSTITUTIONAL_TRUST = "insufficient_institutional_trust"


def normalize_name(raw: str) -> str:
    """Fold a subject name to its canonical comparison form.

    Lowercase, diacritics stripped to base letters, punctuation and
    symbols treated as word breaks, runs of whitespace collapsed.
    """
    if not raw or not raw.strip():
        raise InvalidNameError("name is empty")
    decomposed = unicodedata.normalize("NFKD", raw)
    out: list[str] = []
    for ch in decomposed:
        if unicodedata.combining(ch):
            continue
        cat = unicodedata.category(ch)
        if cat[0] in ("L", "N"):
            out.append(ch.lower())
        else:
            out.append(" ")
    normalized = " ".join("".join(out).split())
    if not normalized:
        raise InvalidNameError(f"name {raw!r} is empty after normalization")
    return normalized


@dataclass
class OversightProfile:
    has_biosafety_committee: bool = False
    federally_funded: bool = False
    prior_violations: int = 0


@dataclass
class Institution:
    institution_id: str
    legal_name: str                 # stored normalized
    aliases: frozenset[str]         # stored normalized
    trust_level: int
    oversight: OversightProfile
    status: SubjectStatus
    endorsement_key: str            # Ed25519 public key, hex


@dataclass
class Principal:
    principal_id: str
    display_name: str
    institution_id: str
    sponsored: bool                 # False = member_of, True = sponsored_by
    status: SubjectStatus
    aliases: frozenset[str] = frozenset()


@dataclass
class ModelResource:
    model_id: str
    risk_tier: RiskTier
    backend_ref: str


@dataclass
class DeclaredPurpose:
    tags: frozenset[str]
    statement: str = ""

    def to_dict(self) -> dict:
        return {"tags": sorted(self.tags), "statement": self.statement}


@dataclass
class AccessRequest:
    request_id: str
    principal_id: str
    model_id: str
    voucher_institution_id: str
    voucher_signature: str          # hex
    declared_purpose: DeclaredPurpose
    state: RequestState = RequestState.PENDING


@dataclass
class AccessGrant:
    grant_id: str
    request_id: str
    principal_id: str
    model_id: str
    declared_purpose: DeclaredPurpose
    issued_at: float
    expires_at: float
    status: SubjectStatus
    token_digest: str               # sha256 hex of the bearer token


@dataclass(frozen=True)
class ExclusionEntry:
    entry_id: str
    subject_name: str               # normalized
    subject_aliases: frozenset[str]
    source_list: str
    reason_code: ReasonCode
    effective_at: float


@dataclass
class ExclusionMatch:
    matched: bool
    entries: frozenset[str] = frozenset()


@dataclass
class Denial:
    reason: DenialReason
    entries: tuple[str, ...] = ()   # matched exclusion entry ids, if any
    sources: tuple[str, ...] = ()   # source_list labels so operators can tell feeds apart


def screen_exclusions(subject_name: str, subject_aliases: Iterable[str],
                      registry_view: Iterable[ExclusionEntry]) -> ExclusionMatch:
    """Exact match of normalized names against the merged exclusion view."""
    names = {normalize_name(subject_name)}
    for alias in subject_aliases:
        names.add(normalize_name(alias))
    hits = set()
    for entry in registry_view:
        entry_names = {entry.subject_name} | set(entry.subject_aliases)
        if names & entry_names:
            hits.add(entry.entry_id)
    return ExclusionMatch(matched=bool(hits), entries=frozenset(hits))


def institution_trust_level(oversight: OversightProfile) -> int:
    """Trust rubric: one point per oversight factor, all independently auditable.

    Biosafety committee +1, federal funding +1, clean compliance history
    (zero prior violations) +1. An institution scoring 0 cannot endorse.
    """
    level = 0
    if oversight.has_biosafety_committee:
        level += 1
    if oversight.federally_funded:
        level += 1
    if oversight.prior_violations == 0:
        level += 1
    return level


def canonical_request_body(principal_id: str, model_id: str,
                           purpose: DeclaredPurpose) -> bytes:
    """Bytes the institution signs when vouching for a request."""
    return canonical_json({
        "declared_purpose": purpose.to_dict(),
        "model_id": model_id,
        "principal_id": principal_id,
    })


def _verify_voucher(public_key_hex: str, signature_hex: str, body: bytes) -> bool:
    try:
        key = Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_key_hex))
        key.verify(bytes.fromhex(signature_hex), body)
        return True
    except (InvalidSignature, ValueError):
        return False


class RegistryService:
    """Single-writer Tier-I state machine.

    Reads return snapshots of immutable dataclasses; mutations validate,
    journal a complete record, then apply it, so replay is a pure fold.
    """

    def __init__(self, journal: Journal | None = None,
                 clock: Callable[[], float] = time.time,
                 grant_lifetime_days: float = DEFAULT_GRANT_LIFETIME_DAYS,
                 audit=None):
        self._journal = journal or Journal(None)
        self._clock = clock
        self._grant_lifetime = grant_lifetime_days * _DAY
        self._audit = audit or (lambda actor, action, payload: None)
        self._lock = threading.RLock()
        self.institutions: dict[str, Institution] = {}
        self.principals: dict[str, Principal] = {}
        self.models: dict[str, ModelResource] = {}
        self.requests: dict[str, AccessRequest] = {}
        self.grants: dict[str, AccessGrant] = {}
        self.exclusions: dict[str, ExclusionEntry] = {}
        self._grants_by_token: dict[str, str] = {}
        self._names: set[str] = set()

    # -- replay ----------------------------------------------------------

    def replay(self) -> int:
        count = 0
        with self._lock:
            for record in self._journal.replay():
                self._apply(record)
                count += 1
        return count

    def _commit(self, record: dict) -> None:
        self._journal.append(record)
        self._apply(record)

    def _apply(self, rec: dict) -> None:
        kind = rec["t"]
        if kind == "institution":
            inst = Institution(
                institution_id=rec["institution_id"],
                legal_name=rec["legal_name"],
                aliases=frozenset(rec["aliases"]),
                trust_level=rec["trust_level"],
                oversight=OversightProfile(**rec["oversight"]),
                status=SubjectStatus(rec["status"]),
                endorsement_key=rec["endorsement_key"],
            )
            self.institutions[inst.institution_id] = inst
            self._names.add(inst.legal_name)
        elif kind == "principal":
            p = Principal(
                principal_id=rec["principal_id"],
                display_name=rec["display_name"],
                institution_id=rec["institution_id"],
                sponsored=rec["sponsored"],
                status=SubjectStatus(rec["status"]),
                aliases=frozenset(rec["aliases"]),
            )
            self.principals[p.principal_id] = p
        elif kind == "model":
            self.models[rec["model_id"]] = ModelResource(
                model_id=rec["model_id"],
                risk_tier=RiskTier(rec["risk_tier"]),
                backend_ref=rec["backend_ref"],
            )
        elif kind == "exclusion":
            entry = ExclusionEntry(
                entry_id=rec["entry_id"],
                subject_name=rec["subject_name"],
                subject_aliases=frozenset(rec["subject_aliases"]),
                source_list=rec["source_list"],
                reason_code=ReasonCode(rec["reason_code"]),
                effective_at=rec["effective_at"],
            )
            self.exclusions[entry.entry_id] = entry
        elif kind == "request":
            self.requests[rec["request_id"]] = AccessRequest(
                request_id=rec["request_id"],
                principal_id=rec["principal_id"],
                model_id=rec["model_id"],
                voucher_institution_id=rec["voucher_institution_id"],
                voucher_signature=rec["voucher_signature"],
                declared_purpose=DeclaredPurpose(
                    tags=frozenset(rec["purpose_tags"]),
                    statement=rec["purpose_statement"],
                ),
            )
        elif kind == "request_denied":
            req = self.requests[rec["request_id"]]
            self.requests[req.request_id] = replace(req, state=RequestState.DENIED)
        elif kind == "grant":
            req = self.requests[rec["request_id"]]
            self.requests[req.request_id] = replace(req, state=RequestState.GRANTED)
            grant = AccessGrant(
                grant_id=rec["grant_id"],
                request_id=rec["request_id"],
                principal_id=rec["principal_id"],
                model_id=rec["model_id"],
                declared_purpose=self.requests[req.request_id].declared_purpose,
                issued_at=rec["issued_at"],
                expires_at=rec["expires_at"],
                status=SubjectStatus.ACTIVE,
                token_digest=rec["token_digest"],
            )
            self.grants[grant.grant_id] = grant
            self._grants_by_token[grant.token_digest] = grant.grant_id
        elif kind == "grant_status":
            g = self.grants[rec["grant_id"]]
            self.grants[g.grant_id] = replace(g, status=SubjectStatus(rec["status"]))
        elif kind == "principal_status":
            p = self.principals[rec["principal_id"]]
            self.principals[p.principal_id] = replace(p, status=SubjectStatus(rec["status"]))
        elif kind == "institution_status":
            inst = self.institutions[rec["institution_id"]]
            status = SubjectStatus(rec["status"])
            trust = inst.trust_level if status == SubjectStatus.ACTIVE else 0
            self.institutions[inst.institution_id] = replace(
                inst, status=status, trust_level=trust)
        else:
            raise ValueError(f"unknown journal record {kind!r}")

    # -- institutions ------------------------------------------------------

    def register_institution(self, legal_name: str, endorsement_key: str,
                             aliases: Iterable[str] = (),
                             oversight: OversightProfile | None = None,
                             extra_exclusions: Iterable[ExclusionEntry] = ()) -> Institution:
        oversight = oversight or OversightProfile()
        name = normalize_name(legal_name)
        norm_aliases = frozenset(normalize_name(a) for a in aliases)
        with self._lock:
            report = screen_exclusions(name, norm_aliases, self._exclusion_view(extra_exclusions))
            if report.matched:
                raise ExcludedSubjectError(
                    f"institution {legal_name!r} matches exclusion registry",
                    entries=tuple(sorted(report.entries)))
            if name in self._names:
                raise DuplicateInstitutionError(f"institution {name!r} already registered")
            trust = institution_trust_level(oversight)
            status = SubjectStatus.ACTIVE if trust >= 1 else SubjectStatus.SUSPENDED
            inst_id = new_id("inst")
            self._commit({
                "t": "institution",
                "institution_id": inst_id,
                "legal_name": name,
                "aliases": sorted(norm_aliases),
                "trust_level": trust,
                "oversight": vars(oversight),
                "status": status.value,
                "endorsement_key": endorsement_key,
            })
            self._audit("registry", "institution_registered",
                        {"institution_id": inst_id, "legal_name": name,
                         "trust_level": trust, "status": status.value})
            return self.institutions[inst_id]

    def add_model(self, model_id: str, risk_tier: RiskTier | int, backend_ref: str = "") -> ModelResource:
        with self._lock:
            self._commit({
                "t": "model",
                "model_id": model_id,
                "risk_tier": int(RiskTier(risk_tier)),
                "backend_ref": backend_ref,
            })
            return self.models[model_id]

    # -- principals --------------------------------------------------------

    def add_member(self, institution_id: str, display_name: str,
                   aliases: Iterable[str] = (),
                   extra_exclusions: Iterable[ExclusionEntry] = ()) -> Principal:
        """Register a researcher employed by the institution."""
        return self._add_principal(institution_id, display_name, aliases,
                                   sponsored=False, extra_exclusions=extra_exclusions)

    def sponsor_individual(self, institution_id: str, display_name: str,
                           purpose_statement: str = "",
                           aliases: Iterable[str] = (),
                           extra_exclusions: Iterable[ExclusionEntry] = ()) -> Principal:
        """Institution takes accountability for a non-affiliated individual.

        The sponsorship link is the accountability record: later misuse
        events attribute to the sponsor through it.
        """
        p = self._add_principal(institution_id, display_name, aliases,
                                sponsored=True, extra_exclusions=extra_exclusions)
        self._audit("registry", "sponsorship_recorded",
                    {"principal_id": p.principal_id, "sponsor": institution_id,
                     "statement": purpose_statement})
        return p

    def _add_principal(self, institution_id: str, display_name: str,
                       aliases: Iterable[str], sponsored: bool,
                       extra_exclusions: Iterable[ExclusionEntry]) -> Principal:
        with self._lock:
            inst = self.institutions.get(institution_id)
            if inst is None:
                raise NotFoundError(f"institution {institution_id!r} not found")
            if inst.status != SubjectStatus.ACTIVE:
                raise SponsorUnavailableError(
                    f"institution {institution_id!r} is {inst.status.value}")
            report = screen_exclusions(display_name, aliases,
                                       self._exclusion_view(extra_exclusions))
            if report.matched:
                raise ExcludedSubjectError(
                    f"person {display_name!r} matches exclusion registry",
                    entries=tuple(sorted(report.entries)))
            pid = new_id("pr")
            self._commit({
                "t": "principal",
                "principal_id": pid,
                "display_name": display_name,
                "institution_id": institution_id,
                "sponsored": sponsored,
                "status": SubjectStatus.ACTIVE.value,
                "aliases": sorted(normalize_name(a) for a in aliases),
            })
            self._audit("registry", "principal_added",
                        {"principal_id": pid, "institution_id": institution_id,
                         "sponsored": sponsored})
            return self.principals[pid]

    # -- exclusions --------------------------------------------------------

    def add_exclusion(self, subject_name: str, aliases: Iterable[str] = (),
                      source_list: str = "local",
                      reason_code: ReasonCode = ReasonCode.SANCTIONS,
                      effective_at: float | None = None) -> ExclusionEntry:
        with self._lock:
            entry_id = new_id("excl")
            self._commit({
                "t": "exclusion",
                "entry_id": entry_id,
                "subject_name": normalize_name(subject_name),
                "subject_aliases": sorted(normalize_name(a) for a in aliases),
                "source_list": source_list,
                "reason_code": ReasonCode(reason_code).value,
                "effective_at": effective_at if effective_at is not None else self._clock(),
            })
            self._audit("registry", "exclusion_added",
                        {"entry_id": entry_id, "source_list": source_list})
            return self.exclusions[entry_id]

    def load_exclusion_file(self, path: str) -> int:
        """Ingest a line-delimited exclusion list file. Returns entries added."""
        count = 0
        for rec in read_jsonl(path):
            self.add_exclusion(
                subject_name=rec["subject_name"],
                aliases=rec.get("aliases", ()),
                source_list=rec.get("source_list", path),
                reason_code=ReasonCode(rec.get("reason_code", "sanctions")),
                effective_at=rec.get("effective_at"),
            )
            count += 1
        return count

    def _exclusion_view(self, extra: Iterable[ExclusionEntry]) -> list[ExclusionEntry]:
        return list(self.exclusions.values()) + list(extra)

    # -- access requests ----------------------------------------------------

    def submit_access_request(self, principal_id: str, model_id: str,
                              declared_purpose: DeclaredPurpose,
                              voucher_institution_id: str,
                              voucher_signature: str) -> AccessRequest:
        with self._lock:
            principal = self.principals.get(principal_id)
            if principal is None:
                raise NotFoundError(f"principal {principal_id!r} not found")
            if model_id not in self.models:
                raise NotFoundError(f"model {model_id!r} not found")
            if not declared_purpose.tags:
                raise MissingPurposeError("declared purpose has no tags")
            bad = declared_purpose.tags - {t.value for t in PurposeTag}
            if bad:
                raise MissingPurposeError(f"unknown purpose tags {sorted(bad)}")
            if principal.institution_id != voucher_institution_id:
                raise VoucherMismatchError(
                    f"voucher from {voucher_institution_id!r} does not match "
                    f"affiliation {principal.institution_id!r}")
            institution = self.institutions[voucher_institution_id]
            body = canonical_request_body(principal_id, model_id, declared_purpose)
            if not _verify_voucher(institution.endorsement_key, voucher_signature, body):
                raise InvalidVoucherError("voucher signature does not verify")
            request_id = new_id("req")
            self._commit({
                "t": "request",
                "request_id": request_id,
                "principal_id": principal_id,
                "model_id": model_id,
                "voucher_institution_id": voucher_institution_id,
                "voucher_signature": voucher_signature,
                "purpose_tags": sorted(declared_purpose.tags),
                "purpose_statement": declared_purpose.statement,
            })
            self._audit("registry", "request_submitted",
                        {"request_id": request_id, "principal_id": principal_id,
                         "model_id": model_id})
            return self.requests[request_id]

    def adjudicate_request(self, request_id: str,
                           extra_exclusions: Iterable[ExclusionEntry] = ()
                           ) -> tuple[AccessGrant, str] | Denial:
        """Decide a pending request.

        Exclusion screening of both the principal and the vouching
        institution dominates all other criteria. On grant, returns the
        grant together with the one-time bearer token.
        """
        with self._lock:
            request = self.requests.get(request_id)
            if request is None:
                raise NotFoundError(f"request {request_id!r} not found")
            if request.state != RequestState.PENDING:
                raise InvalidStateError(f"request {request_id!r} is {request.state.value}")
            principal = self.principals[request.principal_id]
            institution = self.institutions[request.voucher_institution_id]
            view = self._exclusion_view(extra_exclusions)

            hits = screen_exclusions(principal.display_name, principal.aliases, view)
            inst_hits = screen_exclusions(institution.legal_name, institution.aliases, view)
            if hits.matched or inst_hits.matched:
                entry_ids = tuple(sorted(hits.entries | inst_hits.entries))
                denial = Denial(
                    reason=DenialReason.EXCLUDED_SUBJECT,
                    entries=entry_ids,
                    sources=self._entry_sources(entry_ids, view),
                )
                return self._deny(request, denial)

            model = self.models[request.model_id]
            required = REQUIRED_TRUST[model.risk_tier]
            if (institution.status != SubjectStatus.ACTIVE
                    or principal.status != SubjectStatus.ACTIVE
                    or institution.trust_level < required):
                return self._deny(request, Denial(
                    reason=DenialReason.INSUFFICIENT_INSTITUTIONAL_TRUST))

            token = secrets.token_hex(32)
            token_digest = hashlib.sha256(token.encode("ascii")).hexdigest()
            issued_at = self._clock()
            grant_id = new_id("grant")
            self._commit({
                "t": "grant",
                "grant_id": grant_id,
                "request_id": request.request_id,
                "principal_id": request.principal_id,
                "model_id": request.model_id,
                "issued_at": issued_at,
                "expires_at": issued_at + self._grant_lifetime,
                "token_digest": token_digest,
            })
            self._audit("registry", "grant_issued",
                        {"grant_id": grant_id, "request_id": request.request_id,
                         "principal_id": request.principal_id,
                         "model_id": request.model_id})
            return self.grants[grant_id], token

    def _deny(self, request: AccessRequest, denial: Denial) -> Denial:
        self._commit({"t": "request_denied", "request_id": request.request_id,
                      "reason": denial.reason.value, "entries": list(denial.entries)})
        self._audit("registry", "request_denied",
                    {"request_id": request.request_id, "reason": denial.reason.value,
                     "entries": list(denial.entries)})
        return denial

    @staticmethod
    def _entry_sources(entry_ids: tuple[str, ...],
                       view: Iterable[ExclusionEntry]) -> tuple[str, ...]:
        by_id = {e.entry_id: e for e in view}
        return tuple(sorted({by_id[i].source_list for i in entry_ids if i in by_id}))

    # -- grants and enforcement ---------------------------------------------

    def grant_by_token(self, token: str) -> AccessGrant | None:
        digest = hashlib.sha256(token.encode("ascii")).hexdigest()
        with self._lock:
            grant_id = self._grants_by_token.get(digest)
            return self.grants.get(grant_id) if grant_id else None

    def grant_is_active(self, grant: AccessGrant, now: float | None = None) -> bool:
        now = self._clock() if now is None else now
        if grant.status != SubjectStatus.ACTIVE or now >= grant.expires_at:
            return False
        principal = self.principals.get(grant.principal_id)
        if principal is None or principal.status != SubjectStatus.ACTIVE:
            return False
        institution = self.institutions.get(principal.institution_id)
        return institution is not None and institution.status == SubjectStatus.ACTIVE

    def suspend_grant(self, grant_id: str) -> None:
        """Hold a grant pending review. Not an enforcement action."""
        with self._lock:
            if grant_id not in self.grants:
                raise NotFoundError(f"grant {grant_id!r} not found")
            self._commit({"t": "grant_status", "grant_id": grant_id,
                          "status": SubjectStatus.SUSPENDED.value})
            self._audit("registry", "grant_suspended", {"grant_id": grant_id})

    def revoke_grant(self, grant_id: str, decision_id: str, reviewer_id: str) -> None:
        """Revocation requires the review decision that authorized it."""
        with self._lock:
            if grant_id not in self.grants:
                raise NotFoundError(f"grant {grant_id!r} not found")
            self._commit({"t": "grant_status", "grant_id": grant_id,
                          "status": SubjectStatus.REVOKED.value})
            self._audit(reviewer_id, "grant_revoked",
                        {"grant_id": grant_id, "decision_id": decision_id})

    def revoke_principal(self, principal_id: str, decision_id: str,
                         reviewer_id: str) -> list[str]:
        """Revoke a principal and cancel every grant it holds."""
        with self._lock:
            if principal_id not in self.principals:
                raise NotFoundError(f"principal {principal_id!r} not found")
            self._commit({"t": "principal_status", "principal_id": principal_id,
                          "status": SubjectStatus.REVOKED.value})
            self._audit(reviewer_id, "principal_revoked",
                        {"principal_id": principal_id, "decision_id": decision_id})
            return self._cancel_grants(
                [g for g in self.grants.values() if g.principal_id == principal_id],
                decision_id, reviewer_id)

    def revoke_institution(self, institution_id: str, decision_id: str,
                           reviewer_id: str) -> list[str]:
        """Revoke an institution and cancel grants of everyone it vouched for."""
        with self._lock:
            if institution_id not in self.institutions:
                raise NotFoundError(f"institution {institution_id!r} not found")
            self._commit({"t": "institution_status", "institution_id": institution_id,
                          "status": SubjectStatus.REVOKED.value})
            self._audit(reviewer_id, "institution_revoked",
                        {"institution_id": institution_id, "decision_id": decision_id})
            members = {p.principal_id for p in self.principals.values()
                       if p.institution_id == institution_id}
            return self._cancel_grants(
                [g for g in self.grants.values() if g.principal_id in members],
                decision_id, reviewer_id)

    def suspend_institution(self, institution_id: str) -> None:
        with self._lock:
            if institution_id not in self.institutions:
                raise NotFoundError(f"institution {institution_id!r} not found")
            self._commit({"t": "institution_status", "institution_id": institution_id,
                          "status": SubjectStatus.SUSPENDED.value})
            self._audit("registry", "institution_suspended",
                        {"institution_id": institution_id})

    def _cancel_grants(self, grants: list[AccessGrant], decision_id: str,
                       reviewer_id: str) -> list[str]:
        cancelled = []
        for g in grants:
            if g.status != SubjectStatus.REVOKED:
                self._commit({"t": "grant_status", "grant_id": g.grant_id,
                              "status": SubjectStatus.REVOKED.value})
                self._audit(reviewer_id, "grant_revoked",
                            {"grant_id": g.grant_id, "decision_id": decision_id})
                cancelled.append(g.grant_id)
        return cancelled
