"""Review workflow: case state machine, claims, decisions, enforcement effects."""

import pytest

from biogate.errors import (
    ConflictError,
    ForbiddenError,
    InvalidDecisionError,
    InvalidStateError,
    NotFoundError,
)
from biogate.registry import (
    DeclaredPurpose,
    OversightProfile,
    RegistryService,
    RiskTier,
    SubjectStatus,
    canonical_request_body,
)
from biogate.review import (
    CaseSource,
    CaseState,
    DecisionAction,
    ReviewService,
    case_priority,
)

from conftest import make_keypair, sign

PURPOSE = DeclaredPurpose(tags=frozenset({"vaccine-development"}))


@pytest.fixture
def world():
    reg = RegistryService()
    reg.add_model("model-a", RiskTier.HIGH)
    private, pub = make_keypair()
    inst = reg.register_institution(
        "Coastal University", pub,
        oversight=OversightProfile(has_biosafety_committee=True,
                                   federally_funded=True))
    member = reg.add_member(inst.institution_id, "Dr. Flagged")
    body = canonical_request_body(member.principal_id, "model-a", PURPOSE)
    req = reg.submit_access_request(member.principal_id, "model-a", PURPOSE,
                                    inst.institution_id, sign(private, body))
    grant, token = reg.adjudicate_request(req.request_id)
    published = []

    def publish(name, aliases, kind):
        published.append((name, aliases, kind))
        return f"rec-{len(published)}"

    review = ReviewService(reg, publish_revocation=publish)
    return reg, review, inst, member, grant, published


def open_blocking(review, member, grant, payload="MKVLA"):
    return review.open_case(CaseSource.SCREENING_BLOCKING, member.principal_id,
                            "verdict-1", risk_tier=3, frozen_payload=payload,
                            grant_id=grant.grant_id)


# ---------------------------------------------------------------------------
# priority and queue
# ---------------------------------------------------------------------------

def test_priority_formula():
    assert case_priority(3, blocking=True) == 35
    assert case_priority(1, blocking=False) == 10


def test_open_blocking_case_priority(world):
    reg, review, inst, member, grant, _ = world
    case = open_blocking(review, member, grant)
    assert case.priority == 35
    assert case.state == CaseState.OPEN
    assert case.frozen_output is not None


def test_retrospective_case_priority(world):
    _, review, _, member, grant, _ = world
    case = review.open_case(CaseSource.SCREENING_RETROSPECTIVE,
                            member.principal_id, "verdict-2", risk_tier=1)
    assert case.priority == 10
    assert case.frozen_output is None


def test_unknown_evidence_rejected(world):
    _, review, _, member, _, _ = world
    with pytest.raises(NotFoundError):
        review.open_case(CaseSource.MONITOR_ESCALATION, member.principal_id,
                         "nope", evidence_exists=False)


def test_queue_order_and_filters(world):
    _, review, _, member, grant, _ = world
    high = open_blocking(review, member, grant)
    low = review.open_case(CaseSource.SCREENING_RETROSPECTIVE,
                           member.principal_id, "verdict-2", risk_tier=1)
    queue = review.list_queue()
    assert [c.case_id for c in queue] == [high.case_id, low.case_id]
    assert review.list_queue(state="resolved") == []
    only = review.list_queue(source=CaseSource.SCREENING_RETROSPECTIVE)
    assert [c.case_id for c in only] == [low.case_id]


def test_equal_priority_orders_by_age(world):
    import itertools
    _, review, _, member, _, _ = world
    times = itertools.count(1000.0, 10.0)
    review._clock = lambda: next(times)
    older = review.open_case(CaseSource.SCREENING_RETROSPECTIVE,
                             member.principal_id, "v1", risk_tier=2)
    newer = review.open_case(CaseSource.SCREENING_RETROSPECTIVE,
                             member.principal_id, "v2", risk_tier=2)
    assert [c.case_id for c in review.list_queue()] == [older.case_id, newer.case_id]


# ---------------------------------------------------------------------------
# claims
# ---------------------------------------------------------------------------

def test_claim_open_case(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    claimed = review.claim_case(case.case_id, "alice")
    assert claimed.state == CaseState.IN_REVIEW
    assert claimed.reviewer_id == "alice"


def test_second_claim_conflicts(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    with pytest.raises(ConflictError):
        review.claim_case(case.case_id, "bob")


def test_claim_resolved_case_invalid(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    review.decide(case.case_id, "alice", DecisionAction.RELEASE_OUTPUT, "legit use")
    with pytest.raises(InvalidStateError):
        review.claim_case(case.case_id, "bob")


# ---------------------------------------------------------------------------
# decisions
# ---------------------------------------------------------------------------

def test_release_delivers_payload(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant, payload="MKVLAQQ")
    review.claim_case(case.case_id, "alice")
    effects = review.decide(case.case_id, "alice",
                            DecisionAction.RELEASE_OUTPUT, "vaccine work confirmed")
    assert effects.released_payload == case.frozen_output
    content, state = review.payload_content(case.frozen_output)
    assert content == "MKVLAQQ" and state == "delivered"
    assert review.cases[case.case_id].state == CaseState.RESOLVED


def test_deny_discards_payload(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    effects = review.decide(case.case_id, "alice",
                            DecisionAction.DENY_OUTPUT, "no justification")
    assert effects.discarded_payload == case.frozen_output
    _, state = review.payload_content(case.frozen_output)
    assert state == "discarded"


def test_revoke_principal_cascades_and_publishes(world):
    reg, review, inst, member, grant, published = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    effects = review.decide(case.case_id, "alice",
                            DecisionAction.REVOKE_PRINCIPAL, "deliberate misuse")
    assert reg.principals[member.principal_id].status == SubjectStatus.REVOKED
    assert reg.grants[grant.grant_id].status == SubjectStatus.REVOKED
    assert effects.revoked_grants == [grant.grant_id]
    assert len(published) == 1
    assert published[0][2] == "principal"
    assert effects.federation_records == ["rec-1"]


def test_revoke_institution_cancels_member_grants(world):
    reg, review, inst, member, grant, published = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    review.decide(case.case_id, "alice",
                  DecisionAction.REVOKE_INSTITUTION, "pattern of bad vouching")
    assert reg.institutions[inst.institution_id].status == SubjectStatus.REVOKED
    assert reg.institutions[inst.institution_id].trust_level == 0
    assert reg.grants[grant.grant_id].status == SubjectStatus.REVOKED
    assert published[0][2] == "institution"


def test_revoke_grant_uses_case_context(world):
    reg, review, _, member, grant, published = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    effects = review.decide(case.case_id, "alice",
                            DecisionAction.REVOKE_GRANT, "scope abuse")
    assert effects.revoked_grants == [grant.grant_id]
    assert reg.grants[grant.grant_id].status == SubjectStatus.REVOKED
    # grant revocation is host-local: nothing published to federation
    assert published == []
    assert reg.principals[member.principal_id].status == SubjectStatus.ACTIVE


def test_no_action_resolves_only(world):
    reg, review, _, member, grant, published = world
    case = review.open_case(CaseSource.MONITOR_ESCALATION, member.principal_id,
                            "esc-1", risk_tier=2)
    review.claim_case(case.case_id, "alice")
    effects = review.decide(case.case_id, "alice", DecisionAction.NO_ACTION,
                            "reviewed, benign")
    assert review.cases[case.case_id].state == CaseState.RESOLVED
    assert not effects.revoked_grants and not published
    assert reg.grants[grant.grant_id].status == SubjectStatus.ACTIVE


def test_wrong_reviewer_forbidden(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    with pytest.raises(ForbiddenError):
        review.decide(case.case_id, "mallory", DecisionAction.RELEASE_OUTPUT, "x")


def test_empty_rationale_rejected(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    with pytest.raises(InvalidDecisionError):
        review.decide(case.case_id, "alice", DecisionAction.RELEASE_OUTPUT, "   ")


def test_system_cannot_decide(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "system")
    with pytest.raises(InvalidDecisionError):
        review.decide(case.case_id, "system", DecisionAction.NO_ACTION, "auto")


def test_decide_resolved_case_invalid(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    review.decide(case.case_id, "alice", DecisionAction.RELEASE_OUTPUT, "fine")
    with pytest.raises(InvalidStateError):
        review.decide(case.case_id, "alice", DecisionAction.DENY_OUTPUT, "again")


def test_exactly_one_decision_per_resolved_case(world):
    _, review, _, member, grant, _ = world
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    review.decide(case.case_id, "alice", DecisionAction.NO_ACTION, "ok")
    decisions = [d for d in review.decisions.values() if d.case_id == case.case_id]
    assert len(decisions) == 1


def test_freeze_conservation(world):
    """Every frozen payload ends delivered xor discarded, never both or neither."""
    _, review, _, member, grant, _ = world
    refs = []
    for i, action in enumerate([DecisionAction.RELEASE_OUTPUT,
                                DecisionAction.DENY_OUTPUT] * 3):
        case = open_blocking(review, member, grant, payload=f"SEQ{i}AAAA")
        review.claim_case(case.case_id, "alice")
        review.decide(case.case_id, "alice", action, "processed")
        refs.append((case.frozen_output, action))
    for ref, action in refs:
        _, state = review.payload_content(ref)
        expected = "delivered" if action == DecisionAction.RELEASE_OUTPUT else "discarded"
        assert state == expected


def test_journal_replay_rebuilds_cases(world, tmp_path):
    from biogate.storage import Journal
    reg, _, inst, member, grant, _ = world
    journal = Journal(tmp_path / "review.jsonl")
    review = ReviewService(reg, journal=journal)
    case = open_blocking(review, member, grant)
    review.claim_case(case.case_id, "alice")
    review.decide(case.case_id, "alice", DecisionAction.DENY_OUTPUT, "nope")
    open_case = review.open_case(CaseSource.MONITOR_ESCALATION,
                                 member.principal_id, "esc-9", risk_tier=2)
    journal.close()

    reborn = ReviewService(reg, journal=Journal(tmp_path / "review.jsonl"))
    for rec in reborn._journal.replay():
        reborn.apply(rec)
    assert reborn.cases[case.case_id].state == CaseState.RESOLVED
    assert reborn.cases[open_case.case_id].state == CaseState.OPEN
    assert reborn.payload_content(case.frozen_output)[1] == "discarded"
    assert set(reborn.decisions) == set(review.decisions)
