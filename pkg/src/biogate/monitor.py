"""Tier III: longitudinal behavioral monitoring.

Usage signals accumulate into a per-principal risk score with
exponential half-life decay; rule evaluation turns accumulated signals
into escalations for human review. Nothing in this module ever touches
a grant or principal status: escalations only open cases.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

from .canonical import new_id
from .errors import BiogateError, ConfigError

_DAY = 86400.0

DEFAULT_HALF_LIFE_DAYS = 14.0

#: Per-kind default weights; generate_ok carries volume only, no risk.
DEFAULT_WEIGHTS = {
    "output_flagged_incompatible": 4.0,
    "purpose_mismatch": 3.0,
    "request_denied": 2.0,
    "output_flagged_compatible": 1.0,
    "generate_ok": 0.0,
}


class EventKind(str, Enum):
    GENERATE_OK = "generate_ok"
    OUTPUT_FLAGGED_COMPATIBLE = "output_flagged_compatible"
    OUTPUT_FLAGGED_INCOMPATIBLE = "output_flagged_incompatible"
    REQUEST_DENIED = "request_denied"
    PURPOSE_MISMATCH = "purpose_mismatch"


@dataclass(frozen=True)
class UsageEvent:
    event_id: str
    principal_id: str
    at: float
    kind: EventKind
    weight: float

    @classmethod
    def make(cls, principal_id: str, kind: EventKind | str, at: float,
             weights: dict[str, float] | None = None) -> UsageEvent:
        kind = EventKind(kind)
        table = weights or DEFAULT_WEIGHTS
        return cls(event_id=new_id("ev"), principal_id=principal_id,
                   at=at, kind=kind, weight=table[kind.value])


@dataclass
class RiskLedger:
    principal_id: str
    events: list[UsageEvent] = field(default_factory=list)

    def last_at(self) -> float:
        return self.events[-1].at if self.events else float("-inf")


def record_event(ledger: RiskLedger, event: UsageEvent) -> UsageEvent:
    """Append, clamping clock skew so per-principal time never runs backwards."""
    if event.principal_id != ledger.principal_id:
        raise BiogateError(
            f"event principal {event.principal_id!r} does not match ledger "
            f"{ledger.principal_id!r}")
    if ledger.events and event.at < ledger.events[-1].at:
        event = UsageEvent(event_id=event.event_id,
                           principal_id=event.principal_id,
                           at=ledger.events[-1].at,
                           kind=event.kind, weight=event.weight)
    ledger.events.append(event)
    return event


def current_score(ledger: RiskLedger, now: float,
                  half_life_days: float = DEFAULT_HALF_LIFE_DAYS) -> float:
    """Sum of event weights decayed by 2^(-age_days / half_life)."""
    if half_life_days <= 0:
        raise ConfigError("half_life_days", "must be positive")
    total = 0.0
    for ev in ledger.events:
        age_days = max(0.0, (now - ev.at) / _DAY)
        total += ev.weight * 2.0 ** (-age_days / half_life_days)
    return total


class RuleKind(str, Enum):
    COUNT_IN_WINDOW = "count_in_window"
    SCORE_THRESHOLD = "score_threshold"
    VOLUME_SPIKE = "volume_spike"


@dataclass(frozen=True)
class MonitorRule:
    rule_id: str
    kind: RuleKind
    threshold: float = 0.0          # count_in_window / score_threshold
    window_days: float = 0.0        # count_in_window
    event_kind: EventKind | None = None  # count_in_window
    multiplier: float = 0.0         # volume_spike
    baseline_days: float = 0.0      # volume_spike

    def __post_init__(self):
        if self.kind == RuleKind.COUNT_IN_WINDOW:
            if self.threshold <= 0 or self.window_days <= 0 or self.event_kind is None:
                raise ConfigError("monitor.rules", f"{self.rule_id}: bad count_in_window")
        elif self.kind == RuleKind.SCORE_THRESHOLD:
            if self.threshold <= 0:
                raise ConfigError("monitor.rules", f"{self.rule_id}: bad score_threshold")
        elif self.kind == RuleKind.VOLUME_SPIKE:
            if self.multiplier <= 0 or self.baseline_days <= 0:
                raise ConfigError("monitor.rules", f"{self.rule_id}: bad volume_spike")


@dataclass(frozen=True)
class Escalation:
    escalation_id: str
    principal_id: str
    rule_id: str
    evidence: tuple[str, ...]
    created_at: float


def evaluate_rules(ledger: RiskLedger, rules: Iterable[MonitorRule], now: float,
                   half_life_days: float = DEFAULT_HALF_LIFE_DAYS,
                   open_keys: frozenset[tuple[str, str]] = frozenset()
                   ) -> list[Escalation]:
    """Evaluate every rule against a snapshot of the ledger.

    ``open_keys`` holds (principal_id, rule_id) pairs that already have
    an open review case; firing those again is suppressed.
    """
    escalations = []
    for rule in rules:
        if (ledger.principal_id, rule.rule_id) in open_keys:
            continue
        evidence = _fires(ledger, rule, now, half_life_days)
        if evidence:
            escalations.append(Escalation(
                escalation_id=new_id("esc"),
                principal_id=ledger.principal_id,
                rule_id=rule.rule_id,
                evidence=tuple(evidence),
                created_at=now,
            ))
    return escalations


def _fires(ledger: RiskLedger, rule: MonitorRule, now: float,
           half_life_days: float) -> list[str] | None:
    if rule.kind == RuleKind.COUNT_IN_WINDOW:
        lo = now - rule.window_days * _DAY
        matching = [ev.event_id for ev in ledger.events
                    if ev.kind == rule.event_kind and lo < ev.at <= now]
        return matching if len(matching) >= rule.threshold else None

    if rule.kind == RuleKind.SCORE_THRESHOLD:
        if current_score(ledger, now, half_life_days) >= rule.threshold:
            return [ev.event_id for ev in ledger.events if ev.weight > 0]
        return None

    # volume_spike: today = trailing 24h; baseline = the window before it
    today_lo = now - _DAY
    base_lo = today_lo - rule.baseline_days * _DAY
    today = [ev.event_id for ev in ledger.events
             if ev.kind == EventKind.GENERATE_OK and today_lo < ev.at <= now]
    baseline_count = sum(1 for ev in ledger.events
                         if ev.kind == EventKind.GENERATE_OK
                         and base_lo < ev.at <= today_lo)
    baseline_mean = baseline_count / rule.baseline_days
    if baseline_mean > 0 and len(today) > rule.multiplier * baseline_mean:
        return today
    return None
