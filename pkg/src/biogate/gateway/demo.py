"""End-to-end demo: two researchers, one hazard-homologous output each.

A vaccine developer and a genome analyst hold grants on the same model
and trigger the same viral-protein flag. The declared purpose decides
the outcome: the first delivery continues with a retrospective case,
the second output is frozen behind a blocking case.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from ..registry import DeclaredPurpose, OversightProfile, RiskTier, canonical_request_body
from ..review import CaseSource, CaseState
from .config import load_config
from .service import GatewayService, GenerationResponse

# invented viral-protein-like fragment used by both the hazard DB and the stub
HAZARD_SEQUENCE = (
    "MKAILVVLLYTFATANADTLCIGYHANNSTDTVDTVLEKNVTVTHSVNLLEDKHNGKLCK"
)

DEMO_PROMPT = "design an antigen variant resembling influenza hemagglutinin"


def write_demo_environment(root: Path, host_id: str = "demo-host") -> Path:
    """Create hazard DB, rules and config under ``root``; returns config path."""
    root.mkdir(parents=True, exist_ok=True)
    (root / "hazards.fasta").write_text(
        f">flu-ha-fragment\n{HAZARD_SEQUENCE}\n", encoding="utf-8")
    (root / "hazards.meta.jsonl").write_text(
        '{"header": "flu-ha-fragment", "category": "viral-protein", '
        '"severity": "high", "label": "influenza HA fragment"}\n',
        encoding="utf-8")
    (root / "rules.jsonl").write_text(
        '{"rule_id": "ricin-like", "motif": "WWWWYY", '
        '"function_tag": "ribosome-inactivating", "severity": "high"}\n',
        encoding="utf-8")
    config = {
        "host_id": host_id,
        "data_dir": str(root / "data"),
        "hazard_db": {
            "fasta": str(root / "hazards.fasta"),
            "metadata": str(root / "hazards.meta.jsonl"),
            "alphabet": "amino-acid",
        },
        "annotation_rules": str(root / "rules.jsonl"),
        "screening": {"k": 5},
        "monitor": {
            "half_life_days": 14,
            "rules": [{"rule_id": "repeat-incompatible",
                       "kind": "count_in_window",
                       "event_kind": "output_flagged_incompatible",
                       "window_days": 30, "threshold": 3}],
        },
        "models": [{"model_id": "protein-designer-1", "risk_tier": 2}],
        "backend": {"kind": "stub", "seed": 7, "corpus": [HAZARD_SEQUENCE]},
    }
    path = root / "gateway.yaml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    return path


@dataclass
class DemoOutcome:
    purpose: str
    response: GenerationResponse
    verdict_status: str
    open_blocking_cases: int


@dataclass
class DemoReport:
    compatible: DemoOutcome
    incompatible: DemoOutcome

    @property
    def passed(self) -> bool:
        a, b = self.compatible, self.incompatible
        return (a.response.status == "delivered"
                and a.verdict_status == "flagged_compatible"
                and b.response.status == "held"
                and b.verdict_status == "flagged_incompatible"
                and b.open_blocking_cases >= 1)


def run_demo_scenario(root: Path) -> tuple[DemoReport, GatewayService]:
    """Build the environment, walk both researchers through all tiers."""
    from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

    config_path = write_demo_environment(root)
    service = GatewayService(load_config(str(config_path)))

    signing = Ed25519PrivateKey.generate()
    pub = signing.public_key().public_bytes_raw().hex()
    inst = service.registry.register_institution(
        "Coastal University", pub,
        oversight=OversightProfile(has_biosafety_committee=True,
                                   federally_funded=True))

    outcomes = {}
    for name, purpose in (("Dr. Vaccine", "vaccine-development"),
                          ("Dr. Genome", "genome-analysis")):
        member = service.registry.add_member(inst.institution_id, name)
        declared = DeclaredPurpose(tags=frozenset({purpose}),
                                   statement=f"{purpose} research")
        body = canonical_request_body(member.principal_id,
                                      "protein-designer-1", declared)
        req = service.registry.submit_access_request(
            member.principal_id, "protein-designer-1", declared,
            voucher_institution_id=inst.institution_id,
            voucher_signature=signing.sign(body).hex())
        grant, token = service.adjudicate(req.request_id)
        response = service.handle_generate(token, "protein-designer-1",
                                           DEMO_PROMPT, n=1)
        if response.delivered:
            verdict_id = response.delivered[0].verdict_id
        else:
            verdict_id = response.held[0].verdict_id
        blocking = [c for c in service.review.list_queue(
                        source=CaseSource.SCREENING_BLOCKING,
                        principal_id=member.principal_id)
                    if c.state == CaseState.OPEN]
        outcomes[purpose] = DemoOutcome(
            purpose=purpose,
            response=response,
            verdict_status=service.verdicts[verdict_id]["status"],
            open_blocking_cases=len(blocking))

    report = DemoReport(compatible=outcomes["vaccine-development"],
                        incompatible=outcomes["genome-analysis"])
    return report, service
