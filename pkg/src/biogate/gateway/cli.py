"""Command-line entry points for operating a gateway host."""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from ..errors import BiogateError
from ..registry import OversightProfile
from ..screening import Alphabet, build_index, parse_fasta
from .audit import load_events, verify_chain
from .config import load_config
from .demo import run_demo_scenario
from .service import GatewayService


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="biogate",
                                     description="KYC access gateway for hosted "
                                                 "biological design models")
    sub = parser.add_subparsers(dest="command", required=True)

    serve_p = sub.add_parser("serve", help="run the gateway service")
    serve_p.add_argument("--config", required=True)
    serve_p.add_argument("--static-dir", default=None,
                         help="serve a built console from this directory")

    index_p = sub.add_parser("index-build", help="parse a FASTA file and report index stats")
    index_p.add_argument("fasta")
    index_p.add_argument("--alphabet", choices=[a.value for a in Alphabet],
                         default="amino-acid")
    index_p.add_argument("--k", type=int, default=0)

    reg_p = sub.add_parser("registry", help="manage institutions and exclusion lists")
    reg_sub = reg_p.add_subparsers(dest="registry_command", required=True)
    add_p = reg_sub.add_parser("add-institution")
    add_p.add_argument("--config", required=True)
    add_p.add_argument("--name", required=True)
    add_p.add_argument("--endorsement-key", required=True, help="Ed25519 public key, hex")
    add_p.add_argument("--alias", action="append", default=[])
    add_p.add_argument("--biosafety-committee", action="store_true")
    add_p.add_argument("--federally-funded", action="store_true")
    add_p.add_argument("--prior-violations", type=int, default=0)
    list_p = reg_sub.add_parser("list-institutions")
    list_p.add_argument("--config", required=True)
    load_p = reg_sub.add_parser("load-exclusions")
    load_p.add_argument("--config", required=True)
    load_p.add_argument("path")

    fed_p = sub.add_parser("fed-sync", help="pull revocation records from peers")
    fed_p.add_argument("--config", required=True)
    fed_p.add_argument("--peer", action="append", default=[],
                       help="peer id (default: every configured peer)")

    audit_p = sub.add_parser("audit-verify", help="verify a hash-chained audit log")
    audit_p.add_argument("path", help="audit.jsonl file")

    demo_p = sub.add_parser("demo-scenario",
                            help="run the two-researcher screening scenario")
    demo_p.add_argument("--root", default=None,
                        help="directory for the demo environment (default: temp)")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except BiogateError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "serve":
        return _serve(args)
    if args.command == "index-build":
        return _index_build(args)
    if args.command == "registry":
        return _registry(args)
    if args.command == "fed-sync":
        return _fed_sync(args)
    if args.command == "audit-verify":
        return _audit_verify(args)
    if args.command == "demo-scenario":
        return _demo(args)
    return 1


def _serve(args) -> int:
    import uvicorn

    from .http import create_app
    config = load_config(args.config)
    service = GatewayService(config)
    app = create_app(service)
    if args.static_dir and Path(args.static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=args.static_dir, html=True),
                  name="console")
    try:
        uvicorn.run(app, host=config.listen_host, port=config.listen_port)
    finally:
        service.close()
    return 0


def _index_build(args) -> int:
    alphabet = Alphabet(args.alphabet)
    with open(args.fasta, "rb") as fh:
        records = parse_fasta(fh.read(), alphabet)
    from ..screening import HazardCategory, HazardRecord, Severity
    db = {h: HazardRecord(h, seq, HazardCategory.VIRAL_PROTEIN, Severity.MODERATE)
          for h, seq in records}
    from ..screening import DEFAULT_K
    k = args.k or DEFAULT_K[alphabet.value]
    index = build_index(db, k)
    postings = sum(len(v) for v in index.postings.values())
    print(json.dumps({"records": len(records), "k": k,
                      "distinct_kmers": len(index.postings),
                      "postings": postings}))
    return 0


def _registry(args) -> int:
    service = GatewayService(load_config(args.config))
    try:
        if args.registry_command == "add-institution":
            inst = service.registry.register_institution(
                args.name, args.endorsement_key, aliases=args.alias,
                oversight=OversightProfile(
                    has_biosafety_committee=args.biosafety_committee,
                    federally_funded=args.federally_funded,
                    prior_violations=args.prior_violations),
                extra_exclusions=service.federation.as_exclusion_entries())
            print(json.dumps({"institution_id": inst.institution_id,
                              "trust_level": inst.trust_level,
                              "status": inst.status.value}))
        elif args.registry_command == "list-institutions":
            for inst in sorted(service.registry.institutions.values(),
                               key=lambda i: i.legal_name):
                print(json.dumps({"institution_id": inst.institution_id,
                                  "legal_name": inst.legal_name,
                                  "trust_level": inst.trust_level,
                                  "status": inst.status.value}))
        elif args.registry_command == "load-exclusions":
            count = service.registry.load_exclusion_file(args.path)
            print(json.dumps({"loaded": count}))
    finally:
        service.close()
    return 0


def _fed_sync(args) -> int:
    service = GatewayService(load_config(args.config))
    try:
        peers = args.peer or list(service.config.peers)
        for peer in peers:
            report = service.pull_peer(peer)
            print(json.dumps({"peer": peer, "accepted": report.accepted,
                              "rejected": report.rejected}))
    finally:
        service.close()
    return 0


def _audit_verify(args) -> int:
    events = load_events(args.path)
    head_path = Path(args.path).with_suffix(".head")
    expected_length = expected_head = None
    if head_path.exists():
        head = json.loads(head_path.read_text(encoding="utf-8"))
        expected_length = head["length"]
        expected_head = bytes.fromhex(head["head_hash"])
    report = verify_chain(events, expected_length, expected_head)
    print(json.dumps(report.to_dict()))
    return 0 if report.ok else 1


def _demo(args) -> int:
    root = Path(args.root) if args.root else Path(tempfile.mkdtemp(prefix="biogate-demo-"))
    report, service = run_demo_scenario(root)
    try:
        a, b = report.compatible, report.incompatible
        print(f"[{'PASS' if a.verdict_status == 'flagged_compatible' else 'FAIL'}] "
              f"vaccine-development: {a.verdict_status}, response {a.response.status}")
        print(f"[{'PASS' if b.verdict_status == 'flagged_incompatible' else 'FAIL'}] "
              f"genome-analysis: {b.verdict_status}, response {b.response.status}, "
              f"blocking cases {b.open_blocking_cases}")
        print(f"demo {'passed' if report.passed else 'FAILED'} (root: {root})")
        return 0 if report.passed else 1
    finally:
        service.close()


if __name__ == "__main__":
    raise SystemExit(main())
