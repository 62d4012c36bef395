"""Gateway configuration: one YAML file, validated with field-level errors."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..errors import ConfigError
from ..monitor import DEFAULT_HALF_LIFE_DAYS, DEFAULT_WEIGHTS, EventKind, MonitorRule, RuleKind
from ..screening import DEFAULT_K, Alphabet, ScreeningThresholds


@dataclass
class HazardDbConfig:
    fasta: str
    metadata: str
    alphabet: Alphabet


@dataclass
class PeerConfig:
    url: str
    public_key: str


@dataclass
class ModelConfig:
    model_id: str
    risk_tier: int
    backend_ref: str = ""


@dataclass
class BackendConfig:
    kind: str = "stub"
    seed: int = 0
    corpus: list[str] = field(default_factory=list)
    corpus_fasta: str | None = None
    url: str | None = None


@dataclass
class GatewayConfig:
    host_id: str
    data_dir: str
    hazard_db: HazardDbConfig
    annotation_rules: str | None = None
    listen_host: str = "127.0.0.1"
    listen_port: int = 8440
    k: int = 0                      # 0 = alphabet default
    thresholds: ScreeningThresholds = field(default_factory=ScreeningThresholds)
    xdrop: int = 10
    half_life_days: float = DEFAULT_HALF_LIFE_DAYS
    weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_WEIGHTS))
    monitor_rules: list[MonitorRule] = field(default_factory=list)
    grant_lifetime_days: float = 180.0
    signing_key: str | None = None  # Ed25519 private key, hex
    peers: dict[str, PeerConfig] = field(default_factory=dict)
    models: list[ModelConfig] = field(default_factory=list)
    exclusion_lists: list[str] = field(default_factory=list)
    backend: BackendConfig = field(default_factory=BackendConfig)
    max_outputs: int = 16

    @property
    def effective_k(self) -> int:
        return self.k or DEFAULT_K[self.hazard_db.alphabet.value]


def load_config(path: str) -> GatewayConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"not valid YAML: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a mapping")
    return parse_config(raw, base_dir=Path(path).parent)


def parse_config(raw: dict, base_dir: Path | None = None) -> GatewayConfig:
    base = base_dir or Path(".")

    def resolve(p: str) -> str:
        path = Path(p)
        return str(path if path.is_absolute() else base / path)

    def need(mapping: dict, key: str, where: str):
        if key not in mapping:
            raise ConfigError(f"{where}.{key}" if where else key, "missing required field")
        return mapping[key]

    host_id = need(raw, "host_id", "")
    data_dir = resolve(need(raw, "data_dir", ""))

    hz = need(raw, "hazard_db", "")
    if not isinstance(hz, dict):
        raise ConfigError("hazard_db", "must be a mapping")
    try:
        alphabet = Alphabet(hz.get("alphabet", "amino-acid"))
    except ValueError:
        raise ConfigError("hazard_db.alphabet",
                          f"unknown alphabet {hz.get('alphabet')!r}")
    fasta = resolve(need(hz, "fasta", "hazard_db"))
    metadata = resolve(need(hz, "metadata", "hazard_db"))
    for label, p in (("hazard_db.fasta", fasta), ("hazard_db.metadata", metadata)):
        if not Path(p).exists():
            raise ConfigError(label, f"file not found: {p}")

    listen = raw.get("listen", {}) or {}
    screening = raw.get("screening", {}) or {}
    thresholds = ScreeningThresholds(
        min_identity=float(screening.get("min_identity", 0.7)),
        min_hazard_coverage=float(screening.get("min_hazard_coverage", 0.5)),
    )
    if not 0 <= thresholds.min_identity <= 1:
        raise ConfigError("screening.min_identity", "must be within [0, 1]")
    if not 0 <= thresholds.min_hazard_coverage <= 1:
        raise ConfigError("screening.min_hazard_coverage", "must be within [0, 1]")

    monitor = raw.get("monitor", {}) or {}
    weights = dict(DEFAULT_WEIGHTS)
    for kind, w in (monitor.get("weights", {}) or {}).items():
        if kind not in weights:
            raise ConfigError("monitor.weights", f"unknown event kind {kind!r}")
        weights[kind] = float(w)
    rules = []
    for i, r in enumerate(monitor.get("rules", []) or []):
        where = f"monitor.rules[{i}]"
        try:
            rules.append(MonitorRule(
                rule_id=need(r, "rule_id", where),
                kind=RuleKind(need(r, "kind", where)),
                threshold=float(r.get("threshold", 0)),
                window_days=float(r.get("window_days", 0)),
                event_kind=EventKind(r["event_kind"]) if "event_kind" in r else None,
                multiplier=float(r.get("multiplier", 0)),
                baseline_days=float(r.get("baseline_days", 0)),
            ))
        except ValueError as exc:
            raise ConfigError(where, str(exc))

    fed = raw.get("federation", {}) or {}
    peers = {}
    for peer_id, p in (fed.get("peers", {}) or {}).items():
        peers[peer_id] = PeerConfig(url=need(p, "url", f"federation.peers.{peer_id}"),
                                    public_key=need(p, "public_key",
                                                    f"federation.peers.{peer_id}"))

    models = []
    for i, m in enumerate(raw.get("models", []) or []):
        where = f"models[{i}]"
        tier = need(m, "risk_tier", where)
        if tier not in (1, 2, 3, 4):
            raise ConfigError(f"{where}.risk_tier", f"must be 1..4, got {tier!r}")
        models.append(ModelConfig(model_id=need(m, "model_id", where),
                                  risk_tier=tier,
                                  backend_ref=m.get("backend_ref", "")))

    be = raw.get("backend", {}) or {}
    backend = BackendConfig(
        kind=be.get("kind", "stub"),
        seed=int(be.get("seed", 0)),
        corpus=list(be.get("corpus", []) or []),
        corpus_fasta=resolve(be["corpus_fasta"]) if be.get("corpus_fasta") else None,
        url=be.get("url"),
    )
    if backend.kind not in ("stub", "http"):
        raise ConfigError("backend.kind", f"unknown backend {backend.kind!r}")
    if backend.kind == "http" and not backend.url:
        raise ConfigError("backend.url", "http backend requires a url")

    rules_path = raw.get("annotation_rules")
    if rules_path is not None:
        rules_path = resolve(rules_path)
        if not Path(rules_path).exists():
            raise ConfigError("annotation_rules", f"file not found: {rules_path}")

    cfg = GatewayConfig(
        host_id=host_id,
        data_dir=data_dir,
        hazard_db=HazardDbConfig(fasta=fasta, metadata=metadata, alphabet=alphabet),
        annotation_rules=rules_path,
        listen_host=listen.get("host", "127.0.0.1"),
        listen_port=int(listen.get("port", 8440)),
        k=int(screening.get("k", 0)),
        thresholds=thresholds,
        xdrop=int(screening.get("xdrop", 10)),
        half_life_days=float(monitor.get("half_life_days", DEFAULT_HALF_LIFE_DAYS)),
        weights=weights,
        monitor_rules=rules,
        grant_lifetime_days=float(raw.get("grant_lifetime_days", 180)),
        signing_key=fed.get("signing_key"),
        peers=peers,
        models=models,
        exclusion_lists=[resolve(p) for p in raw.get("exclusion_lists", []) or []],
        backend=backend,
        max_outputs=int(raw.get("max_outputs", 16)),
    )
    if cfg.effective_k < 3:
        raise ConfigError("screening.k", f"k must be >= 3, got {cfg.effective_k}")
    return cfg
