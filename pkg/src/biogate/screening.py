"""Tier II: real-time output screening.

Generated sequences are compared against a hazard database with an
exact-k-mer seed-and-extend local aligner (ungapped, x-drop) and
scanned for hazardous motifs. A flagged output whose hazard category is
incompatible with the researcher's declared purpose is frozen for
review; a compatible flag is delivered with a retrospective case.

The index and hazard database are immutable after load; screening is a
pure function over them, so any number of requests may screen
concurrently.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

from .canonical import sha256_hex, canonical_json
from .errors import ConfigError, SequenceParseError
from .storage import read_jsonl

MATCH = 1
MISMATCH = -1
GAP = -2          # used by the reference oracle; extension here is ungapped
XDROP = 10

DEFAULT_K = {"amino-acid": 5, "nucleotide": 11}


class Alphabet(str, Enum):
    AMINO = "amino-acid"
    NUCLEOTIDE = "nucleotide"

    @property
    def letters(self) -> str:
        return "ACDEFGHIKLMNPQRSTVWY" if self is Alphabet.AMINO else "ACGT"

    @property
    def wildcard(self) -> str:
        return "X" if self is Alphabet.AMINO else "N"


@dataclass(frozen=True)
class Sequence:
    alphabet: Alphabet
    residues: str

    def __post_init__(self):
        if not self.residues:
            raise SequenceParseError("empty sequence")
        allowed = set(self.alphabet.letters) | {self.alphabet.wildcard}
        bad = set(self.residues) - allowed
        if bad:
            raise SequenceParseError(
                f"illegal residue(s) {sorted(bad)} for {self.alphabet.value}")

    def __len__(self) -> int:
        return len(self.residues)


class HazardCategory(str, Enum):
    VIRAL_PROTEIN = "viral-protein"
    TOXIN = "toxin"
    VIRULENCE_FACTOR = "virulence-factor"
    SELECT_AGENT_FRAGMENT = "select-agent-fragment"


class Severity(str, Enum):
    MODERATE = "moderate"
    HIGH = "high"


@dataclass(frozen=True)
class HazardRecord:
    hazard_id: str
    sequence: Sequence
    category: HazardCategory
    severity: Severity
    label: str = ""


@dataclass(frozen=True)
class AnnotationRule:
    rule_id: str
    motif: str
    function_tag: str
    severity: Severity

    def __post_init__(self):
        if len(self.motif) < 4:
            raise ConfigError("motif", f"rule {self.rule_id}: motif shorter than 4")


def parse_fasta(data: bytes, alphabet: Alphabet) -> list[tuple[str, Sequence]]:
    """Parse FASTA records, uppercasing and joining wrapped lines.

    Raises with the offending line number on illegal characters or an
    empty record.
    """
    text = data.decode("utf-8")
    records: list[tuple[str, Sequence]] = []
    header: str | None = None
    chunks: list[str] = []
    first_line = 0
    allowed = set(alphabet.letters) | {alphabet.wildcard}

    def flush(at_line: int):
        if header is None:
            return
        residues = "".join(chunks)
        if not residues:
            raise SequenceParseError(f"empty record {header!r}", line=at_line)
        records.append((header, Sequence(alphabet, residues)))

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            flush(lineno)
            header = line[1:].strip()
            chunks = []
            first_line = lineno
        else:
            if header is None:
                raise SequenceParseError("sequence data before first header", line=lineno)
            up = line.upper()
            bad = set(up) - allowed
            if bad:
                raise SequenceParseError(
                    f"illegal character(s) {sorted(bad)}", line=lineno)
            chunks.append(up)
    flush(first_line + 1)
    if not records:
        raise SequenceParseError("no FASTA records found", line=1)
    return records


def load_hazard_db(fasta_path: str, metadata_path: str,
                   alphabet: Alphabet) -> dict[str, HazardRecord]:
    """Hazard DB = FASTA plus line-delimited sidecar keyed by header."""
    with open(fasta_path, "rb") as fh:
        records = parse_fasta(fh.read(), alphabet)
    meta = {rec["header"]: rec for rec in read_jsonl(metadata_path)}
    db: dict[str, HazardRecord] = {}
    for header, seq in records:
        if header not in meta:
            raise ConfigError("hazard_db", f"no metadata for record {header!r}")
        m = meta[header]
        db[header] = HazardRecord(
            hazard_id=header,
            sequence=seq,
            category=HazardCategory(m["category"]),
            severity=Severity(m["severity"]),
            label=m.get("label", ""),
        )
    return db


def load_annotation_rules(path: str) -> list[AnnotationRule]:
    return [AnnotationRule(rule_id=r["rule_id"], motif=r["motif"].upper(),
                           function_tag=r["function_tag"],
                           severity=Severity(r["severity"]))
            for r in read_jsonl(path)]


@dataclass(frozen=True)
class KmerIndex:
    k: int
    alphabet: Alphabet
    postings: dict[str, tuple[tuple[str, int], ...]]


def build_index(db: dict[str, HazardRecord] | list[HazardRecord], k: int) -> KmerIndex:
    """Exact k-mer postings over the hazard DB; wildcard k-mers skipped."""
    records = list(db.values()) if isinstance(db, dict) else list(db)
    if k < 3:
        raise ConfigError("k", f"k must be >= 3, got {k}")
    alphabets = {r.sequence.alphabet for r in records}
    if len(alphabets) > 1:
        raise ConfigError("hazard_db", "hazard records mix alphabets")
    alphabet = alphabets.pop() if alphabets else Alphabet.AMINO
    wildcard = alphabet.wildcard
    postings: dict[str, list[tuple[str, int]]] = defaultdict(list)
    for rec in sorted(records, key=lambda r: r.hazard_id):
        s = rec.sequence.residues
        for off in range(len(s) - k + 1):
            kmer = s[off:off + k]
            if wildcard in kmer:
                continue
            postings[kmer].append((rec.hazard_id, off))
    return KmerIndex(k=k, alphabet=alphabet,
                     postings={km: tuple(v) for km, v in postings.items()})


@dataclass(frozen=True)
class AlignmentHit:
    hazard_id: str
    score: int
    identity: float
    query_span: tuple[int, int]     # half-open
    hazard_span: tuple[int, int]
    hazard_coverage: float

    def to_dict(self) -> dict:
        return {
            "hazard_id": self.hazard_id,
            "score": self.score,
            "identity": round(self.identity, 6),
            "query_span": list(self.query_span),
            "hazard_span": list(self.hazard_span),
            "hazard_coverage": round(self.hazard_coverage, 6),
        }


def _column_score(a: str, b: str, wildcard: str) -> int:
    return MATCH if (a == b and a != wildcard) else MISMATCH


def seed_and_extend(query: Sequence, index: KmerIndex,
                    db: dict[str, HazardRecord],
                    xdrop: int = XDROP) -> list[AlignmentHit]:
    """Ungapped x-drop extension of exact k-mer seeds.

    Seeds on the same diagonal whose extended spans overlap are
    coalesced; per hazard only the best-scoring hit is kept. Hits are
    ordered by score descending, hazard_id ascending.
    """
    if query.alphabet != index.alphabet:
        raise ConfigError("alphabet", "query alphabet does not match index")
    q = query.residues
    k = index.k
    if len(q) < k:
        return []
    wildcard = index.alphabet.wildcard

    # diagonal -> query intervals already produced, to skip contained seeds
    spans: dict[tuple[str, int], list[tuple[int, int, int, int, int]]] = defaultdict(list)
    for q_off in range(len(q) - k + 1):
        kmer = q[q_off:q_off + k]
        for hazard_id, h_off in index.postings.get(kmer, ()):
            diag = q_off - h_off
            key = (hazard_id, diag)
            if any(qs <= q_off and q_off + k <= qe for qs, qe, *_ in spans[key]):
                continue
            h = db[hazard_id].sequence.residues
            qs, qe, hs, he, score = _extend(q, h, q_off, h_off, k, xdrop, wildcard)
            spans[key].append((qs, qe, hs, he, score))

    best_per_hazard: dict[str, AlignmentHit] = {}
    for (hazard_id, _diag), intervals in spans.items():
        h = db[hazard_id].sequence.residues
        for qs, qe, hs, he, score in _coalesce(intervals, q, h, wildcard):
            matches = sum(
                1 for i in range(qe - qs)
                if q[qs + i] == h[hs + i] and q[qs + i] != wildcard)
            hit = AlignmentHit(
                hazard_id=hazard_id,
                score=score,
                identity=matches / (qe - qs),
                query_span=(qs, qe),
                hazard_span=(hs, he),
                hazard_coverage=(he - hs) / len(h),
            )
            cur = best_per_hazard.get(hazard_id)
            if cur is None or (hit.score, -hit.query_span[0]) > (cur.score, -cur.query_span[0]):
                best_per_hazard[hazard_id] = hit

    return sorted(best_per_hazard.values(), key=lambda h: (-h.score, h.hazard_id))


def _extend(q: str, h: str, q_off: int, h_off: int, k: int,
            xdrop: int, wildcard: str) -> tuple[int, int, int, int, int]:
    """Greedy ungapped extension in both directions under an x-drop cutoff."""
    seed_score = sum(_column_score(q[q_off + i], h[h_off + i], wildcard) for i in range(k))

    best_right = 0
    cur = 0
    right = 0
    i, j = q_off + k, h_off + k
    while i < len(q) and j < len(h):
        cur += _column_score(q[i], h[j], wildcard)
        if cur > best_right:
            best_right, right = cur, i - (q_off + k) + 1
        if best_right - cur > xdrop:
            break
        i += 1
        j += 1

    best_left = 0
    cur = 0
    left = 0
    i, j = q_off - 1, h_off - 1
    while i >= 0 and j >= 0:
        cur += _column_score(q[i], h[j], wildcard)
        if cur > best_left:
            best_left, left = cur, q_off - i
        if best_left - cur > xdrop:
            break
        i -= 1
        j -= 1

    qs, qe = q_off - left, q_off + k + right
    hs, he = h_off - left, h_off + k + right
    return qs, qe, hs, he, best_left + seed_score + best_right


def _coalesce(intervals, q: str, h: str, wildcard: str):
    """Merge overlapping extension spans on one diagonal into single hits.

    The merged span is rescored column-by-column so every reported score
    is exactly the score of the alignment it describes.
    """
    if len(intervals) == 1:
        return intervals
    merged = []
    for iv in sorted(intervals):
        if merged and iv[0] < merged[-1][1]:
            prev = merged[-1]
            qs, qe = prev[0], max(prev[1], iv[1])
            hs, he = prev[2], max(prev[3], iv[3])
            score = sum(_column_score(q[qs + i], h[hs + i], wildcard)
                        for i in range(qe - qs))
            merged[-1] = (qs, qe, hs, he, score)
        else:
            merged.append(iv)
    return merged


def annotate(query: Sequence, rules: list[AnnotationRule]) -> dict[str, tuple[int, ...]]:
    """Scan for motif rules; wildcard positions in the motif match anything.

    Returns each fired function tag once, with every firing position.
    """
    q = query.residues
    wildcard = query.alphabet.wildcard
    fired: dict[str, set[int]] = defaultdict(set)
    for rule in rules:
        motif = rule.motif
        m = len(motif)
        for p in range(len(q) - m + 1):
            if all(motif[i] == wildcard or motif[i] == q[p + i] for i in range(m)):
                fired[rule.function_tag].add(p)
    return {tag: tuple(sorted(pos)) for tag, pos in sorted(fired.items())}


@dataclass(frozen=True)
class ScreeningThresholds:
    min_identity: float = 0.7
    min_hazard_coverage: float = 0.5


class VerdictStatus(str, Enum):
    CLEAR = "clear"
    FLAGGED_COMPATIBLE = "flagged_compatible"
    FLAGGED_INCOMPATIBLE = "flagged_incompatible"


class Disposition(str, Enum):
    DELIVER = "deliver"
    FREEZE = "freeze"


#: Declared purposes and the hazard categories they legitimately touch.
#: Toxins, virulence factors and select-agent fragments justify nothing.
PURPOSE_COMPATIBILITY: dict[str, frozenset[HazardCategory]] = {
    "vaccine-development": frozenset({HazardCategory.VIRAL_PROTEIN}),
    "antibody-design": frozenset({HazardCategory.VIRAL_PROTEIN}),
    "enzyme-engineering": frozenset(),
    "genome-analysis": frozenset(),
    "protein-structure-research": frozenset(),
    "other": frozenset(),
}


@dataclass(frozen=True)
class ScreeningVerdict:
    verdict_id: str
    status: VerdictStatus
    hits: tuple[AlignmentHit, ...]
    function_tags: dict[str, tuple[int, ...]]
    purpose_mismatch: bool
    disposition: Disposition
    triggering_categories: tuple[str, ...] = ()
    triggering_tags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "verdict_id": self.verdict_id,
            "status": self.status.value,
            "hits": [h.to_dict() for h in self.hits],
            "function_tags": {t: list(p) for t, p in self.function_tags.items()},
            "purpose_mismatch": self.purpose_mismatch,
            "disposition": self.disposition.value,
            "triggering_categories": list(self.triggering_categories),
            "triggering_tags": list(self.triggering_tags),
        }


def screen_output(query: Sequence, purpose_tags: frozenset[str] | set[str],
                  index: KmerIndex, db: dict[str, HazardRecord],
                  rules: list[AnnotationRule],
                  thresholds: ScreeningThresholds = ScreeningThresholds(),
                  xdrop: int = XDROP) -> ScreeningVerdict:
    """Flag, then judge the flag against the declared purpose.

    Never drops an output silently: the result is always a verdict with
    disposition deliver or freeze.
    """
    hits = tuple(seed_and_extend(query, index, db, xdrop=xdrop))
    tags = annotate(query, rules)

    triggering_hits = [
        h for h in hits
        if h.identity >= thresholds.min_identity
        and h.hazard_coverage >= thresholds.min_hazard_coverage
    ]
    high_rules = {r.function_tag for r in rules if r.severity == Severity.HIGH}
    triggering_tags = tuple(sorted(t for t in tags if t in high_rules))
    flagged = bool(triggering_hits) or bool(triggering_tags)

    if not flagged:
        return _verdict(VerdictStatus.CLEAR, hits, tags, False,
                        Disposition.DELIVER, (), ())

    categories = tuple(sorted({db[h.hazard_id].category.value for h in triggering_hits}))
    compatible_categories: set[HazardCategory] = set()
    for tag in purpose_tags:
        compatible_categories |= PURPOSE_COMPATIBILITY.get(tag, frozenset())
    compatible = (
        not triggering_tags  # a high-severity motif justifies nothing
        and all(HazardCategory(c) in compatible_categories for c in categories)
    )

    if compatible:
        return _verdict(VerdictStatus.FLAGGED_COMPATIBLE, hits, tags, False,
                        Disposition.DELIVER, categories, triggering_tags)
    return _verdict(VerdictStatus.FLAGGED_INCOMPATIBLE, hits, tags, True,
                    Disposition.FREEZE, categories, triggering_tags)


def _verdict(status, hits, tags, mismatch, disposition, categories, trig_tags):
    body = {
        "status": status.value,
        "hits": [h.to_dict() for h in hits],
        "function_tags": {t: list(p) for t, p in tags.items()},
        "purpose_mismatch": mismatch,
        "disposition": disposition.value,
        "triggering_categories": list(categories),
        "triggering_tags": list(trig_tags),
    }
    return ScreeningVerdict(
        verdict_id=sha256_hex(canonical_json(body)),
        status=status,
        hits=hits,
        function_tags=tags,
        purpose_mismatch=mismatch,
        disposition=disposition,
        triggering_categories=categories,
        triggering_tags=trig_tags,
    )
