"""Tier-II screening: FASTA, k-mer index, seed-and-extend, motifs, verdicts."""

import json
import random

import pytest

from biogate.errors import ConfigError, SequenceParseError
from biogate.screening import (
    Alphabet,
    AnnotationRule,
    AlignmentHit,
    Disposition,
    HazardCategory,
    HazardRecord,
    ScreeningThresholds,
    Sequence,
    Severity,
    VerdictStatus,
    annotate,
    build_index,
    parse_fasta,
    screen_output,
    seed_and_extend,
)

from sw_oracle import smith_waterman

AMINO = "ACDEFGHIKLMNPQRSTVWY"


def aa(residues: str) -> Sequence:
    return Sequence(Alphabet.AMINO, residues)


def hazard(hid: str, residues: str, category=HazardCategory.VIRAL_PROTEIN,
           severity=Severity.HIGH) -> HazardRecord:
    return HazardRecord(hazard_id=hid, sequence=aa(residues),
                        category=category, severity=severity, label=hid)


def rand_seq(rng: random.Random, n: int) -> str:
    return "".join(rng.choice(AMINO) for _ in range(n))


# ---------------------------------------------------------------------------
# parse_fasta
# ---------------------------------------------------------------------------

def test_fasta_joins_wrapped_lines():
    assert parse_fasta(b">h1\nMKV\nLA", Alphabet.AMINO) == [("h1", aa("MKVLA"))]


def test_fasta_two_records():
    recs = parse_fasta(b">a\nACGT\n>b\nGGGG", Alphabet.NUCLEOTIDE)
    assert [h for h, _ in recs] == ["a", "b"]
    assert [s.residues for _, s in recs] == ["ACGT", "GGGG"]


def test_fasta_illegal_character_reports_line():
    with pytest.raises(SequenceParseError) as err:
        parse_fasta(b">x\nMKB1", Alphabet.AMINO)
    assert err.value.line == 2


def test_fasta_empty_record_rejected():
    with pytest.raises(SequenceParseError):
        parse_fasta(b">empty\n>full\nMKVLA", Alphabet.AMINO)


def test_fasta_uppercases():
    assert parse_fasta(b">h\nmkvla", Alphabet.AMINO)[0][1].residues == "MKVLA"


def test_sequence_validates_alphabet():
    with pytest.raises(SequenceParseError):
        Sequence(Alphabet.NUCLEOTIDE, "ACGU")
    # N is a wildcard for nucleotides but plain asparagine for proteins
    assert Sequence(Alphabet.NUCLEOTIDE, "ACGN").residues == "ACGN"
    assert Sequence(Alphabet.AMINO, "MKNX").residues == "MKNX"


# ---------------------------------------------------------------------------
# build_index
# ---------------------------------------------------------------------------

def test_index_single_kmer():
    idx = build_index([hazard("h1", "MKVLA")], k=5)
    assert idx.postings == {"MKVLA": (("h1", 0),)}


def test_index_posting_count_is_length_rule():
    idx = build_index([hazard("h1", "MKVLAGE")], k=5)  # L=7, k=5 -> 3
    assert sum(len(v) for v in idx.postings.values()) == 3


def test_index_shared_kmer_lists_both():
    idx = build_index([hazard("h1", "AAAAA"), hazard("h2", "CAAAAA")], k=5)
    assert idx.postings["AAAAA"] == (("h1", 0), ("h2", 1))


def test_index_skips_wildcard_kmers():
    idx = build_index([hazard("h1", "MKXLAGE")], k=5)
    assert all("X" not in km for km in idx.postings)
    # only offsets 2.. survive: "XLAGE" has X too, so just positions past it
    assert sum(len(v) for v in idx.postings.values()) == 0


def test_index_rejects_mixed_alphabets():
    records = [hazard("h1", "MKVLA"),
               HazardRecord("h2", Sequence(Alphabet.NUCLEOTIDE, "ACGTACGT"),
                            HazardCategory.TOXIN, Severity.HIGH)]
    with pytest.raises(ConfigError):
        build_index(records, k=5)


def test_index_rejects_small_k():
    with pytest.raises(ConfigError):
        build_index([hazard("h1", "MKVLA")], k=2)


# ---------------------------------------------------------------------------
# seed_and_extend
# ---------------------------------------------------------------------------

def test_self_alignment_is_perfect():
    h = hazard("h1", "MKVLAGEQRI")
    db = {"h1": h}
    idx = build_index(db, k=5)
    hits = seed_and_extend(aa("MKVLAGEQRI"), idx, db)
    assert len(hits) == 1
    hit = hits[0]
    assert hit.identity == 1.0
    assert hit.hazard_coverage == 1.0
    assert hit.score == 10
    assert hit.query_span == (0, 10) and hit.hazard_span == (0, 10)


def test_no_shared_kmer_no_hits():
    db = {"h1": hazard("h1", "MKVLAGEQRI")}
    idx = build_index(db, k=5)
    assert seed_and_extend(aa("WWWWWWWWWW"), idx, db) == []


def test_query_shorter_than_k_is_empty_not_error():
    db = {"h1": hazard("h1", "MKVLAGEQRI")}
    idx = build_index(db, k=5)
    assert seed_and_extend(aa("MKV"), idx, db) == []


def test_planted_fragment_beats_oracle():
    rng = random.Random(1234)
    frag = rand_seq(rng, 40)
    query = rand_seq(rng, 80) + frag + rand_seq(rng, 80)
    db = {"h1": hazard("h1", frag)}
    idx = build_index(db, k=5)
    hits = seed_and_extend(aa(query), idx, db)
    assert hits, "planted fragment must be found"
    hit = hits[0]
    assert hit.hazard_span == (0, 40)
    assert hit.score >= smith_waterman(query, frag)


def test_hit_scores_match_column_recompute():
    rng = random.Random(99)
    db = {}
    for i in range(10):
        db[f"h{i}"] = hazard(f"h{i}", rand_seq(rng, rng.randint(20, 120)))
    idx = build_index(db, k=5)
    for _ in range(20):
        base = db[f"h{rng.randrange(10)}"].sequence.residues
        query = rand_seq(rng, 30) + base[: rng.randint(10, len(base))] + rand_seq(rng, 30)
        for hit in seed_and_extend(aa(query), idx, db):
            q = query
            h = db[hit.hazard_id].sequence.residues
            (qs, qe), (hs, he) = hit.query_span, hit.hazard_span
            assert qe - qs == he - hs
            recomputed = sum(
                1 if (q[qs + i] == h[hs + i] and q[qs + i] != "X") else -1
                for i in range(qe - qs))
            assert recomputed == hit.score
            matches = sum(1 for i in range(qe - qs)
                          if q[qs + i] == h[hs + i] and q[qs + i] != "X")
            assert hit.identity == matches / (qe - qs)


def test_hits_sorted_score_desc_then_hazard_id():
    rng = random.Random(5)
    frag = rand_seq(rng, 30)
    db = {"ha": hazard("ha", frag), "hb": hazard("hb", frag),
          "hc": hazard("hc", frag[:20])}
    idx = build_index(db, k=5)
    hits = seed_and_extend(aa(rand_seq(rng, 10) + frag + rand_seq(rng, 10)), idx, db)
    assert [h.hazard_id for h in hits] == ["ha", "hb", "hc"]
    assert hits[0].score >= hits[1].score >= hits[2].score


def test_wildcard_never_increases_identity():
    rng = random.Random(31)
    frag = rand_seq(rng, 36)
    query = rand_seq(rng, 20) + frag + rand_seq(rng, 20)
    db = {"h1": hazard("h1", frag)}
    idx = build_index(db, k=5)
    base = {h.hazard_id: h.identity for h in seed_and_extend(aa(query), idx, db)}
    for pos in range(0, len(query), 3):
        mutated = query[:pos] + "X" + query[pos + 1:]
        for hit in seed_and_extend(aa(mutated), idx, db):
            if hit.hazard_id in base:
                assert hit.identity <= base[hit.hazard_id] + 1e-12


def test_randomized_recall_against_oracle():
    """Planted exact fragments of length >= 3k are always recovered."""
    rng = random.Random(2026)
    k = 5
    for _ in range(30):
        frag_len = rng.randint(3 * k, 60)
        frag = rand_seq(rng, frag_len)
        hazard_seq = rand_seq(rng, rng.randint(0, 30)) + frag + rand_seq(rng, rng.randint(0, 30))
        h_start = hazard_seq.index(frag)
        db = {"h1": hazard("h1", hazard_seq)}
        for j in range(3):
            db[f"decoy{j}"] = hazard(f"decoy{j}", rand_seq(rng, rng.randint(20, 80)))
        idx = build_index(db, k=k)
        query = rand_seq(rng, rng.randint(0, 120)) + frag + rand_seq(rng, rng.randint(0, 120))
        hits = [h for h in seed_and_extend(aa(query), idx, db) if h.hazard_id == "h1"]
        assert hits
        hit = hits[0]
        hs, he = hit.hazard_span
        overlap = max(0, min(he, h_start + frag_len) - max(hs, h_start))
        assert overlap >= 0.9 * frag_len
        assert hit.score >= 0.9 * smith_waterman(query, hazard_seq)


# ---------------------------------------------------------------------------
# annotate
# ---------------------------------------------------------------------------

def rule(motif, tag="toxin-like", severity=Severity.HIGH, rid="r1"):
    return AnnotationRule(rule_id=rid, motif=motif, function_tag=tag, severity=severity)


def test_motif_with_wildcard_tail():
    fired = annotate(aa("AAGGCAT"), [rule("GGCX")])
    assert fired == {"toxin-like": (2,)}


def test_no_motif_no_tags():
    assert annotate(aa("AAAAAA"), [rule("GGCC")]) == {}


def test_motif_overlapping_positions_brute_force():
    q = "AAAAA"
    fired = annotate(aa(q), [rule("AXAC"[:3] + "A", rid="r2")])  # "AXAA"
    expected = tuple(p for p in range(len(q) - 3)
                     if q[p] == "A" and q[p + 2] == "A" and q[p + 3] == "A")
    assert fired["toxin-like"] == expected


def test_motif_positions_all_offsets():
    # AXA against AAAAA fires wherever both non-wildcard columns match
    fired = annotate(aa("AAAAAX"), [AnnotationRule("r", "AXAA", "t", Severity.HIGH)])
    assert fired["t"] == (0, 1)


def test_same_tag_from_two_rules_merges_positions():
    rules = [rule("AAAA", rid="r1"), rule("CCCC", rid="r2")]
    fired = annotate(aa("AAAACCCC"), rules)
    assert fired["toxin-like"] == (0, 4)


def test_motif_minimum_length_enforced():
    with pytest.raises(ConfigError):
        rule("GGC")


# ---------------------------------------------------------------------------
# screen_output
# ---------------------------------------------------------------------------

VIRAL = "MKVLAGEQRIWNDFSTHYCE"


def viral_db():
    db = {"flu-ha": hazard("flu-ha", VIRAL, HazardCategory.VIRAL_PROTEIN)}
    return db, build_index(db, k=5)


def test_vaccine_purpose_flagged_compatible_delivers():
    db, idx = viral_db()
    verdict = screen_output(aa(VIRAL), {"vaccine-development"}, idx, db, [])
    assert verdict.status == VerdictStatus.FLAGGED_COMPATIBLE
    assert verdict.disposition == Disposition.DELIVER
    assert not verdict.purpose_mismatch


def test_mismatched_purpose_freezes():
    db, idx = viral_db()
    verdict = screen_output(aa(VIRAL), {"genome-analysis"}, idx, db, [])
    assert verdict.status == VerdictStatus.FLAGGED_INCOMPATIBLE
    assert verdict.disposition == Disposition.FREEZE
    assert verdict.purpose_mismatch


def test_clean_output_clear_delivers():
    db, idx = viral_db()
    verdict = screen_output(aa("WWWWWWWWWWWWWWW"), {"vaccine-development"}, idx, db, [])
    assert verdict.status == VerdictStatus.CLEAR
    assert verdict.disposition == Disposition.DELIVER
    assert not verdict.purpose_mismatch


def test_toxin_hit_incompatible_with_every_purpose():
    db = {"tox": hazard("tox", VIRAL, HazardCategory.TOXIN)}
    idx = build_index(db, k=5)
    for purpose in ["vaccine-development", "antibody-design", "enzyme-engineering",
                    "genome-analysis", "protein-structure-research", "other"]:
        verdict = screen_output(aa(VIRAL), {purpose}, idx, db, [])
        assert verdict.status == VerdictStatus.FLAGGED_INCOMPATIBLE, purpose


def test_high_severity_motif_flags_without_any_hit():
    db, idx = viral_db()
    rules = [rule("WWWW", tag="neurotoxin-motif")]
    verdict = screen_output(aa("AAWWWWAAAAAAAAA"), {"vaccine-development"},
                            idx, db, rules)
    assert verdict.status == VerdictStatus.FLAGGED_INCOMPATIBLE
    assert verdict.triggering_tags == ("neurotoxin-motif",)


def test_moderate_motif_alone_does_not_flag():
    db, idx = viral_db()
    rules = [rule("WWWW", severity=Severity.MODERATE)]
    verdict = screen_output(aa("AAWWWWAAAAAAAAA"), {"vaccine-development"},
                            idx, db, rules)
    assert verdict.status == VerdictStatus.CLEAR
    assert verdict.function_tags  # still reported as evidence


def test_sub_threshold_hit_does_not_flag():
    rng = random.Random(8)
    # hazard much longer than the shared fragment: coverage below 0.5
    frag = rand_seq(rng, 20)
    long_hazard = frag + rand_seq(rng, 80)
    db = {"h1": hazard("h1", long_hazard)}
    idx = build_index(db, k=5)
    verdict = screen_output(aa(rand_seq(rng, 30) + frag + rand_seq(rng, 30)),
                            {"genome-analysis"}, idx, db, [])
    assert verdict.status == VerdictStatus.CLEAR
    assert verdict.hits  # evidence retained even when below thresholds


def test_verdicts_are_byte_identical_for_identical_inputs():
    db, idx = viral_db()
    a = screen_output(aa(VIRAL), {"vaccine-development"}, idx, db, [])
    b = screen_output(aa(VIRAL), {"vaccine-development"}, idx, db, [])
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)
    assert a.verdict_id == b.verdict_id


def test_verdict_invariants():
    db, idx = viral_db()
    cases = [
        (VIRAL, {"vaccine-development"}),
        (VIRAL, {"genome-analysis"}),
        ("WWWWWWWWWWWWWWW", {"other"}),
    ]
    for residues, purpose in cases:
        v = screen_output(aa(residues), purpose, idx, db, [])
        assert (v.disposition == Disposition.FREEZE) == (
            v.status == VerdictStatus.FLAGGED_INCOMPATIBLE)
        if v.status == VerdictStatus.CLEAR:
            assert v.disposition == Disposition.DELIVER and not v.purpose_mismatch
        if v.status != VerdictStatus.CLEAR:
            assert v.hits or v.triggering_tags
