import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgcite.errors import IngestError
from kgcite.kg_store import (
    DOMAINS, MIX, ConceptType, MentionRecord, Scoping, build_kg, ingest_citations,
    ingest_papers, kg_stats, load_kg, normalize_surface, resolve_concepts,
)

from conftest import TOY_CITATIONS, TOY_MENTIONS, TOY_PAPERS


def test_ingest_papers_size_and_order():
    recs = [{"id": "z", "domain": "Agr"}, {"id": "a", "domain": "Med"}, {"id": "m", "domain": "CS"}]
    papers = ingest_papers(recs)
    assert list(papers) == ["a", "m", "z"]
    assert ingest_papers(reversed(recs)) == papers


def test_ingest_papers_duplicate():
    with pytest.raises(IngestError, match="duplicate paper id a"):
        ingest_papers([{"id": "a", "domain": "CS"}, {"id": "a", "domain": "CS"}])


@pytest.mark.parametrize("rec", [{"id": "a", "domain": "Physics"}, {"id": "", "domain": "CS"},
                                 {"domain": "CS"}])
def test_ingest_papers_rejects(rec):
    with pytest.raises(IngestError):
        ingest_papers([rec])


def test_normalize_surface():
    assert normalize_surface("  Neural \t  Network\n") == "neural network"
    assert normalize_surface("   ") == ""


def _two_papers():
    return ingest_papers([{"id": "p1", "domain": "CS"}, {"id": "p2", "domain": "Med"}])


def _nn_mentions():
    return [MentionRecord("p1", "Neural Network", ConceptType.METHOD, "CS"),
            MentionRecord("p2", "neural  network", ConceptType.METHOD, "Med")]


def test_resolve_cross_domain_shares_concepts():
    concepts, links, _ = resolve_concepts(_nn_mentions(), "cross-domain", _two_papers())
    assert len(concepts) == 1 and len(links) == 2
    assert concepts[0].key == "neural network" and concepts[0].scope is None


def test_resolve_in_domain_splits_concepts():
    concepts, links, _ = resolve_concepts(_nn_mentions(), "in-domain", _two_papers())
    assert len(concepts) == 2 and len(links) == 2
    assert {c.scope for c in concepts} == {"CS", "Med"}


def test_resolve_duplicate_mentions_collapse():
    ms = [MentionRecord("p1", "graphene", ConceptType.MATERIAL, "CS")] * 2
    concepts, links, _ = resolve_concepts(ms, "cross-domain", _two_papers())
    assert len(links) == 1


def test_resolve_type_is_part_of_identity():
    ms = [MentionRecord("p1", "graphene", ConceptType.MATERIAL, "CS"),
          MentionRecord("p1", "graphene", ConceptType.DATA, "CS")]
    concepts, links, _ = resolve_concepts(ms, "cross-domain", _two_papers())
    assert len(concepts) == 2


def test_resolve_unknown_paper_and_empty_surface():
    with pytest.raises(IngestError, match="unknown paper"):
        resolve_concepts([MentionRecord("nope", "x", ConceptType.DATA, "CS")], "in-domain", _two_papers())
    concepts, links, skipped = resolve_concepts(
        [MentionRecord("p1", "  ", ConceptType.DATA, "CS")], "in-domain", _two_papers())
    assert skipped == 1 and not concepts and not links


def test_concept_ids_sorted_and_deterministic(toy_inputs):
    papers, mentions, _ = toy_inputs
    p = ingest_papers(papers)
    c1, l1, _ = resolve_concepts(mentions, "in-domain", p)
    c2, l2, _ = resolve_concepts(list(reversed(mentions)), "in-domain", p)
    assert c1 == c2 and l1 == l2
    idents = [c.identity for c in c1]
    assert idents == sorted(idents)
    assert [c.id for c in c1] == list(range(len(c1)))


def test_ingest_citations_semantics():
    ids = {"a", "b"}
    edges, dropped = ingest_citations([("a", "b"), ("b", "a")], ids)
    assert edges == {("a", "b"), ("b", "a")} and dropped == 0
    edges, dropped = ingest_citations([("a", "a")], ids)
    assert edges == set() and dropped == 1
    edges, dropped = ingest_citations([("a", "b"), ("a", "b"), ("a", "x")], ids)
    assert edges == {("a", "b")} and dropped == 2


def test_toy_kg_structure(toy_kg):
    assert toy_kg.citations == {("a", "b"), ("a", "c"), ("a", "d"), ("a", "e"), ("b", "a")}
    assert toy_kg.dropped_citations == 3
    assert len(toy_kg.concepts_of("e")) == 0
    # every link resolves
    for pid, cid in toy_kg.links:
        assert pid in toy_kg.papers and 0 <= cid < toy_kg.n_concepts
    assert toy_kg.n_links == len(toy_kg.links)


def test_kg_stats_empty():
    kg = build_kg([], [], [], "cross-domain")
    st = kg_stats(kg)
    assert st.total_papers == st.total_citations == st.total_concepts == 0
    assert all(v == 0 for v in st.concepts.values())


def test_kg_stats_toy(toy_kg, toy_kg_cross):
    st = kg_stats(toy_kg_cross)
    assert st.papers["CS"] == 2 and st.papers["Med"] == 2 and st.papers["MS"] == 1
    assert st.citations["CS"] == 5 and st.total_citations == 5
    # cross-domain: graphene (CS, MS), neural network (CS, Med), annealing (CS, MS) are MIX
    assert st.concepts[MIX] == 3
    assert st.concepts["CS"] == 2  # silicon, imagenet
    assert st.concepts["Med"] == 1  # mri scans
    assert st.total_concepts == toy_kg_cross.n_concepts == 6
    si = kg_stats(toy_kg)
    assert si.concepts[MIX] == 0
    assert si.total_concepts == toy_kg.n_concepts == 9
    tsv = st.to_tsv().splitlines()
    assert tsv[0].split("\t") == ["", *DOMAINS, MIX, "Total"]
    assert tsv[3].split("\t")[-2:] == ["3", "6"]


def test_load_kg_from_files(tmp_path):
    import json
    (tmp_path / "papers.jsonl").write_text(
        "\n".join(json.dumps(p) for p in TOY_PAPERS) + "\n", encoding="utf-8")
    (tmp_path / "mentions.tsv").write_text(
        "".join(f"{m.paper_id}\t{m.surface}\t{m.concept_type.value}\t{m.domain}\n" for m in TOY_MENTIONS),
        encoding="utf-8")
    (tmp_path / "citations.tsv").write_text("".join(f"{a}\t{b}\n" for a, b in TOY_CITATIONS))
    kg = load_kg(tmp_path / "papers.jsonl", tmp_path / "mentions.tsv", tmp_path / "citations.tsv",
                 Scoping.IN_DOMAIN)
    ref = build_kg(TOY_PAPERS, TOY_MENTIONS, TOY_CITATIONS, "in-domain")
    assert kg.concepts == ref.concepts and kg.links == ref.links and kg.citations == ref.citations

    (tmp_path / "mentions.tsv").write_text("a\tgraphene\tMaterial\tCS\nb\tx\tWidget\tCS\n")
    with pytest.raises(IngestError, match=r"mentions.tsv:2: unknown concept type"):
        load_kg(tmp_path / "papers.jsonl", tmp_path / "mentions.tsv", tmp_path / "citations.tsv", "in-domain")
    (tmp_path / "mentions.tsv").write_text("a\tgraphene\tMaterial\tCS\nq\tx\tData\tCS\n")
    with pytest.raises(IngestError, match=r"mentions.tsv:2: mention references unknown paper"):
        load_kg(tmp_path / "papers.jsonl", tmp_path / "mentions.tsv", tmp_path / "citations.tsv", "in-domain")


# -- properties --------------------------------------------------------------------

surfaces = st.sampled_from(["graphene", "Graphene", "neural network", "NEURAL  network", "laser",
                            "mri", "protein folding", "  ", "cell"])
mention_st = st.tuples(st.integers(0, 7), surfaces, st.sampled_from(list(ConceptType)))


@settings(max_examples=150, deadline=None)
@given(doms=st.lists(st.sampled_from(DOMAINS), min_size=8, max_size=8),
       raw=st.lists(mention_st, max_size=40),
       cites=st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=30))
def test_scoping_and_stats_invariants(doms, raw, cites):
    papers = [{"id": f"p{i}", "domain": d} for i, d in enumerate(doms)]
    mentions = [MentionRecord(f"p{i}", s, t, doms[i]) for i, s, t in raw]
    citations = [(f"p{a}", f"p{b}") for a, b in cites]
    kin = build_kg(papers, mentions, citations, "in-domain")
    kcr = build_kg(papers, mentions, citations, "cross-domain")
    assert kin.n_concepts >= kcr.n_concepts
    assert kin.n_links == kcr.n_links
    for kg in (kin, kcr):
        st_ = kg_stats(kg)
        assert st_.total_concepts == kg.n_concepts
        assert st_.total_papers == len(kg.papers)
        assert st_.total_citations == len(kg.citations)
        assert all(a != b and a in kg.papers and b in kg.papers for a, b in kg.citations)
    again = build_kg(list(reversed(papers)), list(reversed(mentions)), citations, "in-domain")
    assert again.concepts == kin.concepts
    assert all(np.array_equal(again.paper_concepts[p], kin.paper_concepts[p]) for p in kin.papers)
    assert kg_stats(again) == kg_stats(kin)


def test_snapshot_roundtrip(toy_kg_cross, tmp_path):
    from kgcite.snapshot import load_snapshot, save_snapshot

    save_snapshot(toy_kg_cross, tmp_path / "kg.json.gz")
    back = load_snapshot(tmp_path / "kg.json.gz")
    assert back.papers == toy_kg_cross.papers
    assert back.concepts == toy_kg_cross.concepts
    assert back.links == toy_kg_cross.links
    assert back.citations == toy_kg_cross.citations
    assert back.scoping is Scoping.CROSS_DOMAIN
    assert kg_stats(back) == kg_stats(toy_kg_cross)
    (tmp_path / "junk.gz").write_bytes(b"not gzip")
    with pytest.raises(IngestError):
        load_snapshot(tmp_path / "junk.gz")
