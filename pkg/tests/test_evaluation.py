from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgcite.evaluation import (
    PairStats, QuerySet, average_precision_at_k, citing_and_random_pairs, map_at_k,
    map_at_ks, mean_average_precision, pair_similarity_stats, precision_at_k, run_benchmark,
    select_queries,
)
from kgcite.kg_store import ConceptType, MentionRecord, build_kg
from kgcite.retrieval import CorpusIndex, RankedList, rank_all
from kgcite.synthetic import planted_corpus
from kgcite.vectorizer import SparseVector, hybrid_vector


def oracle_ap(ranked, relevant, k):
    """AP@k by literal enumeration of the definition, in exact rationals."""
    total = Fraction(0)
    for kk in range(1, k + 1):
        if kk <= len(ranked) and ranked[kk - 1] in relevant:
            hits = sum(1 for d in ranked[:kk] if d in relevant)
            total += Fraction(hits, kk)
    return total / len(relevant)


def test_precision_examples():
    assert precision_at_k(list("rrrrr"), {"r"}, 5) == 1.0
    assert precision_at_k(list("xxxxx"), {"r"}, 5) == 0.0
    assert precision_at_k(["r1", "x1", "r2", "x2", "x3"], {"r1", "r2"}, 5) == pytest.approx(0.4)
    # short list keeps divisor k
    assert precision_at_k(["r1"], {"r1"}, 4) == 0.25


def test_average_precision_examples():
    assert average_precision_at_k(["a", "b", "x", "y", "z"], {"a", "b"}, 5) == 1.0
    assert average_precision_at_k(["a", "x", "b", "y", "z"], {"a", "b"}, 5) == pytest.approx(5 / 6, abs=1e-12)
    assert average_precision_at_k(["a"] + [f"x{i}" for i in range(49)], set("abcde"), 50) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        average_precision_at_k(["a"], set(), 5)


def test_ap_accepts_ranked_list():
    r = RankedList("q", (("a", 0.9), ("x", 0.5), ("b", 0.1)), 3)
    assert average_precision_at_k(r, {"a", "b"}, 3) == pytest.approx(5 / 6)


rankings = st.lists(st.integers(0, 19), max_size=20, unique=True)
relevant_sets = st.sets(st.integers(0, 19), min_size=1, max_size=8)


@settings(max_examples=300, deadline=None)
@given(rankings, relevant_sets, st.integers(1, 25))
def test_ap_matches_oracle_and_bounds(ranked, relevant, k):
    ap = average_precision_at_k(ranked, relevant, k)
    assert ap == pytest.approx(float(oracle_ap(ranked, relevant, k)), abs=1e-12)
    assert 0.0 <= ap <= 1.0
    assert 0.0 <= precision_at_k(ranked, relevant, k) <= 1.0
    assert average_precision_at_k(ranked, relevant, k + 1) >= ap
    perfect = set(ranked[:len(relevant)]) == relevant and len(relevant) <= k
    assert (ap == pytest.approx(1.0, abs=1e-12)) == perfect


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(rankings, relevant_sets), min_size=1, max_size=6), st.randoms())
def test_map_permutation_invariant(pairs, rnd):
    qs = QuerySet(tuple((str(i), frozenset(rel)) for i, (_, rel) in enumerate(pairs)))
    ranks = [r for r, _ in pairs]
    m = mean_average_precision(ranks, qs, 10)
    order = list(range(len(pairs)))
    rnd.shuffle(order)
    qs2 = QuerySet(tuple(qs.queries[i] for i in order))
    assert mean_average_precision([ranks[i] for i in order], qs2, 10) == pytest.approx(m, abs=1e-12)


def _index_with_rankings():
    # query q scores docs by dense similarity along a fixed direction
    ids = ["q", "a", "b", "c", "d"]
    dense = {"q": [1, 0], "a": [1, 0.1], "b": [1, 0.5], "c": [1, 2], "d": [0, 1]}
    return CorpusIndex.from_vectors(ids, [hybrid_vector(None, np.array(dense[i], float)) for i in ids])


def test_map_simple_cases():
    idx = _index_with_rankings()
    assert rank_all("q", idx, 4).doc_ids == ["a", "b", "c", "d"]
    assert map_at_k(QuerySet((("q", frozenset({"a", "b"})),)), idx, 5) == 1.0
    qs = QuerySet((("q", frozenset({"a"})), ("d", frozenset({"a"}))))
    # from d: c first, then b, a
    assert rank_all("d", idx, 4).doc_ids[0] == "c"
    m = map_at_k(qs, idx, 1)
    assert m == pytest.approx(0.5)
    with pytest.raises(ValueError):
        map_at_k(QuerySet(()), idx, 5)


def test_map_matches_enumeration_oracle_on_10_queries():
    rng = np.random.default_rng(11)
    n = 80
    ids = [f"d{i:03d}" for i in range(n)]
    vecs = [hybrid_vector(SparseVector.binary(30, rng.choice(30, 4, replace=False)), rng.standard_normal(5))
            for _ in range(n)]
    idx = CorpusIndex.from_vectors(ids, vecs)
    queries = []
    for q in rng.choice(n, 10, replace=False):
        others = [d for d in ids if d != ids[q]]
        queries.append((ids[q], frozenset(rng.choice(others, int(rng.integers(1, 8)), replace=False).tolist())))
    qs = QuerySet(tuple(queries))
    for k in (1, 5, 10, 20):
        want = 0
        for q, rel in queries:
            mat = {d: v.materialize() for d, v in zip(ids, vecs)}
            qv = mat[q]
            scored = sorted((-(qv @ mat[d]) / (np.linalg.norm(qv) * np.linalg.norm(mat[d])), d)
                            for d in ids if d != q)
            want += oracle_ap([d for _, d in scored], rel, k)
        assert map_at_k(qs, idx, k) == pytest.approx(float(want / len(queries)), abs=1e-12)
    multi = map_at_ks(qs, idx, [20, 5, 10])
    assert list(multi) == [5, 10, 20]


def test_select_queries(toy_kg):
    qs = select_queries(toy_kg)
    assert qs.query_ids == ["a"]
    assert qs.queries[0][1] == {"b", "c", "d", "e"}
    assert qs.relevant_link_count == 4
    assert select_queries(toy_kg, min_citations=1).query_ids == ["a", "b"]
    assert len(select_queries(toy_kg, min_citations=5)) == 0


def test_select_queries_threshold():
    papers = [{"id": x, "domain": "CS"} for x in "abcde"]
    kg = build_kg(papers, [], [("a", "b"), ("a", "c"), ("a", "d"), ("b", "a")], "in-domain")
    assert len(select_queries(kg)) == 0
    assert select_queries(kg, 3).query_ids == ["a"]


def _paired_kg(n_pairs=6):
    """Citing pairs share one private concept; no other pair shares anything."""
    papers, mentions, cites = [], [], []
    for i in range(n_pairs):
        a, b = f"a{i}", f"b{i}"
        papers += [{"id": a, "domain": "Bio"}, {"id": b, "domain": "Bio"}]
        mentions += [MentionRecord(a, f"c{i}", ConceptType.DATA, "Bio"),
                     MentionRecord(b, f"c{i}", ConceptType.DATA, "Bio")]
        cites.append((a, b))
    return build_kg(papers, mentions, cites, "cross-domain")


def test_pair_stats_extremes():
    kg = _paired_kg()
    citing, rand = pair_similarity_stats(kg, seed=3)
    assert citing.count == rand.count == 6
    assert citing.mean == 1.0 and rand.mean == 0.0
    assert citing.q1 <= citing.median <= citing.q3


def test_random_pairs_exclude_self_and_citations():
    c = planted_corpus(120, 300, 400, seed=1)
    kg = c.kg("cross-domain")
    edges, rnd = citing_and_random_pairs(kg, seed=5)
    assert len(rnd) == len(edges)
    assert [a for a, _ in rnd] == [a for a, _ in edges]
    assert all(a != b and (a, b) not in kg.citations for a, b in rnd)
    assert citing_and_random_pairs(kg, seed=5) == (edges, rnd)
    assert pair_similarity_stats(kg, 5) == pair_similarity_stats(kg, 5)


def test_pair_stats_values():
    st_ = PairStats.from_values("citing", [0.0, 1.0, 0.5, 0.25])
    assert (st_.min, st_.max, st_.mean) == (0.0, 1.0, 0.4375)
    assert st_.q1 <= st_.median <= st_.q3
    with pytest.raises(ValueError):
        PairStats.from_values("random", [])


@pytest.fixture(scope="module")
def small_benchmark():
    c = planted_corpus(200, 800, 600, seed=4, dense_dim=16)
    kgs = {"in-domain": c.kg("in-domain"), "cross-domain": c.kg("cross-domain")}
    return run_benchmark(kgs, {"EMB": c.embeddings}, (10, 20, 50), seed=4)


def test_benchmark_layout(small_benchmark):
    assert small_benchmark.labels == [
        "Random",
        "Concept vector (cross-domain KG)",
        "Concept vector (in-domain KG)",
        "- Material", "- Process", "- Data", "- Method",
        "EMB",
        "EMB + concept vector (cross-domain KG)",
        "EMB + concept vector (in-domain KG)",
    ]
    for row in small_benchmark.rows:
        assert all(0.0 <= v <= 1.0 for v in row.maps.values())
        if row.base:
            base = small_benchmark.row(row.base)
            for k in (10, 20, 50):
                assert row.deltas[k] == pytest.approx(row.maps[k] - base.maps[k], abs=1e-12)
        assert row.maps[10] <= row.maps[20] <= row.maps[50]


def test_report_formats(small_benchmark):
    tsv = small_benchmark.to_tsv().splitlines()
    assert tsv[0].split("\t") == ["config", "base", "MAP@10", "delta@10", "MAP@20", "delta@20",
                                  "MAP@50", "delta@50"]
    assert len(tsv) == 1 + len(small_benchmark.rows)
    # printed deltas recomputed from printed values
    for line in tsv[1:]:
        cells = line.split("\t")
        if cells[1]:
            base = next(l.split("\t") for l in tsv[1:] if l.split("\t")[0] == cells[1])
            for j in (2, 4, 6):
                assert float(cells[j + 1]) == pytest.approx(float(cells[j]) - float(base[j]), abs=1e-9)
    text = small_benchmark.to_text()
    assert "EMB + concept vector (in-domain KG)" in text
    assert "(+" in text or "(-" in text
    d = small_benchmark.to_dict()
    assert d["query_count"] == small_benchmark.query_count


def test_benchmark_missing_label():
    c = planted_corpus(50, 100, 150, seed=0, dense_dim=4)
    with pytest.raises(KeyError, match="GloVe"):
        run_benchmark({"in-domain": c.kg("in-domain")}, {"EMB": c.embeddings}, labels=["GloVe"])


def test_benchmark_without_queries_is_empty():
    c = planted_corpus(50, 100, 20, seed=0, dense_dim=4)
    rep = run_benchmark({"in-domain": c.kg("in-domain")}, {"EMB": c.embeddings}, min_citations=50)
    assert rep.query_count == 0 and rep.rows == []
