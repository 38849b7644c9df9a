"""Benchmark protocol: query selection, ranking metrics, the configuration
matrix and similarity distributions of citing vs. random paper pairs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .kg_store import ConceptType, KnowledgeGraph, Scoping
from .retrieval import IndexConfig, RankedList, build_index, cosine, rank_many
from .vectorizer import FULL_FILTER, EmbeddingTable, TypeFilter, concept_vector, hybrid_vector, random_embeddings

logger = logging.getLogger(__name__)

DEFAULT_K = (10, 20, 50)
RANDOM_DIM = 200
# Table order of the single-type ablation rows.
ABLATION_TYPES = (ConceptType.MATERIAL, ConceptType.PROCESS, ConceptType.DATA, ConceptType.METHOD)


@dataclass(frozen=True)
class QuerySet:
    queries: tuple[tuple[str, frozenset], ...]

    def __len__(self):
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)

    @property
    def query_ids(self):
        return [q for q, _ in self.queries]

    @property
    def relevant_link_count(self):
        return sum(len(r) for _, r in self.queries)


def select_queries(kg: KnowledgeGraph, min_citations: int = 4) -> QuerySet:
    """Papers with at least ``min_citations`` outgoing in-KG citations.

    Each query's relevant set is exactly the papers it cites.
    """
    queries = []
    for pid in kg.paper_ids:
        cited = kg.cited_by(pid)
        if len(cited) >= min_citations:
            queries.append((pid, frozenset(cited) - {pid}))
    return QuerySet(tuple(queries))


def _ids(ranked):
    return ranked.doc_ids if isinstance(ranked, RankedList) else list(ranked)


def precision_at_k(ranked, relevant, k: int) -> float:
    """Fraction of the top ``k`` positions holding a relevant document.

    A list shorter than ``k`` still divides by ``k``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    top = _ids(ranked)[:k]
    return sum(1 for d in top if d in relevant) / k


def average_precision_at_k(ranked, relevant, k: int) -> float:
    """AP@k normalised by the total number of relevant documents.

    ``ranked`` is a :class:`RankedList` or a sequence of doc ids. Unlike the
    common ``min(k, R)`` variant, a query with more than ``k`` relevant
    documents cannot reach 1.0.
    """
    if not relevant:
        raise ValueError("average precision is undefined for an empty relevant set")
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = np.fromiter((d in relevant for d in _ids(ranked)[:k]), dtype=bool)
    if not hits.any():
        return 0.0
    positions = np.flatnonzero(hits) + 1
    precisions = np.arange(1, len(positions) + 1) / positions
    return float(precisions.sum() / len(relevant))


def mean_average_precision(rankings: Sequence, queryset: QuerySet, k: int) -> float:
    """Mean AP@k of ``rankings`` aligned with ``queryset``'s queries."""
    if not len(queryset):
        raise ValueError("mean average precision needs at least one query")
    if len(rankings) != len(queryset):
        raise ValueError("one ranking per query expected")
    aps = [average_precision_at_k(r, rel, k) for r, (_, rel) in zip(rankings, queryset)]
    return float(np.mean(aps))


def map_at_ks(queryset: QuerySet, index, k_values: Iterable[int], workers: int = 1) -> dict[int, float]:
    """MAP at several depths from a single ranking pass at the largest depth."""
    k_values = sorted(set(k_values))
    if not len(queryset):
        raise ValueError("mean average precision needs at least one query")
    rankings = rank_many(queryset.query_ids, index, k_values[-1], workers)
    return {k: mean_average_precision(rankings, queryset, k) for k in k_values}


def map_at_k(queryset: QuerySet, index, k: int, workers: int = 1) -> float:
    return map_at_ks(queryset, index, [k], workers)[k]


# -- configuration matrix --------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    label: str
    maps: dict[int, float]
    base: str | None = None
    deltas: dict[int, float] | None = None


@dataclass
class EvalReport:
    k_values: tuple[int, ...]
    query_count: int
    relevant_link_count: int
    rows: list[ReportRow] = field(default_factory=list)

    def row(self, label) -> ReportRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def labels(self):
        return [r.label for r in self.rows]

    def to_tsv(self) -> str:
        head = ["config", "base"]
        for k in self.k_values:
            head += [f"MAP@{k}", f"delta@{k}"]
        lines = ["\t".join(head)]
        for r in self.rows:
            cells = [r.label, r.base or ""]
            for k in self.k_values:
                cells.append(f"{r.maps[k]:.10f}")
                cells.append(f"{r.deltas[k]:+.10f}" if r.deltas else "")
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        """Fixed-width table in percent with parenthesised deltas."""
        width = max([len(r.label) for r in self.rows] + [6])
        head = " " * width + "".join(f"  {'MAP@' + str(k):>15}" for k in self.k_values)
        lines = [f"queries: {self.query_count}  relevant links: {self.relevant_link_count}", head]
        for r in self.rows:
            cells = []
            for k in self.k_values:
                val = f"{100 * r.maps[k]:.1f}"
                delta = f"({100 * r.deltas[k]:+.1f})" if r.deltas else ""
                cells.append(f"  {val:>7} {delta:<7}")
            lines.append(r.label.ljust(width) + "".join(cells))
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "k_values": list(self.k_values),
            "query_count": self.query_count,
            "relevant_link_count": self.relevant_link_count,
            "rows": [
                {"label": r.label, "base": r.base,
                 "map": {str(k): v for k, v in r.maps.items()},
                 "delta": {str(k): v for k, v in r.deltas.items()} if r.deltas else None}
                for r in self.rows
            ],
        }


def concept_label(scoping: Scoping) -> str:
    return f"concept vector ({scoping.value} KG)"


def run_benchmark(kgs: Mapping, embeddings: Mapping[str, EmbeddingTable],
                  k_values=DEFAULT_K, seed: int = 0, *, labels=None, min_citations: int = 4,
                  random_dim: int = RANDOM_DIM, ablation: bool = True, workers: int = 1) -> EvalReport:
    """Evaluate the full configuration matrix.

    ``kgs`` maps a scoping mode (``"in-domain"``/``"cross-domain"``) to a
    knowledge graph built from the same papers and citations. Rows follow the
    results table: random vectors, concept-only per KG variant, in-domain
    single-type ablations, then each embedding alone and combined with each
    KG variant's concept vectors. Combined rows carry deltas against their
    embedding-only base row.
    """
    kgs = {Scoping.parse(m): kg for m, kg in kgs.items()}
    if not kgs:
        raise ValueError("at least one knowledge graph variant is required")
    variants = [m for m in (Scoping.CROSS_DOMAIN, Scoping.IN_DOMAIN) if m in kgs]
    ref = kgs[variants[-1]]
    for m in variants:
        if kgs[m].citations != ref.citations or set(kgs[m].papers) != set(ref.papers):
            raise ValueError("KG variants must share papers and citations")
    labels = list(embeddings) if labels is None else list(labels)
    missing = [lb for lb in labels if lb not in embeddings]
    if missing:
        raise KeyError(f"missing embedding label(s): {', '.join(missing)}")
    k_values = tuple(sorted(set(k_values)))

    queryset = select_queries(ref, min_citations)
    report = EvalReport(k_values, len(queryset), queryset.relevant_link_count)
    if not len(queryset):
        logger.warning("no query documents with >= %d citations", min_citations)
        return report

    def evaluate(label, kg, emb, config, base=None):
        logger.info("evaluating %s", label)
        index = build_index(kg, emb, config)
        maps = map_at_ks(queryset, index, k_values, workers)
        deltas = None
        if base is not None:
            base_maps = report.row(base).maps
            deltas = {k: maps[k] - base_maps[k] for k in k_values}
        report.rows.append(ReportRow(label, maps, base, deltas))

    rand = random_embeddings(ref.paper_ids, random_dim, seed)
    evaluate("Random", ref, rand, IndexConfig(use_concepts=False, use_dense=True))
    for m in variants:
        evaluate("C" + concept_label(m)[1:], kgs[m], None, IndexConfig())
    if ablation and Scoping.IN_DOMAIN in kgs:
        for t in ABLATION_TYPES:
            evaluate(f"- {t.value}", kgs[Scoping.IN_DOMAIN], None,
                     IndexConfig(type_filter=TypeFilter.of(t)))
    for lb in labels:
        emb = embeddings[lb]
        evaluate(lb, ref, emb, IndexConfig(use_concepts=False, use_dense=True))
        for m in variants:
            evaluate(f"{lb} + {concept_label(m)}", kgs[m], emb,
                     IndexConfig(use_concepts=True, use_dense=True), base=lb)
    return report


# -- pair similarity distributions -------------------------------------------------

@dataclass(frozen=True)
class PairStats:
    population: str
    count: int
    mean: float
    q1: float
    median: float
    q3: float
    min: float
    max: float

    @classmethod
    def from_values(cls, population, values):
        values = np.asarray(values, dtype=np.float64)
        if not len(values):
            raise ValueError("no pairs")
        q1, med, q3 = np.percentile(values, [25, 50, 75])
        return cls(population, len(values), float(values.mean()), float(q1), float(med),
                   float(q3), float(values.min()), float(values.max()))

    def as_row(self):
        return [self.population, str(self.count), *(f"{v:.6f}" for v in
                (self.mean, self.q1, self.median, self.q3, self.min, self.max))]


PAIR_STATS_HEADER = ["population", "count", "mean", "q1", "median", "q3", "min", "max"]


def citing_and_random_pairs(kg: KnowledgeGraph, seed: int):
    """Citation edges plus one random partner per edge.

    For every edge ``(a, b)`` (in sorted order) the random pair keeps ``a``
    and draws a partner uniformly from all papers, redrawing while the
    partner is ``a`` itself or a paper ``a`` actually cites.
    """
    edges = sorted(kg.citations)
    if not edges:
        raise ValueError("knowledge graph has no citation edges")
    ids = kg.paper_ids
    rng = np.random.default_rng(seed)
    random_pairs = []
    for a, _ in edges:
        cited = kg.cited_by(a)
        if len(cited) >= len(ids) - 1:
            raise ValueError(f"paper {a} cites every other paper; no random partner exists")
        while True:
            c = ids[int(rng.integers(len(ids)))]
            if c != a and c not in cited:
                break
        random_pairs.append((a, c))
    return edges, random_pairs


def pair_similarity_stats(kg: KnowledgeGraph, seed: int = 0, type_filter: TypeFilter = FULL_FILTER):
    """Concept-vector cosine summaries for citing pairs and random pairs."""
    edges, random_pairs = citing_and_random_pairs(kg, seed)
    cache = {}

    def vec(pid):
        v = cache.get(pid)
        if v is None:
            v = cache[pid] = hybrid_vector(concept_vector(pid, kg, type_filter))
        return v

    citing = [cosine(vec(a), vec(b)) for a, b in edges]
    rand = [cosine(vec(a), vec(b)) for a, b in random_pairs]
    return PairStats.from_values("citing", citing), PairStats.from_values("random", rand)
