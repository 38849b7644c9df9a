"""Knowledge graph ingestion: papers, concept mentions and citation links.

A knowledge graph here is the triple (papers, concepts, paper-concept links)
plus the directed citation edges between papers of the graph. Concepts are
resolved from raw mention strings under one of two scoping modes:

* ``cross-domain``: a concept is identified by (normalized surface, type) and
  is shared by papers of every domain.
* ``in-domain``: the mentioning paper's domain is part of the identity, so the
  same string mentioned in two domains yields two concepts.
"""

from __future__ import annotations

import json
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import IngestError

logger = logging.getLogger(__name__)

DOMAINS = ("Agr", "Ast", "Bio", "CS", "Che", "ES", "Eng", "MS", "Mat", "Med")
MIX = "MIX"


class ConceptType(str, Enum):
    MATERIAL = "Material"
    METHOD = "Method"
    PROCESS = "Process"
    DATA = "Data"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == text:
                return member
        raise ValueError(f"unknown concept type {value!r}")


# Fixed small-int codes, used for vectorised type filtering.
TYPE_CODES = {t: i for i, t in enumerate(ConceptType)}


class Scoping(str, Enum):
    IN_DOMAIN = "in-domain"
    CROSS_DOMAIN = "cross-domain"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if member.value == text:
                return member
        raise ValueError(f"unknown scoping mode {value!r}")


@dataclass(frozen=True)
class Paper:
    id: str
    domain: str
    title: str | None = None
    abstract: str | None = None

    def __post_init__(self):
        if not self.id:
            raise IngestError("paper id must be non-empty")
        if self.domain not in DOMAINS:
            raise IngestError(f"unknown domain code {self.domain!r} for paper {self.id}")


@dataclass(frozen=True)
class Concept:
    id: int
    key: str
    concept_type: ConceptType
    scope: str | None  # None means shared across domains

    @property
    def identity(self):
        return (self.key, self.concept_type.value, self.scope or "")


@dataclass(frozen=True)
class MentionRecord:
    paper_id: str
    surface: str
    concept_type: ConceptType
    domain: str
    lineno: int | None = field(default=None, compare=False)


@dataclass(frozen=True, eq=False)
class KnowledgeGraph:
    """Immutable knowledge graph.

    ``paper_concepts`` maps every paper id to the sorted, duplicate-free array
    of concept ids it links to; it is the storage behind :attr:`links`.
    """

    papers: Mapping[str, Paper]
    concepts: tuple[Concept, ...]
    paper_concepts: Mapping[str, np.ndarray]
    citations: frozenset[tuple[str, str]]
    scoping: Scoping
    dropped_citations: int = 0
    skipped_mentions: int = 0

    def __post_init__(self):
        codes = np.fromiter((TYPE_CODES[c.concept_type] for c in self.concepts),
                            dtype=np.int8, count=len(self.concepts))
        object.__setattr__(self, "concept_type_codes", codes)
        for arr in self.paper_concepts.values():
            arr.setflags(write=False)

    @property
    def n_concepts(self):
        return len(self.concepts)

    @property
    def paper_ids(self):
        """Paper ids in ascending order."""
        return sorted(self.papers)

    @property
    def links(self):
        return frozenset((pid, int(c)) for pid, cs in self.paper_concepts.items() for c in cs)

    @property
    def n_links(self):
        return sum(len(cs) for cs in self.paper_concepts.values())

    def concepts_of(self, paper_id):
        try:
            return self.paper_concepts[paper_id]
        except KeyError:
            raise KeyError(f"unknown paper id {paper_id!r}") from None

    def cited_by(self, paper_id):
        """Outgoing citation targets of ``paper_id``."""
        return self._out_edges().get(paper_id, frozenset())

    def _out_edges(self):
        cache = self.__dict__.get("_out_cache")
        if cache is None:
            out = defaultdict(set)
            for a, b in self.citations:
                out[a].add(b)
            cache = {a: frozenset(bs) for a, bs in out.items()}
            object.__setattr__(self, "_out_cache", cache)
        return cache


_WS = re.compile(r"\s+")


def normalize_surface(surface):
    """Lowercase, trim and collapse internal whitespace."""
    return _WS.sub(" ", surface).strip().lower()


def ingest_papers(source: Iterable[Mapping | Paper]) -> dict[str, Paper]:
    """Build papers from records with ``id``, ``domain`` and optional text.

    The result is keyed and ordered by ascending paper id, so it does not
    depend on the order of the input records.
    """
    papers = {}
    for n, rec in enumerate(source, start=1):
        if isinstance(rec, Paper):
            paper = rec
        else:
            try:
                pid = rec["id"]
                domain = rec["domain"]
            except KeyError as exc:
                raise IngestError(f"paper record missing field {exc.args[0]!r}", line=n) from None
            try:
                paper = Paper(str(pid), str(domain), rec.get("title"), rec.get("abstract"))
            except IngestError as exc:
                raise IngestError(exc.message, line=n) from None
        if paper.id in papers:
            raise IngestError(f"duplicate paper id {paper.id}", line=n)
        papers[paper.id] = paper
    return {pid: papers[pid] for pid in sorted(papers)}


def resolve_concepts(mentions: Iterable[MentionRecord], mode, papers: Mapping[str, Paper]):
    """Resolve raw mentions into concepts and paper-concept links.

    Returns ``(concepts, links, skipped)`` where ``concepts`` is a tuple of
    :class:`Concept` with ids assigned in sorted identity order, ``links`` is
    a set of ``(paper_id, concept_id)`` pairs and ``skipped`` counts mentions
    whose surface was empty after normalization.
    """
    mode = Scoping.parse(mode)
    raw_links = set()
    skipped = 0
    for m in mentions:
        paper = papers.get(m.paper_id)
        if paper is None:
            raise IngestError(f"mention references unknown paper {m.paper_id!r}", line=m.lineno)
        if m.domain != paper.domain:
            raise IngestError(
                f"mention domain {m.domain!r} disagrees with paper {m.paper_id} domain {paper.domain!r}",
                line=m.lineno)
        key = normalize_surface(m.surface)
        if not key:
            skipped += 1
            continue
        ctype = ConceptType.parse(m.concept_type)
        scope = paper.domain if mode is Scoping.IN_DOMAIN else None
        raw_links.add((m.paper_id, (key, ctype.value, scope or "")))
    if skipped:
        logger.warning("skipped %d mentions with empty surface", skipped)

    identities = sorted({ident for _, ident in raw_links})
    ids = {ident: i for i, ident in enumerate(identities)}
    concepts = tuple(
        Concept(i, key, ConceptType(ctype), scope or None)
        for i, (key, ctype, scope) in enumerate(identities)
    )
    links = {(pid, ids[ident]) for pid, ident in raw_links}
    return concepts, links, skipped


def ingest_citations(source: Iterable[tuple[str, str]], paper_ids):
    """Keep directed citation edges between known papers.

    Self-loops, duplicates and edges with an endpoint outside ``paper_ids``
    are dropped. Returns ``(edges, dropped)``.
    """
    known = paper_ids if isinstance(paper_ids, (set, frozenset, dict)) else set(paper_ids)
    edges = set()
    dropped = 0
    for citing, cited in source:
        if citing == cited or citing not in known or cited not in known or (citing, cited) in edges:
            dropped += 1
            continue
        edges.add((citing, cited))
    return frozenset(edges), dropped


def build_kg(papers, mentions, citations, mode) -> KnowledgeGraph:
    """Assemble a :class:`KnowledgeGraph` from already-parsed inputs."""
    mode = Scoping.parse(mode)
    if not isinstance(papers, Mapping):
        papers = ingest_papers(papers)
    concepts, links, skipped = resolve_concepts(mentions, mode, papers)
    per_paper = defaultdict(list)
    for pid, cid in links:
        per_paper[pid].append(cid)
    paper_concepts = {
        pid: np.array(sorted(per_paper.get(pid, ())), dtype=np.int64) for pid in papers
    }
    edges, dropped = ingest_citations(citations, papers)
    if dropped:
        logger.info("dropped %d citation edges (self, duplicate or outside the KG)", dropped)
    return KnowledgeGraph(papers, concepts, paper_concepts, edges, mode, dropped, skipped)


# -- file readers ------------------------------------------------------------

def read_papers(path) -> Iterator[dict]:
    """Yield paper records from a JSON Lines file."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"invalid JSON: {exc.msg}", path, lineno) from None
            if not isinstance(rec, dict) or "id" not in rec or "domain" not in rec:
                raise IngestError("paper record needs 'id' and 'domain'", path, lineno)
            yield rec


def read_mentions(path) -> Iterator[MentionRecord]:
    """Yield mentions from ``paper_id<TAB>surface<TAB>type<TAB>domain`` lines."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise IngestError(f"expected 4 tab-separated fields, got {len(parts)}", path, lineno)
            pid, surface, ctype, domain = parts
            try:
                ctype = ConceptType.parse(ctype)
            except ValueError as exc:
                raise IngestError(str(exc), path, lineno) from None
            yield MentionRecord(pid, surface, ctype, domain, lineno)


def read_citations(path) -> Iterator[tuple[str, str]]:
    """Yield ``(citing, cited)`` pairs from a two-column TSV file."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise IngestError(f"expected 2 tab-separated fields, got {len(parts)}", path, lineno)
            yield parts[0], parts[1]


def load_kg(papers_path, mentions_path, citations_path, mode) -> KnowledgeGraph:
    """Read the three input files and build a knowledge graph."""
    try:
        papers = ingest_papers(read_papers(papers_path))
    except IngestError as exc:
        if exc.path is None:
            raise IngestError(exc.message, papers_path, exc.line) from None
        raise
    try:
        return build_kg(papers, read_mentions(mentions_path), read_citations(citations_path), mode)
    except IngestError as exc:
        if exc.path is None:
            raise IngestError(exc.message, mentions_path, exc.line) from None
        raise


# -- statistics ----------------------------------------------------------------

@dataclass(frozen=True)
class KGStats:
    """Per-domain counts laid out like the corpus statistics table."""

    scoping: Scoping
    papers: dict[str, int]
    citations: dict[str, int]
    concepts: dict[str, int]  # includes MIX

    @property
    def total_papers(self):
        return sum(self.papers.values())

    @property
    def total_citations(self):
        return sum(self.citations.values())

    @property
    def total_concepts(self):
        return sum(self.concepts.values())

    def to_tsv(self):
        header = ["", *DOMAINS, MIX, "Total"]
        rows = [
            ["# abstracts", *(str(self.papers[d]) for d in DOMAINS), "-", str(self.total_papers)],
            ["# citations", *(str(self.citations[d]) for d in DOMAINS), "-", str(self.total_citations)],
            [f"KG concepts ({self.scoping.value})", *(str(self.concepts[d]) for d in DOMAINS),
             str(self.concepts[MIX]) if self.scoping is Scoping.CROSS_DOMAIN else "-",
             str(self.total_concepts)],
        ]
        return "\n".join("\t".join(r) for r in [header, *rows]) + "\n"


def kg_stats(kg: KnowledgeGraph) -> KGStats:
    papers = dict.fromkeys(DOMAINS, 0)
    citations = dict.fromkeys(DOMAINS, 0)
    concepts = dict.fromkeys((*DOMAINS, MIX), 0)
    for p in kg.papers.values():
        papers[p.domain] += 1
    for citing, _ in kg.citations:
        citations[kg.papers[citing].domain] += 1

    if kg.scoping is Scoping.IN_DOMAIN:
        for c in kg.concepts:
            concepts[c.scope] += 1
    else:
        # a concept counts under a single domain only if every linking paper is from it
        seen = np.full(kg.n_concepts, -1, dtype=np.int16)
        dom_idx = {d: i for i, d in enumerate(DOMAINS)}
        mixed = np.zeros(kg.n_concepts, dtype=bool)
        for pid, cs in kg.paper_concepts.items():
            if not len(cs):
                continue
            d = dom_idx[kg.papers[pid].domain]
            prev = seen[cs]
            mixed[cs[(prev >= 0) & (prev != d)]] = True
            seen[cs] = d
        for i, d in enumerate(DOMAINS):
            concepts[d] = int(np.count_nonzero((seen == i) & ~mixed))
        concepts[MIX] = int(np.count_nonzero(mixed))
    return KGStats(kg.scoping, papers, citations, concepts)
