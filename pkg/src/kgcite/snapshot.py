"""On-disk snapshots of a built knowledge graph (gzipped JSON)."""

from __future__ import annotations

import gzip
import json

import numpy as np

from .errors import IngestError
from .kg_store import Concept, ConceptType, KnowledgeGraph, Paper, Scoping

FORMAT = "kgcite-snapshot"
VERSION = 1


def save_snapshot(kg: KnowledgeGraph, path):
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "scoping": kg.scoping.value,
        "papers": [[p.id, p.domain, p.title, p.abstract] for p in kg.papers.values()],
        "concepts": [[c.key, c.concept_type.value, c.scope] for c in kg.concepts],
        "links": {pid: cs.tolist() for pid, cs in kg.paper_concepts.items()},
        "citations": sorted(kg.citations),
        "dropped_citations": kg.dropped_citations,
        "skipped_mentions": kg.skipped_mentions,
    }
    # mtime=0 keeps the gzip header, and so the file bytes, reproducible
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as fh:
        fh.write(json.dumps(doc, ensure_ascii=False, separators=(",", ":")).encode("utf-8"))


def load_snapshot(path) -> KnowledgeGraph:
    try:
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError(f"unreadable snapshot: {exc}", path) from None
    if doc.get("format") != FORMAT or doc.get("version") != VERSION:
        raise IngestError(f"unsupported snapshot format {doc.get('format')!r} v{doc.get('version')}", path)
    papers = {pid: Paper(pid, dom, title, abstract) for pid, dom, title, abstract in doc["papers"]}
    concepts = tuple(Concept(i, key, ConceptType(t), scope)
                     for i, (key, t, scope) in enumerate(doc["concepts"]))
    paper_concepts = {pid: np.array(doc["links"].get(pid, []), dtype=np.int64) for pid in papers}
    citations = frozenset((a, b) for a, b in doc["citations"])
    return KnowledgeGraph(papers, concepts, paper_concepts, citations, Scoping(doc["scoping"]),
                          doc.get("dropped_citations", 0), doc.get("skipped_mentions", 0))
