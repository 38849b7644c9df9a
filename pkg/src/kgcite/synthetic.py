"""Seeded synthetic corpora with planted citation structure.

Papers belong to latent topics; each topic owns a pool of concepts and sits
in one domain. Papers draw most of their concepts from their topic's pool,
citations mostly stay inside a topic, and on top of that every citing paper
copies a fixed fraction of each cited paper's concepts. Citation pairs thus
overlap in concept space while random pairs overlap only by chance.
Optionally, dense embeddings carry a second, independent and weaker citation
signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kg_store import DOMAINS, ConceptType, MentionRecord, build_kg
from .vectorizer import EmbeddingTable


@dataclass(frozen=True)
class SyntheticCorpus:
    papers: list
    mentions: list
    citations: list
    embeddings: EmbeddingTable | None

    def kg(self, mode):
        return build_kg(self.papers, self.mentions, self.citations, mode)


def planted_corpus(n_papers=500, n_concepts=2000, n_citations=1500, *, seed=0,
                   n_topics=None, concepts_per_paper=(8, 16), topic_share=0.7, overlap=0.5,
                   cross_topic_rate=0.15, dense_dim=0, dense_signal=0.5,
                   domains=DOMAINS) -> SyntheticCorpus:
    """Generate papers, concept mentions, citations and (optionally) embeddings.

    Args:
        n_topics: number of latent topics, default ``n_papers // 10``.
        concepts_per_paper: inclusive range of base concept-set sizes.
        topic_share: fraction of a paper's base concepts drawn from its
            topic's pool; the rest come from the whole vocabulary.
        overlap: fraction of each cited paper's base concepts copied into the
            citing paper.
        cross_topic_rate: probability that a citation leaves the topic.
        dense_dim: embedding dimension; 0 means no embeddings.
        dense_signal: weight of the cited papers' noise in the citing paper's
            embedding (own noise has weight 1).
    """
    rng = np.random.default_rng(seed)
    n_topics = n_topics or max(1, n_papers // 10)
    ids = [f"P{i:06d}" for i in range(n_papers)]
    topic_domain = rng.integers(len(domains), size=n_topics)
    topic = rng.integers(n_topics, size=n_papers)
    papers = [{"id": pid, "domain": domains[topic_domain[t]]} for pid, t in zip(ids, topic)]

    if n_citations > n_papers * (n_papers - 1):
        raise ValueError("more citations requested than distinct ordered pairs")
    members = [np.flatnonzero(topic == t) for t in range(n_topics)]
    edges = set()
    while len(edges) < n_citations:
        a = int(rng.integers(n_papers))
        pool = members[topic[a]]
        if len(pool) < 2 or rng.random() < cross_topic_rate:
            b = int(rng.integers(n_papers))
        else:
            b = int(pool[rng.integers(len(pool))])
        if a != b:
            edges.add((a, b))
    edges = sorted(edges)

    types = list(ConceptType)
    concept_type = rng.integers(len(types), size=n_concepts)
    perm = rng.permutation(n_concepts)
    topic_pool = np.array_split(perm, n_topics)
    lo, hi = concepts_per_paper
    base = []
    for i in range(n_papers):
        size = min(int(rng.integers(lo, hi + 1)), n_concepts) if n_concepts else 0
        pool = topic_pool[topic[i]]
        n_topic = min(round(topic_share * size), len(pool))
        chosen = set(rng.choice(pool, size=n_topic, replace=False).tolist()) if n_topic else set()
        while len(chosen) < size:
            chosen.add(int(rng.integers(n_concepts)))
        base.append(np.array(sorted(chosen), dtype=np.int64))
    final = [set(b.tolist()) for b in base]
    for a, b in edges:
        src = base[b]
        n_share = math.ceil(overlap * len(src))
        if n_share:
            final[a].update(rng.choice(src, size=n_share, replace=False).tolist())

    mentions = []
    for i, cs in enumerate(final):
        dom = papers[i]["domain"]
        for c in sorted(cs):
            mentions.append(MentionRecord(ids[i], f"Concept {c:05d}", types[concept_type[c]], dom))
    citations = [(ids[a], ids[b]) for a, b in edges]

    embeddings = None
    if dense_dim:
        noise = rng.standard_normal((n_papers, dense_dim))
        dense = noise.copy()
        out = [[] for _ in range(n_papers)]
        for a, b in edges:
            out[a].append(b)
        for a, cited in enumerate(out):
            if cited:
                dense[a] += dense_signal * noise[cited].sum(axis=0) / math.sqrt(len(cited))
        embeddings = EmbeddingTable(ids, dense)
    return SyntheticCorpus(papers, mentions, citations, embeddings)


def write_corpus(corpus: SyntheticCorpus, directory, embedding_label="EMB"):
    """Write the corpus in the on-disk input formats and return a config path.

    Files: ``papers.jsonl``, ``mentions.tsv``, ``citations.tsv`` and, when
    embeddings exist, ``<label>.emb.txt``; plus ``run.cfg`` pointing at them.
    """
    import json
    from pathlib import Path

    from .vectorizer import write_embeddings

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "papers.jsonl", "w", encoding="utf-8") as fh:
        for p in corpus.papers:
            fh.write(json.dumps(p) + "\n")
    with open(d / "mentions.tsv", "w", encoding="utf-8") as fh:
        for m in corpus.mentions:
            fh.write(f"{m.paper_id}\t{m.surface}\t{m.concept_type.value}\t{m.domain}\n")
    with open(d / "citations.tsv", "w", encoding="utf-8") as fh:
        for a, b in corpus.citations:
            fh.write(f"{a}\t{b}\n")
    lines = ["papers = papers.jsonl", "mentions = mentions.tsv", "citations = citations.tsv",
             "kg = both", "out = out"]
    if corpus.embeddings is not None:
        name = f"{embedding_label}.emb.txt"
        write_embeddings(corpus.embeddings, d / name)
        lines.append(f"embedding.{embedding_label} = {name}")
    cfg = d / "run.cfg"
    cfg.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return cfg
