"""Citation recommendation with knowledge-graph concept vectors and document embeddings."""

__version__ = "0.1.0"

from .errors import ConfigError, EmbeddingLoadError, IngestError, KGCiteError, QueryError
from .evaluation import (
    EvalReport,
    PairStats,
    QuerySet,
    average_precision_at_k,
    map_at_k,
    map_at_ks,
    pair_similarity_stats,
    precision_at_k,
    run_benchmark,
    select_queries,
)
from .kg_store import (
    DOMAINS,
    Concept,
    ConceptType,
    KnowledgeGraph,
    MentionRecord,
    Paper,
    Scoping,
    build_kg,
    ingest_citations,
    ingest_papers,
    kg_stats,
    load_kg,
    resolve_concepts,
)
from .retrieval import (
    CorpusIndex,
    IndexConfig,
    RankedList,
    build_index,
    cosine,
    rank_all,
    rank_all_bruteforce,
)
from .vectorizer import (
    EmbeddingTable,
    HybridVector,
    SparseVector,
    TypeFilter,
    concept_vector,
    hybrid_vector,
    load_embeddings,
    random_embeddings,
)
