"""Concept vectors, dense document embeddings and their hybrid concatenation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import EmbeddingLoadError
from .kg_store import TYPE_CODES, ConceptType, KnowledgeGraph

# A dense vector is a 1-D float64 array.
DenseVector = np.ndarray

ALL_TYPES = frozenset(ConceptType)


@dataclass(frozen=True)
class SparseVector:
    """Sparse vector as parallel ``indices``/``values`` arrays.

    Indices are strictly increasing and lie in ``[0, dims)``; values are
    nonzero.
    """

    dims: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.ndim != 1 or idx.shape != val.shape:
            raise ValueError("indices and values must be 1-D arrays of equal length")
        if len(idx):
            if idx[0] < 0 or idx[-1] >= self.dims:
                raise ValueError(f"sparse index out of range [0, {self.dims})")
            if np.any(np.diff(idx) <= 0):
                raise ValueError("sparse indices must be strictly increasing")
            if np.any(val == 0):
                raise ValueError("sparse values must be nonzero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def empty(cls, dims=0):
        return cls(dims, np.empty(0, np.int64), np.empty(0, np.float64))

    @classmethod
    def binary(cls, dims, indices):
        idx = np.unique(np.asarray(indices, dtype=np.int64))
        return cls(dims, idx, np.ones(len(idx)))

    @property
    def entries(self):
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    @property
    def nnz(self):
        return len(self.indices)

    def squared_norm(self):
        return float(np.dot(self.values, self.values))

    def dot(self, other: SparseVector) -> float:
        if self.dims != other.dims:
            raise ValueError(f"sparse dims differ: {self.dims} vs {other.dims}")
        _, ia, ib = np.intersect1d(self.indices, other.indices, assume_unique=True,
                                   return_indices=True)
        return float(np.dot(self.values[ia], other.values[ib]))

    def to_dense(self):
        out = np.zeros(self.dims)
        out[self.indices] = self.values
        return out


@dataclass(frozen=True)
class TypeFilter:
    """Subset of concept types kept when building concept vectors."""

    allowed: frozenset = ALL_TYPES

    def __post_init__(self):
        allowed = frozenset(ConceptType.parse(t) for t in self.allowed)
        if not allowed:
            raise ValueError("type filter must allow at least one concept type")
        object.__setattr__(self, "allowed", allowed)

    @classmethod
    def of(cls, *types):
        return cls(frozenset(types))

    @property
    def is_full(self):
        return self.allowed == ALL_TYPES

    @property
    def label(self):
        if self.is_full:
            return "all"
        return "+".join(t.value for t in ConceptType if t in self.allowed)

    def codes(self):
        return np.array(sorted(TYPE_CODES[t] for t in self.allowed), dtype=np.int8)


FULL_FILTER = TypeFilter()


def concept_vector(paper_id, kg: KnowledgeGraph, filter: TypeFilter = FULL_FILTER) -> SparseVector:
    """Binary vector with a 1 at every concept linked to the paper whose type passes ``filter``."""
    cids = kg.concepts_of(paper_id)
    if not filter.is_full and len(cids):
        cids = cids[np.isin(kg.concept_type_codes[cids], filter.codes())]
    return SparseVector(kg.n_concepts, cids, np.ones(len(cids)))


class EmbeddingTable(Mapping):
    """Read-only mapping from paper id to a dense vector of fixed dimension.

    Vectors are stored as rows of a single float64 matrix.
    """

    def __init__(self, ids, matrix):
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != len(ids):
            raise ValueError("matrix must have one row per id")
        if matrix.shape[1] < 1:
            raise ValueError("embedding dimension must be positive")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("embeddings must be finite")
        self._row = {}
        for i, pid in enumerate(ids):
            if pid in self._row:
                raise ValueError(f"duplicate paper id {pid}")
            self._row[pid] = i
        matrix.setflags(write=False)
        self.matrix = matrix
        self.ids = tuple(ids)

    @property
    def dim(self):
        return self.matrix.shape[1]

    def __getitem__(self, pid):
        return self.matrix[self._row[pid]]

    def __contains__(self, pid):
        return pid in self._row

    def __iter__(self):
        return iter(self.ids)

    def __len__(self):
        return len(self.ids)

    def rows(self, paper_ids):
        """Stack the vectors for ``paper_ids``; raises ``KeyError`` naming the first missing id."""
        idx = []
        for pid in paper_ids:
            try:
                idx.append(self._row[pid])
            except KeyError:
                raise KeyError(pid) from None
        return self.matrix[np.asarray(idx, dtype=np.int64)]

    def __repr__(self):
        return f"EmbeddingTable(n={len(self)}, dim={self.dim})"


def load_embeddings(source) -> EmbeddingTable:
    """Parse an embedding export.

    The first line is ``count dim``; each following line is a paper id and
    ``dim`` space-separated floats. ``source`` is a path or an iterable of
    lines.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return _parse_embeddings(fh, source)
    return _parse_embeddings(source, None)


def _parse_embeddings(lines: Iterable[str], path):
    it = iter(lines)
    header = next(it, None)
    if header is None:
        raise EmbeddingLoadError("empty embedding file", path, 1)
    try:
        count, dim = (int(x) for x in header.split())
    except ValueError:
        raise EmbeddingLoadError("header must be 'count dim'", path, 1) from None
    if count < 0 or dim < 1:
        raise EmbeddingLoadError(f"bad header values count={count} dim={dim}", path, 1)

    ids = []
    seen = set()
    matrix = np.empty((count, dim))
    lineno = 1
    for lineno, line in enumerate(it, start=2):
        parts = line.split()
        if not parts:
            continue
        if len(ids) == count:
            raise EmbeddingLoadError(f"more than {count} vectors", path, lineno)
        pid, values = parts[0], parts[1:]
        if len(values) != dim:
            raise EmbeddingLoadError(f"expected {dim} values for {pid}, got {len(values)}", path, lineno)
        if pid in seen:
            raise EmbeddingLoadError(f"duplicate paper id {pid}", path, lineno)
        try:
            row = np.array(values, dtype=np.float64)
        except ValueError:
            raise EmbeddingLoadError(f"non-numeric value for {pid}", path, lineno) from None
        if not np.all(np.isfinite(row)):
            raise EmbeddingLoadError(f"non-finite value for {pid}", path, lineno)
        matrix[len(ids)] = row
        ids.append(pid)
        seen.add(pid)
    if len(ids) != count:
        raise EmbeddingLoadError(f"header declares {count} vectors, found {len(ids)}", path, lineno)
    return EmbeddingTable(ids, matrix)


def write_embeddings(table: EmbeddingTable, path):
    """Write ``table`` in the format read by :func:`load_embeddings`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)} {table.dim}\n")
        for pid in table:
            fh.write(pid + " " + " ".join(repr(float(x)) for x in table[pid]) + "\n")


def _paper_seed(seed, paper_id):
    digest = hashlib.sha256(paper_id.encode("utf-8")).digest()
    words = np.frombuffer(digest, dtype="<u4")
    return np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32 & 0xFFFFFFFF, *words.tolist()])


def random_embeddings(paper_ids, dim=200, seed=0) -> EmbeddingTable:
    """Standard-normal vectors, one generator per (seed, paper id).

    Each vector depends only on its own paper id and ``seed``, so adding or
    removing papers leaves the other vectors unchanged.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    ids = list(paper_ids)
    matrix = np.empty((len(ids), dim))
    for i, pid in enumerate(ids):
        matrix[i] = np.random.default_rng(_paper_seed(seed, pid)).standard_normal(dim)
    return EmbeddingTable(ids, matrix)


@dataclass(frozen=True)
class HybridVector:
    """Concatenation ``[sparse, dense]`` kept as two parts.

    A missing part is represented with zero dimensions.
    """

    sparse: SparseVector
    dense: np.ndarray

    @property
    def sparse_dims(self):
        return self.sparse.dims

    @property
    def dense_dims(self):
        return len(self.dense)

    @property
    def dims(self):
        return self.sparse.dims + len(self.dense)

    def squared_norm(self):
        return self.sparse.squared_norm() + float(np.dot(self.dense, self.dense))

    def norm(self):
        return float(np.sqrt(self.squared_norm()))

    def materialize(self):
        """Explicit concatenated array (test and debugging aid)."""
        return np.concatenate([self.sparse.to_dense(), self.dense])


def hybrid_vector(c: SparseVector | None = None, s: DenseVector | None = None) -> HybridVector:
    if c is None and s is None:
        raise ValueError("hybrid vector needs a concept part, a dense part, or both")
    if c is None:
        c = SparseVector.empty()
    if s is None:
        s = np.empty(0)
    else:
        s = np.asarray(s, dtype=np.float64)
        if s.ndim != 1:
            raise ValueError("dense part must be 1-D")
    return HybridVector(c, s)
