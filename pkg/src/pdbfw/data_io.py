"""Dataset ingestion: sparse text format parsing, row normalization, and
seeded synthetic problem generators.

The text format is one sample per line: a label followed by
whitespace-separated index:value pairs with 1-based, strictly increasing
indices. Labels {0,1} and {1,2} are remapped to {-1,+1} with a logged
notice; anything else must already be -1/+1 (classification) or is kept
as-is (regression targets).

Random numbers come from PortableRng, a counter-based splitmix64 generator
written out in full here so streams are reproducible across numpy versions
and platforms.
"""

from __future__ import annotations

import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field
from typing import Optional, TextIO, Union

import numpy as np

from .core_linalg import SparseDesignMatrix

logger = logging.getLogger(__name__)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class PortableRng:
    """Counter-based splitmix64. Draw i of a given seed is a pure function
    of (seed, i), so streams never depend on call batching."""

    def __init__(self, seed: int = 0):
        self._seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._counter = 0

    def raw(self, count: int) -> np.ndarray:
        """Next `count` raw uint64 draws."""
        if count < 0:
            raise ValueError(f"count must be >= 0, got {count}")
        idx = np.arange(self._counter + 1, self._counter + count + 1,
                        dtype=np.uint64)
        self._counter += count
        z = self._seed + idx * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))

    def uniforms(self, count: int) -> np.ndarray:
        """Uniform floats in (0, 1]: (raw >> 11 + 1) * 2^-53."""
        bits = (self.raw(count) >> np.uint64(11)) + np.uint64(1)
        return bits.astype(np.float64) * (2.0 ** -53)

    def normals(self, count: int) -> np.ndarray:
        """Standard normals via Box-Muller on consecutive uniform pairs."""
        pairs = (count + 1) // 2
        u1 = self.uniforms(pairs)
        u2 = self.uniforms(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        out = np.empty(2 * pairs)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]

    def integers(self, count: int, upper: int) -> np.ndarray:
        """Integers in [0, upper) by modular reduction of raw draws."""
        if upper <= 0:
            raise ValueError(f"upper must be positive, got {upper}")
        return (self.raw(count) % np.uint64(upper)).astype(np.int64)


DatasetMeta = namedtuple("DatasetMeta", ["name", "n", "d", "nnz"])


@dataclass
class Dataset:
    """A design matrix with per-sample targets.

    labels is 1-D of length n for scalar losses, or 2-D (n, c) for matrix
    targets; either way labels.shape[0] == matrix.n_rows.
    """

    matrix: SparseDesignMatrix
    labels: np.ndarray
    meta: DatasetMeta

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.float64)
        if self.labels.shape[0] != self.matrix.n_rows:
            raise ValueError(
                f"got {self.labels.shape[0]} labels for "
                f"{self.matrix.n_rows} rows")


class ParseError(ValueError):
    """Malformed input line; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


def _open_maybe(source: Union[str, TextIO]):
    if isinstance(source, str):
        return open(source, "r"), True
    return source, False


def parse_libsvm(source: Union[str, TextIO], n_cols: Optional[int] = None,
                 name: str = "stdin") -> Dataset:
    """Parse the index:value text format into a Dataset.

    source is a path or an open text handle. n_cols forces the column count
    (errors if any index exceeds it); otherwise the max seen index is used.
    """
    handle, owned = _open_maybe(source)
    if isinstance(source, str):
        name = source
    rows, cols, vals, labels = [], [], [], []
    max_index = 0
    try:
        row = 0
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                logger.info("%s: skipping empty line %d", name, lineno)
                continue
            fields = stripped.split()
            try:
                label = float(fields[0])
            except ValueError:
                raise ParseError(lineno, f"bad label {fields[0]!r}") from None
            prev_index = 0
            for token in fields[1:]:
                head, sep, tail = token.partition(":")
                if not sep:
                    raise ParseError(lineno, f"expected index:value, got {token!r}")
                try:
                    index = int(head)
                    value = float(tail)
                except ValueError:
                    raise ParseError(
                        lineno, f"bad index:value pair {token!r}") from None
                if index < 1:
                    raise ParseError(lineno, f"index {index} is not 1-based")
                if index <= prev_index:
                    raise ParseError(
                        lineno,
                        f"index {index} not strictly increasing after {prev_index}")
                if not math.isfinite(value):
                    raise ParseError(lineno, f"non-finite value in {token!r}")
                prev_index = index
                rows.append(row)
                cols.append(index - 1)
                vals.append(value)
            max_index = max(max_index, prev_index)
            labels.append(label)
            row += 1
    finally:
        if owned:
            handle.close()
    if row == 0:
        raise ParseError(1, "no samples in input")
    if n_cols is not None:
        if max_index > n_cols:
            raise ParseError(1, f"index {max_index} exceeds n_cols={n_cols}")
        d = n_cols
    else:
        d = max_index
    label_arr = np.asarray(labels, dtype=np.float64)
    distinct = set(np.unique(label_arr).tolist())
    if distinct == {0.0, 1.0}:
        logger.info("%s: remapping labels {0,1} -> {-1,+1}", name)
        label_arr = np.where(label_arr == 0.0, -1.0, 1.0)
    elif distinct == {1.0, 2.0}:
        logger.info("%s: remapping labels {1,2} -> {+1,-1}", name)
        label_arr = np.where(label_arr == 1.0, 1.0, -1.0)
    matrix = SparseDesignMatrix.from_coo(
        row, d, np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64), np.asarray(vals, dtype=np.float64))
    meta = DatasetMeta(name=name, n=row, d=d, nnz=matrix.nnz)
    return Dataset(matrix=matrix, labels=label_arr, meta=meta)


def write_libsvm(dataset: Dataset, destination: Union[str, TextIO]) -> None:
    """Write a Dataset back out in the index:value text format."""
    if dataset.labels.ndim != 1:
        raise ValueError("only 1-D labels can be written to the text format")
    if isinstance(destination, str):
        handle, owned = open(destination, "w"), True
    else:
        handle, owned = destination, False
    try:
        dense = dataset.matrix.to_dense()
        for i in range(dataset.matrix.n_rows):
            parts = [repr(float(dataset.labels[i]))]
            for j in np.flatnonzero(dense[i]):
                parts.append(f"{j + 1}:{float(dense[i, j])!r}")
            handle.write(" ".join(parts) + "\n")
    finally:
        if owned:
            handle.close()


def normalize_rows(dataset: Dataset) -> Dataset:
    """Scale every nonzero row to unit Euclidean norm. Idempotent."""
    dense = dataset.matrix.to_dense()
    norms = np.linalg.norm(dense, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    matrix = SparseDesignMatrix.from_dense(dense / safe[:, None])
    meta = dataset.meta._replace(nnz=matrix.nnz)
    return Dataset(matrix=matrix, labels=dataset.labels.copy(), meta=meta)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a seeded synthetic problem instance."""

    kind: str  # "sparse_regression" or "trace_sensing"
    n: int
    d: int
    c: Optional[int] = None
    true_sparsity_or_rank: int = 1
    noise_level: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("sparse_regression", "trace_sensing"):
            raise ValueError(f"unknown synthetic kind {self.kind!r}")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be >= 1")
        if self.kind == "trace_sensing" and (self.c is None or self.c < 1):
            raise ValueError("trace_sensing needs a column count c >= 1")
        if self.true_sparsity_or_rank < 1:
            raise ValueError("true sparsity/rank must be >= 1")
        if self.kind == "sparse_regression" and self.true_sparsity_or_rank > self.d:
            raise ValueError("true sparsity exceeds dimension")
        if self.kind == "trace_sensing" and self.c is not None and \
                self.true_sparsity_or_rank > min(self.d, self.c):
            raise ValueError("true rank exceeds min(d, c)")
        if self.noise_level < 0.0:
            raise ValueError("noise level must be >= 0")


def generate_synthetic(spec: SyntheticSpec):
    """Build a synthetic instance; returns (dataset, ground_truth).

    Draw order per seed is frozen: design entries first, then ground truth,
    then noise. Rows of the design are normalized to unit norm before targets
    are computed, so the per-row norm bound is exactly 1.
    """
    rng = PortableRng(spec.seed)
    n, d, s = spec.n, spec.d, spec.true_sparsity_or_rank
    A = rng.normals(n * d).reshape(n, d)
    norms = np.linalg.norm(A, axis=1)
    A = A / np.where(norms > 0.0, norms, 1.0)[:, None]
    if spec.kind == "sparse_regression":
        support = np.argsort(rng.uniforms(d))[:s]
        x0 = np.zeros(d)
        x0[support] = rng.normals(s)
        targets = A @ x0
        if spec.noise_level > 0.0:
            targets = targets + spec.noise_level * rng.normals(n)
        truth = x0
    else:
        c = spec.c
        U = rng.normals(d * s).reshape(d, s)
        V = rng.normals(c * s).reshape(c, s)
        X0 = U @ V.T / math.sqrt(s)
        targets = A @ X0
        if spec.noise_level > 0.0:
            targets = targets + spec.noise_level * rng.normals(n * c).reshape(n, c)
        truth = X0
    matrix = SparseDesignMatrix.from_dense(A)
    meta = DatasetMeta(name=f"{spec.kind}-seed{spec.seed}", n=n, d=d,
                       nnz=matrix.nnz)
    return Dataset(matrix=matrix, labels=targets, meta=meta), truth
