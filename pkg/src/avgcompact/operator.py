"""The averaging operator A_r as a sparse linear map, and weighted p-norms.

``A_r f(i) = (1 / mu(B(i, r))) * sum_{j in B(i, r)} mu_j f(j)``.

Functions on a space are plain 1-d float arrays of length ``n`` (one value
per atom).  Families of functions are 2-d arrays with one function per row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO

import numpy as np
import scipy.sparse as sp

from .space import MetricMeasureSpace, ball_matrix, row_masses

__all__ = [
    "AveragingOperator",
    "Oscillation",
    "as_function",
    "parse_p",
    "assemble",
    "apply",
    "compose_apply",
    "norm_p",
    "norms_p",
    "operator_norm",
    "oscillation_bound",
    "write_triplets",
]


def parse_p(p) -> float:
    """Norm exponent from a number or the string ``"inf"``; rejects p < 1."""
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity") else float(p)
    p = float(p)
    if not p >= 1:
        raise ValueError(f"norm exponent must satisfy 1 <= p <= inf, got {p}")
    return p


def as_function(space: MetricMeasureSpace, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (space.n,):
        raise ValueError(f"function has shape {f.shape}, space has {space.n} points")
    if not np.all(np.isfinite(f)):
        raise ValueError("function has non-finite values")
    return f


class AveragingOperator:
    """Row-normalized sparse averaging matrix for a fixed radius.

    Row ``i`` holds the members of the closed ball ``B(i, radius)`` in
    ascending order with entries ``mu_j / mu(B(i, radius))``.
    """

    def __init__(self, radius: float, indptr, indices, weights, ball_mass):
        self.radius = float(radius)
        self.ball_mass = np.asarray(ball_mass, dtype=float)
        self.inv_mass = 1.0 / self.ball_mass
        self.n = len(self.ball_mass)
        indptr = np.asarray(indptr, dtype=np.intp)
        indices = np.asarray(indices, dtype=np.intp)
        data = np.asarray(weights, dtype=float)[indices] * np.repeat(self.inv_mass, np.diff(indptr))
        self.matrix = sp.csr_matrix((data, indices, indptr), shape=(self.n, self.n))
        for a in (self.ball_mass, self.inv_mass, self.matrix.data, self.matrix.indices, self.matrix.indptr):
            a.setflags(write=False)

    def members(self, i: int) -> np.ndarray:
        """Indices of ``B(i, radius)``."""
        m = self.matrix
        return m.indices[m.indptr[i]:m.indptr[i + 1]]

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        m = self.matrix
        sl = slice(m.indptr[i], m.indptr[i + 1])
        return m.indices[sl], m.data[sl]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def __call__(self, f) -> np.ndarray:
        return apply(self, f)

    def __repr__(self) -> str:
        return f"AveragingOperator(radius={self.radius!r}, n={self.n}, nnz={self.nnz})"

    def triplets(self):
        """Yield ``(i, j, value)`` for every stored entry in row-major order."""
        m = self.matrix
        for i in range(self.n):
            for k in range(m.indptr[i], m.indptr[i + 1]):
                yield i, int(m.indices[k]), float(m.data[k])


def assemble(space: MetricMeasureSpace, r: float) -> AveragingOperator:
    """Assemble ``A_r`` on ``space``.  Every row is nonempty since balls contain their center."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    member = ball_matrix(space, r)
    counts = member.sum(axis=1)
    indptr = np.concatenate(([0], np.cumsum(counts)))
    indices = np.nonzero(member)[1]
    return AveragingOperator(r, indptr, indices, space.weights, row_masses(space, member))


def apply(op: AveragingOperator, f) -> np.ndarray:
    """``A_r f``.  ``f`` may also be a 2-d array with one function per row."""
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != op.n:
        raise ValueError(f"function length {f.shape[-1]} does not match operator size {op.n}")
    if f.ndim == 1:
        return op.matrix @ f
    return (op.matrix @ f.T).T


def compose_apply(space: MetricMeasureSpace, s: float, r: float, f) -> np.ndarray:
    """``A_s(A_r f)`` by two successive applications."""
    return apply(assemble(space, s), apply(assemble(space, r), f))


def norm_p(space: MetricMeasureSpace, f, p) -> float:
    """Weighted p-norm ``(sum_i mu_i |f_i|^p)^(1/p)``; the maximum of ``|f|`` for p = inf."""
    p = parse_p(p)
    f = np.abs(np.asarray(f, dtype=float))
    if math.isinf(p):
        return float(f.max()) if f.size else 0.0
    if p == 1:
        return float(np.sum(space.weights * f))
    # scale by the max so large p neither overflows nor underflows
    top = f.max() if f.size else 0.0
    if top == 0:
        return 0.0
    return float(top * np.sum(space.weights * (f / top) ** p) ** (1.0 / p))


def norms_p(space: MetricMeasureSpace, fs, p, mask=None) -> np.ndarray:
    """Row-wise weighted p-norms of a 2-d array, optionally restricted to ``mask``."""
    p = parse_p(p)
    a = np.abs(np.atleast_2d(np.asarray(fs, dtype=float)))
    w = space.weights
    if mask is not None:
        a = a[:, mask]
        w = w[mask]
    if a.shape[1] == 0:
        return np.zeros(a.shape[0])
    if math.isinf(p):
        return a.max(axis=1)
    if p == 1:
        return a @ w
    top = a.max(axis=1, keepdims=True)
    top[top == 0] = 1.0
    return top[:, 0] * (((a / top) ** p) @ w) ** (1.0 / p)


def operator_norm(space: MetricMeasureSpace, op: AveragingOperator, p) -> float:
    """Exact ``||A_r||_{p->p}`` on the weighted space for p in {1, inf}.

    p = inf: the largest row sum, which is 1 since rows are convex weights.
    p = 1: ``max_j sum_{i : j in B(i, r)} mu_i / mu(B(i, r))``.
    """
    p = parse_p(p)
    if math.isinf(p):
        m = op.matrix
        return max(math.fsum(m.data[m.indptr[i]:m.indptr[i + 1]]) for i in range(op.n))
    if p == 1:
        # column j collects mu_i / mu(B_i) over the rows whose ball contains j
        rows = np.repeat(np.arange(op.n), np.diff(op.matrix.indptr))
        contrib = space.weights[rows] * op.inv_mass[rows]
        col = np.zeros(op.n)
        np.add.at(col, op.matrix.indices, contrib)
        return float(col.max())
    raise ValueError(f"exact operator norm is only available for p in {{1, inf}}, got {p}")


@dataclass(frozen=True)
class Oscillation:
    actual: float
    bound: float
    term_inverse_gap: float
    term_symdiff: float

    @property
    def holds(self) -> bool:
        return self.actual <= self.bound + 1e-10 * max(1.0, self.bound)


def oscillation_bound(space: MetricMeasureSpace, op: AveragingOperator, f, x: int, y: int) -> Oscillation:
    """Compare ``|A_t f(x) - A_t f(y)|`` with the two-term estimate

    ``|1/mu(B_x) - 1/mu(B_y)| * int_{B_x} |f| + (1/mu(B_y)) * int_{B_x sym-diff B_y} |f|``.
    """
    f = np.asarray(f, dtype=float)
    (bx, ax), (by, ay) = op.row(x), op.row(y)
    actual = abs(ax @ f[bx] - ay @ f[by])
    w_abs = space.weights * np.abs(f)
    gap = abs(op.inv_mass[x] - op.inv_mass[y])
    term_gap = gap * float(np.sum(w_abs[bx]))
    delta = np.setxor1d(bx, by, assume_unique=True)
    term_sd = op.inv_mass[y] * float(np.sum(w_abs[delta]))
    return Oscillation(float(actual), float(term_gap + term_sd), float(term_gap), float(term_sd))


def write_triplets(op: AveragingOperator, fh: IO[str]) -> None:
    """Sparse triplet export: one ``i j value`` line per entry, 17 significant digits."""
    for i, j, v in op.triplets():
        fh.write(f"{i} {j} {v:.17g}\n")
