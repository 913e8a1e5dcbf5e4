"""Finite metric measure spaces and their set-geometric primitives.

A space is a finite list of atoms, each with a strictly positive mass, and a
metric given either by Euclidean coordinates or by an explicit distance
matrix.  Balls are closed; membership uses the tolerance ``ball_tolerance``
so that boundary points computed in floating point are included
deterministically.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "SpaceError",
    "MetricMeasureSpace",
    "IndexSet",
    "BallIndex",
    "ball_tolerance",
    "load_space",
    "read_space",
    "space_to_document",
    "grid_space",
    "ball",
    "ball_matrix",
    "ball_masses",
    "row_masses",
    "annulus",
    "sym_diff",
    "greedy_net",
    "greedy_packing",
    "triangle_violation",
]

SYMMETRY_TOL = 1e-12


class SpaceError(ValueError):
    """Invalid space description; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def ball_tolerance(radius: float) -> float:
    return 1e-12 * (1.0 + radius)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


class MetricMeasureSpace:
    """Weighted finite point set with a metric.

    Parameters
    ----------
    coords : array_like, shape (n, dim), optional
        Point coordinates; distances are Euclidean.
    distance_matrix : array_like, shape (n, n), optional
        Explicit symmetric distance matrix with zero diagonal.  The triangle
        inequality is the caller's responsibility (see ``triangle_violation``).
    weights : array_like, shape (n,), optional
        Strictly positive atom masses.  Defaults to all ones.

    Exactly one of ``coords`` and ``distance_matrix`` must be given.
    Instances are immutable.
    """

    def __init__(self, coords=None, distance_matrix=None, weights=None):
        if (coords is None) == (distance_matrix is None):
            raise SpaceError("metric", "exactly one of coords / distance_matrix is required")

        if coords is not None:
            c = np.asarray(coords, dtype=float)
            if c.ndim == 1:
                c = c[:, None]
            if c.ndim != 2 or c.shape[0] == 0:
                raise SpaceError("points", f"expected a nonempty n x dim array, got shape {c.shape}")
            if not np.all(np.isfinite(c)):
                raise SpaceError("points", "non-finite coordinate")
            self.metric = "euclidean"
            self._coords = _frozen(c)
            self._matrix = None
            n = c.shape[0]
        else:
            m = np.asarray(distance_matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
                raise SpaceError("distance_matrix", f"expected a nonempty square array, got shape {m.shape}")
            if not np.all(np.isfinite(m)):
                raise SpaceError("distance_matrix", "non-finite entry")
            neg = np.argwhere(m < 0)
            if len(neg):
                i, j = neg[0]
                raise SpaceError(f"distance_matrix[{i}][{j}]", "negative distance")
            diag = np.flatnonzero(np.diag(m) != 0)
            if len(diag):
                k = diag[0]
                raise SpaceError(f"distance_matrix[{k}][{k}]", "nonzero diagonal entry")
            asym = np.argwhere(np.abs(m - m.T) > SYMMETRY_TOL)
            if len(asym):
                i, j = asym[0]
                raise SpaceError(
                    f"distance_matrix[{i}][{j}]",
                    f"asymmetric matrix ({m[i, j]!r} vs {m[j, i]!r})",
                )
            self.metric = "matrix"
            self._coords = None
            self._matrix = _frozen(m)
            n = m.shape[0]

        if weights is None:
            w = np.ones(n)
        else:
            w = np.asarray(weights, dtype=float)
            if w.ndim != 1 or w.shape[0] != n:
                raise SpaceError("weights", f"expected {n} weights, got shape {w.shape}")
            if not np.all(np.isfinite(w)):
                k = int(np.flatnonzero(~np.isfinite(w))[0])
                raise SpaceError(f"weights[{k}]", f"non-finite weight at index {k}")
            bad = np.flatnonzero(w <= 0)
            if len(bad):
                k = int(bad[0])
                raise SpaceError(f"weights[{k}]", f"nonpositive weight at index {k}")
        self.n = n
        self.weights = _frozen(w)
        self.total_mass = float(np.sum(self.weights))
        self._dmat = self._matrix

    @classmethod
    def from_coords(cls, coords, weights=None) -> "MetricMeasureSpace":
        return cls(coords=coords, weights=weights)

    @classmethod
    def from_matrix(cls, distance_matrix, weights=None) -> "MetricMeasureSpace":
        return cls(distance_matrix=distance_matrix, weights=weights)

    @property
    def coords(self) -> np.ndarray | None:
        return self._coords

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"MetricMeasureSpace(n={self.n}, metric={self.metric!r}, total_mass={self.total_mass!r})"

    def _check_index(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"point index {i} out of range for space with {self.n} points")
        return i

    def distances_from(self, i: int) -> np.ndarray:
        """Distances from point ``i`` to every point, shape (n,)."""
        i = self._check_index(i)
        if self._dmat is not None:
            return self._dmat[i]
        return np.sqrt(np.sum((self._coords - self._coords[i]) ** 2, axis=1))

    def distance(self, i: int, j: int) -> float:
        j = self._check_index(j)
        return float(self.distances_from(i)[j])

    def distance_matrix(self) -> np.ndarray:
        """Full (n, n) distance matrix.  Computed lazily for coordinate spaces."""
        if self._dmat is None:
            # same arithmetic as distances_from so rows match it bit for bit
            c = self._coords
            d = np.sqrt(np.sum((c[None, :, :] - c[:, None, :]) ** 2, axis=2))
            d.setflags(write=False)
            self._dmat = d
        return self._dmat

    @property
    def diameter(self) -> float:
        return float(self.distance_matrix().max())

    def min_positive_distance(self) -> float:
        d = self.distance_matrix()
        pos = d[d > 0]
        return float(pos.min()) if pos.size else np.inf

    def all(self) -> "IndexSet":
        return IndexSet._from_sorted(self, np.arange(self.n))

    def subset(self, members: Iterable[int]) -> "IndexSet":
        return IndexSet.of(self, members)


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Sorted set of point indices together with its measure."""

    members: np.ndarray
    mass: float

    @classmethod
    def of(cls, space: MetricMeasureSpace, members: Iterable[int]) -> "IndexSet":
        m = np.unique(np.asarray(list(members) if not isinstance(members, np.ndarray) else members, dtype=np.intp))
        if m.size and (m[0] < 0 or m[-1] >= space.n):
            raise IndexError(f"index set member out of range for space with {space.n} points")
        return cls._from_sorted(space, m)

    @classmethod
    def _from_sorted(cls, space: MetricMeasureSpace, m: np.ndarray) -> "IndexSet":
        m = np.asarray(m, dtype=np.intp)
        m.setflags(write=False)
        return cls(m, float(np.sum(space.weights[m])))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return (int(i) for i in self.members)

    def __contains__(self, i) -> bool:
        k = np.searchsorted(self.members, i)
        return bool(k < len(self.members) and self.members[k] == i)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return np.array_equal(self.members, other.members)

    def __hash__(self) -> int:
        return hash(self.members.tobytes())

    def __repr__(self) -> str:
        return f"IndexSet({self.members.tolist()}, mass={self.mass!r})"

    def tolist(self) -> list[int]:
        return self.members.tolist()

    def indicator(self, n: int) -> np.ndarray:
        chi = np.zeros(n)
        chi[self.members] = 1.0
        return chi


# -- documents -------------------------------------------------------------


def load_space(document: str | Mapping[str, Any]) -> MetricMeasureSpace:
    """Build a space from a space document (JSON text or an already parsed mapping).

    Schema::

        {"metric": "euclidean" | "matrix",
         "points": [[x, ...], ...],          # when metric == "euclidean"
         "distance_matrix": [[...], ...],    # when metric == "matrix"
         "weights": [w, ...]}                # optional, default all 1.0
    """
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SpaceError("$", f"not valid JSON ({exc})") from None
    if not isinstance(document, Mapping):
        raise SpaceError("$", "space document must be an object")

    unknown = set(document) - {"metric", "points", "distance_matrix", "weights"}
    if unknown:
        raise SpaceError(sorted(unknown)[0], "unknown field")
    metric = document.get("metric")
    if metric not in ("euclidean", "matrix"):
        raise SpaceError("metric", f"must be 'euclidean' or 'matrix', got {metric!r}")
    has_points = "points" in document
    has_matrix = "distance_matrix" in document
    if has_points == has_matrix:
        raise SpaceError("metric", "exactly one of 'points' / 'distance_matrix' must be present")
    if metric == "euclidean" and not has_points:
        raise SpaceError("points", "required when metric is 'euclidean'")
    if metric == "matrix" and not has_matrix:
        raise SpaceError("distance_matrix", "required when metric is 'matrix'")

    key = "points" if has_points else "distance_matrix"
    rows = _numeric_rows(document[key], key)
    weights = document.get("weights")
    if weights is not None:
        if not isinstance(weights, list):
            raise SpaceError("weights", "must be a list of numbers")
        for k, w in enumerate(weights):
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise SpaceError(f"weights[{k}]", f"expected a number, got {w!r}")
    if has_points:
        return MetricMeasureSpace(coords=rows, weights=weights)
    return MetricMeasureSpace(distance_matrix=rows, weights=weights)


def _numeric_rows(rows, key: str) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise SpaceError(key, "must be a nonempty list of rows")
    width = None
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise SpaceError(f"{key}[{i}]", "row must be a list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise SpaceError(f"{key}[{i}]", f"dimension mismatch: expected {width} entries, got {len(row)}")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SpaceError(f"{key}[{i}][{j}]", f"expected a number, got {v!r}")
    if width == 0:
        raise SpaceError(f"{key}[0]", "rows must be nonempty")
    return np.array(rows, dtype=float)


def read_space(path: str | os.PathLike) -> MetricMeasureSpace:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_space(text)


def space_to_document(space: MetricMeasureSpace) -> dict:
    doc: dict[str, Any] = {"metric": space.metric}
    if space.metric == "euclidean":
        doc["points"] = space.coords.tolist()
    else:
        doc["distance_matrix"] = space.distance_matrix().tolist()
    doc["weights"] = space.weights.tolist()
    return doc


def grid_space(length: float, spacing: float = 1.0, weight: float | None = None) -> MetricMeasureSpace:
    """Evenly spaced points ``0, spacing, ..., length`` on a line.

    ``weight`` defaults to 1 per atom; pass ``weight=spacing`` to approximate
    Lebesgue measure on ``[0, length]``.
    """
    count = int(round(length / spacing)) + 1
    x = np.arange(count) * spacing
    w = None if weight is None else np.full(count, float(weight))
    return MetricMeasureSpace(coords=x[:, None], weights=w)


# -- balls and derived sets ---------------------------------------------------


def ball(space: MetricMeasureSpace, center: int, radius: float) -> IndexSet:
    """Closed ball ``{j : d(center, j) <= radius}``."""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    d = space.distances_from(center)
    return IndexSet._from_sorted(space, np.flatnonzero(d <= radius + ball_tolerance(radius)))


def ball_matrix(space: MetricMeasureSpace, radius: float) -> np.ndarray:
    """Boolean (n, n) matrix whose row ``i`` is the indicator of ``ball(space, i, radius)``."""
    if radius < 0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    return space.distance_matrix() <= radius + ball_tolerance(radius)


def row_masses(space: MetricMeasureSpace, member: np.ndarray) -> np.ndarray:
    """Measure of each row of a boolean membership matrix."""
    return np.where(member, space.weights, 0.0).sum(axis=-1)


def ball_masses(space: MetricMeasureSpace, radius: float) -> np.ndarray:
    """``mu(B(i, radius))`` for every point ``i``."""
    return row_masses(space, ball_matrix(space, radius))


class BallIndex:
    """Per-center sorted distances for repeated multi-radius ball queries.

    Costs O(n^2 log n) time and O(n^2) memory up front; each query is a
    binary search.  Results are identical to ``ball``.
    """

    def __init__(self, space: MetricMeasureSpace):
        self.space = space
        d = space.distance_matrix()
        self._order = np.argsort(d, axis=1, kind="stable")
        self._sorted = np.take_along_axis(d, self._order, axis=1)

    def ball(self, center: int, radius: float) -> IndexSet:
        if radius < 0:
            raise ValueError(f"radius must be nonnegative, got {radius}")
        center = self.space._check_index(center)
        k = np.searchsorted(self._sorted[center], radius + ball_tolerance(radius), side="right")
        return IndexSet._from_sorted(self.space, np.sort(self._order[center, :k]))


def annulus(space: MetricMeasureSpace, center: int, s: float, delta: float) -> IndexSet:
    """``B(center, s + delta) minus B(center, s - delta)`` for ``0 < delta < s``."""
    if not 0 < delta < s:
        raise ValueError(f"annulus needs 0 < delta < s, got delta={delta}, s={s}")
    outer = ball(space, center, s + delta)
    inner = ball(space, center, s - delta)
    return IndexSet._from_sorted(space, np.setdiff1d(outer.members, inner.members, assume_unique=True))


def sym_diff(space: MetricMeasureSpace, x: int, y: int, s: float) -> IndexSet:
    """Symmetric difference of the closed balls of radius ``s`` about ``x`` and ``y``."""
    bx = ball(space, x, s)
    by = ball(space, y, s)
    return IndexSet._from_sorted(space, np.setxor1d(bx.members, by.members, assume_unique=True))


def greedy_net(
    space: MetricMeasureSpace,
    subset: IndexSet,
    radius: float,
    *,
    open_balls: bool = False,
) -> list[int]:
    """Greedy ``radius``-net of ``subset``.

    Members are scanned in index order; the first uncovered member becomes
    the next center.  With ``open_balls`` a member is covered only when its
    distance to a center is strictly below ``radius`` (plain comparison).
    """
    members = np.asarray(subset.members)
    if members.size == 0:
        raise ValueError("greedy_net needs a nonempty subset")
    covered = np.zeros(len(members), dtype=bool)
    centers: list[int] = []
    for k, c in enumerate(members):
        if covered[k]:
            continue
        centers.append(int(c))
        d = space.distances_from(c)[members]
        covered |= (d < radius) if open_balls else (d <= radius + ball_tolerance(radius))
    return centers


def greedy_packing(space: MetricMeasureSpace, subset: IndexSet, separation: float) -> list[int]:
    """Maximal greedy packing: centers pairwise at distance strictly greater than ``separation``."""
    members = np.asarray(subset.members)
    if members.size == 0:
        raise ValueError("greedy_packing needs a nonempty subset")
    centers: list[int] = []
    for c in members:
        if centers:
            d = space.distances_from(c)[centers]
            if not np.all(d > separation):
                continue
        centers.append(int(c))
    return centers


def triangle_violation(space: MetricMeasureSpace, tol: float = 1e-12) -> tuple[int, int, int] | None:
    """First triple ``(i, j, k)`` with ``d(i, j) > d(i, k) + d(k, j) + tol``, or None.  O(n^3)."""
    d = space.distance_matrix()
    for k in range(space.n):
        bad = np.argwhere(d > d[:, k][:, None] + d[k][None, :] + tol)
        if len(bad):
            i, j = bad[0]
            return int(i), int(j), k
    return None
