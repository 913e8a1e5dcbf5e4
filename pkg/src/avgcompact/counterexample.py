"""Separated witness families showing that averaging is not compact on large spaces.

Centers ``x_n`` are pairwise more than ``4s`` apart.  The witnesses are the
indicators of ``B(x_n, 2s)``, normalized to unit L^1 mass in ``"l1"`` mode
and left as indicators in ``"linf"`` mode.  After averaging at radius ``s``
each image equals ``1 / mu(B(x_n, 2s))`` (resp. 1) on ``B(x_n, s)`` and
vanishes off ``B(x_n, 3s)``, so distinct images stay uniformly apart:
by at least ``c = min_x mu(B(x, s)) / mu(B(x, 2s))`` in L^1 and by 1 in L^inf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compactness import covering_number
from .operator import apply, assemble, norms_p
from .space import MetricMeasureSpace, ball, ball_masses, grid_space, greedy_packing

__all__ = [
    "WitnessFamily",
    "Separation",
    "PlateauCheck",
    "SweepRow",
    "l1_witnesses",
    "linf_witnesses",
    "witness_family",
    "verify_separation",
    "plateau_check",
    "plateau_contribution",
    "dichotomy_sweep",
]

SEPARATION_TOL = 1e-10


@dataclass(eq=False)
class WitnessFamily:
    s: float
    mode: str
    centers: list[int]
    witnesses: np.ndarray
    images: np.ndarray
    c_bound: float
    separation_matrix: np.ndarray

    @property
    def norm_p(self) -> float:
        return 1.0 if self.mode == "l1" else math.inf

    @property
    def bound(self) -> float:
        return self.c_bound if self.mode == "l1" else 1.0

    def __len__(self) -> int:
        return len(self.centers)


def _pairwise(space: MetricMeasureSpace, images: np.ndarray, p: float) -> np.ndarray:
    k = images.shape[0]
    out = np.zeros((k, k))
    for i in range(k):
        out[i] = norms_p(space, images - images[i], p)
    return out


def witness_family(space: MetricMeasureSpace, s: float, mode: str) -> WitnessFamily:
    if mode not in ("l1", "linf"):
        raise ValueError(f"mode must be 'l1' or 'linf', got {mode!r}")
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    centers = greedy_packing(space, space.all(), 4 * s)
    f = np.zeros((len(centers), space.n))
    for k, c in enumerate(centers):
        b = ball(space, c, 2 * s)
        f[k, b.members] = 1.0 / b.mass if mode == "l1" else 1.0
    images = apply(assemble(space, s), f)
    c_bound = float(np.min(ball_masses(space, s) / ball_masses(space, 2 * s)))
    p = 1.0 if mode == "l1" else math.inf
    return WitnessFamily(float(s), mode, centers, f, images, c_bound, _pairwise(space, images, p))


def l1_witnesses(space: MetricMeasureSpace, s: float) -> WitnessFamily:
    """Normalized indicators ``chi_{B(x_n, 2s)} / mu(B(x_n, 2s))``, separated in L^1."""
    return witness_family(space, s, "l1")


def linf_witnesses(space: MetricMeasureSpace, s: float) -> WitnessFamily:
    """Indicators ``chi_{B(x_n, 2s)}``, separated in L^inf."""
    return witness_family(space, s, "linf")


@dataclass(frozen=True)
class Separation:
    min_pairwise: float
    bound: float
    passed: bool
    pair: tuple[int, int] | None


def verify_separation(space: MetricMeasureSpace, family: WitnessFamily) -> Separation:
    """Smallest distance between two distinct averaged witnesses, measured directly.

    With fewer than two centers there is no pair; ``min_pairwise`` is then
    ``inf`` and the check passes vacuously.
    """
    k = len(family)
    if k < 2:
        return Separation(math.inf, family.bound, True, None)
    # recompute rather than trust the stored matrix
    m = _pairwise(space, family.images, family.norm_p)
    m[np.diag_indices(k)] = np.inf
    i, j = np.unravel_index(np.argmin(m), m.shape)
    lo = float(m[i, j])
    return Separation(lo, family.bound, lo >= family.bound - SEPARATION_TOL, (int(i), int(j)))


@dataclass(frozen=True)
class PlateauCheck:
    plateau_error: float
    vanish_error: float


def plateau_check(space: MetricMeasureSpace, family: WitnessFamily) -> PlateauCheck:
    """Largest deviation of the averaged witnesses from their exact plateau and zero values.

    Plateau value on ``B(x_n, s)``: ``1 / mu(B(x_n, 2s))`` in L^1 mode, 1 in L^inf
    mode.  Outside ``B(x_n, 3s)`` the average is 0.
    """
    s = family.s
    plateau = vanish = 0.0
    for k, c in enumerate(family.centers):
        inner = ball(space, c, s).members
        level = 1.0 / ball(space, c, 2 * s).mass if family.mode == "l1" else 1.0
        plateau = max(plateau, float(np.abs(family.images[k, inner] - level).max()))
        outside = np.ones(space.n, dtype=bool)
        outside[ball(space, c, 3 * s).members] = False
        if outside.any():
            vanish = max(vanish, float(np.abs(family.images[k, outside]).max()))
    return PlateauCheck(plateau, vanish)


def plateau_contribution(space: MetricMeasureSpace, family: WitnessFamily, n: int, m: int) -> tuple[float, float]:
    """``int_{B(x_n, s)} |A f_n - A f_m|`` and the expected ``mu(B(x_n, s)) / mu(B(x_n, 2s))``."""
    c = family.centers[n]
    inner = ball(space, c, family.s)
    diff = np.abs(family.images[n, inner.members] - family.images[m, inner.members])
    got = float(np.sum(space.weights[inner.members] * diff))
    return got, inner.mass / ball(space, c, 2 * family.s).mass


@dataclass(frozen=True)
class SweepRow:
    length: float
    num_centers: int
    min_pairwise: float
    covering_number: int
    bound: float


def dichotomy_sweep(lengths, s: float, mode: str, spacing: float = 1.0) -> list[SweepRow]:
    """Witness counts on grids ``0, spacing, ..., L`` for each ``L`` in ``lengths``.

    ``covering_number`` is taken at half the separation bound, so it equals the
    number of centers whenever the separation holds.
    """
    lengths = list(lengths)
    if not lengths:
        raise ValueError("lengths must be nonempty")
    rows = []
    for L in lengths:
        space = grid_space(L, spacing)
        fam = witness_family(space, s, mode)
        sep = verify_separation(space, fam)
        cover = covering_number(space, fam.images, fam.norm_p, fam.bound / 2)
        rows.append(SweepRow(float(L), len(fam), sep.min_pairwise, cover, fam.bound))
    return rows
