"""Regularity quantities of a finite metric measure space at a scale ``s``.

* doubling constant ``gamma(s) = max_x mu(B(x, 2s)) / mu(B(x, s))``
* annulus modulus ``max_x mu(B(x, s + delta) minus B(x, s - delta))``, for ``0 < delta < s``
* symmetric-difference modulus ``max_{d(x, y) < delta} mu(B(x, s) sym-diff B(y, s))``
* inverse-measure gap ``max_{d(x, y) < delta} |1/mu(B(x, s)) - 1/mu(B(y, s))|``

The moduli are exact maxima over points / pairs; "for every epsilon there is
a delta" statements are explored on the grid ``canonical_grid(s)`` with the
maximizing witnesses reported.  Ties go to the lowest index (lexicographic
for pairs).  Pair conditions ``d(x, y) < delta`` use plain floating point
comparison.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .space import IndexSet, MetricMeasureSpace, ball_matrix, greedy_net, row_masses

__all__ = [
    "DEFAULT_GRID",
    "canonical_grid",
    "Doubling",
    "Modulus",
    "PairModulus",
    "DeltaChoice",
    "InverseGap",
    "ContainmentReport",
    "Prop32Report",
    "RegularityReport",
    "doubling_constant",
    "inf_ball",
    "star_modulus",
    "star_delta_for",
    "symdiff_modulus",
    "inverse_measure_gap",
    "lemma33_forward_check",
    "pair_scan",
    "prop32_report",
    "regularity_report",
]

DEFAULT_GRID = 64


def canonical_grid(s: float, resolution: int = DEFAULT_GRID) -> np.ndarray:
    """``s * k / resolution`` for ``k = 1 .. resolution - 1``: the open interval (0, s)."""
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    return s * np.arange(1, resolution) / resolution


@dataclass(frozen=True)
class Doubling:
    gamma: float
    argmax: int


@dataclass(frozen=True)
class Modulus:
    delta: float
    value: float
    argmax: int


@dataclass(frozen=True)
class PairModulus:
    delta: float
    value: float
    pair: tuple[int, int]


@dataclass(frozen=True)
class DeltaChoice:
    delta: float
    modulus: float


@dataclass(frozen=True)
class InverseGap:
    max_gap: float
    bound: float
    pair: tuple[int, int]
    symdiff: float
    inf_ball: float


@dataclass(frozen=True)
class PairScan:
    """Maxima over pairs ``x, y`` in a subset with ``d(x, y) < delta``."""

    symdiff: float
    symdiff_pair: tuple[int, int]
    gap: float
    gap_pair: tuple[int, int]
    pairs: int


@dataclass(frozen=True)
class ContainmentReport:
    s: float
    delta: float
    pairs_checked: int
    min_slack: float
    max_slack: float
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Prop32Report:
    net_size: int
    inf_ball_on_E: float
    doubling_on_E: float


@dataclass
class RegularityReport:
    s: float
    gamma: float
    gamma_argmax: int
    inf_ball: float
    star_modulus: list[Modulus]
    symdiff_modulus: list[PairModulus]
    prop32: Prop32Report | None = None


def _masses(space: MetricMeasureSpace, s: float) -> tuple[np.ndarray, np.ndarray]:
    member = ball_matrix(space, s)
    return member, row_masses(space, member)


def doubling_constant(space: MetricMeasureSpace, s: float) -> Doubling:
    if not s > 0:
        raise ValueError(f"scale must be positive, got {s}")
    _, small = _masses(space, s)
    _, big = _masses(space, 2 * s)
    ratio = big / small
    k = int(np.argmax(ratio))
    return Doubling(float(ratio[k]), k)


def inf_ball(space: MetricMeasureSpace, s: float) -> float:
    """``min_x mu(B(x, s))``; positive since every atom has positive mass."""
    return float(_masses(space, s)[1].min())


def _annulus_masses(space: MetricMeasureSpace, s: float, delta: float) -> np.ndarray:
    if not 0 < delta < s:
        raise ValueError(f"annulus modulus needs 0 < delta < s, got delta={delta}, s={s}")
    outer = ball_matrix(space, s + delta)
    inner = ball_matrix(space, s - delta)
    return row_masses(space, outer & ~inner)


def star_modulus(space: MetricMeasureSpace, s: float, delta: float) -> Modulus:
    """Largest annulus mass ``mu(B(x, s + delta) minus B(x, s - delta))`` over ``x``."""
    m = _annulus_masses(space, s, delta)
    k = int(np.argmax(m))
    return Modulus(float(delta), float(m[k]), k)


def star_delta_for(
    space: MetricMeasureSpace, s: float, epsilon: float, resolution: int = DEFAULT_GRID
) -> DeltaChoice | None:
    """Smallest grid delta whose annulus modulus is below ``epsilon``, or None."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    for delta in canonical_grid(s, resolution):
        m = star_modulus(space, s, delta).value
        if m < epsilon:
            return DeltaChoice(float(delta), m)
    return None


def pair_scan(
    space: MetricMeasureSpace,
    s: float,
    delta: float,
    subset: IndexSet | None = None,
    member: np.ndarray | None = None,
    masses: np.ndarray | None = None,
) -> PairScan:
    """Symmetric-difference and inverse-gap maxima over pairs of ``subset`` closer than ``delta``.

    Ordered pairs are visited lexicographically, ``x == y`` included, so an
    empty set of qualifying distinct pairs yields zeros at ``(x0, x0)``.
    """
    if member is None or masses is None:
        member, masses = _masses(space, s)
    idx = np.arange(space.n) if subset is None else np.asarray(subset.members)
    d = space.distance_matrix()
    inv = 1.0 / masses
    sd_best, sd_pair = -1.0, (int(idx[0]), int(idx[0]))
    gap_best, gap_pair = -1.0, sd_pair
    pairs = 0
    for x in idx:
        ys = idx[d[x, idx] < delta]
        pairs += len(ys)
        sd = row_masses(space, member[ys] ^ member[x])
        k = int(np.argmax(sd))
        if sd[k] > sd_best:
            sd_best, sd_pair = float(sd[k]), (int(x), int(ys[k]))
        gap = np.abs(inv[x] - inv[ys])
        k = int(np.argmax(gap))
        if gap[k] > gap_best:
            gap_best, gap_pair = float(gap[k]), (int(x), int(ys[k]))
    return PairScan(sd_best, sd_pair, gap_best, gap_pair, pairs)


def symdiff_modulus(space: MetricMeasureSpace, s: float, delta: float) -> PairModulus:
    """Largest ``mu(B(x, s) sym-diff B(y, s))`` over ordered pairs with ``d(x, y) < delta``."""
    if not (s > 0 and delta > 0):
        raise ValueError(f"need s > 0 and delta > 0, got s={s}, delta={delta}")
    scan = pair_scan(space, s, delta)
    return PairModulus(float(delta), scan.symdiff, scan.symdiff_pair)


def inverse_measure_gap(space: MetricMeasureSpace, s: float, delta: float, subset: IndexSet | None = None) -> InverseGap:
    """Largest ``|1/mu(B(x, s)) - 1/mu(B(y, s))|`` over pairs closer than ``delta``.

    ``bound`` is the symmetric-difference modulus divided by ``a**2`` with
    ``a = min_z mu(B(z, s))``; the gap never exceeds it.
    """
    if not (s > 0 and delta > 0):
        raise ValueError(f"need s > 0 and delta > 0, got s={s}, delta={delta}")
    member, masses = _masses(space, s)
    scan = pair_scan(space, s, delta, subset, member, masses)
    a = float(masses.min())
    return InverseGap(scan.gap, scan.symdiff / a**2, scan.gap_pair, scan.symdiff, a)


def lemma33_forward_check(space: MetricMeasureSpace, s: float, delta: float, tol: float = 1e-10) -> ContainmentReport:
    """Check ``mu(B(x,s) sym-diff B(y,s)) <= ann(x) + ann(y)`` for every pair with ``d(x, y) < delta``.

    ``ann(z)`` is the annulus mass ``mu(B(z, s + delta) minus B(z, s - delta))``.
    The inequality holds in every metric space, so a violation points to a
    bug (or to a distance matrix breaking the triangle inequality).
    """
    ann = _annulus_masses(space, s, delta)
    member, _ = _masses(space, s)
    d = space.distance_matrix()
    violations = []
    lo, hi, pairs = np.inf, -np.inf, 0
    for x in range(space.n):
        ys = np.flatnonzero(d[x] < delta)
        pairs += len(ys)
        lhs = row_masses(space, member[ys] ^ member[x])
        rhs = ann[x] + ann[ys]
        slack = rhs - lhs
        lo, hi = min(lo, float(slack.min())), max(hi, float(slack.max()))
        for k in np.flatnonzero(lhs > rhs + tol * np.maximum(1.0, rhs)):
            violations.append((x, int(ys[k]), float(lhs[k]), float(rhs[k])))
    return ContainmentReport(float(s), float(delta), pairs, lo, hi, violations)


def prop32_report(space: MetricMeasureSpace, E: IndexSet, s: float) -> Prop32Report:
    """Finite witnesses for total boundedness of ``E`` at scale ``s``.

    Net size, smallest ball mass over ``E`` and doubling ratio over ``E``.
    """
    if len(E) == 0:
        raise ValueError("E must be nonempty")
    idx = np.asarray(E.members)
    _, small = _masses(space, s)
    _, big = _masses(space, 2 * s)
    return Prop32Report(
        len(greedy_net(space, E, s)),
        float(small[idx].min()),
        float((big[idx] / small[idx]).max()),
    )


def regularity_report(
    space: MetricMeasureSpace,
    s: float,
    deltas=None,
    resolution: int = DEFAULT_GRID,
) -> RegularityReport:
    """Doubling constant, both moduli on a delta grid, ``inf_ball`` and the total-boundedness triple at scale ``s``."""
    if deltas is None:
        deltas = canonical_grid(s, resolution)
    dbl = doubling_constant(space, s)
    member, masses = _masses(space, s)
    star = [star_modulus(space, s, dl) for dl in deltas if 0 < dl < s]
    sym = []
    for dl in deltas:
        scan = pair_scan(space, s, dl, member=member, masses=masses)
        sym.append(PairModulus(float(dl), scan.symdiff, scan.symdiff_pair))
    return RegularityReport(
        s=float(s),
        gamma=dbl.gamma,
        gamma_argmax=dbl.argmax,
        inf_ball=float(masses.min()),
        star_modulus=star,
        symdiff_modulus=sym,
        prop32=prop32_report(space, space.all(), s),
    )
