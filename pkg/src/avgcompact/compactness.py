"""Compactness diagnostics for families of functions and their averages.

The entry points mirror the positive direction of the bounded/compact
dichotomy:

* ``kolmogorov_riesz_check`` tabulates the two Kolmogorov-Riesz conditions
  (uniform approximation by averages, uniformly small tails) for a family.
* ``equicontinuity_modulus`` and ``lemma34_modulus`` search a delta grid for
  a scale at which every averaged family member oscillates by less than a
  target between any two points closer than delta.
* ``build_net_certificate`` turns such a delta into an explicit finite
  epsilon-net of the averaged family, and ``verify_certificate`` checks one
  independently.
* ``theorem41_bound_check`` checks ``||A_s A_r f - A_r f||_1 <= epsilon`` at
  every grid scale ``s`` satisfying the annulus / inverse-gap thresholds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .operator import AveragingOperator, apply, assemble, norms_p, parse_p
from .regularity import DEFAULT_GRID, canonical_grid, pair_scan, star_modulus
from .space import IndexSet, MetricMeasureSpace, ball, ball_masses, ball_matrix, greedy_net, row_masses

__all__ = [
    "FamilySpec",
    "make_family",
    "unit_ball_sample",
    "KRReport",
    "kolmogorov_riesz_check",
    "EquicontinuityRow",
    "EquicontinuityReport",
    "equicontinuity_modulus",
    "SubsetModulusResult",
    "lemma34_modulus",
    "CertificateError",
    "NetCertificate",
    "build_net_certificate",
    "CertificateCheck",
    "verify_certificate",
    "covering_number",
    "CompositeBoundRow",
    "CompositeBoundReport",
    "theorem41_bound_check",
    "max_oscillation",
]


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """Finite family of functions (one per row) measured in the weighted p-norm."""

    functions: np.ndarray
    p: float
    sup_norm: float

    def __len__(self) -> int:
        return self.functions.shape[0]


def make_family(space: MetricMeasureSpace, functions, p) -> FamilySpec:
    p = parse_p(p)
    fs = np.atleast_2d(np.array(functions, dtype=float))
    if fs.shape[0] == 0:
        raise ValueError("family must be nonempty")
    if fs.shape[1] != space.n:
        raise ValueError(f"family functions have length {fs.shape[1]}, space has {space.n} points")
    if not np.all(np.isfinite(fs)):
        raise ValueError("family contains non-finite values")
    fs.setflags(write=False)
    return FamilySpec(fs, p, float(norms_p(space, fs, p).max()))


def unit_ball_sample(space: MetricMeasureSpace, p, count: int, seed: int = 0) -> FamilySpec:
    """Deterministic sample of ``count`` functions from the unit ball of L^p.

    The first member is the normalized constant.  For p = inf the rest
    alternate between random sign vectors and sparse {0, +-1} vectors; for
    finite p between normalized Gaussian vectors and normalized indicators
    ``chi_A / mu(A)^(1/p)`` of random sets ``A``.
    """
    if count < 1:
        raise ValueError("count must be positive")
    p = parse_p(p)
    rng = np.random.default_rng(seed)
    n = space.n
    out = np.empty((count, n))
    one = np.ones(n)
    out[0] = one / norms_p(space, one, p)[0]
    for k in range(1, count):
        if math.isinf(p):
            if k % 2:
                f = rng.choice([-1.0, 1.0], size=n)
            else:
                f = rng.choice([-1.0, 0.0, 1.0], size=n, p=[0.25, 0.5, 0.25])
                if not f.any():
                    f[rng.integers(n)] = 1.0
        else:
            if k % 2:
                f = rng.standard_normal(n)
            else:
                f = (rng.random(n) < rng.uniform(0.05, 0.5)).astype(float)
                if not f.any():
                    f[rng.integers(n)] = 1.0
            f = f / norms_p(space, f, p)[0]
        out[k] = f
    return make_family(space, out, p)


# -- Kolmogorov-Riesz conditions ----------------------------------------------


@dataclass
class KRReport:
    """Kolmogorov-Riesz tables.

    ``condition1``: ``(sigma, max_f ||A_sigma f - f||_p)``.
    ``condition2``: ``(R, max_f ||f chi_{X minus B(center, R)}||_p)``.
    """

    condition1: list[tuple[float, float]]
    condition2: list[tuple[float, float]]
    center: int
    sigma_for_target: float | None = None
    radius_for_target: float | None = None


def kolmogorov_riesz_check(
    space: MetricMeasureSpace,
    family: FamilySpec,
    sigma_grid,
    E_radius_grid,
    center: int = 0,
    sigma_target: float | None = None,
    tail_target: float | None = None,
) -> KRReport:
    """Tabulate both conditions; the verdict fields hold the smallest grid value below each target."""
    sigmas = sorted(float(x) for x in sigma_grid)
    radii = sorted(float(x) for x in E_radius_grid)
    if not sigmas or not radii:
        raise ValueError("sigma and E-radius grids must be nonempty")
    F = family.functions
    cond1 = []
    for sig in sigmas:
        diff = apply(assemble(space, sig), F) - F
        cond1.append((sig, float(norms_p(space, diff, family.p).max())))
    cond2 = []
    for R in radii:
        outside = np.ones(space.n, dtype=bool)
        outside[ball(space, center, R).members] = False
        cond2.append((R, float(norms_p(space, F, family.p, mask=outside).max())))
    report = KRReport(cond1, cond2, int(center))
    if sigma_target is not None:
        report.sigma_for_target = next((s for s, v in cond1 if v < sigma_target), None)
    if tail_target is not None:
        report.radius_for_target = next((R for R, v in cond2 if v < tail_target), None)
    return report


# -- equicontinuity -------------------------------------------------------------


def max_oscillation(space: MetricMeasureSpace, images: np.ndarray, delta: float, subset: IndexSet | None = None) -> float:
    """``max |g(x) - g(y)|`` over rows ``g`` of ``images`` and pairs of ``subset`` with ``d(x, y) < delta``."""
    images = np.atleast_2d(images)
    idx = np.arange(space.n) if subset is None else np.asarray(subset.members)
    d = space.distance_matrix()
    worst = 0.0
    for x in idx:
        ys = idx[d[x, idx] < delta]
        if len(ys) > 1:
            worst = max(worst, float(np.abs(images[:, ys] - images[:, [x]]).max()))
    return worst


def _ratio(num: float, den: float) -> float:
    return math.inf if den == 0 else num / den


@dataclass(frozen=True)
class EquicontinuityRow:
    epsilon: float
    delta: float | None
    symdiff: float
    gap_bound: float
    max_oscillation: float

    @property
    def verified(self) -> bool:
        return self.delta is not None and self.max_oscillation < self.epsilon


@dataclass
class EquicontinuityReport:
    radius: float
    c1: float
    c2: float
    c3: float
    rows: list[EquicontinuityRow]


def equicontinuity_modulus(
    space: MetricMeasureSpace,
    r: float,
    family: FamilySpec,
    epsilons,
    resolution: int = DEFAULT_GRID,
    delta_grid=None,
) -> EquicontinuityReport:
    """Largest grid delta meeting the sufficient conditions for ``{A_r f}`` to oscillate by less than epsilon.

    With ``c1 = max ||f||_inf``, ``c2 = max_x mu(B(x, r))`` and
    ``c3 = min_x mu(B(x, r))`` the conditions are

        symdiff modulus(r, delta) < c3 * eps / (2 c1)
        inverse-gap bound(r, delta) < eps / (2 c1 c2)

    and the chosen delta is then checked directly on every pair.
    """
    if not math.isinf(family.p):
        raise ValueError("equicontinuity_modulus works with L^inf families")
    grid = np.sort(canonical_grid(r, resolution) if delta_grid is None else np.asarray(delta_grid, dtype=float))
    masses = ball_masses(space, r)
    c1, c2, c3 = family.sup_norm, float(masses.max()), float(masses.min())
    images = apply(assemble(space, r), family.functions)
    scans = _Scanner(space, r)
    rows = []
    for eps in epsilons:
        sd_lim = _ratio(c3 * eps, 2 * c1)
        gap_lim = _ratio(eps, 2 * c1 * c2)
        chosen, sd, gb = None, 0.0, 0.0
        for dl in grid:
            sc = scans(dl)
            bound = sc.symdiff / c3**2
            if not (sc.symdiff < sd_lim and bound < gap_lim):
                break
            chosen, sd, gb = float(dl), sc.symdiff, bound
        osc = max_oscillation(space, images, chosen) if chosen is not None else math.nan
        rows.append(EquicontinuityRow(float(eps), chosen, sd, gb, osc))
    return EquicontinuityReport(float(r), c1, c2, c3, rows)


class _Scanner:
    """Memoized ``pair_scan`` at a fixed radius, optionally restricted to a subset."""

    def __init__(self, space: MetricMeasureSpace, s: float, subset: IndexSet | None = None):
        self.space, self.s, self.subset = space, s, subset
        self.member = ball_matrix(space, s)
        self.masses = row_masses(space, self.member)
        self._cache: dict[float, object] = {}

    def __call__(self, delta: float):
        if delta not in self._cache:
            self._cache[delta] = pair_scan(self.space, self.s, delta, self.subset, self.member, self.masses)
        return self._cache[delta]


# -- oscillation modulus on a bounded subset ----------------------------------------


@dataclass
class SubsetModulusResult:
    """Outcome of the delta search: ``"ok"``, ``"no_sigma"`` or ``"no_delta"``."""

    outcome: str
    epsilon: float
    p: float
    delta: float | None
    sigma: float | None
    c1: float
    c2: float
    c3: float
    c4: float | None
    symdiff_threshold: float
    gap_threshold: float
    max_oscillation: float = math.nan
    failing_threshold: str | None = None

    @property
    def verified(self) -> bool:
        return self.outcome == "ok" and self.max_oscillation < self.epsilon


def lemma34_modulus(
    space: MetricMeasureSpace,
    t: float,
    family: FamilySpec,
    E: IndexSet,
    epsilon: float,
    sigma_grid=None,
    resolution: int = DEFAULT_GRID,
    delta_grid=None,
) -> SubsetModulusResult:
    """Grid delta such that ``|A_t f(x) - A_t f(y)| < epsilon`` for ``x, y`` in ``E`` closer than delta.

    Constants: ``c1 = max ||f||_p``, ``c2 = mu(union of B(x, t), x in E)``,
    ``c3 = min_{z in E} mu(B(z, t))``.  For p = 1 a sigma with
    ``max ||A_sigma f - f||_1 < epsilon c3 / 4`` is needed first, and
    ``c4 = min mu(B(z, sigma))`` over the union of the t-balls.  The largest
    grid delta with

        symdiff over E < (eps c3 / (2 c1))^q        (p > 1)
        symdiff over E < eps c3 c4 / (4 c1)         (p = 1)
        inverse gap over E < eps / (2 c1 c2^(1/q))

    is returned, and the conclusion is checked on every qualifying pair.
    """
    p = family.p
    if math.isinf(p):
        raise ValueError("lemma34_modulus needs 1 <= p < inf")
    if len(E) == 0:
        raise ValueError("E must be nonempty")
    idx = np.asarray(E.members)
    member_t = ball_matrix(space, t)
    union = member_t[idx].any(axis=0)
    masses_t = ball_masses(space, t)
    c1 = family.sup_norm
    c2 = float(np.sum(space.weights[union]))
    c3 = float(masses_t[idx].min())
    inv_q = 0.0 if p == 1 else 1.0 - 1.0 / p

    sigma = c4 = None
    if p == 1:
        target = epsilon * c3 / 4
        sigmas = canonical_grid(t, resolution) if sigma_grid is None else np.asarray(sigma_grid, dtype=float)
        F = family.functions
        for sig in sigmas:
            dev = float(norms_p(space, apply(assemble(space, sig), F) - F, 1).max())
            if dev < target:
                cand = float(ball_masses(space, sig)[union].min())
                if c4 is None or cand > c4:
                    sigma, c4 = float(sig), cand
        if sigma is None:
            return SubsetModulusResult("no_sigma", epsilon, p, None, None, c1, c2, c3, None,
                                 math.nan, math.nan, failing_threshold="approximation by averages (p=1)")
        sd_lim = _ratio(epsilon * c3 * c4, 4 * c1)
    else:
        q = p / (p - 1)
        sd_lim = _ratio(epsilon * c3, 2 * c1) ** q
    gap_lim = _ratio(epsilon, 2 * c1 * c2**inv_q)

    grid = np.sort(canonical_grid(t, resolution) if delta_grid is None else np.asarray(delta_grid, dtype=float))
    scans = _Scanner(space, t, E)
    chosen, failing = None, None
    for dl in grid:
        sc = scans(dl)
        if not sc.symdiff < sd_lim:
            failing = "symmetric-difference modulus"
            break
        if not sc.gap < gap_lim:
            failing = "inverse-measure gap"
            break
        chosen = float(dl)
    if chosen is None:
        return SubsetModulusResult("no_delta", epsilon, p, None, sigma, c1, c2, c3, c4,
                             sd_lim, gap_lim, failing_threshold=failing)
    images = apply(assemble(space, t), family.functions)
    osc = max_oscillation(space, images, chosen, E)
    return SubsetModulusResult("ok", epsilon, p, chosen, sigma, c1, c2, c3, c4, sd_lim, gap_lim, osc)


# -- net certificates ----------------------------------------------------------------


class CertificateError(RuntimeError):
    """No admissible delta on the grid; ``threshold`` names the failing condition."""

    def __init__(self, message: str, threshold: str | None = None):
        self.threshold = threshold
        super().__init__(message)


@dataclass(eq=False)
class NetCertificate:
    """Finite epsilon-net for ``{(A_r f) chi_E : f in family}``.

    ``centers`` cover ``E`` with open delta-balls.  Each averaged member is
    bucketed at every center into the value grid ``2 * grid_step * k``
    (buckets ``(a - grid_step, a + grid_step]``); ``occupied`` lists the
    distinct bucket tuples and ``representatives`` maps each to the first
    family member landing in it.
    """

    epsilon: float
    p: float
    radius: float
    subset: IndexSet
    delta: float
    centers: list[int]
    grid_step: float
    grids: list[np.ndarray]
    occupied: list[tuple[int, ...]]
    representatives: dict[tuple[int, ...], int]
    assignment: np.ndarray
    achieved_radius: float
    modulus: object = field(repr=False, default=None)

    @property
    def size(self) -> int:
        return len(self.occupied)

    @property
    def valid(self) -> bool:
        return self.achieved_radius < self.epsilon

    def representative_indices(self) -> list[int]:
        return [self.representatives[a] for a in self.occupied]


def _distances_on(space: MetricMeasureSpace, images: np.ndarray, target: np.ndarray, p: float, mask) -> np.ndarray:
    return norms_p(space, images - target, p, mask=mask)


def build_net_certificate(
    space: MetricMeasureSpace,
    r: float,
    family: FamilySpec,
    epsilon: float,
    E: IndexSet | None = None,
    resolution: int = DEFAULT_GRID,
    sigma_grid=None,
) -> NetCertificate:
    """Construct an epsilon-net certificate for the averaged family.

    Per-center bucket half-width ``w`` is ``epsilon * mu(E)^(-1/p) / 4``
    (``epsilon / 4`` for p = inf); delta is chosen so that averaged members
    oscillate by less than ``w`` on pairs closer than delta.  Two members
    sharing a bucket tuple then differ by less than ``4w`` at every point of
    ``E``, which makes the p-distance on ``E`` smaller than epsilon.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    E = space.all() if E is None else E
    if len(E) == 0:
        raise ValueError("E must be nonempty")
    p = family.p
    if math.isinf(p):
        half = epsilon / 4
        rep = equicontinuity_modulus(space, r, family, [half], resolution)
        row = rep.rows[0]
        if row.delta is None:
            raise CertificateError("no grid delta meets the equicontinuity thresholds", "symmetric-difference modulus")
        delta, modulus = row.delta, rep
    else:
        half = epsilon * E.mass ** (-1.0 / p) / 4
        mod = lemma34_modulus(space, r, family, E, half, sigma_grid, resolution)
        if mod.outcome != "ok":
            raise CertificateError(f"oscillation modulus search failed ({mod.outcome})", mod.failing_threshold)
        delta, modulus = mod.delta, mod

    centers = greedy_net(space, E, delta, open_balls=True)
    images = apply(assemble(space, r), family.functions)
    vals = images[:, centers]
    # bucket k covers (2wk - w, 2wk + w]
    keys = np.ceil((vals - half) / (2 * half)).astype(np.int64)
    grids = [np.unique(keys[:, i]) * 2 * half for i in range(len(centers))]

    reps: dict[tuple[int, ...], int] = {}
    assignment = np.empty(len(family), dtype=np.intp)
    for m, key in enumerate(map(tuple, keys.tolist())):
        reps.setdefault(key, m)
        assignment[m] = reps[key]
    occupied = list(reps)

    mask = _mask(space, E)
    achieved = float(_distances_on(space, images, images[assignment], p, mask).max())
    return NetCertificate(
        epsilon=float(epsilon), p=p, radius=float(r), subset=E, delta=delta, centers=centers,
        grid_step=half, grids=grids, occupied=occupied, representatives=reps,
        assignment=assignment, achieved_radius=achieved, modulus=modulus,
    )


def _mask(space: MetricMeasureSpace, E: IndexSet) -> np.ndarray:
    mask = np.zeros(space.n, dtype=bool)
    mask[E.members] = True
    return mask


@dataclass(frozen=True)
class CertificateCheck:
    achieved_radius: float
    worst_member: int
    passed: bool


def verify_certificate(
    space: MetricMeasureSpace,
    op: AveragingOperator,
    cert: NetCertificate,
    family: FamilySpec,
) -> CertificateCheck:
    """Distance from every averaged member to its nearest representative, measured on ``E``."""
    images = apply(op, family.functions)
    mask = _mask(space, cert.subset)
    reps = cert.representative_indices()
    best = np.full(len(family), np.inf)
    for k in reps:
        best = np.minimum(best, _distances_on(space, images, images[k], cert.p, mask))
    worst = int(np.argmax(best))
    radius = float(best[worst])
    return CertificateCheck(radius, worst, radius < cert.epsilon)


def covering_number(space: MetricMeasureSpace, images, p, epsilon: float, mask=None) -> int:
    """Size of a greedy epsilon-cover of ``images`` (rows) in the weighted p-norm.

    The first uncovered element becomes the next center; an element is
    covered when its distance to a center is at most epsilon.  This is an
    upper bound for the minimal covering number.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    p = parse_p(p)
    images = np.atleast_2d(np.asarray(images, dtype=float))
    covered = np.zeros(images.shape[0], dtype=bool)
    count = 0
    for k in range(images.shape[0]):
        if covered[k]:
            continue
        count += 1
        covered |= norms_p(space, images - images[k], p, mask=mask) <= epsilon
    return count


# -- composite bound for L^1 ------------------------------------------------------------


@dataclass(frozen=True)
class CompositeBoundRow:
    s: float
    star: float
    gap_bound: float
    meets_thresholds: bool
    max_deviation: float = math.nan


@dataclass
class CompositeBoundReport:
    radius: float
    epsilon: float
    c1: float
    c2: float
    c3: float
    star_threshold: float
    gap_threshold: float
    rows: list[CompositeBoundRow]

    @property
    def valid_s(self) -> list[float]:
        return [row.s for row in self.rows if row.meets_thresholds]

    @property
    def found(self) -> bool:
        return bool(self.valid_s)

    @property
    def passed(self) -> bool:
        return all(row.max_deviation <= self.epsilon for row in self.rows if row.meets_thresholds)


def theorem41_bound_check(
    space: MetricMeasureSpace,
    r: float,
    family: FamilySpec,
    epsilon: float,
    resolution: int = DEFAULT_GRID,
) -> CompositeBoundReport:
    """Check ``||A_s(A_r f) - A_r f||_1 <= epsilon`` at every grid ``s`` in (0, r) meeting

        annulus modulus(r, s) < epsilon c3 / (2 c1)
        inverse-gap bound(r, s) < epsilon / (2 c1 c2)

    with ``c1 = max ||f||_1``, ``c2 = mu(X)``, ``c3 = min_x mu(B(x, r))``.
    The same grid value plays the role of both the inner radius and the pair
    distance bound.  Both quantities grow with ``s``, so the scan stops at
    the first grid value that misses a threshold.
    """
    if family.p != 1:
        raise ValueError("theorem41_bound_check works with L^1 families")
    c1, c2 = family.sup_norm, space.total_mass
    c3 = float(ball_masses(space, r).min())
    star_lim = _ratio(epsilon * c3, 2 * c1)
    gap_lim = _ratio(epsilon, 2 * c1 * c2)
    op_r = assemble(space, r)
    ar = apply(op_r, family.functions)
    scans = _Scanner(space, r)
    rows = []
    for s in canonical_grid(r, resolution):
        star = star_modulus(space, r, s).value
        gap_bound = scans(s).symdiff / c3**2
        meets = star < star_lim and gap_bound < gap_lim
        if not meets:
            rows.append(CompositeBoundRow(float(s), star, gap_bound, False))
            break
        dev = norms_p(space, apply(assemble(space, s), ar) - ar, 1).max()
        rows.append(CompositeBoundRow(float(s), star, gap_bound, True, float(dev)))
    return CompositeBoundReport(float(r), float(epsilon), c1, c2, c3, star_lim, gap_lim, rows)
