"""Randomized battery of the inequalities the averaging operator must satisfy.

Every check is a theorem for genuine metrics, so any violation is reported
with a concrete witness.  All randomness flows from one seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .compactness import theorem41_bound_check, unit_ball_sample
from .operator import AveragingOperator, apply, assemble, norm_p, operator_norm, oscillation_bound
from .regularity import doubling_constant, inverse_measure_gap, lemma33_forward_check
from .space import MetricMeasureSpace

__all__ = ["Check", "BatteryReport", "verify_bounds", "corrupt_operator", "REL_TOL"]

REL_TOL = 1e-10


def _exceeds(lhs: float, rhs: float) -> bool:
    return lhs > rhs + REL_TOL * max(1.0, abs(rhs))


@dataclass
class Check:
    name: str
    cases: int = 0
    violations: int = 0
    witness: dict | None = None
    note: str | None = None

    def fail(self, **witness) -> None:
        self.violations += 1
        if self.witness is None:
            self.witness = witness

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass
class BatteryReport:
    radius: float
    seed: int
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_bounds(
    space: MetricMeasureSpace,
    r: float | None = None,
    seed: int = 0,
    functions: int = 20,
    max_pairs: int = 2000,
    epsilon: float = 0.5,
    operator_factory: Callable[[MetricMeasureSpace, float], AveragingOperator] = assemble,
) -> BatteryReport:
    """Run the battery at radius ``r`` (default: a quarter of the diameter, or 1).

    ``operator_factory`` builds the operator under test; the default is
    ``assemble``.  Replacing it is how negative controls inject a faulty
    operator.
    """
    rng = np.random.default_rng(seed)
    if r is None:
        r = space.diameter / 4 if space.diameter > 0 else 1.0
    op = operator_factory(space, r)
    report = BatteryReport(float(r), int(seed))
    n = space.n
    fs = rng.standard_normal((functions, n))
    fs[0] = 1.0

    # pairs: exhaustive when small, sampled otherwise
    if n * n <= max_pairs:
        pairs = [(x, y) for x in range(n) for y in range(n)]
    else:
        pairs = [tuple(map(int, rng.integers(n, size=2))) for _ in range(max_pairs)]

    osc = Check("oscillation_bound")
    for k, f in enumerate(fs):
        for x, y in pairs:
            o = oscillation_bound(space, op, f, x, y)
            osc.cases += 1
            if _exceeds(o.actual, o.bound):
                osc.fail(x=x, y=y, f=k, actual=o.actual, bound=o.bound)
    report.checks.append(osc)

    deltas = [r * k / 8 for k in range(1, 8)]
    contain = Check("symdiff_containment")
    gapc = Check("inverse_gap_bound")
    for dl in deltas:
        rep = lemma33_forward_check(space, r, dl, REL_TOL)
        contain.cases += rep.pairs_checked
        for x, y, lhs, rhs in rep.violations:
            contain.fail(x=x, y=y, s=r, delta=dl, symdiff=lhs, annuli=rhs)
        g = inverse_measure_gap(space, r, dl)
        gapc.cases += 1
        if _exceeds(g.max_gap, g.bound):
            gapc.fail(x=g.pair[0], y=g.pair[1], s=r, delta=dl, gap=g.max_gap, bound=g.bound)
    report.checks += [contain, gapc]

    const = Check("constants_fixed", cases=1)
    resid = np.abs(apply(op, np.ones(n)) - 1.0)
    if resid.max() > 1e-12:
        const.fail(x=int(np.argmax(resid)), max_deviation=float(resid.max()))
    report.checks.append(const)

    sup = Check("sup_contraction")
    af = apply(op, fs)
    for k in range(functions):
        sup.cases += 1
        lhs, rhs = norm_p(space, af[k], math.inf), norm_p(space, fs[k], math.inf)
        if _exceeds(lhs, rhs):
            sup.fail(f=k, image_sup=lhs, sup=rhs)
    report.checks.append(sup)

    l1 = Check("l1_norm_vs_doubling", cases=1)
    norm1, gamma = operator_norm(space, op, 1), doubling_constant(space, r).gamma
    if _exceeds(norm1, gamma):
        l1.fail(operator_norm=norm1, gamma=gamma)
    report.checks.append(l1)

    hol = Check("weighted_holder")
    for k in range(functions):
        p = 1.0 + rng.exponential(1.0)
        q = p / (p - 1.0)
        f, g = fs[k], rng.standard_normal(n)
        lhs = float(np.sum(space.weights * np.abs(f * g)))
        rhs = norm_p(space, f, p) * norm_p(space, g, q)
        hol.cases += 1
        if _exceeds(lhs, rhs):
            hol.fail(f=k, p=p, lhs=lhs, rhs=rhs)
    report.checks.append(hol)

    comp = Check("composite_l1_bound")
    fam = unit_ball_sample(space, 1, functions, seed)
    t41 = theorem41_bound_check(space, r, fam, epsilon)
    comp.cases = len(t41.valid_s) * len(fam)
    for row in t41.rows:
        if row.meets_thresholds and row.max_deviation > epsilon:
            comp.fail(s=row.s, deviation=row.max_deviation, epsilon=epsilon)
    if not t41.found:
        comp.note = "no grid scale meets the thresholds"
    report.checks.append(comp)
    return report


def corrupt_operator(space: MetricMeasureSpace, r: float) -> AveragingOperator:
    """Faulty operator for negative controls: row 0 is normalized by a quarter of its ball mass."""
    good = assemble(space, r)
    bm = good.ball_mass.copy()
    bm[0] /= 4.0
    return AveragingOperator(r, good.matrix.indptr, good.matrix.indices, space.weights, bm)
