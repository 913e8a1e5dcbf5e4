import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from spaces import random_space
from avgcompact.operator import (
    apply,
    as_function,
    assemble,
    compose_apply,
    norm_p,
    operator_norm,
    oscillation_bound,
    parse_p,
    write_triplets,
)
from avgcompact.regularity import doubling_constant
from avgcompact.space import MetricMeasureSpace, ball


def test_constants_fixed_example(s3):
    op = assemble(s3, 1)
    assert apply(op, [1, 1, 1]) == pytest.approx([1, 1, 1], abs=1e-12)


def test_row_formula_examples(s3):
    op = assemble(s3, 1)
    assert apply(op, [1, 0, 0]) == pytest.approx([1 / 2, 1 / 3, 0], abs=1e-15)
    assert apply(op, [0, 0, 1]) == pytest.approx([0, 1 / 3, 1 / 2], abs=1e-15)
    assert apply(op, [0, 0, 0]).tolist() == [0, 0, 0]


def test_indicator_of_double_ball_is_one_on_inner_ball(grid101):
    f = ball(grid101, 50, 2).indicator(grid101.n)
    af = apply(assemble(grid101, 1), f)
    assert af[ball(grid101, 50, 1).members] == pytest.approx(1.0, abs=1e-12)


def test_rows_are_balls(rng):
    sp = random_space(rng, n=20)
    op = assemble(sp, 1.3)
    for i in range(sp.n):
        b = ball(sp, i, 1.3)
        assert op.members(i).tolist() == b.tolist()
        assert op.inv_mass[i] * b.mass == pytest.approx(1.0, abs=1e-12)


def test_rejects_nonpositive_radius(s3):
    with pytest.raises(ValueError):
        assemble(s3, 0)


def test_dimension_mismatch(s3):
    with pytest.raises(ValueError):
        apply(assemble(s3, 1), [1.0, 2.0])
    with pytest.raises(ValueError):
        as_function(s3, [1.0, np.nan, 0.0])


def test_operator_is_read_only(s3):
    op = assemble(s3, 1)
    with pytest.raises(ValueError):
        op.matrix.data[0] = 3.0


def test_linearity(rng):
    sp = random_space(rng, n=40)
    op = assemble(sp, 1.0)
    for _ in range(20):
        f, g = rng.standard_normal((2, sp.n))
        a, b = rng.standard_normal(2)
        lhs = apply(op, a * f + b * g)
        rhs = a * apply(op, f) + b * apply(op, g)
        assert np.allclose(lhs, rhs, rtol=0, atol=1e-10)


def test_compose_examples(s3):
    assert compose_apply(s3, 1, 1, [1, 1, 1]) == pytest.approx([1, 1, 1], abs=1e-12)
    assert compose_apply(s3, 1, 1, [1, 0, 0]) == pytest.approx([5 / 12, 5 / 18, 1 / 6], abs=1e-15)


def test_compose_with_large_outer_radius_is_mean(rng):
    sp = random_space(rng, n=15)
    f = rng.standard_normal(sp.n)
    ar = apply(assemble(sp, 1.0), f)
    expected = np.sum(sp.weights * ar) / sp.total_mass
    out = compose_apply(sp, sp.diameter + 1, 1.0, f)
    assert out == pytest.approx(np.full(sp.n, expected), abs=1e-12)


def test_compose_equals_two_applications(rng):
    sp = random_space(rng, n=30)
    f = rng.standard_normal(sp.n)
    two = apply(assemble(sp, 0.7), apply(assemble(sp, 1.4), f))
    assert np.array_equal(compose_apply(sp, 0.7, 1.4, f), two)


@pytest.mark.parametrize(
    "f, p, expected",
    [([1, 0, 0], 1, 1.0), ([3, -4, 0], math.inf, 4.0), ([1, 1, 1], 2, math.sqrt(3)), ([3, -4, 0], "inf", 4.0)],
)
def test_norm_examples(s3, f, p, expected):
    assert norm_p(s3, f, p) == pytest.approx(expected, rel=1e-15)


def test_norm_rejects_small_p(s3):
    with pytest.raises(ValueError):
        norm_p(s3, [1, 0, 0], 0.5)
    with pytest.raises(ValueError):
        parse_p("half")


def test_weighted_norm_matches_oracle(rng):
    sp = random_space(rng, n=25)
    for _ in range(20):
        f = rng.standard_normal(sp.n)
        p = float(rng.choice([1.0, 1.5, 2.0, 3.7, math.inf]))
        assert norm_p(sp, f, p) == pytest.approx(oracles.lp_norm(sp.weights, f, p), rel=1e-12)


def test_operator_norm_examples(s3):
    op = assemble(s3, 1)
    assert operator_norm(s3, op, math.inf) == pytest.approx(1.0, abs=1e-15)
    assert operator_norm(s3, op, 1) == pytest.approx(4 / 3, rel=1e-15)
    single = MetricMeasureSpace(coords=[[0.0]], weights=[3.0])
    op1 = assemble(single, 2.0)
    assert operator_norm(single, op1, 1) == pytest.approx(1.0, abs=1e-15)
    assert operator_norm(single, op1, "inf") == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        operator_norm(s3, op, 2)


def test_operator_norm_1_is_attained(rng):
    # the column formula is achieved by a point mass f = e_j / mu_j
    sp = random_space(rng, n=20)
    op = assemble(sp, 1.5)
    dense = oracles.dense_operator(sp.distance_matrix(), sp.weights, 1.5)
    best = 0.0
    for j in range(sp.n):
        f = np.zeros(sp.n)
        f[j] = 1 / sp.weights[j]
        best = max(best, oracles.lp_norm(sp.weights, dense @ f, 1))
    assert operator_norm(sp, op, 1) == pytest.approx(best, rel=1e-12)


def test_l1_operator_norm_bounded_by_doubling(rng):
    for _ in range(40):
        sp = random_space(rng)
        r = float(rng.uniform(0.1, 3))
        assert operator_norm(sp, assemble(sp, r), 1) <= doubling_constant(sp, r).gamma * (1 + 1e-12)


def test_oscillation_examples(s3):
    op = assemble(s3, 1)
    o = oscillation_bound(s3, op, [1, 0, 0], 0, 0)
    assert (o.actual, o.bound) == (0.0, 0.0)
    o = oscillation_bound(s3, op, [1, 1, 1], 0, 2)
    assert o.actual == pytest.approx(0.0, abs=1e-15)
    o = oscillation_bound(s3, op, [1, 0, 0], 0, 1)
    assert o.actual == pytest.approx(1 / 6, rel=1e-14)
    assert o.bound == pytest.approx(1 / 6, rel=1e-14)
    assert o.term_symdiff == 0.0


def test_oscillation_inequality_everywhere(rng):
    for _ in range(10):
        sp = random_space(rng, n=12)
        t = float(rng.uniform(0.2, 4))
        op = assemble(sp, t)
        for _ in range(100):
            f = rng.standard_normal(sp.n)
            for x in range(sp.n):
                for y in range(sp.n):
                    assert oscillation_bound(sp, op, f, x, y).holds


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), r=st.floats(0.05, 6), c=st.floats(-1e3, 1e3))
def test_constants_and_positivity(seed, r, c):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, integer=True)
    op = assemble(sp, r)
    assert np.allclose(apply(op, np.full(sp.n, c)), c, rtol=1e-12, atol=1e-12)
    f = rng.uniform(0, 5, sp.n)
    assert np.all(apply(op, f) >= 0)
    g = rng.standard_normal(sp.n)
    assert np.abs(apply(op, g)).max() <= np.abs(g).max() * (1 + 1e-12)
    assert operator_norm(sp, op, math.inf) == pytest.approx(1.0, abs=1e-12)


def test_sparse_matches_dense_oracle(rng):
    for _ in range(20):
        sp = random_space(rng, n=int(rng.integers(1, 120)), integer=bool(rng.integers(2)))
        r = float(rng.uniform(0.1, 3))
        dense = oracles.dense_operator(sp.distance_matrix(), sp.weights, r)
        f = rng.standard_normal(sp.n)
        assert np.abs(apply(assemble(sp, r), f) - dense @ f).max() <= 1e-12


def test_apply_matches_loop_oracle(rng):
    sp = random_space(rng, n=15)
    d = oracles.dist_matrix(points=sp.coords)
    f = rng.standard_normal(sp.n)
    assert apply(assemble(sp, 1.1), f) == pytest.approx(oracles.average(d, sp.weights, 1.1, f), abs=1e-12)


def test_family_application_matches_rowwise(rng):
    sp = random_space(rng, n=20)
    op = assemble(sp, 1.0)
    F = rng.standard_normal((5, sp.n))
    out = apply(op, F)
    for k in range(5):
        assert np.array_equal(out[k], apply(op, F[k]))


def test_holder(rng):
    sp = random_space(rng, n=30)
    for _ in range(200):
        p = 1 + min(float(rng.exponential()), 20.0)
        q = p / (p - 1)
        f, g = rng.standard_normal((2, sp.n))
        assert np.sum(sp.weights * np.abs(f * g)) <= norm_p(sp, f, p) * norm_p(sp, g, q) * (1 + 1e-10)


def test_triplet_export(s3):
    buf = io.StringIO()
    write_triplets(assemble(s3, 1), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "0 0 0.5"
    assert lines[2] == "1 0 0.33333333333333331"
    assert len(lines) == 7
    for line in lines:
        i, j, v = line.split()
        assert float(v) == pytest.approx(1 / len(ball(s3, int(i), 1)), rel=1e-16)
