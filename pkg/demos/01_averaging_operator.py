"""
Averaging over closed balls
===========================

Build the ball-averaging operator on a three-point line, apply it, and
look at its norms and the two-term oscillation bound.
"""
import numpy as np

from avgcompact import MetricMeasureSpace, apply, assemble, compose_apply, operator_norm, oscillation_bound

# Three unit masses at 0, 1, 2.
space = MetricMeasureSpace(coords=[[0.0], [1.0], [2.0]])
op = assemble(space, 1.0)

# Each row averages over the closed ball of radius 1: the end points see two
# points, the middle one sees all three.
print("dense operator:\n", op.matrix.toarray())

f = np.array([1.0, 0.0, 0.0])
print("A f        =", apply(op, f))
print("A (A f)    =", compose_apply(space, 1.0, 1.0, f))
print("A 1        =", apply(op, np.ones(3)))

# The sup-norm of A is always 1; the L^1 norm is a column sum and can exceed 1.
print("||A||_inf  =", operator_norm(space, op, np.inf))
print("||A||_1    =", operator_norm(space, op, 1))

# The oscillation between two points splits into an inverse-mass term and a
# symmetric-difference term.  Here the balls around 0 and 1 are nested, so
# only the first term is active and the bound is attained.
o = oscillation_bound(space, op, f, 0, 1)
print(f"|A f(0) - A f(1)| = {o.actual:.6f} <= {o.bound:.6f}"
      f"  (inverse-mass {o.term_inverse_gap:.6f}, sym-diff {o.term_symdiff:.6f})")
