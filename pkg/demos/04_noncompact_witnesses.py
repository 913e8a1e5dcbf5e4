"""
Separated witnesses on an unbounded-looking space
=================================================

Place centers 4s apart and take normalized indicators of the 2s-balls around
them.  Their averages keep a plateau on the s-balls and vanish beyond 3s, so
any two of them stay a fixed distance apart.  However many centers fit, no
finite net of small radius can cover them.
"""
from avgcompact import grid_space, l1_witnesses, linf_witnesses, verify_separation
from avgcompact.counterexample import plateau_check, plateau_contribution

space = grid_space(100)
s = 1.0

fam = l1_witnesses(space, s)
print("centers:", fam.centers)
print("c = min mu(B(x, s)) / mu(B(x, 2s)) =", fam.c_bound)

chk = plateau_check(space, fam)
print(f"plateau error {chk.plateau_error:.1e}, vanishing error {chk.vanish_error:.1e}")

got, expected = plateau_contribution(space, fam, 3, 7)
print(f"mass of |A f_3 - A f_7| on B(x_3, s): {got:.6f} (expected {expected:.6f})")

for witnesses in (fam, linf_witnesses(space, s)):
    sep = verify_separation(space, witnesses)
    print(f"{witnesses.mode}: min pairwise distance {sep.min_pairwise:.6f} >= {sep.bound} -> {sep.passed}")
