"""
Doubling constants and regularity moduli
========================================

Compare a coarse unit grid with a finely sampled interval.  On the coarse
grid ball masses jump when the radius crosses an integer, so the annulus
modulus never gets small; on the fine grid it shrinks with delta.
"""
from avgcompact import grid_space, prop32_report, regularity_report, star_delta_for

coarse = grid_space(100)
h = 1 / 64
fine = grid_space(10, h, weight=h)

for name, space in [("unit grid 0..100", coarse), ("[0, 10], spacing 1/64", fine)]:
    rep = regularity_report(space, 1.0, resolution=8)
    print(f"\n{name}: gamma(1) = {rep.gamma:.4f}, min ball mass = {rep.inf_ball:.4f}")
    for star, sym in zip(rep.star_modulus, rep.symdiff_modulus):
        print(f"  delta={star.delta:5.3f}  annulus {star.value:8.4f}  sym-diff {sym.value:8.4f}")

    # smallest grid delta whose annulus modulus is below 0.5, if any
    choice = star_delta_for(space, 1.0, 0.5)
    print("  delta with annulus modulus < 0.5:", None if choice is None else round(choice.delta, 5))

# A bounded set is covered by finitely many balls, and its ball masses stay
# bounded below: the ingredients of total boundedness.
net = prop32_report(coarse, coarse.all(), 1.0)
print(f"\nnet size {net.net_size}, min ball mass {net.inf_ball_on_E}, doubling on E {net.doubling_on_E:.4f}")
