"""Polynomial-sign sweepouts and the growth of their max energy.

For each p a disjoint ball cover is lined up along a virtual axis and
every unit vector a in R^(p+1) gives the sign field of a degree-p
polynomial. The family is odd, and its maximal s-perimeter grows like
p^(s/n). The fitted exponent is printed for a few seeds of the cover.
"""
import numpy as np

from fraclab import minmax as mm
from fraclab.manifold import FlatTorus, GridSpec

s = 0.5
for torus, grid in ((FlatTorus([1.0, 1.0]), GridSpec([128, 128])), (FlatTorus([1.0]), GridSpec([128]))):
    n = torus.dim
    cover = mm.ball_cover(torus, 4, seed=0)
    lo, hi = cover.count_bounds()
    print(f"T^{n}, p=4: {cover.count} balls of radius {cover.radius:.4f} (volume bounds {lo:.1f} .. {hi:.1f})")
    a = mm.sphere_points(4, 1, 0)[0]
    up = mm.sweepout_member(torus, grid, cover, a).u
    um = mm.sweepout_member(torus, grid, cover, -a).u
    print(f"  oddness check: max |u_a + u_-a| = {np.max(np.abs(up.values + um.values))}")
    for seed in range(3):
        rep = mm.scaling_experiment(torus, grid, range(1, 9), s, 200, seed)
        scaled = ", ".join(f"{r.scaled:.3f}" for r in rep.rows)
        print(f"  seed {seed}: slope {rep.slope:.3f} +- {rep.stderr:.3f} (target {rep.target}); (1-s) max = {scaled}")
