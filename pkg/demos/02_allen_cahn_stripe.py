"""Diffuse interfaces: a stripe on the flat circle.

A tanh profile around two interfaces is driven to a critical point of
the fractional Allen-Cahn energy by Newton iterations. As eps shrinks
the energy approaches the s-perimeter of the stripe, slowly, because
the fractional layer has algebraic tails. The one-dimensional layer
solution and the Morse spectrum of the critical point are shown too.
"""
import numpy as np

from fraclab import allen_cahn as ac
from fraclab.manifold import FlatTorus, GridField, GridSpec, SetIndicator, Stripe
from fraclab.perimeter import per_s

T = FlatTorus([1.0])
G = GridSpec([2048])
s = 0.5
x = np.arange(2048) / 2048
E = SetIndicator.from_shape(T, G, Stripe(0, 0.25, 0.75))
print(f"s-perimeter of the stripe: {per_s(E, s):.6f}")

d = np.minimum(np.abs(x - 0.25), np.abs(x - 0.75))
signed = np.where((x > 0.25) & (x < 0.75), d, -d)
for eps in (0.08, 0.04, 0.02, 0.01):
    p = ac.ACParams(s, eps)
    sol = ac.newton_solve(GridField(T, G, np.tanh(signed / eps)), p)
    e = ac.energy(sol.u, p)
    print(f"eps={eps:<5g} residual={sol.residual_norm:.1e} Sobolev={e.sobolev:.4f} potential={e.potential:.4f} "
          f"total={e.total:.4f}")

p = ac.ACParams(s, 0.05)
sol = ac.newton_solve(GridField(T, GridSpec([512]), np.tanh(signed[::4] / 0.05)), p)
spec = ac.morse_spectrum(sol.u, p, k_max=6)
print(f"\nMorse spectrum at eps=0.05: index {spec.index}, lowest eigenvalues {np.round(spec.eigenvalues[:4], 4)}")
print(f"index of u=0: {ac.morse_index(GridField(T, GridSpec([512]), np.zeros(512)), p, k_max=20)} "
      f"(mode count {ac.constant_state_index(T, GridSpec([512]), p)})")

lay = ac.layer_1d(s, half_length=20.0, n_points=4096)
print(f"\nLayer solution on [-20, 20]: residual {lay.residual_sup:.1e}, oddness {lay.oddness:.1e}")
for xv in (-10, -2, 0, 2, 10):
    i = np.argmin(np.abs(lay.x - xv))
    print(f"  v({lay.x[i]:+.2f}) = {lay.v[i]:+.6f}")
