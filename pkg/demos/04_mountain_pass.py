"""A saddle between the two pure phases.

Starting from the mollified p=1 sweepout, a string of 16 fields joining
u=-1 to u=+1 is relaxed by gradient steps and redistributed at equal
arclength. The highest node is refined into a critical point whose Morse
index is one. Its energy sits well below the sharp-interface sweepout
maximum at this eps.
"""
import numpy as np

from fraclab import minmax as mm
from fraclab.allen_cahn import ACParams
from fraclab.manifold import FlatTorus, GridField, GridSpec

T = FlatTorus([1.0])
G = GridSpec([512])
p = ACParams(0.5, 0.05)
one = GridField(T, G, np.ones(512))
rep = mm.mountain_pass(one.with_values(-one.values), one, p, nodes=16)
hist = rep.path_max_history
print(f"path max: {hist[0]:.4f} -> {hist[-1]:.4f} over {len(hist) - 1} sweeps")
print(f"saddle energy {rep.saddle_energy:.4f}, residual {rep.residual:.1e}, index {rep.index}")
print(f"lowest Hessian eigenvalues {np.round(rep.eigenvalues[:3], 4)}")
sweep = mm.sweepout_max_energy(T, G, 1, 0.5, 200, 0)
print(f"p=1 sweepout max (sharp interfaces): {sweep.max_energy:.4f}")
v = rep.saddle.values
print(f"saddle has {np.sum(np.diff(np.sign(np.r_[v, v[:1]])) != 0)} sign changes, range [{v.min():.3f}, {v.max():.3f}]")
