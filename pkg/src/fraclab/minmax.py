"""Polynomial-sign sweepouts, energy scaling and saddle searches.

A cover of the torus by ``B_{3r}(q_i)`` (with the ``B_r(q_i)`` disjoint)
is lined up along a virtual axis: patch ``Q_i = B_{3r}(q_i)`` minus the
earlier balls is translated to the Euclidean ball of radius ``3r``
centred at abscissa ``3r (2i + 1)``. For ``a`` on the unit sphere S^p the
member ``u_a`` is the sign of ``P_a(z) = a_0 + a_1 z + ... + a_p z^p``
evaluated at the virtual abscissa. The family is odd: ``u_{-a} = -u_a``.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma
from scipy.stats import norm, qmc

from .allen_cahn import ACParams, energy, gradient_flow, morse_spectrum, newton_solve, residual
from .fractional_ops import integral_symbol, spectral_symbol
from .manifold import (FlatTorus, GridField, GridSpec, SetIndicator, apply_multiplier, coordinates, heat_smooth,
                       min_image, to_spectral)
from .perimeter import per_s


# ------------------------------------------------------------- cover

@dataclass
class BallCover:
    torus: FlatTorus
    radius: float
    centers: np.ndarray
    p: int
    seed: int

    @property
    def count(self) -> int:
        return len(self.centers)

    def count_bounds(self) -> tuple:
        """Volume-comparison bounds on the number of balls."""
        n = self.torus.dim
        unit = np.pi ** (n / 2) / gamma(n / 2 + 1)
        vol = self.torus.volume
        return vol / (unit * (3 * self.radius) ** n), vol / (unit * self.radius**n)


def default_radius(torus: FlatTorus, p: int) -> float:
    return float(torus.L.min() / 6 * p ** (-1 / torus.dim))


def _verify_cover(cover: BallCover, check_points: int) -> bool:
    torus = cover.torus
    grid = GridSpec([check_points] * torus.dim)
    X = np.stack([c.ravel() for c in coordinates(torus, grid)], axis=1)
    tree = cKDTree(np.mod(cover.centers, torus.L), boxsize=torus.L)
    d, _ = tree.query(np.mod(X, torus.L))
    return bool(np.all(d < 3 * cover.radius))


def ball_cover(torus: FlatTorus, p: int, seed: int = 0, radius: float | None = None, check_points: int = 64,
               density: int = 2) -> BallCover:
    """Greedy maximal family of disjoint r-balls from a shuffled candidate lattice."""
    if p < 1:
        raise ValueError("p must be at least 1")
    r = default_radius(torus, p) if radius is None else float(radius)
    if r > torus.L.min() / 6 * (1 + 1e-12):
        raise ValueError("radius too large for the torus (p too small)")
    rng = np.random.default_rng(seed)
    for attempt in range(4):
        step = r / (density * 2**attempt)
        axes = [np.arange(0, L, step)[: int(np.floor(L / step + 1e-9))] for L in torus.L]
        cand = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        cand = cand[rng.permutation(len(cand))]
        centers = []
        for c in cand:
            if centers:
                d = np.sqrt(np.sum(min_image(torus, np.asarray(centers) - c) ** 2, axis=1))
                if np.any(d < 2 * r):
                    continue
            centers.append(c)
        cover = BallCover(torus, r, np.asarray(centers), p, seed)
        if _verify_cover(cover, check_points):
            return cover
    raise RuntimeError("cover verification failed")


# ----------------------------------------------------------- members

@dataclass
class VirtualAxis:
    """Virtual abscissa of every grid point under the patch identification."""

    cover: BallCover
    grid: GridSpec
    abscissa: np.ndarray
    patch: np.ndarray


def virtual_axis(cover: BallCover, grid: GridSpec) -> VirtualAxis:
    torus = cover.torus
    X = np.stack(coordinates(torus, grid), axis=-1)
    r3 = 3 * cover.radius
    patch = np.full(grid.shape, -1)
    absc = np.zeros(grid.shape)
    for i, q in enumerate(cover.centers):
        d = min_image(torus, X - q)
        inside = (np.sum(d**2, axis=-1) < r3**2) & (patch < 0)
        patch[inside] = i
        absc[inside] = r3 * (2 * i + 1) + d[..., 0][inside]
    if np.any(patch < 0):
        raise RuntimeError("grid point outside every patch")
    return VirtualAxis(cover, grid, absc, patch)


def real_roots(a) -> np.ndarray:
    """Real roots of ``a_0 + a_1 z + ... + a_p z^p`` (companion matrix, Newton polish)."""
    a = np.asarray(a, float)
    nz = np.flatnonzero(a)
    if nz.size == 0:
        raise ValueError("all coefficients vanish")
    deg = nz[-1]
    if deg == 0:
        return np.zeros(0)
    coeffs = a[: deg + 1][::-1]
    z = np.roots(coeffs)
    scale = 1 + np.abs(z)
    z = np.sort(z[np.abs(z.imag) <= 1e-7 * scale].real)
    dp = np.polyder(coeffs)
    for _ in range(3):
        d = np.polyval(dp, z)
        ok = d != 0
        z[ok] = z[ok] - np.polyval(coeffs, z[ok]) / d[ok]
    return np.sort(z)


def member_sign(a, abscissa: np.ndarray) -> np.ndarray:
    """``sign P_a`` at the abscissae, with the convention ``sign(0) = +1`` on each factor."""
    a = np.asarray(a, float)
    deg = np.flatnonzero(a)[-1]
    sgn = np.full(abscissa.shape, np.sign(a[deg]))
    for rho in real_roots(a):
        sgn = np.where(abscissa >= rho, sgn, -sgn)
    return sgn


@dataclass
class SweepoutMember:
    a: np.ndarray
    u: GridField
    energy: float | None = None


def sweepout_member(torus: FlatTorus, grid: GridSpec, cover: BallCover, a, axis: VirtualAxis | None = None
                    ) -> SweepoutMember:
    a = np.asarray(a, float)
    if abs(np.linalg.norm(a) - 1) > 1e-9:
        raise ValueError("coefficient vector must have unit norm")
    axis = virtual_axis(cover, grid) if axis is None else axis
    return SweepoutMember(a, GridField(torus, grid, member_sign(a, axis.abscissa)))


def sphere_points(p: int, n: int, seed: int) -> np.ndarray:
    """Quasi-uniform points on S^p (scrambled Sobol through the normal CDF)."""
    eng = qmc.Sobol(d=p + 1, scramble=True, seed=np.random.default_rng(seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        q = eng.random(n)
    g = norm.ppf(np.clip(q, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass
class ScalingRow:
    p: int
    N: int
    r: float
    max_energy: float
    scaled: float
    argmax: np.ndarray = field(repr=False, default=None)


def _sharp_energy_fn(torus, grid, s):
    sym = integral_symbol(torus, grid, s, "cell")

    def f(u: GridField):
        return 0.5 * float(np.sum(sym * np.abs(to_spectral(u).coefficients) ** 2))

    return f


def sweepout_max_energy(torus: FlatTorus, grid: GridSpec, p: int, s: float, sphere_samples: int = 200, seed: int = 0,
                        epsilon: float | None = None, cover: BallCover | None = None) -> ScalingRow:
    """Maximum member energy over a quasi-uniform sample of S^p.

    Sharp-interface mode (``epsilon=None``) uses the s-perimeter of the
    member; otherwise the Allen-Cahn energy, which agrees on sign fields.
    """
    if sphere_samples < 10 * (p + 1):
        raise ValueError("need at least 10 (p + 1) sphere samples")
    cover = ball_cover(torus, p, seed) if cover is None else cover
    axis = virtual_axis(cover, grid)
    if epsilon is None:
        en = _sharp_energy_fn(torus, grid, s)
    else:
        params = ACParams(s, epsilon)

        def en(u):
            return energy(u, params, quadrature="cell").total

    best, arg = -np.inf, None
    for a in sphere_points(p, sphere_samples, seed):
        e = en(GridField(torus, grid, member_sign(a, axis.abscissa)))
        if e > best or (e == best and tuple(a) < tuple(arg)):
            best, arg = e, a
    return ScalingRow(p, cover.count, cover.radius, best, (1 - s) * best, arg)


@dataclass
class ScalingReport:
    rows: list
    slope: float
    stderr: float
    target: float

    def write(self, csv_path=None, json_path=None) -> None:
        if csv_path is not None:
            with open(csv_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["p", "N", "r", "max_energy", "scaled"])
                for r in self.rows:
                    w.writerow([r.p, r.N, f"{r.r:.17g}", f"{r.max_energy:.17g}", f"{r.scaled:.17g}"])
        if json_path is not None:
            with open(json_path, "w") as fh:
                json.dump({"slope": self.slope, "stderr": self.stderr, "target": self.target}, fh, indent=2,
                          sort_keys=True)


def fit_loglog(x, y) -> tuple:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.stack([np.ones_like(lx), lx], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    r = ly - A @ coef
    cov = np.linalg.inv(A.T @ A) * (r @ r) / max(1, lx.size - 2)
    return float(coef[1]), float(np.sqrt(cov[1, 1]))


def scaling_experiment(torus: FlatTorus, grid: GridSpec, p_range, s: float, sphere_samples: int = 200, seed: int = 0,
                       epsilon: float | None = None) -> ScalingReport:
    """Fit ``log((1-s) max energy)`` against ``log p``; target slope ``s/n``."""
    p_range = list(p_range)
    if len(p_range) < 4:
        raise ValueError("need at least four values of p")
    if min(p_range) < 1 or max(p_range) > 12:
        raise ValueError("p must lie in [1, 12]")
    rows = [sweepout_max_energy(torus, grid, p, s, sphere_samples, seed, epsilon) for p in p_range]
    slope, err = fit_loglog([r.p for r in rows], [r.scaled for r in rows])
    return ScalingReport(rows, slope, err, s / torus.dim)


# ------------------------------------------------------------ Borsuk

@dataclass
class BorsukWitness:
    a: np.ndarray
    max_average: float
    ball_energies: np.ndarray
    c0_fit: float


def borsuk_probe(torus: FlatTorus, grid: GridSpec, cover: BallCover, p: int, s: float, sphere_samples: int = 200,
                 seed: int = 0) -> BorsukWitness:
    """Member whose averages over the first ``p`` cover balls are jointly smallest.

    Also reports the localized s-perimeter in each ``B_r`` and the fitted
    ``c0 = min_i (1-s) Per_s|_{B_i} / r^{n-s}``.
    """
    from .perimeter import per_s_localized

    if cover.count < p:
        raise ValueError("cover has fewer than p balls")
    axis = virtual_axis(cover, grid)
    X = np.stack(coordinates(torus, grid), axis=-1)
    balls = []
    for q in cover.centers[:p]:
        d = min_image(torus, X - q)
        balls.append(np.sum(d**2, axis=-1) < cover.radius**2)
    best, arg = np.inf, None
    for a in sphere_points(p, sphere_samples, seed):
        u = member_sign(a, axis.abscissa)
        m = max(abs(float(u[b].mean())) for b in balls)
        if m < best:
            best, arg = m, a
    u = GridField(torus, grid, member_sign(arg, axis.abscissa))
    E = SetIndicator.from_field(u)
    en = np.array([per_s_localized(E, b, s) for b in balls])
    n = torus.dim
    c0 = float(np.min((1 - s) * en / cover.radius ** (n - s)))
    return BorsukWitness(arg, best, en, c0)


# ------------------------------------------------------- mountain pass

@dataclass
class MountainPassReport:
    path_max_history: list
    initial_max: float
    saddle: object
    saddle_energy: float
    residual: float
    index: int
    eigenvalues: np.ndarray
    nodes: list = field(repr=False, default_factory=list)


def sweep_path(torus: FlatTorus, grid: GridSpec, nodes: int, epsilon: float, seed: int = 0) -> list:
    """Mollified p = 1 sweepout members from ``-1`` to ``+1``."""
    cover = ball_cover(torus, 1, seed)
    axis = virtual_axis(cover, grid)
    out = []
    for th in np.linspace(np.pi, 0, nodes):
        a = np.array([np.cos(th), np.sin(th)])
        if abs(np.sin(th)) < 1e-12:
            a = np.array([np.sign(np.cos(th)), 0.0])
        u = GridField(torus, grid, member_sign(a, axis.abscissa))
        out.append(heat_smooth(u, epsilon**2))
    return out


def _reparametrize(path):
    V = np.stack([u.values.ravel() for u in path])
    seg = np.sqrt(np.sum(np.diff(V, axis=0) ** 2, axis=1))
    arc = np.concatenate([[0], np.cumsum(seg)])
    if arc[-1] == 0:
        raise RuntimeError("path collapsed")
    target = np.linspace(0, arc[-1], len(path))
    out = [path[0]]
    for t in target[1:-1]:
        j = min(np.searchsorted(arc, t) - 1, len(path) - 2)
        j = max(j, 0)
        lam = (t - arc[j]) / (arc[j + 1] - arc[j]) if arc[j + 1] > arc[j] else 0.0
        out.append(path[0].with_values(((1 - lam) * V[j] + lam * V[j + 1]).reshape(path[0].grid.shape)))
    out.append(path[-1])
    return out


def mountain_pass(u_minus: GridField, u_plus: GridField, params: ACParams, nodes: int = 16, sweeps: int = 200,
                  steps_per_sweep: int = 5, initial_path=None, seed: int = 0, tol_sweep: float = 1e-7
                  ) -> MountainPassReport:
    """String-method search for a saddle between two local minimizers.

    Interior nodes take a few gradient-flow steps per sweep and are then
    redistributed at equal L^2 arclength. The highest node is refined by
    a climbing iteration (descent orthogonal to the path tangent, ascent
    along it) and finished with Newton iterations on the residual.
    """
    if nodes < 16:
        raise ValueError("need at least 16 nodes")
    for u in (u_minus, u_plus):
        if float(np.max(np.abs(residual(u, params).values))) > params.tol_residual:
            raise ValueError("endpoints must be converged critical points")
    if initial_path is None:
        initial_path = sweep_path(u_minus.torus, u_minus.grid, nodes, params.epsilon, seed)
        initial_path[0], initial_path[-1] = u_minus, u_plus
    path = list(initial_path)
    E = [energy(u, params).total for u in path]
    init_max = max(E)
    hist = [init_max]
    flow_params = ACParams(params.s, params.epsilon, params.dt, tol_residual=0.0)
    for _ in range(sweeps):
        for k in range(1, nodes - 1):
            path[k] = gradient_flow(path[k], flow_params, max_iters=steps_per_sweep).u
        path = _reparametrize(path)
        E = [energy(u, params).total for u in path]
        hist.append(max(E))
        if abs(hist[-1] - hist[-2]) < tol_sweep * max(1.0, abs(hist[-1])):
            break
    k = int(np.argmax(E))
    v = path[k].values.copy()
    c = params.coupling
    dt = 0.45 / c
    sym = spectral_symbol(u_minus.torus, u_minus.grid, params.s)
    tau = path[min(k + 1, nodes - 1)].values - path[max(k - 1, 0)].values
    tau = tau / np.linalg.norm(tau)
    for _ in range(200):
        # semi-implicit in the fractional term; the tangential component is reversed
        g = apply_multiplier(v, sym) + c * (v**3 - v)
        rhs = v - dt * c * (v**3 - v) + 2 * dt * np.sum(g * tau) * tau
        v = apply_multiplier(rhs, 1 / (1 + dt * sym))
    sol = newton_solve(u_minus.with_values(v), params, tol=params.tol_residual)
    spec = morse_spectrum(sol.u, params, k_max=8)
    return MountainPassReport(hist, init_max, sol.u, sol.energy, sol.residual_norm, spec.index, spec.eigenvalues, path)


# --------------------------------------------------------- eps limit

@dataclass
class EpsRow:
    epsilon: float
    sobolev: float
    potential: float
    per_s_threshold: float
    drift: float
    residual: float
    converged: bool


def interface_points(u: GridField) -> np.ndarray:
    """Midpoints between neighbouring grid points where the sign changes."""
    X = np.stack(coordinates(u.torus, u.grid), axis=-1)
    pts = []
    h = u.h
    sgn = u.values > 0
    for ax in range(u.torus.dim):
        ch = sgn != np.roll(sgn, -1, axis=ax)
        p = X[ch].copy()
        p[:, ax] += h[ax] / 2
        pts.append(p)
    return np.concatenate(pts) if pts else np.zeros((0, u.torus.dim))


def hausdorff(torus: FlatTorus, A: np.ndarray, B: np.ndarray) -> float:
    if len(A) == 0 or len(B) == 0:
        return float("inf") if len(A) + len(B) else 0.0
    ta = cKDTree(np.mod(A, torus.L), boxsize=torus.L)
    tb = cKDTree(np.mod(B, torus.L), boxsize=torus.L)
    return float(max(tb.query(np.mod(A, torus.L))[0].max(), ta.query(np.mod(B, torus.L))[0].max()))


def epsilon_limit_experiment(torus: FlatTorus, grid: GridSpec, p: int, s: float, eps_list, seed: int = 0,
                             sphere_samples: int | None = None, flow_steps: int = 10) -> list:
    """Critical points seeded by the sweepout argmax member for decreasing eps.

    The member is mollified at scale eps, relaxed by a few gradient-flow
    steps and then driven to the nearby critical point by Newton
    iterations; min-max critical points are saddles, so a long descent
    would leave them. If Newton fails from the member, the previous
    converged solution is used as a continuation start. Rows that still
    fail are returned with ``converged=False``.
    """
    eps_list = list(eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be decreasing")
    if min(eps_list) < 2 * float(np.max(torus.L / np.asarray(grid.shape))):
        raise ValueError("smallest eps must be at least twice the grid spacing")
    samples = 10 * (p + 1) if sphere_samples is None else max(sphere_samples, 10 * (p + 1))
    row = sweepout_max_energy(torus, grid, p, s, samples, seed)
    cover = ball_cover(torus, p, seed)
    member = sweepout_member(torus, grid, cover, row.argmax)
    rows = []
    prev_pts, prev_sol = None, None
    for eps in eps_list:
        params = ACParams(s, eps)
        u0 = heat_smooth(member.u, eps**2)
        if flow_steps:
            u0 = gradient_flow(u0, ACParams(s, eps, tol_residual=0.0), max_iters=flow_steps).u
        sol = newton_solve(u0, params)
        if not sol.converged and prev_sol is not None:
            alt = newton_solve(prev_sol, params)
            if alt.residual_norm < sol.residual_norm:
                sol = alt
        eb = energy(sol.u, params)
        thr = SetIndicator.from_field(sol.u)
        pts = interface_points(sol.u)
        drift = hausdorff(torus, prev_pts, pts) if prev_pts is not None else 0.0
        prev_pts = pts
        if sol.converged:
            prev_sol = sol.u
        rows.append(EpsRow(eps, eb.sobolev, eb.potential, per_s(thr, s), drift, sol.residual_norm, sol.converged))
    return rows
