"""Fractional Allen-Cahn energy, its critical points and their stability.

    E(u) = (1/4) iint (u(x) - u(y))^2 K_s + eps^{-s} int W(u),   W(u) = (1 - u^2)^2 / 4

The Sobolev part equals ``(1/2) sum_k lambda_k^{s/2} |u_k|^2``; the
first variation is ``(-Delta)^{s/2} u + eps^{-s} W'(u)`` and the Hessian
``<xi, (-Delta)^{s/2} xi> + eps^{-s} int W''(u) xi^2``.
Energies restricted to a region use the exact pair-kernel form of the
discrete operator so that all quantities stay mutually consistent.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh, gmres

from . import kernel as kn
from .fractional_ops import pair_energy, pair_table_hat, spectral_symbol
from .manifold import (FlatTorus, GridField, GridSpec, SetIndicator, apply_multiplier, ball_mask, fft, gradient,
                       ifft_real, laplace_eigenvalues, to_spectral, write_field)


def W(u):
    return 0.25 * (1 - u**2) ** 2


def dW(u):
    return u**3 - u


def d2W(u):
    return 3 * u**2 - 1


@dataclass
class ACParams:
    s: float
    epsilon: float
    dt: float | None = None
    tol_residual: float = 1e-8
    max_iters: int = 200000

    def __post_init__(self):
        if not 0 < self.s < 1:
            raise ValueError("s must lie in (0, 1)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def coupling(self) -> float:
        return self.epsilon ** (-self.s)


@dataclass
class EnergyBreakdown:
    sobolev: float
    potential: float
    total: float


@dataclass
class ACSolution:
    u: GridField
    params: ACParams
    iterations: int
    residual_norm: float
    energy: float
    converged: bool
    energy_history: list = field(default_factory=list, repr=False)

    def save(self, path) -> None:
        """Binary field plus a JSON sidecar ``<path>.json``."""
        meta = {"s": self.params.s, "epsilon": self.params.epsilon, "iterations": self.iterations,
                "residual_norm": self.residual_norm, "energy": self.energy}
        write_field(path, self.u)
        with open(str(path) + ".json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)


def _check_resolution(u: GridField, p: ACParams):
    if p.epsilon < 2 * float(np.max(u.h)):
        raise ValueError("epsilon must be at least twice the grid spacing")


def _mask(omega, u):
    if omega is None:
        return None
    return omega.mask.astype(float) if isinstance(omega, SetIndicator) else np.asarray(omega, float)


def energy(u: GridField, params: ACParams, omega=None, quadrature: str = "spectral") -> EnergyBreakdown:
    """Energy on the torus, or relative to ``omega`` (pairs not both outside).

    ``quadrature='cell'`` evaluates the Sobolev part with cell-pair kernel
    averages, which makes the energy of a sign field equal to its
    s-perimeter.
    """
    s, c = params.s, params.coupling
    m = _mask(omega, u)
    w = u.weight
    if quadrature == "spectral" and m is None:
        sob = 0.5 * float(np.sum(spectral_symbol(u.torus, u.grid, s) * np.abs(to_spectral(u).coefficients) ** 2))
    else:
        th = pair_table_hat(u.torus, u.grid, s, quadrature)
        full = pair_energy(u.values, th, w)
        if m is None:
            sob = 0.25 * full
        else:
            out = 1 - m
            sob = 0.25 * (full - pair_energy(u.values, th, w, out, out))
    pot_density = W(u.values)
    pot = c * float(np.sum(pot_density if m is None else pot_density * m) * w)
    return EnergyBreakdown(sob, pot, sob + pot)


def residual(u: GridField, params: ACParams) -> GridField:
    """``(-Delta)^{s/2} u + eps^{-s} W'(u)``."""
    lap = apply_multiplier(u.values, spectral_symbol(u.torus, u.grid, params.s))
    return u.with_values(lap + params.coupling * dW(u.values))


def _sup(a):
    return float(np.max(np.abs(a)))


def gradient_flow(u0: GridField, params: ACParams, max_iters: int | None = None, callback=None) -> ACSolution:
    """Semi-implicit L^2 gradient flow until the sup-norm residual is below tolerance.

    ``u_k <- (u_k - dt eps^{-s} W'(u)_k) / (1 + dt lambda_k^{s/2})`` in
    Fourier space. The default step keeps ``u - dt eps^{-s} W'(u)``
    monotone on ``[-1, 1]``; the step is halved whenever the energy would
    increase.
    """
    _check_resolution(u0, params)
    c = params.coupling
    dt = params.dt if params.dt is not None else 0.45 / c
    sym = spectral_symbol(u0.torus, u0.grid, params.s)
    v = u0.values.copy()
    uf = u0.with_values(v)
    E = energy(uf, params).total
    hist = [E]
    max_iters = params.max_iters if max_iters is None else max_iters
    res = _sup(residual(uf, params).values)
    it = 0
    while res > params.tol_residual and it < max_iters:
        while True:
            vn = ifft_real(fft(v - dt * c * dW(v)) / (1 + dt * sym))
            En = energy(u0.with_values(vn), params).total
            if En <= E + 1e-14 * max(1.0, abs(E)) or dt < 1e-12:
                break
            dt *= 0.5
        v, E = vn, En
        hist.append(E)
        it += 1
        res = _sup(residual(u0.with_values(v), params).values)
        if callback is not None:
            callback(it, v, E, res)
    return ACSolution(u0.with_values(v), params, it, res, E, res <= params.tol_residual, hist)


def hessian_apply(u: GridField, params: ACParams, xi: np.ndarray) -> np.ndarray:
    sym = spectral_symbol(u.torus, u.grid, params.s)
    return apply_multiplier(xi, sym) + params.coupling * d2W(u.values) * xi


def newton_solve(u0: GridField, params: ACParams, tol: float | None = None, max_steps: int = 40) -> ACSolution:
    """Newton-Krylov iteration for a nearby critical point of any index.

    Linear systems are solved by GMRES preconditioned with
    ``(lambda^{s/2} + 2 eps^{-s})^{-1}``; steps are damped on the residual norm.
    """
    _check_resolution(u0, params)
    tol = params.tol_residual if tol is None else tol
    c = params.coupling
    sym = spectral_symbol(u0.torus, u0.grid, params.s)
    shape = u0.grid.shape
    n = u0.grid.size
    v = u0.values.copy()

    def F(a):
        return apply_multiplier(a, sym) + c * dW(a)

    r = F(v)
    it = 0
    while _sup(r) > tol and it < max_steps:
        d2 = c * d2W(v)
        J = LinearOperator((n, n), matvec=lambda x: (apply_multiplier(x.reshape(shape), sym) + d2 * x.reshape(shape)).ravel())
        M = LinearOperator((n, n), matvec=lambda x: apply_multiplier(x.reshape(shape), 1 / (sym + 2 * c)).ravel())
        dx, _ = gmres(J, -r.ravel(), M=M, rtol=1e-12, atol=0.0, restart=80, maxiter=20)
        dx = dx.reshape(shape)
        step = 1.0
        r0 = np.linalg.norm(r)
        while step > 1e-4:
            vn = v + step * dx
            rn = F(vn)
            if np.linalg.norm(rn) < r0:
                break
            step *= 0.5
        v, r = vn, rn
        it += 1
    uf = u0.with_values(v)
    res = _sup(r)
    return ACSolution(uf, params, it, res, energy(uf, params).total, res <= tol)


def second_variation_apply(u: GridField, params: ACParams, xi: GridField, omega=None) -> GridField:
    """Hessian applied to ``xi``; with ``omega`` both ends are restricted to it."""
    m = _mask(omega, u)
    x = xi.values if m is None else xi.values * m
    out = hessian_apply(u, params, x)
    return u.with_values(out if m is None else out * m)


def second_variation(u: GridField, params: ACParams, xi: GridField, omega=None) -> float:
    """Quadratic form ``Q[xi] = <xi, H xi>``."""
    m = _mask(omega, u)
    x = xi.values if m is None else xi.values * m
    return float(np.sum(x * hessian_apply(u, params, x)) * u.weight)


@dataclass
class MorseSpectrum:
    eigenvalues: np.ndarray
    index: int
    lower_bound: bool


def morse_spectrum(u: GridField, params: ACParams, omega=None, k_max: int = 20, tol_eig: float | None = None,
                   dense_limit: int = 2048) -> MorseSpectrum:
    """Lowest Hessian eigenvalues on functions supported in ``omega``.

    Small problems use a dense symmetric eigensolve; larger ones use
    Lanczos (ARPACK) for the ``k_max`` smallest eigenvalues.
    """
    tol_eig = 1e-8 * params.coupling if tol_eig is None else tol_eig
    m = _mask(omega, u)
    idx = np.flatnonzero(np.ones(u.grid.size) if m is None else m.ravel() > 0)
    n = idx.size
    shape = u.grid.shape

    def apply(x):
        full = np.zeros(u.grid.size)
        full[idx] = x
        return hessian_apply(u, params, full.reshape(shape)).ravel()[idx]

    if n <= dense_limit:
        sym = spectral_symbol(u.torus, u.grid, params.s)
        col = ifft_real(sym.astype(complex)).ravel()
        coords = np.array(np.unravel_index(idx, shape)).T
        diff = (coords[:, None, :] - coords[None, :, :]) % np.array(shape)
        Lmat = col[np.ravel_multi_index(tuple(diff.transpose(2, 0, 1)), shape)]
        H = Lmat + np.diag(params.coupling * d2W(u.values).ravel()[idx])
        ev = np.linalg.eigvalsh(0.5 * (H + H.T))
        ev = ev[: min(k_max, n)]
        lower = False
    else:
        k = min(k_max, n - 2)
        op = LinearOperator((n, n), matvec=apply, dtype=float)
        ev = np.sort(eigsh(op, k=k, which="SA", tol=1e-10, maxiter=20 * n, return_eigenvectors=False))
        lower = bool(ev[-1] < -tol_eig)
    index = int(np.sum(ev < -tol_eig))
    if n <= dense_limit:
        lower = bool(index >= k_max and ev[-1] < -tol_eig)
    if lower:
        warnings.warn("all computed eigenvalues are negative; index is a lower bound")
    return MorseSpectrum(ev, index, lower)


def morse_index(u: GridField, params: ACParams, omega=None, k_max: int = 20, tol_eig: float | None = None) -> int:
    return morse_spectrum(u, params, omega, k_max, tol_eig).index


def constant_state_index(torus: FlatTorus, grid: GridSpec, params: ACParams, value: float = 0.0) -> int:
    """Closed-form index of a constant critical point."""
    lam = laplace_eigenvalues(torus, grid)
    return int(np.sum(lam ** (params.s / 2) + params.coupling * d2W(value) < 0))


# ------------------------------------------------------------- layer

@dataclass
class LayerProfile:
    x: np.ndarray
    v: np.ndarray
    s: float
    residual_sup: float
    field: GridField

    @property
    def oddness(self) -> float:
        return float(np.max(np.abs(self.v + self.v[::-1])))


def layer_1d(s: float, half_length: float = 20.0, n_points: int = 4096, tol: float = 1e-10) -> LayerProfile:
    """Monotone heteroclinic ``(-Delta)^{s/2} v + W'(v) = 0`` (eps = 1).

    Computed on a periodic proxy of length ``2 half_length`` with
    transitions at ``0`` and ``half_length``; the restriction to
    ``[-half_length/2, half_length/2]`` is returned.
    """
    L = 2 * half_length
    torus = FlatTorus([L])
    grid = GridSpec([n_points])
    x = np.arange(n_points) * (L / n_points)
    v0 = np.tanh(L / (2 * np.pi) * np.sin(2 * np.pi * x / L))
    p = ACParams(s, 1.0, tol_residual=1e-4)
    u = GridField(torus, grid, v0)
    sol = gradient_flow(u, p, max_iters=4000)
    sol = newton_solve(sol.u, ACParams(s, 1.0, tol_residual=tol))
    v = sol.u.values
    # enforce the discrete symmetries v(-x) = -v(x) exactly
    v = 0.5 * (v - np.roll(v[::-1], 1))
    sol_res = _sup(residual(sol.u.with_values(v), p).values)
    q = n_points // 4
    idx = np.arange(-q, q + 1) % n_points
    xs = np.arange(-q, q + 1) * (L / n_points)
    return LayerProfile(xs, v[idx], s, sol_res, sol.u.with_values(v))


# ------------------------------------------------------------ probes

def bv_probe(u: GridField, center, R: float) -> float:
    """``int_{B_{R/2}(center)} |grad u|``."""
    g = gradient(u)
    mag = np.sqrt(sum(gi**2 for gi in g))
    B = ball_mask(u.torus, u.grid, center, R / 2)
    return float(np.sum(mag * B.mask) * u.weight)


def density_probe(u: GridField, params: ACParams, center, R: float) -> float:
    """``E|_{B_R}(u) / R^{n-s}``."""
    B = ball_mask(u.torus, u.grid, center, R)
    return energy(u, params, omega=B).total / R ** (u.torus.dim - params.s)


def potential_decay_probe(eps_list, potentials) -> tuple:
    """Least-squares slope of ``log E_pot`` against ``log eps`` and its stderr."""
    x = np.log(np.asarray(eps_list, float))
    y = np.log(np.asarray(potentials, float))
    A = np.stack([np.ones_like(x), x], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ coef
    dof = max(1, x.size - 2)
    cov = np.linalg.inv(A.T @ A) * (r @ r) / dof
    return float(coef[1]), float(np.sqrt(cov[1, 1]))


@dataclass
class StabilityRow:
    region: int
    min_q: float
    l1_sq: float
    margin: float
    passes: bool


def _bumps(u: GridField, region: np.ndarray, n_bumps: int, seed: int) -> list:
    # smooth bumps centred at random region points, cut to the region
    from .manifold import coordinates, min_image

    rng = np.random.default_rng(seed)
    pts = np.argwhere(region > 0)
    X = np.stack(coordinates(u.torus, u.grid), axis=-1)
    h = float(np.max(u.h))
    out = []
    for _ in range(n_bumps):
        p = pts[rng.integers(len(pts))]
        c = X[tuple(p)]
        width = h * rng.uniform(2, 8)
        d = min_image(u.torus, X - c)
        r2 = np.sum(d**2, axis=-1)
        out.append(np.exp(-r2 / (2 * width**2)) * region)
    out.append(region.astype(float))
    return out


def almost_stability_probe(u: GridField, params: ACParams, regions, m: int | None = None, n_bumps: int = 12,
                           seed: int = 0) -> tuple:
    """Check ``Q[xi] >= -Lambda ||xi||_1^2`` on each region over a bump dictionary.

    ``Lambda = m * max_{i != j} sup_{U_i x U_j} K_s``. For every region the
    quadratic form is minimized over the span of the bumps (generalized
    eigenproblem against the L^2 Gram matrix); that minimizer and every
    single bump are tested. Returns ``(Lambda, rows)``.
    """
    masks = [_mask(r, u) for r in regions]
    m = len(masks) if m is None else m
    table = kn.kernel_table(u.torus, u.grid, params.s, "point")
    sup_k = 0.0
    for i, a in enumerate(masks):
        for j, b in enumerate(masks):
            if i < j:
                # sup over pairs: max of the correlation support of the kernel table
                corr = np.fft.ifftn(np.conj(np.fft.fftn(a)) * np.fft.fftn(b)).real
                sup_k = max(sup_k, float(np.max(np.where(corr > 0.5, table, 0.0))))
    Lam = m * sup_k
    rows = []
    w = u.weight
    for k, mk in enumerate(masks):
        B = _bumps(u, mk, n_bumps, seed + k)
        HB = [hessian_apply(u, params, b) for b in B]
        Q = np.array([[np.sum(bi * hj) * w for hj in HB] for bi in B])
        G = np.array([[np.sum(bi * bj) * w for bj in B] for bi in B])
        Q = 0.5 * (Q + Q.T)
        # whiten with the Gram matrix, dropping near-dependent directions
        gv, gV = np.linalg.eigh(G)
        keep = gv > 1e-10 * gv.max()
        P = gV[:, keep] / np.sqrt(gv[keep])
        ev, eV = np.linalg.eigh(P.T @ Q @ P)
        cands = [P @ eV[:, 0]] + [np.eye(len(B))[i] for i in range(len(B))]
        worst = (np.inf, 0.0, 0.0)
        for cvec in cands:
            xi = sum(ci * bi for ci, bi in zip(cvec, B))
            q = second_variation(u, params, u.with_values(xi))
            l1 = float(np.sum(np.abs(xi)) * w)
            if l1 == 0:
                continue
            margin = (q + Lam * l1**2) / l1**2
            if margin < worst[0]:
                worst = (margin, q, l1**2)
        rows.append(StabilityRow(k, worst[1], worst[2], worst[0], worst[0] >= -1e-12))
    return Lam, rows
