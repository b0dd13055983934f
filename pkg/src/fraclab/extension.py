"""Harmonic extension to the half-cylinder ``M x (0, inf)``.

For ``u = sum_k u_k phi_k`` the weighted-harmonic extension is
``U(x, z) = sum_k u_k g_s(lambda_k, z) phi_k(x)`` with

    g_s(lambda, z) = z^s / (2^s Gamma(s/2)) int_0^inf exp(-lambda t) exp(-z^2/4t) t^{-1-s/2} dt.

Extensions are sampled on a geometric ladder of heights, i.e. a uniform
grid in ``eta = log z``. z-derivatives are sixth-order differences in
``eta``, integrals are trapezoid sums in ``eta`` plus the analytic
contribution of ``(0, z_min)`` from the local expansion
``U = u + a z^s + b z^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import kernel as kn
from .manifold import GridField, coordinates, fft, gradient, ifft_real, laplace_eigenvalues, min_image

N_FIT = 6


def g_multiplier(lam, z, s: float, step: float = 0.1) -> np.ndarray:
    """``g_s(lambda, z)`` by trapezoid quadrature in ``tau = log t``.

    Depends on ``x = sqrt(lambda) z`` only; broadcasts ``lam`` against ``z``.
    """
    x = np.sqrt(np.asarray(lam, float)) * np.asarray(z, float)
    shape = x.shape
    x = x.ravel()
    out = np.ones_like(x)
    pos = x > 0
    if pos.any():
        xs = x[pos]
        lo = np.log(xs.min() ** 2 / 4) - 8
        tau = np.arange(lo, np.log(45.0) + step, step)
        t = np.exp(tau)
        logc = s * np.log(xs) - s * np.log(2) - gammaln(s / 2)
        res = np.empty_like(xs)
        chunk = max(1, 2_000_000 // tau.size)
        for i in range(0, xs.size, chunk):
            xc = xs[i:i + chunk, None]
            f = np.exp(-t[None, :] - xc**2 / (4 * t[None, :]) - (s / 2) * tau[None, :] + logc[i:i + chunk, None])
            res[i:i + chunk] = step * f.sum(axis=1)
        out[pos] = res
    return out.reshape(shape)


def default_heights(u: GridField, s: float, z_min: float | None = None, ratio: float = 1.2) -> np.ndarray:
    """Geometric ladder from ``z_min`` until ``g_s(lambda_1, z) < 1e-10``."""
    L = u.torus.L
    lam1 = (2 * np.pi / L.max()) ** 2
    if z_min is None:
        z_min = 1e-7 * L.min()
    z = [z_min]
    while g_multiplier(lam1, z[-1], s) > 1e-10:
        z.append(z[-1] * ratio)
    return np.array(z)


@dataclass
class ExtensionField:
    """Samples of ``U`` on grid x heights; ``values[..., j]`` is ``U(., z_j)``."""

    base: GridField
    s: float
    z: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, float)
        if z.ndim != 1 or z.size < N_FIT + 4 or np.any(np.diff(z) <= 0) or z[0] <= 0:
            raise ValueError("heights must be an increasing positive ladder")
        d = np.diff(np.log(z))
        if np.ptp(d) > 1e-9 * d.mean():
            raise ValueError("heights must be geometric")
        if self.values.shape != self.base.grid.shape + (z.size,):
            raise ValueError("values shape does not match grid and heights")

    @property
    def deta(self) -> float:
        return float(np.log(self.z[1] / self.z[0]))


def cs_extend(u: GridField, s: float, z=None) -> ExtensionField:
    """Weighted-harmonic extension of ``u`` sampled at heights ``z``."""
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    z = default_heights(u, s) if z is None else np.asarray(z, float)
    lam = laplace_eigenvalues(u.torus, u.grid)
    uniq, inv = np.unique(lam, return_inverse=True)
    g = g_multiplier(uniq[:, None], z[None, :], s)
    gk = g[inv.reshape(lam.shape)]
    uh = fft(u.values)
    vals = np.empty(u.grid.shape + (z.size,))
    for j in range(z.size):
        vals[..., j] = ifft_real(uh * gk[..., j])
    return ExtensionField(u, s, z, vals)


def _local_fit(z, dU, s):
    """Least squares ``dU ~ a z^s + b z^2`` over the lowest nodes (last axis)."""
    zf = z[:N_FIT]
    A = np.stack([zf**s, zf**2], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.moveaxis(dU[..., :N_FIT], -1, 0).reshape(N_FIT, -1), rcond=None)
    a = coef[0].reshape(dU.shape[:-1])
    b = coef[1].reshape(dU.shape[:-1])
    return a, b


def dtn(ext: ExtensionField) -> GridField:
    """``lim_{z->0} z^{1-s} dU/dz`` from the local expansion fit."""
    a, _ = _local_fit(ext.z, ext.values - ext.base.values[..., None], ext.s)
    return ext.base.with_values(ext.s * a)


def _d_eta(V, deta, z, a, b, s):
    # sixth-order central differences along the last axis; fit-based at the bottom
    c = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
    D = np.zeros_like(V)
    n = V.shape[-1]
    for k, ck in enumerate(c):
        if ck:
            D[..., 3:n - 3] += ck * V[..., k:n - 6 + k]
    D[..., 3:n - 3] /= deta
    for j in range(3):
        D[..., j] = s * a * z[j] ** s + 2 * b * z[j] ** 2
    for j in range(n - 3, n):
        D[..., j] = (V[..., j] - V[..., j - 1]) / deta
    return D


def _trap_weights(n, deta):
    w = np.full(n, deta)
    w[0] = w[-1] = deta / 2
    return w


def extension_energy(ext: ExtensionField, center=None, radius: float | None = None) -> float:
    """``beta_s int z^{1-s} |grad U|^2`` over the cylinder or a half-ball.

    With ``center`` and ``radius`` the integral is restricted to the
    half-ball ``{|x - center|^2 + z^2 < radius^2}`` using cell-centre
    membership.
    """
    s, z = ext.s, ext.z
    u = ext.base
    bs = kn.beta_s(s)
    dU = ext.values - u.values[..., None]
    wz = _trap_weights(z.size, ext.deta)
    zm = z[0]
    if center is None:
        # spectral in x: per-mode sums, exact Parseval
        lam = laplace_eigenvalues(u.torus, u.grid)
        scale = u.torus.volume / u.grid.size**2
        Uh = np.fft.fftn(ext.values, axes=tuple(range(u.torus.dim)))
        uh = np.fft.fftn(u.values)
        # the mean is extended as a constant
        Uh[lam == 0] = uh[lam == 0][..., None]
        dUh = Uh - uh[..., None]
        ar, br = _local_fit(z, dUh.real, s)
        ai, bi = _local_fit(z, dUh.imag, s)
        Dr = _d_eta(Uh.real, ext.deta, z, ar, br, s)
        Di = _d_eta(Uh.imag, ext.deta, z, ai, bi, s)
        dens = z ** (-s) * (Dr**2 + Di**2) + lam[..., None] * z ** (2 - s) * np.abs(Uh) ** 2
        total = np.sum(dens * wz) * scale
        a2 = ar**2 + ai**2
        ab = ar * br + ai * bi
        b2 = br**2 + bi**2
        tail = s * a2 * zm**s + 2 * s * ab * zm**2 + 4 * b2 * zm ** (4 - s) / (4 - s)
        tail = tail + lam * np.abs(uh) ** 2 * zm ** (2 - s) / (2 - s)
        total += np.sum(tail) * scale
        return float(bs * total)
    a, b = _local_fit(z, dU, s)
    D = _d_eta(ext.values, ext.deta, z, a, b, s)
    dens = z ** (-s) * D**2
    for j in range(z.size):
        g = gradient(u.with_values(ext.values[..., j]))
        dens[..., j] += z[j] ** (2 - s) * sum(gi**2 for gi in g)
    X = coordinates(u.torus, u.grid)
    d = min_image(u.torus, np.stack(X, axis=-1) - np.asarray(center, float))
    r2 = np.sum(d**2, axis=-1)
    inside = (r2[..., None] + z**2) < radius**2
    total = np.sum(dens * wz * inside) * u.weight
    gu = gradient(u)
    tail = s * a**2 * zm**s + 2 * s * a * b * zm**2 + 4 * b**2 * zm ** (4 - s) / (4 - s)
    tail = tail + sum(gi**2 for gi in gu) * zm ** (2 - s) / (2 - s)
    total += np.sum(tail * (r2 < radius**2)) * u.weight
    return float(bs * total)


@dataclass
class PhiRow:
    R: float
    phi: float
    sobolev_part: float
    potential_part: float
    error: float


def phi_functional(u: GridField, s: float, epsilon: float, center, radii, ext: ExtensionField | None = None) -> list:
    """Rescaled local energy ``R^{s-n} (E_ext(R) / (2 beta_s^2) + eps^{-s} int_{B_R} W(u))``.

    ``E_ext(R)`` is :func:`extension_energy` on the half-ball of radius R.
    The weight ``1/(2 beta_s^2)`` makes the global extension term equal to
    the Sobolev part of the Allen-Cahn energy that ``u`` is critical for.
    ``error`` brackets the cell-membership error by moving the radius by
    half a cell.
    """
    radii = np.asarray(radii, float)
    n = u.torus.dim
    L = u.torus.L
    if np.any(radii >= L.min() / 4):
        raise ValueError("radii must be below a quarter of the shortest side")
    if ext is None:
        ext = cs_extend(u, s)
    bs = kn.beta_s(s)
    X = coordinates(u.torus, u.grid)
    d = min_image(u.torus, np.stack(X, axis=-1) - np.asarray(center, float))
    r = np.sqrt(np.sum(d**2, axis=-1))
    W = 0.25 * (1 - u.values**2) ** 2
    h = float(u.h.max())
    rows = []

    def parts(R):
        sob = extension_energy(ext, center, R) / (2 * bs**2)
        pot = epsilon ** (-s) * np.sum(W * (r < R)) * u.weight
        return sob, pot

    for R in radii:
        sob, pot = parts(R)
        lo = parts(R - h / 2)
        hi = parts(R + h / 2)
        scale = R ** (s - n)
        err = scale * 0.5 * abs(sum(hi) - sum(lo))
        rows.append(PhiRow(float(R), scale * (sob + pot), scale * sob, scale * pot, float(err)))
    return rows
