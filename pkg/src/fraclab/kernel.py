"""Heat kernel and the fractional kernel K_s on flat tori.

Two independent routes are provided for each kernel:

* heat kernel: eigenfunction expansion vs. periodized Gaussians;
* K_s: periodized Riesz sum ``alpha_{n,s} sum_m |x - y + L m|^{-n-s}``
  vs. subordination ``(s/2)/Gamma(1-s/2) int_0^inf H(x,y,t) t^{-1-s/2} dt``.

The subordination integral is evaluated by the trapezoid rule in
``tau = log t``. The heat kernel factorizes over axes, so every
evaluation reduces to 1D theta functions; grid tables are then tensor
contractions over the tau nodes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import erfc, gammaln, gamma, zeta

from .manifold import FlatTorus, GridSpec, min_image, spacing, cell_volume

HEAT_TOL = 1e-18


# ------------------------------------------------------------ constants

def alpha_ns(n: int, s: float) -> float:
    """Normalizing constant of the Riesz kernel of ``(-Delta)^{s/2}`` on R^n."""
    if not 0 < s < 2:
        raise ValueError("s must lie in (0, 2)")
    # |Gamma(-s/2)| = Gamma(1-s/2) / (s/2)
    log_abs = gammaln(1 - s / 2) - np.log(s / 2)
    return float(np.exp(s * np.log(2) + gammaln((n + s) / 2) - (n / 2) * np.log(np.pi) - log_abs))


def beta_s(s: float) -> float:
    """``Gamma(1 - s/2) / (2^{s-1} Gamma(s/2))``."""
    if not 0 < s < 2:
        raise ValueError("s must lie in (0, 2)")
    return float(np.exp(gammaln(1 - s / 2) - gammaln(s / 2) - (s - 1) * np.log(2)))


def _check_s(s):
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")


# ---------------------------------------------------------- 1D thetas

def _theta_lattice(x, t, L):
    """Periodized 1D Gaussian; x (M,), t (Q,) -> (M, Q)."""
    x = np.asarray(x, float)[:, None]
    t = np.asarray(t, float)[None, :]
    mmax = int(np.ceil(np.sqrt(4 * t.max() * 42) / L)) + 1
    out = np.zeros((x.shape[0], t.shape[1]))
    for m in range(-mmax, mmax + 1):
        y = x + m * L
        out += np.exp(-(y**2) / (4 * t))
    return out / np.sqrt(4 * np.pi * t)


def _theta_spectral(x, t, L, weight=None):
    """Eigen-expansion of the 1D heat kernel; optional Fourier weight."""
    x = np.asarray(x, float)[:, None]
    t = np.asarray(t, float)[None, :]
    kmax = int(np.ceil(L / (2 * np.pi) * np.sqrt(42 / t.min()))) + 1
    out = np.ones((x.shape[0], t.shape[1]))
    for k in range(1, kmax + 1):
        w = 2 * np.pi * k / L
        f = 2.0 if weight is None else 2.0 * weight(w)
        out += f * np.exp(-(w**2) * t) * np.cos(w * x)
    return out / L


def theta(x, t, L):
    """1D periodic heat kernel choosing the fast-converging expansion."""
    t = np.asarray(t, float)
    out = np.empty((np.size(x), t.size))
    small = t < L**2 / 4
    if small.any():
        out[:, small] = _theta_lattice(x, t[small], L)
    if (~small).any():
        out[:, ~small] = _theta_spectral(x, t[~small], L)
    return out


def _ramp_rest(x, t):
    # second antiderivative of the Gaussian minus the ramp max(x, 0)
    return -0.5 * np.abs(x) * erfc(np.abs(x) / (2 * np.sqrt(t))) + np.sqrt(t / np.pi) * np.exp(-(x**2) / (4 * t))


def _theta_cell_lattice(x, t, L, h):
    x = np.asarray(x, float)[:, None]
    t = np.asarray(t, float)[None, :]
    mmax = int(np.ceil((np.sqrt(4 * t.max() * 42) + h) / L)) + 1
    out = np.zeros((x.shape[0], t.shape[1]))
    for m in range(-mmax, mmax + 1):
        y = x + m * L
        out += _ramp_rest(y + h, t) - 2 * _ramp_rest(y, t) + _ramp_rest(y - h, t)
        out += np.maximum(0.0, h - np.abs(y))
    return out / h**2


def theta_cell(x, t, L, h):
    """1D periodic heat kernel averaged against the cell-pair tent of width h."""
    t = np.asarray(t, float)
    out = np.empty((np.size(x), t.size))
    small = t < L**2 / 4
    if small.any():
        out[:, small] = _theta_cell_lattice(x, t[small], L, h)
    if (~small).any():
        out[:, ~small] = _theta_spectral(x, t[~small], L, weight=lambda w: np.sinc(w * h / (2 * np.pi)) ** 2)
    return out


# -------------------------------------------------------- heat kernel

def heat_kernel(torus: FlatTorus, x, y, t, method: str = "spectral", tol: float = HEAT_TOL):
    """Heat kernel ``H(x, y, t)``; ``t`` may be an array.

    ``method='spectral'`` sums ``exp(-lambda_k t) phi_k(x) phi_k(y)`` while
    ``exp(-lambda_k t) >= tol``; ``method='lattice'`` sums periodized
    Gaussians. Both factor over axes.
    """
    t = np.atleast_1d(np.asarray(t, float))
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    d = min_image(torus, np.asarray(x, float) - np.asarray(y, float))
    d = np.atleast_1d(d)
    if d.ndim > 1:
        # several point pairs, shape (..., n)
        flat = d.reshape(-1, torus.dim)
        vals = [heat_kernel(torus, di, np.zeros(torus.dim), t, method, tol) for di in flat]
        return np.asarray(vals).reshape(d.shape[:-1] + ((t.size,) if t.size > 1 else ()))
    out = np.ones(t.size)
    for di, L in zip(d, torus.L):
        if method == "spectral":
            kmax = int(np.ceil(L / (2 * np.pi) * np.sqrt(-np.log(tol) / t.min())))
            k = np.arange(1, kmax + 1)[:, None]
            w = 2 * np.pi * k / L
            terms = np.exp(-(w**2) * t[None, :]) * np.cos(w * di)
            out = out * (1.0 + 2.0 * np.sort(terms, axis=0)[::-1].sum(axis=0)) / L
        elif method == "lattice":
            mmax = int(np.ceil(np.sqrt(-4 * t.max() * np.log(tol)) / L)) + 1
            m = np.arange(-mmax, mmax + 1)[:, None]
            g = np.exp(-((di + m * L) ** 2) / (4 * t[None, :])) / np.sqrt(4 * np.pi * t[None, :])
            out = out * g.sum(axis=0)
        else:
            raise ValueError(f"unknown method {method!r}")
    return out if out.size > 1 else float(out[0])


# ----------------------------------------------------------------- K_s

def _riesz_tail_1d(d, L, s, M):
    # Euler-Maclaurin (midpoint form) tail of sum_{m>M} |d + m L|^{-1-s} for both signs
    p = 1 + s
    tail = 0.0
    nxt = 0.0
    for c in (d, -d):
        X = L * (M + 0.5) + c
        tail = tail + X ** (1 - p) / (L * (p - 1)) - p * L * X ** (-p - 1) / 24
        tail = tail + 7 * p * (p + 1) * (p + 2) * L**3 * X ** (-p - 3) / 5760
        nxt = nxt + 31 * p * (p + 1) * (p + 2) * (p + 3) * (p + 4) * L**5 * X ** (-p - 5) / 967680
    return tail, np.abs(nxt)


def _smooth_cutoff(rho, a):
    # C-infinity step: 1 on [0, a], 0 on [1, inf)
    x = np.clip((np.asarray(rho, float) - a) / (1 - a), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(x > 0, np.exp(-1 / np.where(x > 0, x, 1)), 0.0)
        g = np.where(x < 1, np.exp(-1 / np.where(x < 1, 1 - x, 1)), 0.0)
    return g / (f + g)


@lru_cache(maxsize=64)
def _cutoff_moment(s, a):
    # int_0^inf rho^{-1-s} (1 - cutoff(rho)) d rho
    from scipy.integrate import quad

    v, _ = quad(lambda r: r ** (-1 - s) * (1 - _smooth_cutoff(r, a)), a, 1, epsabs=1e-15, epsrel=1e-13, limit=200)
    return v + 1 / s


def ks_lattice(torus: FlatTorus, x, y, s: float, m_max: int = 50, return_tail: bool = False):
    """Periodized Riesz sum for K_s with an analytic tail correction.

    In 1D the tail beyond ``|m| > m_max`` is an Euler-Maclaurin expansion.
    In higher dimension the sum is tapered by a smooth radial cutoff at
    ``R = m_max min L`` and the complement is replaced by its continuum
    integral; the smoothness makes the lattice discrepancy negligible.
    ``return_tail`` also returns an estimate of the tail error.
    """
    _check_s(s)
    n = torus.dim
    a = alpha_ns(n, s)
    d = np.atleast_1d(min_image(torus, np.asarray(x, float) - np.asarray(y, float)))
    if d.ndim > 1:
        flat = d.reshape(-1, n)
        res = [ks_lattice(torus, di, np.zeros(n), s, m_max, True) for di in flat]
        val = np.array([r[0] for r in res]).reshape(d.shape[:-1])
        err = np.array([r[1] for r in res]).reshape(d.shape[:-1])
        return (val, err) if return_tail else val
    if np.all(d == 0):
        raise ValueError("K_s is singular on the diagonal")
    L = torus.L
    if n == 1:
        m = np.arange(-m_max, m_max + 1)
        main = np.sum(np.abs(d[0] + m * L[0]) ** (-1 - s))
        tail, err = _riesz_tail_1d(d[0], L[0], s, m_max)
        val, err = a * (main + tail), a * err
    else:
        # smooth radial cutoff; the rest of the sum is replaced by its integral
        grids = np.meshgrid(*[np.arange(-m_max, m_max + 1)] * n, indexing="ij")
        mm = np.stack([g.ravel() for g in grids], axis=1)
        r = np.sqrt(np.sum((d + mm * L) ** 2, axis=1))
        R = m_max * float(L.min())
        sphere = 2 * np.pi ** (n / 2) / gamma(n / 2)
        vals = []
        for a_cut in (0.5, 0.6):
            phi = _smooth_cutoff(r / R, a_cut)
            main = np.sum(phi * r ** (-n - s))
            vals.append(main + sphere * R ** (-s) * _cutoff_moment(s, a_cut) / torus.volume)
        val = a * vals[0]
        err = a * abs(vals[0] - vals[1])
    return (float(val), float(err)) if return_tail else float(val)


@dataclass(frozen=True)
class TauRule:
    nodes: np.ndarray  # t values
    weights: np.ndarray  # trapezoid weight in tau times t^{-s/2}


def tau_rule(s: float, t_lo: float, t_hi: float, step: float = 0.1) -> TauRule:
    tau = np.arange(np.log(t_lo), np.log(t_hi) + step, step)
    t = np.exp(tau)
    return TauRule(t, step * t ** (-s / 2))


def _plateau_scale(torus: FlatTorus) -> float:
    return (np.max(torus.L) / (2 * np.pi)) ** 2


def _tau_range(torus: FlatTorus, s: float, d_min: float) -> tuple:
    T = _plateau_scale(torus)
    lo = min(np.log(T) - 40 / (1 - s / 2), np.log(d_min**2) - 6)
    hi = np.log(45 * T)
    return np.exp(lo), np.exp(hi)


def ks_subordination(torus: FlatTorus, x, y, s: float, step: float = 0.1):
    """K_s from the heat kernel by subordination; broadcasts over points.

    ``x - y`` may have shape ``(n,)`` or ``(M, n)``.
    """
    _check_s(s)
    d = min_image(torus, np.asarray(x, float) - np.asarray(y, float))
    single = d.ndim == 1
    d = np.atleast_2d(d)
    r = np.sqrt(np.sum(d**2, axis=1))
    if np.any(r == 0):
        raise ValueError("K_s is singular on the diagonal")
    T = _plateau_scale(torus)
    rule = tau_rule(s, *_tau_range(torus, s, r.min()), step=step)
    prod = np.ones((d.shape[0], rule.nodes.size))
    for i, L in enumerate(torus.L):
        prod *= theta(d[:, i], rule.nodes, L)
    vol = torus.volume
    prod -= (1 - np.exp(-rule.nodes / T)) / vol
    c = (s / 2) / gamma(1 - s / 2)
    val = c * prod @ rule.weights + T ** (-s / 2) / vol
    return float(val[0]) if single else val


def ks_kernel(torus: FlatTorus, x, y, s: float, method: str = "lattice_riesz", m_max: int = 50):
    if method == "lattice_riesz":
        return ks_lattice(torus, x, y, s, m_max=m_max)
    if method == "subordination":
        return ks_subordination(torus, x, y, s)
    raise ValueError(f"unknown method {method!r}")


def comparability_report(torus: FlatTorus, s: float, separations, path=None) -> list:
    """Rows ``(separation, ratio, method_gap)`` along the first axis.

    ``ratio`` is ``K_s * d^{n+s}`` (bounded above and below for a
    comparable kernel) and ``method_gap`` the relative gap between the two
    evaluation routes.
    """
    n = torus.dim
    rows = []
    for d in np.atleast_1d(separations):
        x = np.zeros(n)
        x[0] = d
        a = ks_lattice(torus, x, np.zeros(n), s)
        b = ks_subordination(torus, x, np.zeros(n), s)
        rows.append({"separation": float(d), "ratio": a * d ** (n + s), "method_gap": abs(a - b) / abs(b)})
    if path is not None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["separation", "ratio", "method_gap"])
            for r in rows:
                w.writerow([f"{r['separation']:.17g}", f"{r['ratio']:.17g}", f"{r['method_gap']:.17g}"])
    return rows


# ------------------------------------------------------- grid tables

def epstein_zeta(n: int, sigma: float) -> float:
    """Analytic continuation of ``sum_{j in Z^n, j != 0} |j|^{-sigma}``."""
    if n == 1:
        return float(2 * zeta(sigma))
    from scipy.special import gammaincc

    a, b = sigma / 2, (n - sigma) / 2
    R = 6
    grids = np.meshgrid(*[np.arange(-R, R + 1)] * n, indexing="ij")
    j2 = sum(g.ravel() ** 2 for g in grids).astype(float)
    j2 = j2[j2 > 0]
    x = np.pi * j2

    def upper(p, x):
        # Gamma(p, x); non-positive p by the downward recurrence
        if p > 0:
            return gammaincc(p, x) * gamma(p)
        return (upper(p + 1, x) - x**p * np.exp(-x)) / p

    total = np.sum(upper(a, x) * x ** (-a)) + np.sum(upper(b, x) * x ** (-b))
    total += 2 / (sigma - n) - 2 / sigma
    return float(np.pi**a / gamma(a) * total)


def self_cell_coefficient(torus: FlatTorus, grid: GridSpec, s: float) -> float:
    """Leading midpoint-rule defect of the punctured lattice sum.

    Adding ``c * lambda_k`` to the punctured-sum symbol corrects the
    ``h^{2-s}`` error near the diagonal (cubic cells assumed).
    """
    n = torus.dim
    h = float(np.mean(spacing(torus, grid)))
    return -alpha_ns(n, s) / (2 * n) * h ** (2 - s) * epstein_zeta(n, n + s - 2)


def _contract(factors, weights):
    # sum_q w_q prod_i f_i[:, q] as an n-dimensional array
    letters = "abcdefgh"[: len(factors)]
    spec = ",".join(f"{c}q" for c in letters) + ",q->" + letters
    return np.einsum(spec, *factors, weights, optimize=True)


def _grid_offsets(torus, grid):
    return [np.minimum(np.arange(N), N - np.arange(N)) * (L / N) for N, L in zip(grid.shape, torus.L)]


@lru_cache(maxsize=32)
def _table(sides: tuple, shape: tuple, s: float, quadrature: str) -> np.ndarray:
    torus, grid = FlatTorus(sides), GridSpec(shape)
    hs = spacing(torus, grid)
    offs = _grid_offsets(torus, grid)
    T = _plateau_scale(torus)
    vol = torus.volume
    c = (s / 2) / gamma(1 - s / 2)
    if quadrature == "point":
        rule = tau_rule(s, *_tau_range(torus, s, hs.min()))
        facs = [theta(o, rule.nodes, L) for o, L in zip(offs, torus.L)]
        plate = (1 - np.exp(-rule.nodes / T)) / vol
        val = c * (_contract(facs, rule.weights) - np.sum(plate * rule.weights)) + T ** (-s / 2) / vol
    elif quadrature == "cell":
        t1 = (hs.min() / 4) ** 2
        lo = min(np.log(t1) - 40, np.log(T) - 40 / (1 - s / 2))
        rule = tau_rule(s, np.exp(lo), 45 * T)
        facs = [theta_cell(o, rule.nodes, L, h) for o, L, h in zip(offs, torus.L, hs)]
        q = np.sqrt(rule.nodes / np.pi)
        damp = np.exp(-rule.nodes / t1)
        # small-t form per axis: A + B q at offsets 0 and one cell
        small, coefs = [], []
        for o, h in zip(offs, hs):
            A = np.zeros(o.size)
            B = np.zeros(o.size)
            A[0], B[0] = 1 / h, -2 / h**2
            B[1] = 1 / h**2
            B[-1] = 1 / h**2
            small.append(A[:, None] + B[:, None] * q[None, :])
            coefs.append((A, B))
        plate = (1 - np.exp(-rule.nodes / T)) / vol
        val = c * (_contract(facs, rule.weights) - _contract(small, rule.weights * damp) - np.sum(plate * rule.weights))
        val = val + T ** (-s / 2) / vol
        # closed-form integral of the subtracted small-t form
        poly = np.ones((1,) * len(shape) + (1,))
        for ax, (A, B) in enumerate(coefs):
            sh = [1] * len(shape)
            sh[ax] = A.size
            Ar, Br = A.reshape(sh + [1]), B.reshape(sh + [1])
            new = np.zeros(np.broadcast_shapes(poly.shape[:-1], Ar.shape[:-1]) + (poly.shape[-1] + 1,))
            new[..., :-1] += poly * Ar
            new[..., 1:] += poly * Br
            poly = new
        m = np.arange(poly.shape[-1])
        with np.errstate(all="ignore"):
            mom = np.where(m > 0, np.pi ** (-m / 2) * gamma((m - s) / 2) * t1 ** ((m - s) / 2), 0.0)
        val = val + c * np.tensordot(poly, mom, axes=([-1], [0]))
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    val = np.asarray(val, float)
    val.flat[0] = 0.0
    val.setflags(write=False)
    return val


def kernel_table(torus: FlatTorus, grid: GridSpec, s: float, quadrature: str = "point") -> np.ndarray:
    """K_s sampled on grid displacements (diagonal entry set to zero).

    ``quadrature='point'`` gives point values ``K_s(z_j)``;
    ``quadrature='cell'`` gives cell-pair averages
    ``|C|^{-2} int_{C_0} int_{C_j} K_s``, exact for piecewise-constant fields.
    """
    _check_s(s)
    return _table(torus.side_lengths, grid.shape, float(s), quadrature)


def table_symbol(torus: FlatTorus, grid: GridSpec, table: np.ndarray) -> np.ndarray:
    """Symbol ``w sum_j T_j (1 - cos(k . z_j))`` of the pair operator."""
    w = cell_volume(torus, grid)
    th = np.fft.fftn(table).real
    return w * (th.flat[0] - th)
