"""Flat tori, uniform grids and fields on them.

Fields are stored as ``numpy`` arrays shaped like the grid (row-major).
Spectral coefficients are taken against the orthonormal Laplace
eigenbasis ``exp(2 pi i k.x / L) / sqrt(vol)``, so that Parseval reads
``sum_x u(x)**2 * vol / prod(N) == sum_k |u_k|**2``.
"""
from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
import scipy.fft as sfft

# worker count handed to scipy.fft; the CLI --threads flag sets it
FFT_WORKERS = 1


def set_fft_workers(n: int) -> None:
    global FFT_WORKERS
    FFT_WORKERS = max(1, int(n))


@dataclass(frozen=True)
class FlatTorus:
    """Product torus ``R^n / (L_1 Z x ... x L_n Z)`` with the flat metric."""

    side_lengths: tuple

    def __init__(self, side_lengths):
        sides = tuple(float(x) for x in np.atleast_1d(side_lengths))
        if len(sides) < 1 or any(not np.isfinite(x) or x <= 0 for x in sides):
            raise ValueError("side lengths must be positive and finite")
        object.__setattr__(self, "side_lengths", sides)

    @property
    def dim(self) -> int:
        return len(self.side_lengths)

    @property
    def volume(self) -> float:
        return float(np.prod(self.side_lengths))

    @property
    def L(self) -> np.ndarray:
        return np.asarray(self.side_lengths)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with points ``x_j = j L / N`` per axis (N even)."""

    points_per_axis: tuple

    def __init__(self, points_per_axis):
        pts = tuple(int(n) for n in np.atleast_1d(points_per_axis))
        if any(n < 2 or n % 2 for n in pts):
            raise ValueError("points per axis must be even and >= 2")
        object.__setattr__(self, "points_per_axis", pts)

    @property
    def shape(self) -> tuple:
        return self.points_per_axis

    @property
    def size(self) -> int:
        return int(np.prod(self.points_per_axis))


def _check_compatible(torus: FlatTorus, grid: GridSpec) -> None:
    if torus.dim != len(grid.shape):
        raise ValueError("grid dimension does not match torus dimension")


def spacing(torus: FlatTorus, grid: GridSpec) -> np.ndarray:
    _check_compatible(torus, grid)
    return torus.L / np.asarray(grid.shape)


def cell_volume(torus: FlatTorus, grid: GridSpec) -> float:
    """Quadrature weight ``vol / prod(N)`` of a single grid cell."""
    return torus.volume / grid.size


def axes(torus: FlatTorus, grid: GridSpec) -> list:
    """1D coordinate arrays ``j L_i / N_i``."""
    _check_compatible(torus, grid)
    return [np.arange(n) * (l / n) for n, l in zip(grid.shape, torus.L)]


def coordinates(torus: FlatTorus, grid: GridSpec) -> list:
    """Coordinate arrays broadcast to the grid shape."""
    return np.meshgrid(*axes(torus, grid), indexing="ij")


def wavenumbers(torus: FlatTorus, grid: GridSpec) -> list:
    """Angular wavenumbers ``2 pi k_i / L_i`` per axis in FFT order."""
    _check_compatible(torus, grid)
    return [2 * np.pi * sfft.fftfreq(n, d=1.0 / n) / l for n, l in zip(grid.shape, torus.L)]


def laplace_eigenvalues(torus: FlatTorus, grid: GridSpec) -> np.ndarray:
    """``lambda_k = |2 pi k / L|^2`` on the FFT index grid."""
    ks = np.meshgrid(*wavenumbers(torus, grid), indexing="ij", sparse=True)
    lam = np.zeros(grid.shape)
    for k in ks:
        lam = lam + k**2
    return lam


@dataclass(frozen=True)
class WaveVector:
    index: tuple
    eigenvalue: float


def eigenpairs(torus: FlatTorus, grid: GridSpec) -> Iterator[WaveVector]:
    """Iterate wave vectors in FFT order with their Laplace eigenvalues."""
    lam = laplace_eigenvalues(torus, grid)
    freq = [np.rint(sfft.fftfreq(n, d=1.0 / n)).astype(int) for n in grid.shape]
    for idx in np.ndindex(*grid.shape):
        k = tuple(int(f[i]) for f, i in zip(freq, idx))
        yield WaveVector(k, float(lam[idx]))


def eigenfunction(torus: FlatTorus, grid: GridSpec, k: Sequence[int]) -> np.ndarray:
    """Sampled orthonormal eigenfunction ``exp(2 pi i k.x/L)/sqrt(vol)``."""
    phase = sum(2 * np.pi * ki * xi / li for ki, xi, li in zip(k, coordinates(torus, grid), torus.L))
    return np.exp(1j * phase) / np.sqrt(torus.volume)


def geodesic_distance(torus: FlatTorus, x, y) -> np.ndarray:
    """Minimum-image distance; broadcasts over leading axes of ``x - y``."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    L = torus.L
    d = d - L * np.round(d / L)
    return np.sqrt(np.sum(d**2, axis=-1))


def min_image(torus: FlatTorus, d) -> np.ndarray:
    """Wrap displacement vectors (last axis) into ``[-L/2, L/2)``."""
    L = torus.L
    d = np.asarray(d, dtype=float)
    return d - L * np.floor(d / L + 0.5)


@dataclass
class GridField:
    """Real samples of a function on a torus grid."""

    torus: FlatTorus
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        _check_compatible(self.torus, self.grid)
        v = np.asarray(self.values, dtype=float)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {v.size}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        self.values = v

    @property
    def h(self) -> np.ndarray:
        return spacing(self.torus, self.grid)

    @property
    def weight(self) -> float:
        return cell_volume(self.torus, self.grid)

    def integral(self) -> float:
        return float(self.values.sum() * self.weight)

    def with_values(self, values) -> "GridField":
        return GridField(self.torus, self.grid, values)

    @classmethod
    def from_function(cls, torus, grid, f: Callable) -> "GridField":
        return cls(torus, grid, f(*coordinates(torus, grid)))


@dataclass
class SpectralField:
    """Orthonormal-basis coefficients in FFT index order."""

    torus: FlatTorus
    grid: GridSpec
    coefficients: np.ndarray


def to_spectral(u: GridField) -> SpectralField:
    c = sfft.fftn(u.values, workers=FFT_WORKERS) * (np.sqrt(u.torus.volume) / u.grid.size)
    return SpectralField(u.torus, u.grid, c)


def to_physical(c: SpectralField) -> GridField:
    v = sfft.ifftn(c.coefficients, workers=FFT_WORKERS) * (c.grid.size / np.sqrt(c.torus.volume))
    return GridField(c.torus, c.grid, v.real)


def fft(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, workers=FFT_WORKERS)


def ifft_real(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, workers=FFT_WORKERS).real


def apply_multiplier(values: np.ndarray, mult: np.ndarray) -> np.ndarray:
    """Apply a real Fourier multiplier to periodic samples."""
    return ifft_real(fft(values) * mult)


def gradient(u: GridField) -> list:
    """Spectral gradient; the Nyquist mode is dropped for odd derivatives."""
    uh = fft(u.values)
    out = []
    for ax, k in enumerate(wavenumbers(u.torus, u.grid)):
        k = k.copy()
        n = u.grid.shape[ax]
        k[n // 2] = 0.0
        shape = [1] * u.torus.dim
        shape[ax] = n
        out.append(ifft_real(1j * k.reshape(shape) * uh))
    return out


def heat_smooth(u: GridField, t: float) -> GridField:
    """Apply the heat semigroup ``exp(t Delta)``."""
    lam = laplace_eigenvalues(u.torus, u.grid)
    return u.with_values(apply_multiplier(u.values, np.exp(-t * lam)))


# ---------------------------------------------------------------- sets

@dataclass(frozen=True)
class Stripe:
    """``{ lo < x_axis < hi }`` (periodically wrapped)."""

    axis: int = 0
    lo: float = 0.0
    hi: float = 0.5

    def contains(self, torus: FlatTorus, X: list) -> np.ndarray:
        L = torus.L[self.axis]
        x = np.mod(X[self.axis] - self.lo, L)
        return (x > 0) & (x < self.hi - self.lo)


@dataclass(frozen=True)
class Ball:
    """Open geodesic ball ``{ d(x, center) < radius }``."""

    center: tuple
    radius: float

    def contains(self, torus: FlatTorus, X: list) -> np.ndarray:
        d2 = 0.0
        for xi, ci, li in zip(X, self.center, torus.L):
            d = xi - ci
            d = d - li * np.round(d / li)
            d2 = d2 + d**2
        return d2 < self.radius**2


@dataclass
class SetIndicator:
    """A set sampled on a grid (cell-centre membership).

    ``exact_shape`` keeps the analytic description when one is known so
    that quadratures may resolve cut cells.
    """

    torus: FlatTorus
    grid: GridSpec
    mask: np.ndarray
    exact_shape: object = None

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        if m.size != self.grid.size:
            raise ValueError("mask size does not match grid")
        self.mask = m.reshape(self.grid.shape)

    @classmethod
    def from_shape(cls, torus, grid, shape) -> "SetIndicator":
        return cls(torus, grid, shape.contains(torus, coordinates(torus, grid)), shape)

    @classmethod
    def from_field(cls, u: GridField, level: float = 0.0) -> "SetIndicator":
        return cls(u.torus, u.grid, u.values > level)

    def signed(self) -> GridField:
        """The field ``chi_E - chi_{E^c}``."""
        return GridField(self.torus, self.grid, np.where(self.mask, 1.0, -1.0))

    def complement(self) -> "SetIndicator":
        return SetIndicator(self.torus, self.grid, ~self.mask)

    def measure(self) -> float:
        return float(self.mask.sum() * cell_volume(self.torus, self.grid))


def ball_mask(torus: FlatTorus, grid: GridSpec, center, radius: float) -> SetIndicator:
    return SetIndicator.from_shape(torus, grid, Ball(tuple(np.atleast_1d(center)), float(radius)))


# ------------------------------------------------------- serialization

_MAGIC = b"FLDv1\n"


def _header(u: GridField, extra: dict | None = None) -> dict:
    hdr = {
        "dim": u.torus.dim,
        "side_lengths": list(u.torus.side_lengths),
        "points_per_axis": list(u.grid.shape),
    }
    if extra:
        hdr.update(extra)
    return hdr


def write_field(path, u: GridField, extra: dict | None = None) -> None:
    """Binary format: magic, uint64 header length, JSON header, float64 LE data."""
    hdr = json.dumps(_header(u, extra), sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(hdr)))
        fh.write(hdr)
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_field(path) -> tuple:
    """Return ``(GridField, header)``."""
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError("not a field file")
        (n,) = struct.unpack("<Q", fh.read(8))
        hdr = json.loads(fh.read(n))
        data = np.frombuffer(fh.read(), dtype="<f8")
    torus = FlatTorus(hdr["side_lengths"])
    grid = GridSpec(hdr["points_per_axis"])
    if torus.dim != hdr["dim"]:
        raise ValueError("inconsistent header")
    return GridField(torus, grid, data.copy()), hdr


def write_field_csv(path, u: GridField) -> None:
    """One row per grid point: index tuple then value (17 significant digits)."""
    cols = [f"i{a}" for a in range(u.torus.dim)] + ["value"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for idx in np.ndindex(*u.grid.shape):
            w.writerow(list(idx) + [f"{u.values[idx]:.17g}"])
