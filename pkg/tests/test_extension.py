import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import gamma, kv

from fraclab import kernel as kn
from fraclab.extension import ExtensionField, cs_extend, default_heights, dtn, extension_energy, g_multiplier, phi_functional
from fraclab.manifold import FlatTorus, GridField, GridSpec, coordinates

T1 = FlatTorus([1.0])


def bessel_multiplier(x, s):
    return 2 ** (1 - s / 2) / gamma(s / 2) * x ** (s / 2) * kv(s / 2, x)


@given(st.floats(1e-3, 30.0), st.floats(0.05, 0.95))
def test_multiplier_matches_bessel_form(x, s):
    assert g_multiplier(1.0, x, s) == pytest.approx(bessel_multiplier(x, s), rel=1e-9, abs=1e-14)


def test_multiplier_limits():
    assert g_multiplier(0.0, 5.0, 0.5) == 1.0
    assert g_multiplier(4.0, 1e-12, 0.5) == pytest.approx(1.0, abs=1e-5)
    # s = 1 reduces to the harmonic extension exp(-sqrt(lambda) z)
    assert g_multiplier(9.0, 0.4, 1.0) == pytest.approx(np.exp(-1.2), rel=1e-9)


def test_heights_are_a_geometric_ladder():
    u = GridField(T1, GridSpec([32]), np.zeros(32))
    z = default_heights(u, 0.5)
    assert np.allclose(z[1:] / z[:-1], 1.2)
    assert g_multiplier((2 * np.pi) ** 2, z[-1], 0.5) < 1e-10


def test_extension_field_validation():
    u = GridField(T1, GridSpec([8]), np.zeros(8))
    with pytest.raises(ValueError):
        ExtensionField(u, 0.5, np.linspace(0.1, 1, 12), np.zeros((8, 12)))
    with pytest.raises(ValueError):
        cs_extend(u, 1.5)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
@pytest.mark.parametrize("k", [1, 2])
def test_dtn_equals_minus_beta_times_symbol(s, k):
    G = GridSpec([64])
    (X,) = coordinates(T1, G)
    phi = np.cos(2 * np.pi * k * X)
    d = dtn(cs_extend(GridField(T1, G, phi), s)).values
    lam = (2 * np.pi * k) ** 2
    assert np.allclose(d, -kn.beta_s(s) * lam ** (s / 2) * phi, rtol=0, atol=1e-3 * lam ** (s / 2))


def test_extension_is_weighted_harmonic():
    # div(z^{1-s} grad U) = 0 for a single mode: z^{1-s} U_zz + (1-s) z^{-s} U_z = lambda z^{1-s} U
    s = 0.4
    lam = (2 * np.pi) ** 2
    z = np.linspace(0.2, 0.6, 401)
    g = g_multiplier(lam, z, s)
    dz = z[1] - z[0]
    gz = np.gradient(g, dz)
    gzz = np.gradient(gz, dz)
    lhs = gzz + (1 - s) / z * gz
    assert np.allclose(lhs[5:-5], lam * g[5:-5], rtol=1e-3)


def test_localized_energy_tends_to_global():
    G = GridSpec([64])
    (X,) = coordinates(T1, G)
    u = GridField(T1, G, np.cos(2 * np.pi * X))
    ext = cs_extend(u, 0.5)
    full = extension_energy(ext)
    small = extension_energy(ext, [0.5], 0.1)
    big = extension_energy(ext, [0.5], 0.45)
    assert 0 < small < big < full


def test_phi_vanishes_for_constant_one():
    T = FlatTorus([1.0, 1.0])
    G = GridSpec([32, 32])
    u = GridField(T, G, np.ones(G.shape))
    rows = phi_functional(u, 0.5, 0.1, [0.5, 0.5], [0.1, 0.2])
    assert all(abs(r.phi) < 1e-12 for r in rows)


def test_phi_is_invariant_under_dilation():
    s, eps = 0.5, 0.1
    out = []
    for lam in (1.0, 2.0):
        T = FlatTorus([lam, lam])
        G = GridSpec([32, 32])
        X, Y = coordinates(T, G)
        u = GridField(T, G, np.tanh(np.sin(2 * np.pi * X / lam) / 0.3))
        rows = phi_functional(u, s, lam * eps, [0.3 * lam, 0.5 * lam], [0.12 * lam, 0.2 * lam])
        out.append([r.phi for r in rows])
    assert np.allclose(out[0], out[1], rtol=1e-6)


def test_phi_rejects_large_radii():
    u = GridField(T1, GridSpec([32]), np.zeros(32))
    with pytest.raises(ValueError):
        phi_functional(u, 0.5, 0.1, [0.5], [0.3])
