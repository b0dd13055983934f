import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import gamma, zeta

from fraclab import kernel as kn
from fraclab.manifold import FlatTorus, GridSpec

T1 = FlatTorus([1.0])

# K_s(0.25) on the unit circle from the Hurwitz-zeta form of the periodized Riesz sum
KS_QUARTER = {0.3: 1.8361037802467637, 0.5: 2.6948729554310167, 0.8: 4.587212719587943}


def hurwitz_ks(d, s, L=1.0):
    alpha = 2**s * gamma((1 + s) / 2) / (np.sqrt(np.pi) * abs(gamma(-s / 2)))
    return alpha * L ** (-1 - s) * (zeta(1 + s, d / L) + zeta(1 + s, 1 - d / L))


def test_constants_closed_forms():
    # alpha_{1,1} = 1/pi (Cauchy kernel), beta_1 = 1
    assert kn.alpha_ns(1, 1.0) == pytest.approx(1 / np.pi)
    assert kn.beta_s(1.0) == pytest.approx(1.0)
    assert kn.alpha_ns(2, 0.5) == pytest.approx(2**0.5 * gamma(1.25) / (np.pi * abs(gamma(-0.25))))


def test_s_out_of_range_rejected():
    with pytest.raises(ValueError):
        kn.ks_kernel(T1, [0.1], [0.0], 1.0)


@pytest.mark.parametrize("t", [1e-3, 1e-2, 0.1, 1.0, 10.0])
@pytest.mark.parametrize("d", [0.0, 0.1, 0.25])
def test_heat_kernel_routes_agree(t, d):
    a = kn.heat_kernel(T1, [d], [0.0], t, "spectral")
    b = kn.heat_kernel(T1, [d], [0.0], t, "lattice")
    assert a == pytest.approx(b, rel=1e-9)


def test_heat_kernel_has_unit_mass_and_factorizes():
    T = FlatTorus([1.0, 2.0])
    x = np.linspace(0, 1, 200, endpoint=False)
    y = np.linspace(0, 2, 400, endpoint=False)
    X, Y = np.meshgrid(x, y, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    H = kn.heat_kernel(T, pts, np.zeros(2), 0.01)
    assert np.sum(H) * (1 / 200) * (2 / 400) == pytest.approx(1.0, rel=1e-10)
    h1 = kn.heat_kernel(FlatTorus([1.0]), [0.3], [0.0], 0.01)
    h2 = kn.heat_kernel(FlatTorus([2.0]), [0.7], [0.0], 0.01)
    assert kn.heat_kernel(T, [0.3, 0.7], [0.0, 0.0], 0.01) == pytest.approx(h1 * h2, rel=1e-12)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
def test_ks_against_hurwitz_oracle(s):
    assert kn.ks_lattice(T1, [0.25], [0.0], s) == pytest.approx(KS_QUARTER[s], rel=1e-12)
    assert kn.ks_subordination(T1, [0.25], [0.0], s) == pytest.approx(KS_QUARTER[s], rel=1e-9)
    for d in (0.05, 0.137, 0.5):
        assert kn.ks_lattice(T1, [d], [0.0], s) == pytest.approx(hurwitz_ks(d, s), rel=1e-11)


@given(st.floats(0.02, 0.98), st.floats(0.05, 0.95), st.floats(0.5, 3.0))
def test_ks_symmetric_positive_and_scaling(d, s, lam):
    k = kn.ks_kernel(T1, [d], [0.0], s)
    assert k > 0
    assert kn.ks_kernel(T1, [0.0], [d], s) == pytest.approx(k, rel=1e-12)
    assert kn.ks_kernel(T1, [1 - d], [0.0], s) == pytest.approx(k, rel=1e-10)
    # K on the dilated torus: lam^{-1-s} K(d)
    assert kn.ks_kernel(FlatTorus([lam]), [lam * d], [0.0], s) == pytest.approx(lam ** (-1 - s) * k, rel=1e-10)


@pytest.mark.parametrize("s", [0.3, 0.8])
def test_ks_two_routes_on_rectangle(s):
    T = FlatTorus([1.0, 1.5])
    x = np.array([[0.1, 0.2], [0.4, 0.7], [0.05, 0.0]])
    a = kn.ks_kernel(T, x, np.zeros(2), s, "lattice_riesz")
    b = kn.ks_kernel(T, x, np.zeros(2), s, "subordination")
    assert np.allclose(a, b, rtol=1e-8)


def test_comparability_report(tmp_path):
    rows = kn.comparability_report(T1, 0.5, [0.01, 0.1, 0.5], tmp_path / "c.csv")
    ratios = [r["ratio"] for r in rows]
    # near the diagonal K d^{1+s} tends to alpha_{1,s}
    assert ratios[0] == pytest.approx(kn.alpha_ns(1, 0.5), rel=1e-2)
    assert all(r["method_gap"] < 1e-8 for r in rows)
    assert (tmp_path / "c.csv").read_text().startswith("separation,ratio,method_gap")


def test_epstein_zeta_one_dimension():
    assert kn.epstein_zeta(1, 1.5) == pytest.approx(2 * zeta(1.5), rel=1e-12)


def test_epstein_zeta_square_lattice():
    # sum over Z^2 minus origin of |m|^{-3}: 4 zeta(3/2) beta(3/2) with the Dirichlet beta
    m = np.arange(1, 200001)
    beta = np.sum((-1.0) ** (m - 1) / (2 * m - 1) ** 1.5)
    assert kn.epstein_zeta(2, 3.0) == pytest.approx(4 * zeta(1.5) * beta, rel=1e-8)


@pytest.mark.parametrize("quadrature", ["point", "cell"])
def test_kernel_table_shape_and_symmetry(quadrature):
    T = FlatTorus([1.0, 1.0])
    G = GridSpec([16, 16])
    tab = np.asarray(kn.kernel_table(T, G, 0.5, quadrature))
    assert tab.shape == (16, 16)
    assert tab[0, 0] == 0
    # even in each offset: T[j] = T[-j]
    assert np.allclose(tab, np.roll(tab[::-1, :], 1, axis=0))
    assert np.allclose(tab, tab.T)
    assert np.all(tab.flat[1:] > 0)


def test_point_table_matches_kernel_values():
    G = GridSpec([32])
    tab = np.asarray(kn.kernel_table(T1, G, 0.5, "point"))
    assert tab[8] == pytest.approx(KS_QUARTER[0.5], rel=1e-9)
