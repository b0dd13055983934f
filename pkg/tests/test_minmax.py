import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraclab import minmax as mm
from fraclab.allen_cahn import ACParams
from fraclab.manifold import FlatTorus, GridField, GridSpec, min_image

T1 = FlatTorus([1.0])
T2 = FlatTorus([1.0, 1.0])
T2R = FlatTorus([1.0, 1.5])


@settings(max_examples=15)
@given(st.sampled_from([T1, T2, T2R]), st.integers(1, 12), st.integers(0, 1000))
def test_cover_is_disjoint_covering_and_counted(torus, p, seed):
    c = mm.ball_cover(torus, p, seed)
    r = c.radius
    d = min_image(torus, c.centers[:, None, :] - c.centers[None, :, :])
    dist = np.sqrt(np.sum(d**2, axis=-1)) + np.eye(c.count) * 10
    assert dist.min() >= 2 * r - 1e-12
    lo, hi = c.count_bounds()
    assert lo <= c.count <= hi
    assert mm._verify_cover(c, 96)


def test_cover_is_seed_deterministic():
    a, b = mm.ball_cover(T2, 5, seed=3), mm.ball_cover(T2, 5, seed=3)
    assert np.array_equal(a.centers, b.centers)


def test_cover_rejects_bad_inputs():
    with pytest.raises(ValueError):
        mm.ball_cover(T1, 0)
    with pytest.raises(ValueError):
        mm.ball_cover(T1, 1, radius=0.3)


def test_virtual_axis_is_a_partition():
    G = GridSpec([64, 64])
    c = mm.ball_cover(T2, 4, 0)
    ax = mm.virtual_axis(c, G)
    assert ax.patch.min() == 0 and ax.patch.max() < c.count
    r3 = 3 * c.radius
    lo = r3 * (2 * ax.patch)
    assert np.all((ax.abscissa > lo - 1e-12) & (ax.abscissa < lo + 2 * r3 + 1e-12))


@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=8).filter(lambda a: abs(a[-1]) > 0.1))
def test_real_roots_match_polynomial_sign_changes(a):
    z = mm.real_roots(a)
    assert np.all(np.isfinite(z))
    x = np.linspace(-50, 50, 200001)
    v = np.polyval(np.asarray(a)[::-1], x)
    changes = np.sum(np.sign(v[1:]) * np.sign(v[:-1]) < 0)
    # double roots give no sign change; every change is a listed root
    assert changes <= len(z)
    for zi in z:
        assert abs(np.polyval(np.asarray(a)[::-1], zi)) < 1e-6 * (1 + np.sum(np.abs(a)) * (1 + abs(zi)) ** len(a))


def test_constant_polynomial_is_constant_member():
    G = GridSpec([64])
    c = mm.ball_cover(T1, 3, 0)
    m = mm.sweepout_member(T1, G, c, [1.0, 0, 0, 0])
    assert np.all(m.u.values == 1)
    with pytest.raises(ValueError):
        mm.sweepout_member(T1, G, c, [2.0, 0, 0, 0])


@settings(max_examples=15)
@given(st.integers(1, 6), st.integers(0, 2**31))
def test_sweepout_is_odd_with_even_energy(p, seed):
    G = GridSpec([32, 32])
    c = mm.ball_cover(T2, p, 0)
    a = np.random.default_rng(seed).standard_normal(p + 1)
    a /= np.linalg.norm(a)
    up = mm.sweepout_member(T2, G, c, a).u
    um = mm.sweepout_member(T2, G, c, -a).u
    assert np.array_equal(um.values, -up.values)
    en = mm._sharp_energy_fn(T2, G, 0.5)
    assert en(up) == pytest.approx(en(um), rel=1e-13)


def test_sphere_points_are_unit_and_deterministic():
    P = mm.sphere_points(4, 100, 7)
    assert np.allclose(np.linalg.norm(P, axis=1), 1)
    assert np.array_equal(P, mm.sphere_points(4, 100, 7))


def test_sample_size_guard():
    with pytest.raises(ValueError):
        mm.sweepout_max_energy(T1, GridSpec([64]), 3, 0.5, sphere_samples=39)


def test_doubling_samples_never_lowers_max():
    # Sobol prefixes are nested, so the larger sample contains the smaller
    G = GridSpec([128])
    a = mm.sweepout_max_energy(T1, G, 3, 0.5, 64, seed=2)
    b = mm.sweepout_max_energy(T1, G, 3, 0.5, 128, seed=2)
    assert b.max_energy >= a.max_energy


def test_sharp_and_diffuse_modes_agree_on_sign_fields():
    G = GridSpec([128])
    a = mm.sweepout_max_energy(T1, G, 2, 0.5, 30, seed=0)
    b = mm.sweepout_max_energy(T1, G, 2, 0.5, 30, seed=0, epsilon=0.05)
    assert b.max_energy == pytest.approx(a.max_energy, rel=1e-12)


def test_scaling_report_and_files(tmp_path):
    G = GridSpec([64])
    rep = mm.scaling_experiment(T1, G, [1, 2, 3, 4], 0.5, sphere_samples=50)
    assert len(rep.rows) == 4 and rep.target == 0.5
    assert all(r.max_energy > 0 for r in rep.rows)
    rep.write(tmp_path / "s.csv", tmp_path / "s.json")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "p,N,r,max_energy,scaled" and len(lines) == 5
    assert json.loads((tmp_path / "s.json").read_text())["slope"] == rep.slope
    with pytest.raises(ValueError):
        mm.scaling_experiment(T1, G, [1, 2, 3], 0.5)


def test_fit_loglog_exact_power():
    x = np.array([1, 2, 4, 8.0])
    slope, err = mm.fit_loglog(x, 5 * x**0.25)
    assert slope == pytest.approx(0.25) and err < 1e-12


def test_borsuk_probe_balances_one_ball():
    G = GridSpec([64, 64])
    c = mm.ball_cover(T2, 1, 0)
    w = mm.borsuk_probe(T2, G, c, 1, 0.5, sphere_samples=200)
    assert w.max_average < 0.1
    assert w.ball_energies[0] > 0 and w.c0_fit > 0


def test_hausdorff():
    A = np.array([[0.1], [0.5]])
    assert mm.hausdorff(T1, A, A) == 0
    assert mm.hausdorff(T1, A, np.array([[0.95], [0.5]])) == pytest.approx(0.15)


def test_interface_points_of_stripe():
    G = GridSpec([64])
    x = np.arange(64) / 64
    u = GridField(T1, G, np.where((x > 0.25) & (x < 0.75), 1.0, -1.0))
    pts = np.sort(mm.interface_points(u)[:, 0])
    assert np.allclose(pts, [0.25 + 1 / 128, 0.75 - 1 / 128], atol=1 / 64)


@pytest.fixture(scope="module")
def pass_report():
    G = GridSpec([256])
    p = ACParams(0.5, 0.05)
    up = GridField(T1, G, np.ones(256))
    return mm.mountain_pass(up.with_values(-up.values), up, p, nodes=16, sweeps=60), p


def test_mountain_pass_invariants(pass_report):
    rep, p = pass_report
    assert all(b <= a + 1e-12 for a, b in zip(rep.path_max_history, rep.path_max_history[1:]))
    assert rep.residual < p.tol_residual
    assert 0 < rep.saddle_energy <= rep.initial_max
    assert rep.index == 1


def test_mountain_pass_rejects_noncritical_endpoints():
    G = GridSpec([64])
    u = GridField(T1, G, np.full(64, 0.5))
    with pytest.raises(ValueError):
        mm.mountain_pass(u, u.with_values(np.ones(64)), ACParams(0.5, 0.05))


def test_epsilon_limit_rows_are_flagged():
    G = GridSpec([512])
    rows = mm.epsilon_limit_experiment(T1, G, 1, 0.5, [0.08, 0.04], seed=0)
    assert [r.epsilon for r in rows] == [0.08, 0.04]
    for r in rows:
        assert r.converged == (r.residual < ACParams(0.5, r.epsilon).tol_residual)
        assert r.sobolev > 0 and r.potential > 0
    with pytest.raises(ValueError):
        mm.epsilon_limit_experiment(T1, G, 1, 0.5, [0.04, 0.08])
