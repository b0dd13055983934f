import numpy as np
import pytest
from hypothesis import given, strategies as st

from fraclab.manifold import Ball, FlatTorus, GridSpec, SetIndicator, Stripe
from fraclab.perimeter import (classical_perimeter, isoperimetric_check, nmc, per_s, per_s_localized, per_s_pairs,
                               per_s_relative, s_to_1_limit_experiment, stripe_per_s_exact)

T1 = FlatTorus([1.0])
T2 = FlatTorus([1.0, 1.0])

# 4 int_0^{1/2} K_s(d) d dd with K_s from the Hurwitz-zeta form, by adaptive quadrature
HALF_STRIPE = {0.3: 1.0002671574352882, 0.5: 1.7156094074460462, 0.8: 5.5676980009184165}


@pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
def test_stripe_closed_form_matches_quadrature_oracle(s):
    assert stripe_per_s_exact(T1, Stripe(0, 0.25, 0.75), s) == pytest.approx(HALF_STRIPE[s], rel=1e-9)


@pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
def test_grid_perimeter_of_aligned_stripe(s):
    E = SetIndicator.from_shape(T1, GridSpec([512]), Stripe(0, 0.25, 0.75))
    assert per_s(E, s) == pytest.approx(HALF_STRIPE[s], rel=1e-10)
    E2 = SetIndicator.from_shape(T2, GridSpec([64, 64]), Stripe(1, 0.125, 0.625))
    assert per_s(E2, s) == pytest.approx(HALF_STRIPE[s], rel=1e-10)


def test_pairs_agree_with_symbol_on_pixel_sets():
    B = SetIndicator.from_shape(T2, GridSpec([32, 32]), Ball((0.4, 0.5), 0.2))
    E = SetIndicator(T2, B.grid, B.mask)
    assert per_s_pairs(E, 0.5) == pytest.approx(per_s(E, 0.5), rel=1e-10)


def test_disc_perimeter_bracket_narrows_under_refinement():
    # area-fraction cells: the quadratic form sits below, the pair form above
    gaps = []
    for N in (64, 256):
        E = SetIndicator.from_shape(T2, GridSpec([N, N]), Ball((0.4, 0.5), 0.2))
        lo, hi = per_s(E, 0.5), per_s_pairs(E, 0.5)
        assert lo < hi
        gaps.append(hi - lo)
    assert gaps[1] < 0.6 * gaps[0]


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))
def test_complement_and_translation_symmetry(seed, s):
    rng = np.random.default_rng(seed)
    G = GridSpec([16, 16])
    E = SetIndicator(T2, G, rng.random(G.shape) > 0.5)
    p = per_s(E, s)
    assert p >= 0
    assert per_s(E.complement(), s) == pytest.approx(p, rel=1e-12)
    shifted = SetIndicator(T2, G, np.roll(E.mask, (3, 5), axis=(0, 1)))
    assert per_s(shifted, s) == pytest.approx(p, rel=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_localized_bounded_by_relative_bounded_by_total(seed):
    rng = np.random.default_rng(seed)
    G = GridSpec([16, 16])
    E = SetIndicator(T2, G, rng.random(G.shape) > 0.5)
    Om = SetIndicator.from_shape(T2, G, Ball((0.5, 0.5), 0.3))
    loc = per_s_localized(E, Om, 0.5)
    rel = per_s_relative(E, Om, 0.5)
    assert -1e-12 <= loc <= rel + 1e-12
    assert rel <= per_s(E, 0.5) * (1 + 1e-12)


def test_homogeneity_under_dilation():
    s = 0.5
    a = per_s(SetIndicator.from_shape(T2, GridSpec([32, 32]), Stripe(0, 0.25, 0.75)), s)
    T = FlatTorus([3.0, 3.0])
    b = per_s(SetIndicator.from_shape(T, GridSpec([32, 32]), Stripe(0, 0.75, 2.25)), s)
    assert b == pytest.approx(3 ** (2 - s) * a, rel=1e-10)


def test_classical_perimeter():
    G = GridSpec([64, 64])
    assert classical_perimeter(SetIndicator.from_shape(T2, G, Stripe(0, 0.2, 0.6))) == 2.0
    assert classical_perimeter(SetIndicator.from_shape(T2, G, Ball((0.5, 0.5), 0.2))) == pytest.approx(0.4 * np.pi)
    sq = np.zeros((64, 64), bool)
    sq[10:20, 30:50] = True
    assert classical_perimeter(SetIndicator(T2, G, sq)) == pytest.approx(2 * (10 + 20) / 64)


def test_s_to_one_ratio_is_cauchy():
    E = SetIndicator.from_shape(T1, GridSpec([1024]), Stripe(0, 0.25, 0.75))
    r = {row.s: row.ratio for row in s_to_1_limit_experiment(E, [0.5, 0.7, 0.9, 0.95])}
    assert abs(r[0.95] - r[0.9]) < abs(r[0.7] - r[0.5])
    assert r[0.5] < r[0.7] < r[0.9] < r[0.95] < 1


def test_limit_experiment_exact_mode_requires_stripe():
    E = SetIndicator.from_shape(T2, GridSpec([16, 16]), Ball((0.5, 0.5), 0.2))
    with pytest.raises(ValueError):
        s_to_1_limit_experiment(E, [0.5], exact=True)


@pytest.mark.parametrize("torus,grid", [(T1, GridSpec([1024])), (T2, GridSpec([256, 256]))])
@pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
def test_nmc_of_stripe_boundary_is_zero(torus, grid, s):
    E = SetIndicator.from_shape(torus, grid, Stripe(0, 0.25, 0.75))
    x0 = [0.25] + [0.4] * (torus.dim - 1)
    r = nmc(E, x0, s)
    assert abs(r.value) <= r.error


def test_nmc_of_disc_is_negative_and_grows_with_curvature():
    G = GridSpec([256, 256])
    vals = []
    for rad in (0.2, 0.1):
        E = SetIndicator.from_shape(T2, G, Ball((0.5, 0.5), rad))
        r = nmc(E, [0.5 + rad, 0.5], 0.5)
        assert r.value + r.error < 0
        vals.append(r.value)
    assert vals[1] < vals[0]


def test_isoperimetric_ratio_positive_for_balanced_ball():
    E = SetIndicator.from_shape(T2, GridSpec([64, 64]), Stripe(0, 0.25, 0.75))
    row = isoperimetric_check(E, [0.25, 0.5], 0.15, 0.5)
    assert row.fraction == pytest.approx(0.5, abs=0.05)
    assert row.ratio > 0
