import math

import numpy as np
import pytest

from dunklpw import (BandLimited, Bump, Gaussian, Indicator, PolyGaussian, QuadratureGrid,
                     SpectralProfile, WeightedMeasure, Zero, cheb_fit, dunkl_apply, dunkl_transform,
                     inverse_transform, lp_norm, spectral_power_norm, weight_constant,
                     weight_constant_closed, weighted_inner)
from dunklpw.kernel import Multiplicity

SQRT2PI = math.sqrt(2 * math.pi)


# --- weight constant ------------------------------------------------------------


@pytest.mark.parametrize("k, expect", [(0, SQRT2PI), (0.5, 2.0), (1, SQRT2PI)])
def test_weight_constant_examples(k, expect):
    assert abs(weight_constant(k) - expect) <= 1e-12


@pytest.mark.parametrize("k", [0.25, 1.3, 2.9, 1 + 0.7j, 0.1 - 2j])
def test_weight_constant_matches_closed_form(k):
    assert abs(weight_constant(k) - weight_constant_closed(k)) <= 1e-13 * abs(weight_constant_closed(k))


def test_weighted_measure_density():
    m = WeightedMeasure(Multiplicity(1, 0.5))
    x = np.array([-2.0, 0.5])
    assert np.allclose(m.density(x), np.abs(x) ** (2 + 1j))
    assert np.allclose(WeightedMeasure(Multiplicity(1, 0.5), use_abs=True).density(x), x ** 2)


# --- forward transform ----------------------------------------------------------


def test_gaussian_transform_k0():
    v = dunkl_transform(0, Gaussian(1), [1.0]).values[0]
    assert abs(v - math.exp(-0.5)) <= 1e-12


@pytest.mark.parametrize("k", [0, 0.5, 1.3, 1 + 0.7j])
def test_transform_at_zero_is_weighted_mean(k):
    f = Bump(1, 0.5)
    v = dunkl_transform(k, f, [0.0]).values[0]
    g = QuadratureGrid(Multiplicity.of(k).re, 1.0, b=Multiplicity.of(k).im, order=48, panel=0.05,
                       breakpoints=(0.5,))
    assert abs(v - g.integrate(f(g.nodes)) / weight_constant(k)) <= 1e-12


def test_indicator_transform_k0():
    v = dunkl_transform(0, Indicator(1), [2.0]).values[0]
    assert abs(v - math.sqrt(2 / math.pi) * math.sin(2) / 2) <= 1e-12


@pytest.mark.parametrize("k", [0, 0.5, 1, 1.7])
def test_gaussian_fixed_point(k):
    lam = np.linspace(-10, 10, 81)
    v = dunkl_transform(k, Gaussian(1), lam).values
    assert np.max(np.abs(v - np.exp(-lam ** 2 / 2))) <= 1e-6


def test_scaled_gaussian_closed_form():
    for k in (0.5, 1 + 0.7j):
        lam = np.linspace(-5, 5, 21)
        v = dunkl_transform(k, Gaussian(0.6), lam).values
        ref = Gaussian(0.6).transform(Multiplicity.of(k))(lam)
        assert np.max(np.abs(v - ref)) <= 1e-12


def test_transform_bounded_by_l1():
    for k in (0.5, 1.3):
        f = PolyGaussian([1, -2, 0.5], 1.2)
        lam = np.linspace(-20, 20, 101)
        prof = dunkl_transform(k, f, lam)
        bound = lp_norm(k, f, 1) / abs(weight_constant(k))
        assert np.max(np.abs(prof.values)) <= bound + 1e-9


def test_complex_lambda_needs_compact_support():
    with pytest.raises(ValueError):
        dunkl_transform(0.5, Gaussian(1), [1 + 1j])
    v = dunkl_transform(0, Indicator(1), [1j]).values[0]
    assert abs(v - 2 * math.sinh(1) / SQRT2PI) <= 1e-12


def test_transform_records_quadrature():
    prof = dunkl_transform(0.5, Gaussian(1), [1.0, 2.0])
    assert prof.truncation_radius > 8 and prof.defect <= 1e-10
    assert prof.meta["grid"]["order"] == 48


# --- inverse ----------------------------------------------------------------------


def test_inverse_roundtrip_gaussian_half():
    k = 0.5
    prof = dunkl_transform(k, Gaussian(1), QuadratureGrid(k, 12.0, panel=0.25))
    x = np.linspace(-4, 4, 41)
    assert np.max(np.abs(inverse_transform(k, prof, x) - np.exp(-x ** 2 / 2))) <= 1e-6


def test_inverse_of_even_is_even_and_zero_is_zero():
    g = Bump(2, 0.5)
    x = np.linspace(-5, 5, 21)
    v = inverse_transform(1.3, g, x)
    assert np.allclose(v, v[::-1], rtol=0, atol=1e-14)
    assert np.all(inverse_transform(1.3, Zero(), x) == 0)


def test_inverse_equals_transform_at_minus_x():
    f = cheb_fit(lambda x: (1 + x) * Bump(1, 0.3)(x), 1.0, 96)
    x = np.linspace(-3, 3, 13)
    # x is symmetric, so the transform at -x is the transform on x read backwards
    assert np.allclose(inverse_transform(0.7, f, x), dunkl_transform(0.7, f, x).values[::-1], atol=1e-15)


# --- inner products and norms -----------------------------------------------------


def test_weighted_inner_examples():
    assert abs(weighted_inner(0, Indicator(1), Indicator(1)) - 2) <= 1e-14
    assert abs(weighted_inner(0.5, Indicator(1), Indicator(1)) - 1) <= 1e-14
    odd, even = PolyGaussian([0, 1, 0, 3]), PolyGaussian([2, 0, 1])
    assert abs(weighted_inner(1.3, odd, even)) <= 1e-14


def test_weighted_inner_is_bilinear():
    f = PolyGaussian([1, 1j])
    v = weighted_inner(0, f, f)
    # (1 + ix)^2 = 1 - x^2 + 2ix: int (1 - x^2) e^{-x^2} = sqrt(pi) / 2
    assert abs(v - math.sqrt(math.pi) / 2) <= 1e-13


@pytest.mark.parametrize("k", [0, 0.5, 1.3, 1 + 0.7j])
def test_lp_norm_indicator(k):
    a = Multiplicity.of(k).re
    assert abs(lp_norm(k, Indicator(1), 1) - 2 / (2 * a + 1)) <= 1e-13
    assert abs(lp_norm(k, Indicator(1), 2) - math.sqrt(2 / (2 * a + 1))) <= 1e-13


def test_lp_norm_sup_and_errors():
    assert lp_norm(0.5, Gaussian(1), math.inf) == 1.0
    with pytest.raises(ValueError):
        lp_norm(1 + 1j, Gaussian(1), 2, use_abs=False)
    with pytest.raises(ValueError):
        lp_norm(0, Gaussian(1), 0.5)


def test_lp_norm_p1_of_sign_changing_function():
    f = PolyGaussian([-1, 0, 1])       # (x^2 - 1) e^{-x^2/2}
    # int |x^2 - 1| e^{-x^2/2} = 4 e^{-1/2} for k = 0
    assert abs(lp_norm(0, f, 1) - 4 * math.exp(-0.5)) <= 1e-12


# --- profiles -----------------------------------------------------------------------


def test_profile_invariants():
    with pytest.raises(ValueError):
        SpectralProfile(np.array([0.0, 0.0]), np.array([1, 2]), 0)
    with pytest.raises(ValueError):
        SpectralProfile(np.array([0.0, 1.0]), np.array([1, np.nan]), 0)


def test_profile_csv_json_roundtrip(tmp_path):
    prof = dunkl_transform((1, 0.7), Gaussian(1), np.linspace(-3, 3, 7))
    prof.to_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "lambda,value_re,value_im"
    back = SpectralProfile.from_csv(tmp_path / "p.csv", prof.k)
    assert np.array_equal(back.values, prof.values) and np.array_equal(back.grid, prof.grid)
    prof.to_json(tmp_path / "p.json")
    back = SpectralProfile.from_json(tmp_path / "p.json")
    assert back.k == prof.k and np.array_equal(back.values, prof.values)
    assert set(prof.to_dict()) == {"k", "grid", "values", "provenance", "truncation_radius"}


# --- band-limited functions -----------------------------------------------------------


@pytest.mark.parametrize("k", [0, 1.3])
def test_band_limited_value_at_origin(bl_cache, k):
    bl = bl_cache(k)
    g = bl.g
    expect = np.sum(g.values * g.wk) / weight_constant(k)
    assert bl(np.array([0.0]))[0] == pytest.approx(expect, rel=1e-14)
    assert expect.real > 0


def test_indicator_profile_gives_sinc():
    R = 1.5
    q = QuadratureGrid(0.0, R, panel=0.1)
    prof = SpectralProfile(q.nodes, np.ones(q.size), 0, "synthetic-g", R, q.weights)
    bl = BandLimited(prof, R, window=20)
    x = np.linspace(0.1, 8, 40)
    assert np.max(np.abs(bl(x) - math.sqrt(2 / math.pi) * np.sin(R * x) / x)) <= 1e-12


@pytest.mark.parametrize("k", [0, 0.5, 1.3])
def test_spectral_power_norm_examples(bl_cache, k):
    bl = bl_cache(k)
    assert spectral_power_norm(k, bl, 0, 2) == pytest.approx(lp_norm(k, bl, 2), rel=1e-15)
    proxy = cheb_fit(bl, bl.window, int(2 * bl.lam_max * bl.window) + 64)
    direct = lp_norm(k, dunkl_apply(k, proxy), 2)
    assert abs(spectral_power_norm(k, bl, 1, 2) - direct) <= 1e-6 * direct
    g = bl.g
    for n in (1, 5, 20):
        bound = np.sum(np.abs(g.grid) ** n * np.abs(g.values) * g.weights) / abs(weight_constant(k))
        assert spectral_power_norm(k, bl, n, math.inf) <= bound
