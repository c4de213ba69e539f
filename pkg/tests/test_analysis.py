import math

import numpy as np
import pytest
from scipy.special import gamma

from dunklpw import (INF, BangSequence, Bump, Gaussian, InstabilityError, PolyGaussian, SpectralProfile,
                     Zero, bang_sequence, cheb_fit, dunkl_transform, gamma_ratio_factor,
                     growth_certify, identity_suite, lp_norm, support_radius, upper_bound_curve)
from dunklpw.analysis import (axis_ratios, gamma_ratio_violations, lemma_induction_defect,
                              liminf_check, moment_commutation_defect)
from dunklpw.kernel import Multiplicity


# --- closed-form factors ---------------------------------------------------------


def test_upper_bound_curve_examples():
    assert upper_bound_curve(2.0, 1.5, 0, 1) == pytest.approx(2.0 * math.e * 1.5, rel=1e-14)
    # Gamma(5) / (2^2 Gamma(3)) = 3
    assert upper_bound_curve(1.0, 1.0, 1, 2) == pytest.approx(3 * math.e ** 2, rel=1e-14)
    assert upper_bound_curve(1.0, 2.0, 1, 2) == pytest.approx(12 * math.e ** 2, rel=1e-14)


def test_upper_bound_curve_root_tends_to_R():
    roots = [upper_bound_curve(1.0, 1.0, 1.3, n) ** (1 / n) for n in (100, 1000, 10_000, 100_000)]
    assert all(b < a for a, b in zip(roots, roots[1:]))
    assert abs(roots[-1] - 1.0) <= 1e-3
    assert math.isfinite(upper_bound_curve(1.0, 1.0, 2, 5000))


def test_upper_bound_curve_rejects_bad_input():
    for args in ((0.0, 1, 0, 1), (1.0, 0, 0, 1), (1.0, 1, 0, 0)):
        with pytest.raises(ValueError):
            upper_bound_curve(*args)


def test_gamma_ratio_factor_examples():
    for n in (0, 1, 7, 40):
        assert gamma_ratio_factor(0, n) == pytest.approx(1.0, rel=1e-13)
    for k in (0.3, 1.3, 1 + 0.7j):
        assert gamma_ratio_factor(k, 1) == pytest.approx(1 + 2 * abs(k), rel=1e-13)
    assert gamma_ratio_factor(1, 2) == pytest.approx(6.0, rel=1e-14)
    assert gamma_ratio_factor(0.5, 4) == pytest.approx(gamma(6) / (gamma(5) * gamma(2)), rel=1e-13)
    with pytest.raises(ValueError):
        gamma_ratio_factor(0, -1)


# --- BangSequence ---------------------------------------------------------------------


def test_bang_sequence_invariants(tmp_path):
    with pytest.raises(ValueError):
        BangSequence(Multiplicity(0), 2.0, "spectral", [(2, 1.0, 1.0), (1, 1.0, 1.0)])
    with pytest.raises(ValueError):
        BangSequence(Multiplicity(0), 2.0, "spectral", [(1, 1.0, -1.0)])
    assert BangSequence.root(5, 0.0) == 0.0
    seq = BangSequence(Multiplicity(1, 0.5), math.inf, "spectral",
                       [(1, 2.0, 2.0), (2, 9.0, 3.0), (4, 16.0, 2.0)], INF)
    assert seq.richardson() == {1: 4.0, 2: 1.0}
    seq.to_csv(tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "n,norm,a_n,method,k_re,k_im,p,R_true"
    assert lines[1] == "1,2.0,2.0,spectral,1.0,0.5,inf,inf"


def test_bang_spectral_half_sup(bl_cache):
    seq = bang_sequence(0.5, bl_cache(0.5), math.inf, 64, ns=[4, 16, 64])
    a = [e[2] for e in seq.entries]
    assert abs(a[-1] - 1) < abs(a[0] - 1) and 0.85 <= a[-1] <= 1.05
    assert seq.R_true == 1.0


def test_bang_spectral_R2_p2(bl_cache):
    seq = bang_sequence(0, bl_cache(0, 2.0), 2, 64, ns=[64])
    assert abs(seq.a(64) - 2) <= 0.2


def test_bang_gaussian_diverges():
    seq = bang_sequence(0, Gaussian(1), math.inf, 64, ns=[8, 64])
    assert seq.a(64) >= 3 and seq.a(64) > seq.a(8)
    assert seq.R_true is INF
    # ||T^n G||_inf grows like the sup of lambda^n e^{-lambda^2/2} integrated, sqrt(n) up to constants
    assert seq.a(64) <= 2 * math.sqrt(64)


def test_bang_direct_matches_spectral_and_cap(bl_cache):
    bl = bl_cache(1.3)
    spectral = bang_sequence(1.3, bl, 2, 4)
    direct = bang_sequence(1.3, bl, 2, 4, method="direct")
    for (n, _, a), (_, _, b) in zip(spectral.entries, direct.entries):
        assert abs(a - b) <= 0.01 * a
    with pytest.raises(ValueError):
        bang_sequence(1.3, bl, 2, 9, method="direct")
    with pytest.raises(TypeError):
        bang_sequence(1.3, Bump(1, 0.5), 2, 4)


def test_bang_direct_instability_carries_partial():
    f = cheb_fit(lambda x: np.exp(-40 * x ** 2), 1.0, 40)
    with pytest.raises(InstabilityError) as err:
        bang_sequence(0.5, f, 2, 8, method="direct")
    assert isinstance(err.value.partial, BangSequence)


def test_bang_zero_function_records_zero():
    seq = bang_sequence(0, cheb_fit(lambda x: 0 * x, 1.0, 4), 2, 2, method="direct")
    assert [e[2] for e in seq.entries] == [0.0, 0.0]


# --- support radius ---------------------------------------------------------------------


def test_inf_sentinel_semantics():
    assert INF > 1e308 and INF >= math.inf and not INF < 5
    assert INF is type(INF)()
    with pytest.raises(TypeError):
        INF + 1
    with pytest.raises(TypeError):
        float(INF)


@pytest.mark.parametrize("k", [0, 0.5, 1.3])
def test_support_band_limited(bl_cache, k):
    est = support_radius(k, bl_cache(k))
    assert 0.95 <= est.radius <= 1.02 and not est.threshold_dependent


def test_support_gaussian_threshold_dependence():
    est = support_radius(0, Gaussian(1), lam_max=12.0)
    assert abs(est.radius - math.sqrt(2 * math.log(1e8))) <= 1e-8
    assert est.threshold_dependent
    assert support_radius(0, Gaussian(1), lam_max=5.0).radius is INF
    assert support_radius(0, Gaussian(1), lam_max=5.0).to_dict()["radius"] == "inf"


def test_support_zero_and_errors():
    assert support_radius(0.5, Zero(), lam_max=4.0).radius == 0.0
    with pytest.raises(ValueError):
        support_radius(0, Gaussian(1), eps=0, lam_max=3.0)
    with pytest.raises(ValueError):
        support_radius(0, Gaussian(1))


def test_support_scale_invariance_exact(bl_cache):
    bl = bl_cache(0.5)
    base = support_radius(0.5, bl).radius
    for c in (1e-7, -3.0, 2.5j, 1e9):
        assert support_radius(0.5, bl, scale=c).radius == base
    prof = dunkl_transform(0, Gaussian(1), np.linspace(0, 10, 401))
    ref = support_radius(0, prof).radius
    for c in (0.125, 8.0):
        scaled = SpectralProfile(prof.grid, prof.values * c, prof.k)
        assert support_radius(0, scaled).radius == ref


def test_support_compact_funcrep_is_not_threshold_dependent():
    est = support_radius(0, Bump(1, 0.5), eps=1e-3, lam_max=80.0, n_scan=401)
    assert 20 < est.radius < 80 and not est.threshold_dependent


# --- growth certificates -------------------------------------------------------------------


def test_certificate_bump_small_grid():
    c = growth_certify(0.5, Bump(1, 0.5), 1.0, n=0, tau_max=2.0, sigma_max=10.0, grid=(21, 9))
    assert math.isfinite(c.C_n) and c.stability <= 0.01 and c.valid
    d = c.to_dict()
    assert {"R", "n", "tau_max", "C_n", "stability", "grid"} <= set(d)


def test_certificate_tau_zero_is_real_sup():
    f = Bump(1, 0.5)
    c = growth_certify(0, f, 1.0, n=0, tau_max=0.0, sigma_max=10.0, grid=(41, 1))
    lam = np.linspace(0, 10, 2001)
    real_sup = np.max(np.abs(dunkl_transform(0, f, lam).values))
    assert c.C_n >= real_sup - 1e-12
    assert c.C_n <= real_sup * (1 + 1e-6)


def test_certificate_orders_and_errors():
    certs = growth_certify(0, Bump(1, 0.5), 1.0, n=[0, 2], tau_max=1.0, sigma_max=8.0, grid=(17, 5))
    assert [c.n for c in certs] == [0, 2] and certs[1].C_n > certs[0].C_n
    with pytest.raises(ValueError):
        growth_certify(0, Gaussian(1), 1.0)


def test_axis_ratio_rejects_false_type_far_out():
    ratios, increasing = axis_ratios(0.5, Bump(1, 0.5), 0.6, taus=(10, 20, 30))
    assert increasing and ratios[30.0] > ratios[10.0]
    ratios, increasing = axis_ratios(0.5, Bump(1, 0.5), 1.0, taus=(10, 20, 30))
    assert not increasing


# --- identities ------------------------------------------------------------------------------


def test_identity_suite_zero_family():
    out = identity_suite(0.5, family=[Zero()])
    assert set(out) == {"antisymmetry", "adjoint", "intertwining", "inversion", "plancherel",
                        "gaussian_fixed_point"}
    assert all(v == 0 for v in out.values())


def test_identity_suite_small_family_complex():
    fam = {"g": [Gaussian(1.0)], "p": [PolyGaussian([0.5, -1, 0.25], 1.0)],
           "c": [cheb_fit(lambda x: (1 + x) * Bump(1, 0.3)(x), 1.0, 96)]}
    out = identity_suite(1 + 0.7j, family=fam)
    assert "plancherel" not in out
    assert max(out.values()) <= 1e-6


# --- finite-n inequalities ----------------------------------------------------------------------


@pytest.mark.parametrize("k", [0.5, 1.3, 1 + 0.7j])
def test_lemma_induction(k):
    f = cheb_fit(lambda x: (1 + x - x ** 3) * Bump(1, 0.4)(x), 1.0, 128)
    for n in range(1, 6):
        assert lemma_induction_defect(k, f, n) <= 1e-6


@pytest.mark.parametrize("k", [0.5, 1 + 0.7j])
def test_moment_commutation(k):
    g = cheb_fit(lambda x: np.cos(2 * x) + x ** 3, 1.0, 40)
    for m in range(0, 6):
        assert moment_commutation_defect(k, g, m) <= 1e-6


def test_gamma_ratio_bound_bump():
    f = cheb_fit(Bump(1, 0.5), 1.0, 128)
    bad, worst = gamma_ratio_violations(1.3, f, n_max=6, grid=1001)
    assert bad == 0 and worst < 0


def test_liminf_inequality(bl_cache):
    assert liminf_check(bl_cache(0.5)) >= 0


def test_finite_n_upper_bound(bl_cache):
    bl = bl_cache(0.5)
    C = growth_certify(0.5, bl, bl.R, n=0, tau_max=0.0, sigma_max=bl.window, grid=(201, 1)).C_n
    ns = [1, 2, 4, 8, 16, 32, 64]
    norms = bl.norms(ns, math.inf)
    for n, v in zip(ns, norms):
        assert v <= upper_bound_curve(C, bl.R + 0.02, 0.5, n)


def test_monotone_gap(bl_cache):
    bl = bl_cache(1.3)
    for p in (1, 2, math.inf):
        seq = bang_sequence(1.3, bl, p, 64, ns=[16, 32, 64])
        gaps = [abs(a - 1) for _, _, a in seq.entries]
        # gaps below 5% of R are noise
        assert gaps[1] <= max(gaps[0], 0.05) and gaps[2] <= max(gaps[1], 0.05)


def test_lp_norm_matches_bang_norm(bl_cache):
    bl = bl_cache(0)
    assert lp_norm(0, bl, 2) == pytest.approx(bl.norms([0], 2)[0], rel=1e-12)
