import numpy as np
import pytest

from dunklpw import (Bump, ChebProxy, Gaussian, Indicator, InstabilityError, PolyGaussian, Zero,
                     cheb_fit, differentiate, dunkl_apply, dunkl_power, moment_average, odd_div_x,
                     reflect, sup_norm)
from dunklpw.funcrep import smoothstep

X = np.linspace(-1, 1, 2001)


# --- cheb_fit -----------------------------------------------------------------


def test_fit_even_function_has_no_odd_part():
    f = cheb_fit(lambda x: x ** 2, 3.0, 10)
    assert np.max(np.abs(f.odd_coeffs), initial=0) <= 1e-15
    assert f.parity == 0


def test_fit_odd_function_has_no_even_part():
    f = cheb_fit(lambda x: x ** 3, 1.0, 7)
    assert np.max(np.abs(f.even_coeffs)) <= 1e-15
    assert f.parity == 1


def test_fit_bump_spec_accuracy():
    """Bump(1, 0.5) at N = 128 to 1e-10 (documented target).

    Known unattainable: a bump that is flat to all orders converges
    sub-geometrically in a polynomial basis; the achieved error is ~6.5e-6.
    """
    f = cheb_fit(Bump(1, 0.5), 1.0, 128)
    x = np.linspace(-1, 1, 10_000)
    assert np.max(np.abs(f(x) - Bump(1, 0.5)(x))) <= 1e-10


def test_fit_bump_converges_with_degree():
    x = np.linspace(-1, 1, 10_000)
    errs = [np.max(np.abs(cheb_fit(Bump(1, 0.5), 1.0, n)(x) - Bump(1, 0.5)(x))) for n in (64, 128, 256)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] < 1e-5 and errs[2] < 1e-7


def test_fit_rejects_nonfinite_and_small_degree():
    with pytest.raises(ValueError):
        cheb_fit(lambda x: 1 / x, 1.0, 8)
    with pytest.raises(ValueError):
        cheb_fit(np.cos, 1.0, 1)


def test_proxy_is_zero_outside_and_parity_exact():
    f = cheb_fit(np.exp, 1.0, 30)
    assert f(np.array([1.5, -2.0])).tolist() == [0.0, 0.0]
    x = np.linspace(0, 1, 101)
    E, O = f.parts(x)
    assert np.array_equal(f(-x), E - O)


# --- differentiate / reflect / odd_div_x -------------------------------------------------


def test_differentiate_constant_is_zero():
    d = differentiate(cheb_fit(lambda x: 3.0 + 0 * x, 1.0, 4))
    assert np.all(d(X) == 0)


def test_differentiate_square():
    d = differentiate(cheb_fit(lambda x: x ** 2, 2.0, 6))
    x = np.linspace(-2, 2, 101)
    assert np.max(np.abs(d(x) - 2 * x)) <= 1e-12


def test_differentiate_sine():
    d = differentiate(cheb_fit(np.sin, np.pi, 64))
    x = np.linspace(-np.pi, np.pi, 1001)
    assert np.max(np.abs(d(x) - np.cos(x))) <= 1e-10
    assert d.parity == 0


def test_reflect():
    even = cheb_fit(np.cos, 1.0, 20)
    odd = cheb_fit(np.sin, 1.0, 20)
    assert np.array_equal(reflect(even).coeffs, even.coeffs)
    assert np.array_equal(reflect(odd).coeffs, -odd.coeffs)
    e = cheb_fit(np.exp, 1.0, 30)
    assert abs(reflect(e)(0.3) - e(-0.3)) <= 1e-12


def test_odd_div_x_examples():
    h = odd_div_x(cheb_fit(lambda x: x ** 3, 1.0, 5))
    assert np.max(np.abs(h(X) - X ** 2)) <= 1e-12
    z = odd_div_x(cheb_fit(np.cos, 1.0, 16))
    assert np.all(z(X) == 0)
    s = odd_div_x(cheb_fit(np.sin, 3.0, 64))
    x = np.linspace(-3, 3, 1001)
    assert np.max(np.abs(s(x) - np.sinc(x / np.pi))) <= 1e-10


# --- dunkl_apply / dunkl_power --------------------------------------------------------------


@pytest.mark.parametrize("k", [0, 0.5, 1.3, 1 + 0.7j])
def test_dunkl_apply_on_monomials(k):
    lin = dunkl_apply(k, cheb_fit(lambda x: x, 1.0, 3))
    assert np.max(np.abs(lin(X) - (1 + 2 * k))) <= 1e-13
    sq = dunkl_apply(k, cheb_fit(lambda x: x ** 2, 1.0, 4))
    assert np.max(np.abs(sq(X) - 2 * X)) <= 1e-13


def test_dunkl_apply_k0_is_derivative():
    f = cheb_fit(lambda x: np.exp(x) * np.sin(3 * x), 1.0, 40)
    assert np.array_equal(dunkl_apply(0, f).coeffs, differentiate(f).coeffs)


def test_dunkl_apply_flips_parity():
    for f in (cheb_fit(np.cos, 1.0, 20), cheb_fit(np.sin, 1.0, 20)):
        assert dunkl_apply(0.7, f).parity == 1 - f.parity


def test_dunkl_apply_closed_form_matches_proxy():
    g = PolyGaussian([0.3, -1.0, 0.5, 0.2], 0.8)
    proxy = cheb_fit(g, 6.0, 120)
    for k in (0.5, 1 + 0.7j):
        x = np.linspace(-3, 3, 301)
        assert np.max(np.abs(dunkl_apply(k, g)(x) - dunkl_apply(k, proxy)(x))) <= 1e-10


def test_dunkl_apply_refuses_indicator_and_unknown():
    with pytest.raises(ValueError):
        dunkl_apply(0.5, Indicator(1))
    with pytest.raises(TypeError):
        dunkl_apply(0.5, Bump(1, 0.5))


def test_dunkl_power_examples():
    f = cheb_fit(lambda x: x ** 2, 1.0, 4)
    assert dunkl_power(1, f, 0) is f
    six = dunkl_power(1, f, 2)
    assert np.max(np.abs(six(X) - 6)) <= 1e-13
    assert len(six.step_losses) == 2


def test_dunkl_power_bump_matches_repeated_derivative():
    f = cheb_fit(Bump(1, 0.5), 1.0, 128)
    d = differentiate(differentiate(differentiate(f)))
    p = dunkl_power(0, f, 3)
    assert np.max(np.abs(p(X) - d(X))) <= 1e-8 * np.max(np.abs(d(X)))


def test_dunkl_power_budget_and_partial_results():
    f = cheb_fit(lambda x: np.exp(-40 * x ** 2), 1.0, 40)     # under-resolved on purpose
    with pytest.raises(InstabilityError) as err:
        dunkl_power(0.5, f, 6, max_tail=1e-8)
    assert err.value.partial[0] is f
    with pytest.raises(InstabilityError) as err:
        dunkl_power(0.5, cheb_fit(np.cos, 1.0, 40), 3, budget=1e-30, trim_tol=1e-3)
    assert len(err.value.losses) >= 1


# --- moment_average / sup_norm -------------------------------------------------------------


def test_moment_average_examples():
    one = moment_average(cheb_fit(lambda x: 1 + 0 * x, 1.0, 2), 0)
    assert np.max(np.abs(one(X) - 2)) <= 1e-14
    zero = moment_average(cheb_fit(lambda x: x, 1.0, 2), 0)
    assert np.max(np.abs(zero(X))) <= 1e-15
    third = moment_average(cheb_fit(lambda x: x, 1.0, 2), 1)
    assert np.max(np.abs(third(X) - 2 * X / 3)) <= 1e-15


def test_sup_norm_examples():
    assert abs(sup_norm(Gaussian(1)) - 1) <= 1e-15
    assert abs(sup_norm(cheb_fit(lambda x: x, 2.0, 2), 2.0) - 2) <= 1e-14
    assert sup_norm(Bump(1, 0.5)) == 1.0


def test_sup_norm_finds_offgrid_peak():
    f = PolyGaussian([0, 1], 1)          # x e^{-x^2/2}, max e^{-1/2} at x = 1
    assert abs(sup_norm(f, n_grid=64) - np.exp(-0.5)) <= 1e-14


# --- closed forms ---------------------------------------------------------------------------


def test_bump_shape():
    b = Bump(2.0, 0.5)
    x = np.linspace(-3, 3, 6001)
    v = b(x)
    assert np.all(v[np.abs(x) <= 1.0] == 1) and np.all(v[np.abs(x) >= 2.0] == 0)
    assert np.all((v >= 0) & (v <= 1))
    # flat to all orders at the edge
    assert b(np.array([1.98]))[0] < 1e-20


def test_smoothstep_symmetry():
    t = np.linspace(0, 1, 101)
    assert np.allclose(smoothstep(t) + smoothstep(1 - t), 1, atol=1e-15)


def test_polygaussian_derivative_and_parity():
    g = PolyGaussian([1.0, 0.0, 2.0], 1.5)
    h = 1e-5
    x = np.linspace(-3, 3, 31)
    fd = (g(x + h) - g(x - h)) / (2 * h)
    assert np.max(np.abs(g.derivative()(x) - fd)) <= 1e-8
    assert g.parity == 0 and g.derivative().parity == 1


def test_zero_function():
    z = Zero()
    assert np.all(z(X) == 0)
    assert isinstance(z, ChebProxy) is False
