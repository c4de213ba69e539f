import math

import numpy as np
import pytest
from scipy.special import gamma

from dunklpw import QuadratureError, QuadratureGrid
from dunklpw.quadrature import converge


@pytest.mark.parametrize("a", [0.0, 0.25, 0.5, 1.3])
def test_monomials_against_weight(a):
    g = QuadratureGrid(a, 2.0, panel=0.5)
    for m in (0, 2, 7, 20):
        exact = 2 * 2.0 ** (2 * a + m + 1) / (2 * a + m + 1) if m % 2 == 0 else 0.0
        got = g.integrate(g.nodes ** m, complex_weight=False)
        assert abs(got - exact) <= 1e-13 * max(1.0, abs(exact))


def test_weights_positive_and_half_grid():
    g = QuadratureGrid(0.7, 3.0, b=0.4, panel=0.3, breakpoints=(1.0,))
    assert np.all(g.weights > 0)
    h = QuadratureGrid(0.7, 3.0, panel=0.3, half=True)
    assert np.all(h.nodes > 0)
    full = QuadratureGrid(0.7, 3.0, panel=0.3)
    assert abs(2 * h.integrate(np.cos(h.nodes)) - full.integrate(np.cos(full.nodes))) <= 1e-14


def test_complex_weight_gaussian_moment():
    k = complex(1.0, 0.7)
    g = QuadratureGrid(k.real, 12.0, b=k.imag, panel=0.5)
    got = g.integrate(np.exp(-g.nodes ** 2 / 2))
    exact = 2 ** (k + 0.5) * gamma(k + 0.5)
    assert abs(got - exact) <= 1e-13 * abs(exact)


def test_breakpoints_respected():
    g = QuadratureGrid(0.0, 2.0, panel=1.0, breakpoints=(0.37,))
    step = np.where(np.abs(g.nodes) <= 0.37, 1.0, 0.0)
    assert abs(g.integrate(step) - 0.74) <= 1e-14


def test_abs_integral_exact_for_sign_changes():
    g = QuadratureGrid(0.5, 10.0, panel=2.0)
    f = np.sin(3.3 * g.nodes)
    # int_{-10}^{10} |sin(3.3 x)| |x| dx by splitting at the zeros
    zeros = np.arange(0, 10, math.pi / 3.3)
    edges = np.append(zeros, 10.0)
    t, w = np.polynomial.legendre.leggauss(60)
    ref = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
        ref += 0.5 * (hi - lo) * np.sum(w * np.abs(np.sin(3.3 * x)) * x)
    assert abs(g.abs_integral(f) - 2 * ref) <= 1e-12 * ref
    naive = g.integrate(np.abs(f), complex_weight=False)
    assert abs(naive - 2 * ref) > abs(g.abs_integral(f) - 2 * ref)


def test_abs_integral_vectorised_rows():
    g = QuadratureGrid(0.0, 4.0, panel=1.0)
    rows = np.stack([np.cos(g.nodes), -np.cos(g.nodes), np.ones(g.size)])
    out = g.abs_integral(rows)
    assert out.shape == (3,)
    assert out[0] == pytest.approx(out[1], rel=1e-15)
    assert out[2] == pytest.approx(8.0, rel=1e-15)


def test_converge_refines_then_raises():
    g = QuadratureGrid(0.0, 1.0, panel=1.0)
    vals, defect, used = converge(lambda q: q.integrate(np.cos(q.nodes)), g, 1e-12)
    assert abs(vals - 2 * math.sin(1.0)) <= 1e-14 and used.order == 48
    with pytest.raises(QuadratureError) as err:
        converge(lambda q: q.integrate(np.sign(q.nodes - 0.3)), g, 1e-14)
    assert err.value.defect > 0


def test_invalid_grid():
    with pytest.raises(ValueError):
        QuadratureGrid(-0.1, 1.0)
    with pytest.raises(ValueError):
        QuadratureGrid(0.0, 0.0)
