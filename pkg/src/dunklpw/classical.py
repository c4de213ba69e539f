"""Classical Fourier analysis, written independently of the Dunkl code.

Used as the reference for ``k = 0``: kernel ``exp(i lambda x)``,
transform ``(2 pi)^(-1/2) int f(x) exp(-i lambda x) dx``.  Integrals go
through QUADPACK (``scipy.integrate.quad``, with the Fourier weight for
oscillatory integrands) or plain composite Gauss-Legendre built here, never
through the package's own quadrature, kernel or Chebyshev machinery.
"""

import math
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad as _quad
from scipy.optimize import brentq, minimize_scalar

SQRT2PI = math.sqrt(2 * math.pi)
EPS = 1e-14


def quad(*args, **kw):
    # tolerances are set at the rounding floor; QUADPACK reports that, harmlessly
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return _quad(*args, **kw)


def kernel(lam, x):
    return np.exp(1j * np.multiply(lam, x))


def _pieces(X, breakpoints):
    cuts = sorted({-X, X, *(b for b in breakpoints if -X < b < X), *(-b for b in breakpoints if -X < -b < X)})
    if -X < 0 < X:
        cuts = sorted(set(cuts) | {0.0})
    return list(zip(cuts[:-1], cuts[1:]))


def transform(f, lambdas, X, breakpoints=()):
    """Fourier transform of ``f`` supported in ``[-X, X]`` at real ``lambdas``."""
    out = []
    for lam in np.atleast_1d(lambdas):
        re = im = 0.0
        for a, b in _pieces(X, breakpoints):
            if lam == 0:
                re += quad(f, a, b, epsabs=EPS, epsrel=EPS, limit=400)[0]
                continue
            re += quad(f, a, b, weight="cos", wvar=lam, epsabs=EPS, limit=400)[0]
            im -= quad(f, a, b, weight="sin", wvar=lam, epsabs=EPS, limit=400)[0]
        out.append(complex(re, im) / SQRT2PI)
    return np.array(out)


def gauss_rule(a, b, panels, order=48):
    t, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    return ((hi - lo) / 2 * t + (hi + lo) / 2).ravel(), ((hi - lo) / 2 * w).ravel()


def composite_rule(cuts, width, order=48):
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        x, w = gauss_rule(a, b, max(1, math.ceil((b - a) / width)), order)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def transform_complex(f, zs, X, breakpoints=(), width=0.05):
    """Fourier transform at complex points by composite Gauss-Legendre."""
    cuts = sorted({c for ab in _pieces(X, breakpoints) for c in ab})
    x, w = composite_rule(cuts, width)
    fw = f(x) * w
    return np.array([np.sum(fw * np.exp(-1j * z * x)) for z in np.atleast_1d(zs)]) / SQRT2PI


def inverse(g, xs, Lam, breakpoints=()):
    """Inverse transform of ``g`` supported in ``[-Lam, Lam]``: ``F g(-x)``."""
    return transform(g, -np.asarray(xs, dtype=float), Lam, breakpoints)


def inner(f, g, X, breakpoints=()):
    """Bilinear ``int f g dx`` over ``[-X, X]``."""
    tot = 0j
    for a, b in _pieces(X, breakpoints):
        re = quad(lambda x: np.real(f(x) * g(x)), a, b, epsabs=EPS, epsrel=EPS, limit=400)[0]
        im = quad(lambda x: np.imag(f(x) * g(x)), a, b, epsabs=EPS, epsrel=EPS, limit=400)[0]
        tot += complex(re, im)
    return tot


def _sup(h, x):
    """Max of ``|h|`` over a sample grid, refined around the largest samples."""
    v = np.abs(h(x))
    best = float(np.max(v))
    for j in np.argsort(-v, kind="stable")[:8]:
        lo, hi = x[max(j - 1, 0)], x[min(j + 1, x.size - 1)]
        r = minimize_scalar(lambda s: -abs(h(np.array([s]))[0]), bounds=(lo, hi), method="bounded",
                            options={"xatol": 1e-12})
        best = max(best, -r.fun)
    return best


def lp_norm(f, p, X, breakpoints=()):
    if math.isinf(p):
        return _sup(f, np.linspace(-X, X, 20001))
    tot = 0.0
    for a, b in _pieces(X, breakpoints):
        tot += quad(lambda x: abs(f(x)) ** p, a, b, epsabs=EPS, epsrel=1e-13, limit=1000)[0]
    return tot ** (1 / p)


class BandLimitedPowers:
    """``f_n = F^{-1}((i lambda)^n g)`` for an even profile ``g`` on ``[-R, R]``.

    ``g`` even makes ``i^-n f_n`` real: a cosine integral for even ``n`` and
    a sine integral for odd ``n``.
    """

    def __init__(self, g, R, breakpoints=(), panels=64):
        cuts = sorted({0.0, R, *(b for b in breakpoints if 0 < b < R)})
        self.lam, w = composite_rule(cuts, R / panels, order=64)
        self.gw = g(self.lam) * w * (2 / SQRT2PI)

    def real_part(self, n, x):
        """A real function of ``x`` with the same modulus as ``f_n``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        trig = np.cos if n % 2 == 0 else np.sin
        out = np.empty(x.size)
        for s in range(0, x.size, 2048):
            out[s:s + 2048] = trig(np.outer(x[s:s + 2048], self.lam)) @ (self.lam ** n * self.gw)
        return out

    def norm(self, n, p, X, step=0.02):
        """``||f_n||_p`` over ``[-X, X]`` using evenness of ``|f_n|``."""
        h = lambda x: self.real_part(n, x)
        x = np.arange(0.0, X + step / 2, step)
        v = h(x)
        if math.isinf(p):
            return _sup(h, x)
        cuts = [0.0]
        if p == 1:
            for j in np.nonzero(np.sign(v[1:]) * np.sign(v[:-1]) < 0)[0]:
                cuts.append(brentq(lambda s: h([s])[0], x[j], x[j + 1], xtol=1e-15, rtol=1e-15))
        cuts.append(X)
        xs, ws = composite_rule(cuts, 0.5, order=40)
        return float(2 * np.sum(np.abs(h(xs)) ** p * ws)) ** (1 / p)
