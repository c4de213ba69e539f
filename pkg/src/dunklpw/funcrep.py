"""Function representations on which the Dunkl operator acts exactly.

``ChebProxy`` is a Chebyshev interpolant on ``[-L, L]`` whose coefficients
are split by parity: ``T_m`` is even for even ``m`` and odd for odd ``m``.
Reflection therefore negates the odd coefficients, and the reflection part
of the Dunkl operator, ``(f(x) - f(-x)) / x = 2 * odd(x) / x``, is an exact
polynomial obtained from a banded solve in coefficient space.  Outside
``[-L, L]`` a proxy evaluates to zero.

The closed-form families (Gaussian, polynomial times Gaussian, smooth bump
and indicator) are the test functions used by the experiments.
"""

import math

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy.fft import dct
from scipy.optimize import minimize_scalar

from .errors import IllConditionedError, InstabilityError

TRIM_TOL = 1e-14
TRIM_BUDGET = 1e-6
SUP_GRID = 4096
SUP_REFINE = 8
ODD_DIV_RESIDUAL = 1e-10


class FuncRep:
    """Common interface: evaluation on all of R plus quadrature hints.

    ``extent(rel)`` is a half-width outside which ``|f|`` is zero (compact
    representations) or below ``rel`` times its peak; ``breakpoints`` are
    positive abscissae where smoothness may break; ``panel`` is a panel
    width over which a 32-point Gauss rule resolves ``f``.
    """

    compact = False
    parity = None
    breakpoints = ()
    panel = 1.0

    def __call__(self, x):
        raise NotImplementedError

    def extent(self, rel=1e-16):
        raise NotImplementedError


def _as_coeffs(c):
    c = np.atleast_1d(np.asarray(c))
    if not np.iscomplexobj(c):
        c = c.astype(float)
    return c


def _trim(c, tol):
    """Drop trailing coefficients below ``tol * max``; return (coeffs, loss)."""
    mags = np.abs(c)
    top = mags.max(initial=0.0)
    if top == 0.0:
        return c[:1] * 0, 0.0
    big = np.nonzero(mags > tol * top)[0]
    keep = big[-1] + 1
    loss = float(mags[keep:].sum() / top)
    return c[:keep], loss


class ChebProxy(FuncRep):
    """Parity-split Chebyshev interpolant on ``[-L, L]``, zero outside."""

    compact = True

    def __init__(self, L, coeffs, trim_tol=TRIM_TOL, trim_loss=0.0, nominal=None):
        if not L > 0:
            raise ValueError("half-width must be positive")
        c = _as_coeffs(coeffs)
        if c.size == 0:
            c = np.zeros(1)
        self.L = float(L)
        # length before trimming; a proxy that never trims is unresolved
        self.nominal = int(nominal if nominal is not None else c.size)
        self.trim_tol = float(trim_tol)
        self.coeffs, loss = _trim(c, trim_tol)
        self.coeffs.setflags(write=False)
        self.trim_loss = float(trim_loss) + loss
        self.breakpoints = (self.L,)
        self.panel = max(self.L * 16.0 / max(self.degree, 1), 1e-3 * self.L)

    @property
    def even_coeffs(self):
        return self.coeffs[0::2]

    @property
    def odd_coeffs(self):
        return self.coeffs[1::2]

    @property
    def degree(self):
        return self.coeffs.size - 1

    @property
    def parity(self):
        if not np.any(self.odd_coeffs):
            return 0
        if not np.any(self.even_coeffs):
            return 1
        return None

    def tail_ratio(self, fraction=1 / 16):
        """Largest coefficient in the top ``fraction`` of the nominal length, relative to the max.

        Zero when trimming removed that whole band, i.e. the proxy is resolved.
        """
        mags = np.abs(self.coeffs)
        top = mags.max(initial=0.0)
        start = int(self.nominal - math.ceil(self.nominal * fraction))
        if top == 0.0 or mags.size <= start:
            return 0.0
        return float(mags[start:].max() / top)

    def parts(self, x):
        """Even and odd parts at ``x``, evaluated at ``|x|`` so parity is exact."""
        x = np.asarray(x, dtype=float)
        t = np.abs(x) / self.L
        ev = np.zeros_like(self.coeffs)
        od = np.zeros_like(self.coeffs)
        ev[0::2] = self.even_coeffs
        od[1::2] = self.odd_coeffs
        inside = t <= 1.0
        tt = np.where(inside, t, 0.0)
        E = np.where(inside, C.chebval(tt, ev), 0.0)
        O = np.where(inside, np.sign(x) * C.chebval(tt, od), 0.0)
        return E, O

    def __call__(self, x):
        E, O = self.parts(x)
        return E + O

    def extent(self, rel=1e-16):
        return self.L

    def _new(self, coeffs, extra_loss=0.0, shrink=0):
        return ChebProxy(self.L, coeffs, self.trim_tol, self.trim_loss + extra_loss,
                         max(self.nominal - shrink, 1))

    def __add__(self, other):
        if not isinstance(other, ChebProxy) or other.L != self.L:
            return NotImplemented
        n = max(self.coeffs.size, other.coeffs.size)
        return self._new(np.pad(self.coeffs, (0, n - self.coeffs.size))
                         + np.pad(other.coeffs, (0, n - other.coeffs.size)), other.trim_loss)

    def __mul__(self, s):
        return self._new(self.coeffs * s)

    __rmul__ = __mul__

    def __repr__(self):
        return f"ChebProxy(L={self.L:g}, degree={self.degree})"


def cheb_fit(f, L, N, trim_tol=TRIM_TOL):
    """Degree-``N`` interpolant of ``f`` at the extrema nodes ``L cos(pi j / N)``.

    The nodes are mirrored exactly and the samples split into even and odd
    parts before the transform, so even (odd) functions get exactly zero
    odd (even) coefficients.
    """
    N = int(N)
    if N < 2:
        raise ValueError("cheb_fit needs N >= 2")
    x = L * np.cos(np.pi * np.arange(N + 1) / N)
    half = (N + 1) // 2
    x[N - half + 1:] = -x[:half][::-1]
    if N % 2 == 0:
        x[N // 2] = 0.0
    with np.errstate(all="ignore"):
        v = np.asarray(f(x))
    if v.shape != x.shape:
        v = np.broadcast_to(v, x.shape)
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite samples in cheb_fit")

    def dct1(u):
        ev, od = 0.5 * (u + u[::-1]), 0.5 * (u - u[::-1])
        a = dct(ev, type=1) / N
        a[1::2] = (dct(od, type=1) / N)[1::2]
        a[0] /= 2
        a[-1] /= 2
        return a

    a = dct1(v.real.astype(float))
    # imaginary parts at rounding level are noise that differentiation would amplify
    if np.iscomplexobj(v) and np.abs(v.imag).max() > 1e-14 * np.abs(v).max():
        a = a + 1j * dct1(v.imag.astype(float))
    return ChebProxy(L, a, trim_tol)


def differentiate(f: ChebProxy) -> ChebProxy:
    """Exact derivative of the interpolant (parity flips)."""
    if f.coeffs.size < 2:
        return f._new(np.zeros(1, dtype=f.coeffs.dtype), shrink=1)
    return f._new(C.chebder(f.coeffs) / f.L, shrink=1)


def reflect(f: ChebProxy) -> ChebProxy:
    """``x -> f(-x)``: negate the odd coefficients."""
    c = f.coeffs.copy()
    c[1::2] *= -1
    return f._new(c)


def _times_t(a):
    """Chebyshev coefficients of ``t * H(t)``."""
    out = np.zeros(a.size + 1, dtype=a.dtype)
    out[1] += a[0]
    for m in range(1, a.size):
        out[m + 1] += 0.5 * a[m]
        out[m - 1] += 0.5 * a[m]
    return out


def odd_div_x(f: ChebProxy) -> ChebProxy:
    """The even polynomial ``h`` with ``x h(x) = odd part of f``.

    In ``t = x / L`` multiplication by ``t`` maps ``T_0 -> T_1`` and
    ``T_m -> (T_(m+1) + T_(m-1)) / 2``; matching odd coefficients gives an
    upper-triangular banded system solved from the top down.
    """
    d = np.zeros_like(f.coeffs)
    d[1::2] = f.odd_coeffs
    M = d.size - 1
    if M < 1 or not np.any(d):
        return f._new(np.zeros(1, dtype=d.dtype), shrink=1)
    if M % 2 == 0:
        M -= 1
    a = np.zeros(M + 2, dtype=d.dtype)
    for m in range(M, 2, -2):
        a[m - 1] = 2 * d[m] - a[m + 1]
    a[0] = d[1] - 0.5 * a[2]
    a = a[:M]
    back = _times_t(a)
    n = max(back.size, d.size)
    res = np.abs(np.pad(back, (0, n - back.size)) - np.pad(d, (0, n - d.size))).max()
    scale = np.abs(d).max()
    if res > ODD_DIV_RESIDUAL * scale:
        raise IllConditionedError("division of the odd part by x is ill-conditioned", res / scale)
    return f._new(a / f.L, shrink=1)


def dunkl_apply(k, f):
    """``T_k f = f' + 2k * odd(f) / x``."""
    from .kernel import Multiplicity

    kv = Multiplicity.of(k).value
    if isinstance(f, ChebProxy):
        df = differentiate(f)
        if kv == 0:
            return df
        q = odd_div_x(f)
        n = max(df.coeffs.size, q.coeffs.size)
        c = np.pad(df.coeffs.astype(complex), (0, n - df.coeffs.size)) \
            + 2 * kv * np.pad(q.coeffs.astype(complex), (0, n - q.coeffs.size))
        if kv.imag == 0 and not np.iscomplexobj(f.coeffs):
            c = c.real
        # both pieces already carry f's loss; count it once
        return ChebProxy(f.L, c, f.trim_tol, df.trim_loss + q.trim_loss - f.trim_loss,
                         df.nominal)
    if isinstance(f, Indicator):
        raise ValueError("the Dunkl operator needs a C^1 function, not an indicator")
    apply = getattr(f, "dunkl_apply", None)
    if apply is None:
        raise TypeError(f"{type(f).__name__} has no registered derivative; fit it with cheb_fit first")
    return apply(kv)


def dunkl_power(k, f, n, budget=TRIM_BUDGET, trim_tol=TRIM_TOL, max_tail=None):
    """``T_k^n f`` by repeated application, re-trimming after each step.

    Each step records its trim loss, the mass of dropped coefficients
    relative to the largest one.  An accumulated loss above ``budget`` raises
    :class:`InstabilityError` carrying the iterates computed so far.

    Trimming cannot see an interpolant that never decays to the trim level,
    where each derivative amplifies the unresolved top of the spectrum.  With
    ``max_tail`` set, an iterate whose ``tail_ratio()`` exceeds it also raises.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    out = f
    iterates = [f]
    losses = []
    for _ in range(n):
        nxt = dunkl_apply(k, out)
        if isinstance(nxt, ChebProxy):
            nxt = ChebProxy(nxt.L, nxt.coeffs, trim_tol, nxt.trim_loss, nxt.nominal)
            losses.append(max(nxt.trim_loss - out.trim_loss, 0.0))
            if sum(losses) > budget:
                raise InstabilityError(
                    f"trim loss {sum(losses):.2e} exceeds budget {budget:.0e} after {len(losses)} steps",
                    partial=iterates, losses=losses)
            if max_tail is not None and nxt.tail_ratio() > max_tail:
                raise InstabilityError(
                    f"iterate {len(losses)} is unresolved (tail ratio {nxt.tail_ratio():.2e})",
                    partial=iterates, losses=losses)
        iterates.append(nxt)
        out = nxt
    if n:
        out.step_losses = tuple(losses)
    return out


def moment_average(g, m, L=None, N=None, order=None):
    """``I_{g,m}(x) = int_{-1}^{1} t^m g(t x) dt`` refitted as a ChebProxy.

    For a ChebProxy ``g`` of degree ``d`` the default Gauss-Legendre order
    is exact.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if isinstance(g, ChebProxy):
        L = g.L if L is None else L
        N = max(g.degree, 2) if N is None else N
    elif L is None or N is None:
        raise ValueError("L and N are required for non-proxy inputs")
    order = order or (N + m) // 2 + 2
    t, w = np.polynomial.legendre.leggauss(order)
    wt = w * t ** m

    def avg(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(g(np.outer(x, t))) @ wt

    trim = g.trim_tol if isinstance(g, ChebProxy) else TRIM_TOL
    return cheb_fit(avg, L, N, trim)


def _extent(f, radius):
    if radius is not None and math.isfinite(radius):
        return float(radius)
    if isinstance(f, FuncRep):
        return f.extent(1e-16)
    raise ValueError("an infinite radius needs a FuncRep with a decay radius")


def sup_norm(f, radius=None, n_grid=SUP_GRID, refine=SUP_REFINE):
    """``max |f|`` on ``[-radius, radius]`` (grid search plus local refinement)."""
    r = _extent(f, radius)
    x = np.linspace(-r, r, n_grid)
    extra = [s * b for b in getattr(f, "breakpoints", ()) if b <= r for s in (-1, 1)]
    if extra:
        x = np.unique(np.concatenate([x, extra]))
    v = np.abs(np.asarray(f(x)))
    if v.size == 0:
        return 0.0
    best = float(v.max())
    peaks = np.nonzero((v[1:-1] >= v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    peaks = peaks[np.argsort(-v[peaks], kind="stable")][:refine]
    for i in peaks:
        res = minimize_scalar(lambda s: -abs(complex(np.asarray(f(np.array([s])))[0])),
                              bounds=(x[i - 1], x[i + 1]), method="bounded",
                              options={"xatol": 1e-12 * max(r, 1.0)})
        best = max(best, -float(res.fun))
    return best


# --- closed-form families ------------------------------------------------


class ClosedForm(FuncRep):
    """Marker base for the analytic test families."""

    def transform(self, k):
        """Closed-form Dunkl transform when known, else None."""
        return None


class PolyGaussian(ClosedForm):
    """``p(x) exp(-x^2 / (2 sigma^2))`` with ``p`` in ascending power basis."""

    def __init__(self, coeffs, sigma=1.0):
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        c = _as_coeffs(coeffs)
        nz = np.nonzero(c)[0]
        self.coeffs = c[: nz[-1] + 1] if nz.size else c[:1] * 0
        self.sigma = float(sigma)
        self.panel = self.sigma / 2

    @property
    def parity(self):
        if not np.any(self.coeffs[1::2]):
            return 0
        if not np.any(self.coeffs[0::2]):
            return 1
        return None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return P.polyval(x, self.coeffs) * np.exp(-0.5 * (x / self.sigma) ** 2)

    def extent(self, rel=1e-16):
        deg = self.coeffs.size - 1
        big = self.sigma * (math.sqrt(2 * math.log(1 / rel)) + 2 * math.sqrt(deg + 1)) + 1.0
        x = np.linspace(0, 2 * big, 8001)
        v = np.abs(self(x)) + np.abs(self(-x))
        top = v.max()
        if top == 0:
            return self.sigma
        above = np.nonzero(v > rel * top)[0]
        return float(x[min(above[-1] + 1, x.size - 1)])

    def derivative(self):
        c = self.coeffs.astype(complex) if np.iscomplexobj(self.coeffs) else self.coeffs
        d = P.polysub(P.polyder(c), P.polymulx(c) / self.sigma ** 2)
        return PolyGaussian(d, self.sigma)

    def dunkl_apply(self, k):
        c = self.coeffs
        d = P.polysub(P.polyder(c), P.polymulx(c) / self.sigma ** 2)
        if k != 0:
            odd = np.zeros(max(c.size - 1, 1), dtype=complex)
            odd[0:2 * c[1::2].size:2] = c[1::2]      # (sum c_{2j+1} x^{2j+1}) / x
            d = P.polyadd(d.astype(complex), 2 * k * odd)
            if np.isrealobj(c) and complex(k).imag == 0:
                d = d.real
        return PolyGaussian(d, self.sigma)

    def transform(self, k):
        if self.coeffs.size == 1:
            kv = complex(k)
            amp = self.coeffs[0] * self.sigma ** (2 * kv + 1)
            if kv.imag == 0 and np.isrealobj(self.coeffs):
                amp = amp.real
            return PolyGaussian([amp], 1.0 / self.sigma)
        return None

    def __repr__(self):
        return f"PolyGaussian({self.coeffs.tolist()}, sigma={self.sigma:g})"


class Gaussian(PolyGaussian):
    """``exp(-x^2 / (2 sigma^2))``."""

    def __init__(self, sigma=1.0):
        super().__init__([1.0], sigma)

    def __repr__(self):
        return f"Gaussian({self.sigma:g})"


def smoothstep(t, c=1.0):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, flat to all orders at both ends."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0, np.exp(-c / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-c / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


class Bump(ClosedForm):
    """Smooth bump: 1 on ``[-rho R, rho R]``, 0 outside ``[-R, R]``."""

    compact = True
    parity = 0

    def __init__(self, R=1.0, rho=0.5, c=1.0):
        if not R > 0 or not 0 < rho < 1 or not c > 0:
            raise ValueError("Bump needs R > 0, 0 < rho < 1 and c > 0")
        self.R, self.rho, self.c = float(R), float(rho), float(c)
        self.breakpoints = (self.rho * self.R, self.R)
        self.panel = (1 - self.rho) * self.R / 8

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return smoothstep((self.R - np.abs(x)) / (self.R - self.rho * self.R), self.c)

    def extent(self, rel=1e-16):
        return self.R

    def __repr__(self):
        return f"Bump(R={self.R:g}, rho={self.rho:g})"


class Indicator(ClosedForm):
    """``1`` on ``[-R, R]`` and ``0`` elsewhere (transform and norms only)."""

    compact = True
    parity = 0

    def __init__(self, R=1.0):
        if not R > 0:
            raise ValueError("R must be positive")
        self.R = float(R)
        self.breakpoints = (self.R,)
        self.panel = self.R / 4

    def __call__(self, x):
        return (np.abs(np.asarray(x, dtype=float)) <= self.R).astype(float)

    def extent(self, rel=1e-16):
        return self.R

    def __repr__(self):
        return f"Indicator(R={self.R:g})"


class Zero(ClosedForm):
    """The zero function."""

    compact = True
    parity = 0

    def __call__(self, x):
        return np.zeros(np.shape(x))

    def extent(self, rel=1e-16):
        return 1.0

    def dunkl_apply(self, k):
        return self

    def transform(self, k):
        return self
