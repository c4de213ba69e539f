"""The Dunkl kernel psi_lambda^k on the complex plane.

The kernel is the entire solution of ``T_k f = i*lambda*f``, ``f(0) = 1``
where ``T_k f(x) = f'(x) + k (f(x) - f(-x)) / x``.  On monomials

    T_k x^n = gamma_n x^(n-1),   gamma_n = n (n even),  n + 2k (n odd),

because the reflection term vanishes for even powers and doubles odd
ones.  Writing ``psi = sum c_n z^n`` and matching powers gives

    c_0 = 1,   gamma_n c_n = i*lambda c_(n-1),

so ``psi_lambda(z) = F(i*lambda*z)`` with ``F(w) = sum w^n / (gamma_1 ... gamma_n)``.
Since ``|gamma_n| >= n`` whenever ``Re k >= 0``, the terms are dominated
by ``|w|^n / n!`` and the tail after ``N`` terms is bounded by a geometric
series with ratio ``|w| / (N + 1)``.

Direct summation cancels badly once ``|w|`` is large, so outside a small
disc the series is continued along the ray from the origin with local
Taylor expansions of the equivalent first-order system for the even and
odd parts (``E' = O``, ``O' + 2k O / w = E``).  On the real line the
continuation is tabulated once per multiplicity and reused.
"""

from dataclasses import dataclass
from functools import lru_cache
import math
from typing import NamedTuple

import numpy as np

from . import _backend
from ._kernel_py import R_DIRECT, TABLE_STEP, ray_parts, series_parts
from .errors import TruncationError

DEFAULT_TOL = 1e-12
N_MIN = 8
N_CAP = 4096


@dataclass(frozen=True)
class Multiplicity:
    """Complex multiplicity parameter ``k = re + i*im`` with ``re >= 0``."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        re, im = float(self.re), float(self.im)
        if not (math.isfinite(re) and math.isfinite(im)):
            raise ValueError(f"multiplicity must be finite, got {re}+{im}i")
        if re < 0:
            raise ValueError(f"multiplicity needs Re k >= 0, got Re k = {re}")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    @classmethod
    def of(cls, k):
        """Coerce a number, ``(re, im)`` pair, ``"re,im"`` string or Multiplicity."""
        if isinstance(k, cls):
            return k
        if isinstance(k, str):
            parts = [p for p in k.replace(" ", "").split(",") if p]
            if not 1 <= len(parts) <= 2:
                raise ValueError(f"cannot parse multiplicity {k!r}")
            return cls(*(float(p) for p in parts))
        if isinstance(k, (tuple, list)):
            return cls(*k)
        z = complex(k)
        return cls(z.real, z.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def abs(self) -> float:
        return abs(self.value)

    @property
    def is_real(self) -> bool:
        return self.im == 0.0

    def __complex__(self):
        return self.value

    def __str__(self):
        return f"{self.re:g}" if self.is_real else f"{self.re:g}{self.im:+g}i"


def gamma_seq(k, n: int) -> complex:
    """Eigen-factor of ``T_k`` on ``x^n``: ``n`` for even ``n``, ``n + 2k`` for odd ``n``."""
    if n < 1:
        raise ValueError("gamma_seq needs n >= 1")
    kv = Multiplicity.of(k).value
    return complex(n) if n % 2 == 0 else n + 2 * kv


@dataclass(frozen=True)
class KernelSeries:
    """Truncated origin series of psi_lambda^k, valid on ``|z| <= radius``."""

    k: Multiplicity
    lam: complex
    coefficients: np.ndarray
    truncation_order: int
    tail_bound: float
    radius: float

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) > self.radius * (1 + 1e-12)):
            raise ValueError("argument outside the certified disc")
        return np.polynomial.polynomial.polyval(z, self.coefficients)


def kernel_series(k, lam, radius: float, tol: float = DEFAULT_TOL,
                  n_min: int = N_MIN, n_cap: int = N_CAP) -> KernelSeries:
    """Build ``c_0..c_N`` with ``sum_{n>N} |c_n| radius^n <= tol``.

    The stopping rule asks for ``2 |c_N| r^N <= tol`` and a geometric
    ratio ``|lambda| r / (N + 1) <= 1/2``; the recorded ``tail_bound`` is
    the geometric majorant ``|c_N| r^N q / (1 - q)``.
    """
    km = Multiplicity.of(k)
    lam = complex(lam)
    r = float(radius)
    s = abs(lam) * r
    coeffs = [1.0 + 0j]
    term = 1.0
    n = 0
    while True:
        n += 1
        coeffs.append(coeffs[-1] * 1j * lam / gamma_seq(km, n))
        term = abs(coeffs[-1]) * r ** n
        q = s / (n + 1)
        if n >= n_min and 2 * term <= tol and q <= 0.5:
            break
        if n >= n_cap:
            achieved = term * q / (1 - q) if q < 1 else math.inf
            raise TruncationError(f"kernel series needs more than {n_cap} terms", achieved)
    return KernelSeries(km, lam, np.array(coeffs), n, term * q / (1 - q), r)


class KernelValue(NamedTuple):
    value: complex
    order: int
    tail_bound: float
    method: str


def _parts(km, w, tol, n_cap, method):
    if method not in ("auto", "series", "continuation"):
        raise ValueError(f"unknown method {method!r}")
    w = np.array([complex(w)])
    _backend.check_range(w)
    if method == "series" or (method == "auto" and abs(w[0]) <= R_DIRECT) or w[0] == 0:
        E, O, dE, dO, Ow, tail, order = series_parts(km.value, w, tol, N_MIN, n_cap)
        used = "series"
    else:
        E, O, dE, dO, Ow, tail, order = ray_parts(km.value, w, min(tol, 1e-15))
        order = order[0]
        used = "continuation"
    return (E[0], O[0], dE[0], dO[0], Ow[0]), int(order), float(tail[0]), used


def kernel_eval(k, lam, z, tol: float = DEFAULT_TOL, n_cap: int = N_CAP,
                method: str = "auto") -> KernelValue:
    """psi_lambda^k(z) with a truncation bound relative to ``e^{|Im lambda z|}``.

    ``method="series"`` forces direct summation (certified truncation but
    exposed to cancellation for large ``|lambda z|``); ``"continuation"``
    forces the ray continuation.  The continuation bound is an
    a-posteriori estimate rather than a majorant.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    km = Multiplicity.of(k)
    w = 1j * complex(lam) * complex(z)
    (E, O, *_), order, tail, used = _parts(km, w, tol, n_cap, method)
    scale = math.exp(abs(w.real))
    if tail > tol * scale:
        raise TruncationError("kernel continuation missed the tolerance", tail / scale)
    return KernelValue(complex(E + O), order, tail, used)


def kernel_residual(k, lam, x, tol: float = DEFAULT_TOL) -> float:
    """``|T_k psi(x) - i*lambda*psi(x)|`` with ``T_k`` applied term by term.

    The derivative comes from differentiating the summed polynomial (origin
    series or final local Taylor expansion) and the reflection term from its
    odd part, so the value measures how well the truncated expansion solves
    the differential-reflection equation.
    """
    km = Multiplicity.of(k)
    lam = complex(lam)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    if lam == 0:
        return 0.0
    w = 1j * lam * x
    (E, O, dE, dO, Ow), *_ = _parts(km, w, tol, N_CAP, "auto")
    return float(abs(lam) * abs(dE + dO + 2 * km.value * Ow - E - O))


@lru_cache(maxsize=32)
def _table(k: complex, ymax: float):
    return _backend.axis_table(k, ymax)


def axis_table(k, ymax: float):
    """Cached expansion table covering real ``|lambda x| <= ymax``."""
    top = max(64.0, 2.0 ** math.ceil(math.log2(max(ymax, 1.0) + 2 * TABLE_STEP)))
    return _table(Multiplicity.of(k).value, top)


def psi(k, lam, z):
    """Vectorised psi_lambda^k(z) over broadcast ``lam`` and ``z``."""
    km = Multiplicity.of(k)
    lam = np.asarray(lam)
    z = np.asarray(z)
    if not (np.iscomplexobj(lam) or np.iscomplexobj(z)):
        y = np.multiply(lam, z, dtype=float)
        if y.size == 0:
            return y.astype(complex)
        return _backend.eval_axis(axis_table(km, float(np.max(np.abs(y)))), y)
    w = 1j * np.multiply(lam, z, dtype=complex)
    return _backend.psi(km.value, w)


def kernel_apply(k, a, b, V):
    """``out[i, m] = sum_j psi_{a_i}(b_j) V[j, m]`` without storing the matrix."""
    km = Multiplicity.of(k)
    a = np.asarray(a)
    b = np.asarray(b)
    V = np.asarray(V, dtype=complex)
    squeeze = V.ndim == 1
    if squeeze:
        V = V[:, None]
    if np.iscomplexobj(a) or np.iscomplexobj(b):
        out = _backend.matvec_general(km.value, a, b, V)
    else:
        a = a.astype(float)
        b = b.astype(float)
        ymax = float(np.max(np.abs(a), initial=0.0) * np.max(np.abs(b), initial=0.0))
        out = _backend.matvec_axis(axis_table(km, ymax), a, b, V)
    return out[:, 0] if squeeze else out
