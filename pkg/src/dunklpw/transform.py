"""Dunkl transform, inverse, weighted inner products and norms.

    D_k f(lambda) = (1/c_k) int f(x) psi_{-lambda}(x) |x|^(2k) dx,
    c_k = int exp(-x^2/2) |x|^(2k) dx = 2^(k+1/2) Gamma(k+1/2).

The inverse is the same integral with ``psi_lambda``.  Integrals use the
composite rules of :mod:`dunklpw.quadrature`, always evaluated at two
orders with panel refinement on disagreement.

A :class:`BandLimited` function is synthesised from a smooth bump ``g`` on
``[-R, R]`` as ``f = D_k^{-1} g``.  Its iterated Dunkl derivatives follow
from the intertwining identity, ``T_k^n f = D_k^{-1}((i lambda)^n g)``, so
norms of ``T_k^n f`` never iterate the operator.  Norms of ``f`` and its
derivatives are taken over the window ``|x| <= window``, by default
``100 / R``; the direct route through Chebyshev proxies uses the same
window, so the two are comparable.
"""

from dataclasses import dataclass, field
import csv
from functools import lru_cache
import json
import math

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gamma, loggamma

from .errors import QuadratureError
from .funcrep import Bump, ChebProxy, FuncRep, sup_norm
from .kernel import Multiplicity, kernel_apply
from .quadrature import QuadratureGrid, converge

QUAD_TOL = 1e-10
NORM_TOL = 1e-8
BOUND_SLACK = 1e-9
WINDOW_FACTOR = 100.0
PHASE_PER_PANEL = 16.0


@dataclass(frozen=True)
class WeightedMeasure:
    """``|x|^(2k) dx`` or, with ``use_abs``, ``|x|^(2 Re k) dx``."""

    k: Multiplicity
    use_abs: bool = False

    def density(self, x):
        ax = np.abs(np.asarray(x, dtype=float))
        kk = self.k.re if self.use_abs else self.k.value
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(ax > 0, ax ** (2 * kk), 1.0 if kk == 0 else 0.0)
        return out

    def grid(self, X, **kw):
        return QuadratureGrid(self.k.re, X, b=0.0 if self.use_abs else self.k.im, **kw)


def weight_constant_closed(k):
    """``2^(k+1/2) Gamma(k+1/2)``, the closed form of ``c_k``."""
    kv = Multiplicity.of(k).value
    v = np.exp((kv + 0.5) * math.log(2) + loggamma(kv + 0.5))
    return complex(v) if kv.imag else float(v.real)


@lru_cache(maxsize=64)
def _weight_constant(re, im):
    a = re
    # exp(-X^2/2) X^(2a) <= 1e-16 of its peak at sqrt(2a)
    peak = (a * math.log(2 * a) - a) if a > 0 else 0.0
    X = max(math.sqrt(2 * a), 1.0)
    while -0.5 * X * X + 2 * a * math.log(X) - peak > math.log(1e-17):
        X *= 1.1
    grid = QuadratureGrid(a, X, b=im, panel=0.5)
    val, _, _ = converge(lambda g: g.integrate(np.exp(-0.5 * g.nodes ** 2)), grid, 1e-14,
                         what="weight constant")
    return complex(val)


def weight_constant(k):
    """``c_k`` by quadrature (complex for complex ``k``)."""
    km = Multiplicity.of(k)
    v = _weight_constant(km.re, km.im)
    return v if km.im else v.real


# --- spectral profiles ---------------------------------------------------


@dataclass(frozen=True)
class SpectralProfile:
    """Samples of a transform on a lambda grid.

    ``weights`` (optional) are quadrature weights for ``|lambda|^(2 Re k) dlambda``
    on the grid, which makes the profile integrable (inversion, norms).
    """

    grid: np.ndarray
    values: np.ndarray
    k: Multiplicity
    provenance: str = "computed"
    truncation_radius: float = math.inf
    weights: np.ndarray = None
    defect: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        g = np.asarray(self.grid)
        v = np.asarray(self.values, dtype=complex)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("grid and values must be matching 1-d arrays")
        if not np.all(np.isfinite(v)):
            raise ValueError("profile values must be finite")
        if not np.iscomplexobj(g) and g.size > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("lambda grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "k", Multiplicity.of(self.k))
        if self.weights is not None:
            object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    @property
    def wk(self):
        if self.weights is None:
            raise ValueError("profile carries no quadrature weights")
        if self.k.is_real:
            return self.weights
        return self.weights * np.exp(2j * self.k.im * np.log(np.abs(self.grid)))

    def scaled(self, c):
        return SpectralProfile(self.grid, self.values * c, self.k, self.provenance,
                               self.truncation_radius, self.weights, self.defect)

    def to_csv(self, path):
        if np.iscomplexobj(self.grid):
            raise ValueError("only real lambda grids serialise to CSV")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda", "value_re", "value_im"])
            for lam, v in zip(self.grid, self.values):
                w.writerow([repr(float(lam)), repr(float(v.real)), repr(float(v.imag))])

    @classmethod
    def from_csv(cls, path, k, provenance="computed"):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        grid = np.array([float(r["lambda"]) for r in rows])
        vals = np.array([complex(float(r["value_re"]), float(r["value_im"])) for r in rows])
        return cls(grid, vals, k, provenance)

    def to_dict(self):
        if np.iscomplexobj(self.grid):
            raise ValueError("only real lambda grids serialise to JSON")
        trunc = self.truncation_radius
        return {"k": {"re": self.k.re, "im": self.k.im},
                "grid": [float(x) for x in self.grid],
                "values": [[float(v.real), float(v.imag)] for v in self.values],
                "provenance": self.provenance,
                "truncation_radius": trunc if math.isfinite(trunc) else None}

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            d = json.load(fh)
        vals = np.array([complex(a, b) for a, b in d["values"]])
        trunc = d.get("truncation_radius")
        return cls(np.array(d["grid"], dtype=float), vals, Multiplicity(d["k"]["re"], d["k"]["im"]),
                   d.get("provenance", "computed"), math.inf if trunc is None else trunc)


# --- transforms ----------------------------------------------------------


def _spatial_grid(km, f, freq, quad=None):
    if quad is not None:
        return quad
    X = f.extent(1e-16)
    panel = min(f.panel, PHASE_PER_PANEL / max(freq, 1e-300), X)
    return QuadratureGrid(km.re, X, b=km.im, panel=panel,
                          breakpoints=tuple(getattr(f, "breakpoints", ())))


def _l1_scale(km, f, grid):
    """``(1/|c_k|) int |f| |x|^(2 Re k)``, the bound of the transform on the real line."""
    g = grid.with_order(48)
    return float(g.integrate(np.abs(f(g.nodes)), complex_weight=False)) / abs(weight_constant(km))


def dunkl_transform(k, f, lambdas, quad=None, tol=QUAD_TOL, check_bound=True):
    """``D_k f`` on a lambda grid (array, possibly complex, or a QuadratureGrid).

    Raises :class:`QuadratureError` if the order-32/48 comparison fails
    after two panel refinements, or if for real ``k`` and real lambda a value
    violates ``|D_k f| <= (1/|c_k|) int |f| |w_k|``.  For complex ``k`` the
    kernel can exceed 1 in modulus on the real line, so the excess is only
    recorded in ``meta["bound_excess"]``.
    """
    km = Multiplicity.of(k)
    lam_grid = lambdas if isinstance(lambdas, QuadratureGrid) else None
    lam = lam_grid.nodes if lam_grid is not None else np.atleast_1d(np.asarray(lambdas))
    complex_lam = np.iscomplexobj(lam) and np.any(np.imag(lam) != 0)
    if not complex_lam:
        lam = np.real(lam).astype(float)
    if complex_lam and not getattr(f, "compact", False):
        raise ValueError("complex lambda needs a compactly supported function")
    if not isinstance(f, FuncRep):
        raise TypeError("dunkl_transform needs a FuncRep")
    freq = float(np.max(np.abs(lam), initial=0.0))
    grid0 = _spatial_grid(km, f, freq, quad)
    ck = weight_constant(km)

    def evaluate(g):
        v = f(g.nodes) * g.wk
        return kernel_apply(km, -lam, g.nodes, v) / ck

    bound = _l1_scale(km, f, grid0)
    growth = math.exp(float(np.max(np.abs(np.imag(lam)), initial=0.0)) * grid0.X)
    vals, defect, used = converge(evaluate, grid0, tol, scale=bound * growth,
                                  what="Dunkl transform")
    excess = float(np.max(np.abs(vals), initial=0.0)) - bound
    # the kernel bound |psi| <= 1 behind this check fails for some complex k
    if check_bound and not complex_lam and km.is_real and excess > BOUND_SLACK:
        raise QuadratureError("transform exceeds the L1 bound", excess)
    return SpectralProfile(lam, vals, km, f"computed-from:{f!r}", used.X,
                           None if lam_grid is None else lam_grid.weights, defect,
                           {"grid": used.describe(), "l1_bound": bound, "bound_excess": excess})


def inverse_transform(k, g, xs, tol=QUAD_TOL):
    """``(1/c_k) int g(lambda) psi_lambda(x) |lambda|^(2k) dlambda`` at ``xs``.

    ``g`` is a weighted SpectralProfile (its grid is the quadrature rule)
    or a FuncRep in lambda, in which case this is ``D_k g(-x)``.
    """
    km = Multiplicity.of(k)
    xs = np.asarray(xs, dtype=float)
    if isinstance(g, SpectralProfile):
        if g.k != km:
            raise ValueError("profile multiplicity does not match")
        out = kernel_apply(km, xs.ravel(), g.grid, g.values * g.wk) / weight_constant(km)
        return out.reshape(xs.shape)
    lam, back = np.unique(-xs.ravel(), return_inverse=True)
    return dunkl_transform(km, g, lam, tol=tol).values[back].reshape(xs.shape)


def _as_values(f, nodes):
    return np.asarray(f(nodes))


def weighted_inner(k, f, g, quad=None, tol=QUAD_TOL):
    """Bilinear ``<f, g>_k = int f g |x|^(2k) dx`` (no conjugation).

    Either argument may be a weighted SpectralProfile, whose grid is then
    the quadrature rule and the other argument is evaluated on it.
    """
    km = Multiplicity.of(k)
    profs = [h for h in (f, g) if isinstance(h, SpectralProfile)]
    if profs:
        p = profs[0]
        fv = f.values if isinstance(f, SpectralProfile) else _as_values(f, p.grid)
        gv = g.values if isinstance(g, SpectralProfile) else _as_values(g, p.grid)
        return complex(np.einsum("j,j,j->", fv, gv, p.wk))
    if quad is None:
        X = min(f.extent(1e-16), g.extent(1e-16))
        panel = min(f.panel, g.panel, X)
        bps = tuple(getattr(f, "breakpoints", ())) + tuple(getattr(g, "breakpoints", ()))
        quad = QuadratureGrid(km.re, X, b=km.im, panel=panel, breakpoints=bps)
    scale = float(quad.with_order(48).integrate(
        np.abs(f(quad.with_order(48).nodes) * g(quad.with_order(48).nodes)), complex_weight=False))
    val, _, _ = converge(lambda q: q.integrate(f(q.nodes) * g(q.nodes)), quad, tol,
                         scale=max(scale, 1e-300), what="inner product")
    return complex(val)


def _is_real_up_to_phase(v):
    """Rotate rows of ``v`` to be real when they are, else return None."""
    v = np.atleast_2d(v)
    idx = np.argmax(np.abs(v), axis=-1)
    ph = v[np.arange(v.shape[0]), idx]
    ph = np.where(ph == 0, 1.0, ph / np.abs(np.where(ph == 0, 1.0, ph)))
    r = v / ph[:, None]
    top = np.abs(v).max(axis=-1, initial=0.0)
    if np.all(np.abs(r.imag).max(axis=-1, initial=0.0) <= 1e-10 * np.maximum(top, 1e-300)):
        return r.real
    return None


def _power_integral(grid, values, p):
    """``int |v|^p |x|^(2a) dx`` over the last axis (exact sign splitting for p = 1)."""
    if p == 1:
        real = _is_real_up_to_phase(values)
        if real is not None:
            return grid.abs_integral(real).reshape(np.shape(values)[:-1])
    return grid.integrate(np.abs(values) ** p, complex_weight=False)


def lp_norm(k, f, p, use_abs=True, quad=None, tol=NORM_TOL):
    """``(int |f|^p |x|^(2 Re k) dx)^(1/p)``; the sup norm for ``p = inf``."""
    km = Multiplicity.of(k)
    p = float(p)
    if p < 1:
        raise ValueError("p must be >= 1")
    if not use_abs and not km.is_real:
        raise ValueError("a complex weight defines no norm; use use_abs=True")
    if isinstance(f, SpectralProfile):
        if math.isinf(p):
            return float(np.max(np.abs(f.values), initial=0.0))
        w = f.weights
        if w is None:
            raise ValueError("profile carries no quadrature weights")
        return float(np.einsum("j,j->", np.abs(f.values) ** p, w) ** (1 / p))
    if isinstance(f, BandLimited):
        return f.norms([0], p, tol=tol)[0]
    if math.isinf(p):
        return sup_norm(f)
    if quad is None:
        X = f.extent(1e-16 ** (1 / p))
        quad = QuadratureGrid(km.re, X, panel=min(f.panel, X),
                              breakpoints=tuple(getattr(f, "breakpoints", ())))
    val, _, _ = converge(lambda q: _power_integral(q, f(q.nodes), p), quad, tol, what="norm")
    return float(val) ** (1 / p)


# --- band-limited synthesis ----------------------------------------------


class BandLimited(FuncRep):
    """``f = D_k^{-1} g`` for a weighted spectral profile ``g``.

    ``R`` is the spectral support radius of ``g``; ``window`` is the
    half-width of the spatial window on which norms are taken.
    """

    compact = True

    def __init__(self, g: SpectralProfile, R, window=None, source=None):
        if g.weights is None:
            raise ValueError("BandLimited needs a weighted profile")
        self.g = g
        self.k = g.k
        self.R = float(R)
        self.window = float(window if window is not None else WINDOW_FACTOR / self.R)
        self.source = source
        self.parity = 0 if np.allclose(g.values, g.values[::-1], rtol=0, atol=1e-15 * np.abs(g.values).max()) else None
        self.lam_max = float(np.max(np.abs(g.grid)))
        self.panel = 8.0 / self.lam_max
        self.breakpoints = ()
        self._ck = weight_constant(self.k)

    def extent(self, rel=1e-16):
        return self.window

    def power_columns(self, ns):
        lam = self.g.grid
        base = self.g.values * self.g.wk
        return np.stack([(1j * lam) ** n * base for n in ns], axis=1)

    def powers(self, ns, x):
        """``T_k^n f(x)`` for each ``n`` in ``ns``: array of shape ``(len(ns),) + x.shape``."""
        x = np.asarray(x, dtype=float)
        out = kernel_apply(self.k, x.ravel(), self.g.grid, self.power_columns(ns)) / self._ck
        return out.T.reshape((len(ns),) + x.shape)

    def __call__(self, x):
        return self.powers([0], x)[0]

    def norm_grid(self):
        return QuadratureGrid(self.k.re, self.window, panel=self.panel, half=self.parity == 0)

    def norms(self, ns, p, tol=NORM_TOL):
        """``||T_k^n f||_{Re k, p}`` over the window for every ``n`` in ``ns``."""
        ns = list(ns)
        p = float(p)
        if math.isinf(p):
            return self._sup_norms(ns)
        factor = 2.0 if self.parity == 0 else 1.0
        # |T^n f| is even when g is even, so a half grid suffices
        val, _, _ = converge(lambda q: factor * _power_integral(q, self.powers(ns, q.nodes), p),
                             self.norm_grid(), tol, what="band-limited norm")
        return np.asarray(val, dtype=float) ** (1 / p)

    def _sup_norms(self, ns, n_grid=4096, refine=8):
        x = np.linspace(0.0 if self.parity == 0 else -self.window, self.window, n_grid)
        V = np.abs(self.powers(ns, x))
        cols = self.power_columns(ns)
        out = []
        for i, v in enumerate(V):
            best = float(v.max())
            peaks = np.nonzero((v[1:-1] >= v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
            if v[0] >= v[1]:
                peaks = np.r_[0, peaks]
            peaks = peaks[np.argsort(-v[peaks], kind="stable")][:refine]
            col = cols[:, i:i + 1]
            for j in peaks:
                lo, hi = x[max(j - 1, 0)], x[min(j + 1, x.size - 1)]

                def neg(s):
                    return -abs(kernel_apply(self.k, np.array([s]), self.g.grid, col)[0, 0])

                res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-13 * self.window})
                best = max(best, -res.fun / abs(self._ck))
            out.append(best)
        return np.array(out)

    def describe(self):
        return {"R": self.R, "window": self.window, "lambda_nodes": int(self.g.grid.size),
                "provenance": self.g.provenance, "source": repr(self.source)}

    def __repr__(self):
        return f"BandLimited(k={self.k}, R={self.R:g}, window={self.window:g})"


def _lambda_grid(km, R, rho, panel, window, order=32):
    ramp = (1 - rho) * R
    width = min(panel, PHASE_PER_PANEL / window, ramp / 4)
    return QuadratureGrid(km.re, R, b=km.im, order=order, panel=width, breakpoints=(rho * R,))


def band_limited_synthesize(k, R, rho=0.9, resolution=None, window=None, tol=1e-9):
    """BandLimited function with ``g = Bump(R, rho)`` on a lambda quadrature grid.

    ``resolution`` caps the lambda panel width (default ``R / 8``).  The
    lambda rule is checked by comparing ``f`` and ``T_k^64 f`` at probe points
    under the order-32/48 rule with refinement.
    """
    km = Multiplicity.of(k)
    if not R > 0 or not 0 < rho < 1:
        raise ValueError("band_limited_synthesize needs R > 0 and 0 < rho < 1")
    bump = Bump(R, rho)
    window = float(window if window is not None else WINDOW_FACTOR / R)
    grid0 = _lambda_grid(km, R, rho, resolution or R / 8, window)
    probes = np.array([0.0, 0.37 * window, window])
    ck = weight_constant(km)

    def evaluate(q):
        cols = np.stack([(1j * q.nodes / R) ** n * bump(q.nodes) * q.wk for n in (0, 64)], axis=1)
        return kernel_apply(km, probes, q.nodes, cols) / ck

    _, defect, grid = converge(evaluate, grid0, tol, what="band-limited synthesis")
    prof = SpectralProfile(grid.nodes, bump(grid.nodes), km, "synthetic-g", R, grid.weights, defect,
                           {"grid": grid.describe()})
    return BandLimited(prof, R, window, source=bump)


def spectral_source(k, f, n_max, window=None):
    """BandLimited-style synthesis from a closed form with a known transform.

    The lambda grid extends until ``|lambda|^(n_max + 2 Re k) |D_k f|`` falls
    below 1e-17 of its peak, so the spectral route is accurate for
    ``n <= n_max``.  The spatial window is found by scanning outwards until
    ``f`` and ``T_k^n_max f`` are negligible.
    """
    km = Multiplicity.of(k)
    tf = f.transform(km) if hasattr(f, "transform") else None
    if tf is None:
        raise TypeError(f"no closed-form transform registered for {f!r}")
    lam = np.linspace(1e-3, 200.0, 200000)
    env = (n_max + 2 * km.re) * np.log(lam) + np.log(np.abs(tf(lam)) + 1e-300)
    L = float(lam[min(np.nonzero(env > env.max() + math.log(1e-17))[0][-1] + 1, lam.size - 1)])
    grid = QuadratureGrid(km.re, L, b=km.im, panel=min(tf.panel, 0.25))
    prof = SpectralProfile(grid.nodes, tf(grid.nodes), km, f"closed-form-transform:{f!r}", L,
                           grid.weights)
    bl = BandLimited(prof, math.inf, window=1.0, source=f)
    if window is None:
        window = 4.0
        while window < 1e4:
            x = np.linspace(0, window, 400)
            v = np.abs(bl.powers([0, n_max], x))
            top = v.max(axis=1, keepdims=True)
            if np.all(v[:, -40:] <= 1e-16 * top):
                break
            window *= 1.5
    bl.window = float(window)
    return bl


def spectral_power_norm(k, bl: BandLimited, n, p, quad=None, tol=NORM_TOL):
    """``||T_k^n f||_{Re k, p}`` through ``D_k^{-1}((i lambda)^n g)``."""
    if Multiplicity.of(k) != bl.k:
        raise ValueError("multiplicity does not match the band-limited function")
    if n < 0:
        raise ValueError("n must be >= 0")
    return float(bl.norms([n], p, tol=tol)[0])


def spectral_power_norms(bl: BandLimited, ns, p, tol=NORM_TOL):
    """Vectorised :func:`spectral_power_norm` over ``ns``."""
    return bl.norms(ns, p, tol=tol)
