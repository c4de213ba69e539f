"""Composite Gauss rules for integrals against ``|x|^(2a)`` on ``[-X, X]``.

Two origin panels ``[-delta, 0]`` and ``[0, delta]`` carry Gauss-Jacobi
nodes for the measure ``x^(2a) dx``, since the weight is not smooth at the
origin for non-integer ``2a``.  Everything else is plain Gauss-Legendre on
panels no wider than ``panel``, split at caller-supplied breakpoints.

For complex multiplicity ``k = a + ib`` the weight is ``|x|^(2a)`` times the
phase ``exp(2ib ln|x|)``.  The phase is kept separate (``grid.phase``) so the
weights stay real and positive; because it oscillates infinitely often at
the origin, the inner panel is replaced by geometrically graded panels down
to a radius where the remaining mass is below double precision.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np
from scipy.special import roots_jacobi

from .errors import QuadratureError

ORDERS = (32, 48)
DELTA = 0.1
MAX_REFINE = 2


@lru_cache(maxsize=None)
def _legendre(m):
    return np.polynomial.legendre.leggauss(m)


@lru_cache(maxsize=None)
def _jacobi(m, beta):
    return roots_jacobi(m, 0.0, beta)


@lru_cache(maxsize=None)
def _legendre_fit(m):
    """Matrix mapping samples at the m Gauss nodes to Legendre coefficients."""
    t, w = _legendre(m)
    V = np.polynomial.legendre.legvander(t, m - 1)
    return (V * w[:, None]).T * ((2 * np.arange(m) + 1) / 2)[:, None]


def _gl_panels(edges, m, a):
    t, w = _legendre(m)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = (0.5 * (hi - lo) * t + 0.5 * (hi + lo)).ravel()
    wt = (0.5 * (hi - lo) * w).ravel()
    if a:
        wt = wt * x ** (2 * a)
    return x, wt


def _jacobi_panel(d, m, a):
    t, w = _jacobi(m, 2 * a)
    return 0.5 * d * (1 + t), w * (0.5 * d) ** (2 * a + 1)


@dataclass(frozen=True)
class QuadratureGrid:
    """Nodes and weights for ``int_{-X}^{X} h(x) |x|^(2a) dx``.

    With ``half=True`` only ``[0, X]`` is covered; callers exploit parity.
    """

    a: float
    X: float
    b: float = 0.0
    order: int = ORDERS[0]
    panel: float = 1.0
    delta: float = DELTA
    breakpoints: tuple = ()
    half: bool = False
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    _panels: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.a < 0 or self.X <= 0 or self.panel <= 0 or self.delta <= 0:
            raise ValueError("invalid quadrature grid parameters")
        X, a, m = float(self.X), float(self.a), int(self.order)
        cuts = sorted({float(p) for p in self.breakpoints if 0 < p < X})
        d = min(self.delta, X, *(cuts[:1] or [X]))
        parts = []
        if self.b == 0.0:
            parts.append(_jacobi_panel(d, m, a))
        else:
            # graded panels; the innermost one holds less than 1e-16 of the mass
            levels = min(60, math.ceil(53 / (2 * a + 1)))
            inner = d * 2.0 ** -levels
            parts.append(_jacobi_panel(inner, m, a))
            parts.append(_gl_panels(inner * 2.0 ** np.arange(levels + 1), m, a))
        stops = [d] + [c for c in cuts if c > d] + [X]
        edges = [d]
        for lo, hi in zip(stops[:-1], stops[1:]):
            if hi > lo:
                n = max(1, math.ceil((hi - lo) / self.panel - 1e-9))
                edges.extend(np.linspace(lo, hi, n + 1)[1:])
        if len(edges) > 1:
            parts.append(_gl_panels(np.array(edges), m, a))
        x = np.concatenate([p[0] for p in parts])
        w = np.concatenate([p[1] for p in parts])
        # Gauss-Legendre panels on [d, X]; every panel holds exactly m nodes
        gl = np.zeros(x.size // m, dtype=bool)
        if len(edges) > 1:
            gl[-(len(edges) - 1):] = True
        lo = np.concatenate([[0.0] * (gl.size - gl.sum()), edges[:-1]]) if gl.any() else np.zeros(gl.size)
        hi = np.concatenate([[0.0] * (gl.size - gl.sum()), edges[1:]]) if gl.any() else np.zeros(gl.size)
        if not self.half:
            x = np.concatenate([-x[::-1], x])
            w = np.concatenate([w[::-1], w])
            gl = np.concatenate([gl[::-1], gl])
            lo, hi = np.concatenate([-hi[::-1], lo]), np.concatenate([-lo[::-1], hi])
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_panels", (gl, lo, hi))

    @property
    def size(self):
        return self.nodes.size

    @property
    def phase(self):
        """``exp(2ib ln|x|)`` at the nodes (ones for real multiplicity)."""
        if self.b == 0.0:
            return np.ones(self.size)
        return np.exp(2j * self.b * np.log(np.abs(self.nodes)))

    @property
    def wk(self):
        """Weights for the complex measure ``|x|^(2k) dx``."""
        return self.weights * self.phase

    def integrate(self, values, complex_weight=True):
        """Fixed-order weighted sum over the last axis of ``values``."""
        w = self.wk if complex_weight else self.weights
        return np.einsum("...j,j->...", np.asarray(values), w)

    def abs_integral(self, values):
        """``int |f| |x|^(2a) dx`` for real-valued samples ``values`` (last axis).

        ``|f|`` has kinks at the zeros of ``f`` that a Gauss rule resolves
        only algebraically.  On every Legendre panel where the samples change
        sign, ``f |x|^(2a)`` is replaced by its degree ``m - 1`` Legendre
        interpolant, whose roots split the panel so that each piece is
        integrated exactly.
        """
        v = np.asarray(values, dtype=float)
        m = self.order
        out = np.array(np.einsum("...j,j->...", np.abs(v), self.weights), dtype=float)
        acc = out.reshape(-1)
        gl, lo, hi = self._panels
        t, wt = _legendre(m)
        fit = _legendre_fit(m)
        flat = v.reshape(-1, self.size)
        ax = np.abs(self.nodes) ** (2 * self.a) if self.a else np.ones(self.size)
        alt = (-1.0) ** np.arange(m)
        for row, f in enumerate(flat):
            H = f.reshape(-1, m) * ax.reshape(-1, m)
            Cs = H @ fit.T
            # a zero between the outer nodes and the panel edge shows only in the end values
            ends = np.stack([Cs @ alt, Cs.sum(axis=1)], axis=1)
            lo_v = np.minimum(H.min(axis=1), ends.min(axis=1))
            hi_v = np.maximum(H.max(axis=1), ends.max(axis=1))
            change = gl & (lo_v < 0) & (hi_v > 0)
            for p in np.nonzero(change)[0]:
                h = H[p]
                c = Cs[p]
                roots = np.polynomial.legendre.legroots(c)
                roots = np.sort(roots.real[(np.abs(roots.imag) < 1e-9) & (np.abs(roots.real) < 1)])
                cuts = np.concatenate([[-1.0], roots, [1.0]])
                Q = np.polynomial.legendre.legint(c)
                qv = np.polynomial.legendre.legval(cuts, Q)
                mid = np.polynomial.legendre.legval(0.5 * (cuts[1:] + cuts[:-1]), c)
                exact = np.sum(np.sign(mid) * np.diff(qv)) * 0.5 * (hi[p] - lo[p])
                plain = np.abs(h) @ (wt * 0.5 * (hi[p] - lo[p]))
                acc[row] += exact - plain
        return acc.reshape(out.shape)[()] if out.ndim == 0 else acc.reshape(out.shape)

    def with_order(self, m):
        return replace(self, order=int(m))

    def refined(self, level=1):
        return replace(self, panel=self.panel / 2 ** level, delta=self.delta / 2 ** level)

    def describe(self):
        return {"a": self.a, "b": self.b, "X": self.X, "order": self.order,
                "panel": self.panel, "delta": self.delta, "half": self.half,
                "breakpoints": list(self.breakpoints), "nodes": int(self.size)}


def converge(evaluate, grid, tol, scale=None, what="integral"):
    """Evaluate at orders 32 and 48, refining panels up to twice.

    ``evaluate(grid)`` returns an array of integrals.  Returns
    ``(values, defect, grid)`` where ``defect`` is the absolute order-32
    vs order-48 disagreement; raises :class:`QuadratureError` when it stays
    above ``tol * scale``.
    """
    defect = math.inf
    for level in range(MAX_REFINE + 1):
        g = grid.refined(level) if level else grid
        lo = np.asarray(evaluate(g.with_order(ORDERS[0])))
        g_hi = g.with_order(ORDERS[1])
        hi = np.asarray(evaluate(g_hi))
        defect = float(np.max(np.abs(hi - lo), initial=0.0))
        ref = scale if scale is not None else float(np.max(np.abs(hi), initial=0.0))
        if defect <= tol * max(ref, 1e-300) or defect == 0.0:
            return hi, defect, g_hi
    raise QuadratureError(f"{what} did not converge under panel refinement", defect)
