"""Experiments built on the transform: Bang sequences, spectral support
radii, Paley-Wiener growth certificates and the finite-n inequalities
used in the proofs.

For a function whose transform is supported in ``[-R, R]`` the roots
``a_n = ||T_k^n f||^(1/n)`` tend to ``R``; if the transform has unbounded
support they diverge.  Limits are tested at finite ``n`` with explicit
tolerances, so every routine here returns data rather than verdicts
wherever possible.
"""

from dataclasses import dataclass, field
import csv
import math

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import gammaln

from . import transform as tr
from .errors import InstabilityError, QuadratureError
from .funcrep import (Bump, ChebProxy, ClosedForm, FuncRep, Gaussian, PolyGaussian, Zero,
                      cheb_fit, differentiate, dunkl_apply, dunkl_power, moment_average)
from .kernel import Multiplicity, kernel_apply
from .quadrature import QuadratureGrid

DIRECT_CAP = 8
SUPPORT_EPS = 1e-8
COND_LIMIT = 1e12


class _Infinity:
    """Tagged +infinity for extended nonnegative reals.  Compares above every
    float but refuses arithmetic."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    __str__ = __repr__

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("INF")

    def _no(self, *_):
        raise TypeError("the +infinity sentinel does not take part in arithmetic")

    __add__ = __radd__ = __sub__ = __rsub__ = __mul__ = __rmul__ = _no
    __truediv__ = __rtruediv__ = __float__ = _no


INF = _Infinity()


# --- Bang sequences ------------------------------------------------------


@dataclass
class BangSequence:
    k: Multiplicity
    p: float
    method: str
    entries: list = field(default_factory=list)   # (n, norm, a_n)
    R_true: object = None

    def __post_init__(self):
        ns = [e[0] for e in self.entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n must be strictly increasing")
        if any(e[2] < 0 for e in self.entries):
            raise ValueError("a_n must be nonnegative")

    @staticmethod
    def root(n, norm):
        return 0.0 if norm == 0 else float(norm) ** (1.0 / n)

    def a(self, n):
        for m, _, a in self.entries:
            if m == n:
                return a
        raise KeyError(n)

    @property
    def ns(self):
        return [e[0] for e in self.entries]

    def richardson(self):
        """``2 a_2n - a_n`` for every available pair (uncertified extrapolation)."""
        got = {n: a for n, _, a in self.entries}
        return {n: 2 * got[2 * n] - got[n] for n in got if 2 * n in got}

    def rows(self):
        R = "" if self.R_true is None else ("inf" if self.R_true is INF else repr(float(self.R_true)))
        p = "inf" if math.isinf(self.p) else repr(float(self.p))
        return [[n, repr(float(v)), repr(float(a)), self.method, repr(self.k.re), repr(self.k.im), p, R]
                for n, v, a in self.entries]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "norm", "a_n", "method", "k_re", "k_im", "p", "R_true"])
            w.writerows(self.rows())


def direct_proxy(bl, N=None):
    """Chebyshev proxy of a BandLimited function on its norm window."""
    X = bl.window
    if N is None:
        N = int(math.ceil(2 * bl.lam_max * X)) + 64
    return cheb_fit(bl, X, N)


def bang_sequence(k, source, p, n_max, method="spectral", direct_cap=DIRECT_CAP, ns=None):
    """``(n, ||T_k^n f||_{Re k, p}, a_n)`` for ``n = 1..n_max`` (or ``ns``).

    ``spectral`` needs a BandLimited source or a closed form with a known
    transform; ``direct`` iterates the operator on a proxy (``n_max <=
    direct_cap``).  Instability in the direct route raises
    :class:`InstabilityError` whose ``partial`` is the sequence so far.
    """
    km = Multiplicity.of(k)
    p = float(p)
    ns = list(ns) if ns is not None else list(range(1, n_max + 1))
    if method == "spectral":
        if isinstance(source, tr.BandLimited):
            bl = source
        elif isinstance(source, ClosedForm):
            bl = tr.spectral_source(km, source, max(ns))
        else:
            raise TypeError("the spectral route needs a BandLimited source or a closed form")
        if bl.k != km:
            raise ValueError("multiplicity does not match the source")
        norms = bl.norms(ns, p)
        R_true = INF if math.isinf(bl.R) else bl.R
        return BangSequence(km, p, method, [(n, float(v), BangSequence.root(n, v))
                                            for n, v in zip(ns, norms)], R_true)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    if max(ns) > direct_cap:
        raise ValueError(f"direct route is capped at n = {direct_cap}")
    R_true = None
    if isinstance(source, tr.BandLimited):
        f = direct_proxy(source)
        R_true = source.R
    else:
        f = source
    seq = BangSequence(km, p, method, [], R_true)
    cur = f
    done = 0
    losses = []
    for n in ns:
        try:
            cur = dunkl_power(km, cur, n - done, max_tail=1e-8)
        except InstabilityError as err:
            err.partial = seq
            raise
        losses.extend(getattr(cur, "step_losses", ()))
        done = n
        if sum(losses) > 1e-6:
            raise InstabilityError("accumulated trim loss over budget", partial=seq, losses=losses)
        v = tr.lp_norm(km, cur, p, use_abs=True)
        seq.entries.append((n, float(v), BangSequence.root(n, v)))
    return seq


def upper_bound_curve(C, R, k, n):
    """``C e^n Gamma(n+1+2|k|) n^-n Gamma(1+2|k|)^-1 R^n`` via log-Gamma."""
    if n < 1 or C <= 0 or R <= 0:
        raise ValueError("upper_bound_curve needs n >= 1, C > 0, R > 0")
    ak = Multiplicity.of(k).abs
    log = (math.log(C) + n + gammaln(n + 1 + 2 * ak) - n * math.log(n)
           - gammaln(1 + 2 * ak) + n * math.log(R))
    return math.exp(log)


def gamma_ratio_factor(k, n):
    """``Gamma(n+1+2|k|) / (n! Gamma(1+2|k|))``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    ak = Multiplicity.of(k).abs
    return math.exp(gammaln(n + 1 + 2 * ak) - gammaln(n + 1) - gammaln(1 + 2 * ak))


# --- support radius ------------------------------------------------------


@dataclass(frozen=True)
class SupportEstimate:
    radius: object          # float or INF
    eps: float
    lam_max: float
    threshold_dependent: bool = False

    @property
    def unbounded(self):
        return self.radius is INF

    def to_dict(self):
        return {"radius": "inf" if self.unbounded else self.radius, "eps": self.eps,
                "lambda_max": self.lam_max, "threshold_dependent": self.threshold_dependent}


def support_radius(k, source, eps=SUPPORT_EPS, lam_max=None, n_scan=2001, scale=1.0):
    """Largest ``|lambda|`` with ``|D_k f(lambda)| > eps * max |D_k f|``.

    ``source`` is a SpectralProfile, a BandLimited function (whose transform
    is its synthetic profile, with the bump as a closed form for the
    bisection) or a FuncRep whose transform is computed on a scan grid up to
    ``lam_max``.  The crossing is bisected between the last exceeding and the
    first non-exceeding scan point.  ``scale`` multiplies the transform
    (the result is invariant under it).
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    km = Multiplicity.of(k)
    evaluate = None
    dependent = False
    if isinstance(source, tr.SpectralProfile):
        lam, vals = np.real(source.grid), source.values * scale
    elif isinstance(source, tr.BandLimited):
        bump = source.source
        lam_max = lam_max or 2.0 * source.R
        lam = np.linspace(0.0, lam_max, n_scan)
        vals = bump(lam) * scale
        evaluate = lambda s: abs(bump(np.array([s]))[0] * scale)
    elif isinstance(source, FuncRep):
        if lam_max is None:
            raise ValueError("lam_max is required for a function source")
        lam = np.linspace(0.0, lam_max, n_scan)
        vals = tr.dunkl_transform(km, source, lam).values * scale
        evaluate = lambda s: abs(tr.dunkl_transform(km, source, [s]).values[0] * scale)
        dependent = not getattr(source, "compact", False) or isinstance(source, tr.BandLimited)
        dependent = dependent and not isinstance(source, Zero)
    else:
        raise TypeError("unsupported source")
    if lam.size == 0:
        raise ValueError("empty profile")
    mags = np.abs(vals)
    top = mags.max()
    lm = float(lam_max if lam_max is not None else np.max(np.abs(lam)))
    if top == 0:
        return SupportEstimate(0.0, eps, lm, dependent)
    rel = mags / top
    order = np.argsort(np.abs(lam), kind="stable")
    al, rl = np.abs(lam)[order], rel[order]
    above = np.nonzero(rl > eps)[0]
    last = above[-1]
    if last == al.size - 1:
        return SupportEstimate(INF, eps, lm, dependent)
    lo, hi = al[last], al[last + 1]
    if evaluate is None:
        # linear interpolation of the relative magnitude between the two samples
        r0, r1 = rl[last], rl[last + 1]
        radius = lo + (hi - lo) * (r0 - eps) / (r0 - r1) if r0 != r1 else lo
    else:
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if evaluate(mid) / top > eps:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * max(hi, 1.0):
                break
        radius = 0.5 * (lo + hi)
    return SupportEstimate(float(radius), eps, lm, dependent)


# --- growth certificates -------------------------------------------------


@dataclass
class GrowthCertificate:
    R: float
    n: int
    tau_max: float
    C_n: float
    stability: float
    grid: dict
    axis_ratios: dict = field(default_factory=dict)
    axis_increasing: bool = False
    tolerance: float = 0.01

    @property
    def valid(self):
        return (math.isfinite(self.C_n) and self.stability <= self.tolerance
                and not self.axis_increasing)

    def to_dict(self):
        return {"R": self.R, "n": self.n, "tau_max": self.tau_max, "C_n": self.C_n,
                "stability": self.stability, "grid": self.grid,
                "axis_ratios": {str(t): r for t, r in self.axis_ratios.items()},
                "axis_increasing": self.axis_increasing, "valid": self.valid}


class _ComplexTransform:
    """An entire function given as a kernel sum, evaluated at complex points.

    For a compactly supported ``f`` this is ``D_k f(z)`` on a converged
    spatial rule; for a BandLimited ``f`` it is ``f(z)`` itself through the
    lambda rule of its profile.
    """

    def __init__(self, km, f, sigma_max, tau_max):
        self.km = km
        self.ck = tr.weight_constant(km)
        if isinstance(f, tr.BandLimited):
            self.nodes = f.g.grid
            self.fw = f.g.values * f.g.wk
            self.absw = np.abs(f.g.values) * f.g.weights
            self.sign = 1.0
            self.defect = f.g.defect
            return
        probes = np.array([0.0, sigma_max, sigma_max + 1j * tau_max, 1j * tau_max, -sigma_max - 1j * tau_max])
        if tau_max == 0:
            probes = np.unique(probes.real)
        prof = tr.dunkl_transform(km, f, probes)
        g = prof.meta["grid"]
        grid = QuadratureGrid(g["a"], g["X"], b=g["b"], order=g["order"], panel=g["panel"],
                              delta=g["delta"], breakpoints=tuple(g["breakpoints"]))
        fv = f(grid.nodes)
        self.nodes = grid.nodes
        self.fw = fv * grid.wk
        self.absw = np.abs(fv) * grid.weights
        self.sign = -1.0
        self.defect = prof.defect

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        lam = self.sign * (z if np.any(z.imag) else z.real)
        vals = kernel_apply(self.km, lam, self.nodes, self.fw) / self.ck
        # |psi_lambda(x)| <= exp(|Im lambda| |x|) bounds the absolute sum
        absum = np.exp(np.outer(np.abs(z.imag), np.abs(self.nodes))) @ self.absw / abs(self.ck)
        with np.errstate(divide="ignore"):
            cond = np.where(np.abs(vals) > 0, absum / np.abs(vals), np.inf)
        bad = (cond > COND_LIMIT) & (absum > 1e-300)
        if np.any(bad):
            raise QuadratureError("complex evaluation is too ill-conditioned", float(np.max(cond[bad])))
        return vals


def _grid_sup(F, weightfn, sig, tau, refine=8):
    S, T = np.meshgrid(sig, tau, indexing="ij")
    Z = S + 1j * T
    W = np.abs(F(Z.ravel())).reshape(Z.shape) * weightfn(Z)
    best = float(W.max())
    hs = sig[1] - sig[0] if sig.size > 1 else 1.0
    ht = tau[1] - tau[0] if tau.size > 1 else 0.0
    flat = np.argsort(-W.ravel(), kind="stable")[:refine]
    for idx in flat:
        i, j = np.unravel_index(idx, W.shape)
        s0, t0 = sig[i], tau[j]
        box = [(max(sig[0], s0 - hs), min(sig[-1], s0 + hs)),
               (max(tau[0], t0 - ht), min(tau[-1], t0 + ht))]

        def neg(v):
            s = min(max(v[0], box[0][0]), box[0][1])
            t = min(max(v[1], box[1][0]), box[1][1]) if ht else t0
            z = np.array([s + 1j * t])
            return -float(np.abs(F(z))[0] * weightfn(z)[0])

        res = minimize(neg, [s0, t0], method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-14 * best, "maxiter": 400})
        best = max(best, -res.fun)
    return best


def axis_ratios(k, f, R_claim, taus=(1.0, 2.0, 3.0), F=None):
    """``|D_k f(i tau)| e^{-R' tau}`` at the given heights, and whether it strictly increases."""
    km = Multiplicity.of(k)
    taus = tuple(float(t) for t in taus)
    F = F or _ComplexTransform(km, f, 0.0, max(taus))
    vals = np.abs(F(1j * np.array(taus))) * np.exp(-R_claim * np.array(taus))
    ratios = dict(zip(taus, map(float, vals)))
    return ratios, bool(np.all(np.diff(vals) > 0))


def growth_certify(k, f, R, n=0, tau_max=3.0, sigma_max=20.0, grid=(41, 13), tol=0.01,
                   axis_taus=(1.0, 2.0, 3.0)):
    """Certify ``|F(z)| (1+|z|)^n e^{-R |Im z|} <= C_n`` on a rectangle.

    ``F = D_k f`` for a compactly supported ``f``; for a BandLimited ``f``,
    which is itself entire of type ``R``, ``F = f``.

    The sup is taken on a ``grid[0] x grid[1]`` lattice over
    ``|sigma| <= sigma_max``, ``|tau| <= tau_max`` with local refinement of the
    largest values, then again on the doubled lattice; ``stability`` is the
    relative change.  A claimed type ``R`` is also rejected when the
    imaginary-axis ratio ``|D_k f(i tau)| e^{-R tau}`` strictly increases over
    ``axis_taus``.  ``n`` may be a list, giving one certificate per order.
    """
    km = Multiplicity.of(k)
    if not getattr(f, "compact", False):
        raise ValueError("growth_certify needs a compactly supported or band-limited function")
    orders = [n] if np.isscalar(n) else list(n)
    F = _ComplexTransform(km, f, sigma_max, tau_max)
    even = getattr(f, "parity", None) == 0
    ns_, nt_ = grid

    def lattice(ms, mt):
        sig = np.linspace(0.0 if even else -sigma_max, sigma_max, ms if even else 2 * ms - 1)
        tau = np.linspace(-tau_max, tau_max, mt) if tau_max > 0 else np.zeros(1)
        return sig, tau

    s1, t1 = lattice(ns_, nt_)
    s2, t2 = lattice(2 * ns_ - 1, 2 * nt_ - 1 if tau_max > 0 else 1)
    ratios, increasing = ({}, False)
    if tau_max > 0 and axis_taus:
        ratios, increasing = axis_ratios(km, f, R, [t for t in axis_taus if t <= tau_max] or axis_taus, F)
    certs = []
    for m in orders:
        def wfn(Z, m=m):
            return (1 + np.abs(Z)) ** m * np.exp(-R * np.abs(np.imag(Z)))
        c1 = _grid_sup(F, wfn, s1, t1)
        c2 = _grid_sup(F, wfn, s2, t2)
        stab = abs(c2 - c1) / c2 if c2 > 0 else 0.0
        spec = {"sigma_max": sigma_max, "tau_max": tau_max, "n_sigma": int(s1.size),
                "n_tau": int(t1.size), "doubled": [int(s2.size), int(t2.size)],
                "quadrature_defect": F.defect}
        certs.append(GrowthCertificate(R, m, tau_max, float(c2), float(stab), spec, ratios,
                                       increasing, tol))
    return certs[0] if np.isscalar(n) else certs


# --- identities ----------------------------------------------------------


def _rand_poly(rng, deg):
    return rng.standard_normal(deg + 1) / (1 + np.arange(deg + 1))


def default_family(seed=0, size=3):
    """Smooth test functions: Gaussians, polynomial Gaussians and proxies of
    random polynomials times a bump on ``[-1, 1]`` (which vanish at the ends)."""
    rng = np.random.default_rng(seed)
    fam = {"gaussian": [Gaussian(1.0), Gaussian(0.7)],
           "polygauss": [PolyGaussian(_rand_poly(rng, 4), 1.0) for _ in range(size)],
           "proxy": []}
    bump = Bump(1.0, 0.3)
    for _ in range(size):
        c = _rand_poly(rng, 5)
        fam["proxy"].append(cheb_fit(lambda x, c=c: np.polynomial.polynomial.polyval(x, c) * bump(x),
                                     1.0, 96))
    return fam


def _sup(v):
    return float(np.max(np.abs(v), initial=0.0))


def _ratio(num, den):
    return 0.0 if num == 0 else num / den if den > 0 else math.inf


def _lambda_quad(km, f, Lam=None):
    if Lam is None:
        if isinstance(f, PolyGaussian):
            Lam = PolyGaussian(f.coeffs, 1.0 / f.sigma).extent(1e-16)
        else:
            Lam = 12.0
    return QuadratureGrid(km.re, Lam, b=km.im, panel=0.25)


def identity_suite(k, family=None, seed=0, lam_check=None):
    """Maximum relative defect of every identity over a family of test functions.

    Returns a dict keyed by identity name; ``plancherel`` is omitted for
    complex multiplicity.  A family consisting of the zero function gives
    zero defects.
    """
    km = Multiplicity.of(k)
    if family is None:
        family = default_family(seed)
    if isinstance(family, dict):
        fam = family
    else:
        fam = {"custom": list(family)}
    smooth = [f for group in fam.values() for f in group]
    compact = [f for f in smooth if getattr(f, "compact", False)]
    decaying = [f for f in smooth if isinstance(f, PolyGaussian) or isinstance(f, Zero)]
    lam_check = np.linspace(-8, 8, 33) if lam_check is None else np.asarray(lam_check)
    out = {}

    # anti-symmetry <T f, g> = -<f, T g>
    d = 0.0
    for f in smooth:
        for g in smooth:
            if isinstance(f, ChebProxy) != isinstance(g, ChebProxy):
                continue
            Tf, Tg = dunkl_apply(km, f), dunkl_apply(km, g)
            a = tr.weighted_inner(km, Tf, g)
            b = tr.weighted_inner(km, f, Tg)
            s = _abs_inner(km, Tf, g) + _abs_inner(km, f, Tg)
            d = max(d, _ratio(abs(a + b), s))
    out["antisymmetry"] = d

    # adjoint <D f, g> = <f, D g> for compactly supported f, g
    d = 0.0
    for f in compact:
        for g in compact:
            qf = QuadratureGrid(km.re, g.extent(), b=km.im, panel=g.panel, breakpoints=g.breakpoints)
            qg = QuadratureGrid(km.re, f.extent(), b=km.im, panel=f.panel, breakpoints=f.breakpoints)
            Df = tr.dunkl_transform(km, f, qf)
            Dg = tr.dunkl_transform(km, g, qg)
            a = tr.weighted_inner(km, Df, g)
            b = tr.weighted_inner(km, f, Dg)
            s = tr.lp_norm(km, f, 1) * tr.lp_norm(km, g, 1) / abs(tr.weight_constant(km))
            d = max(d, _ratio(abs(a - b), s))
    out["adjoint"] = d

    # intertwining D(T f) = i lambda D f
    d = 0.0
    for f in smooth:
        Tf = dunkl_apply(km, f)
        A = tr.dunkl_transform(km, Tf, lam_check).values
        B = 1j * lam_check * tr.dunkl_transform(km, f, lam_check).values
        s = tr.lp_norm(km, Tf, 1) / abs(tr.weight_constant(km))
        d = max(d, _ratio(_sup(A - B), s))
    out["intertwining"] = d

    # inversion and Plancherel on the rapidly decaying family
    d_inv = d_pl = 0.0
    for f in decaying:
        q = _lambda_quad(km, f) if not isinstance(f, Zero) else QuadratureGrid(km.re, 1.0, b=km.im)
        prof = tr.dunkl_transform(km, f, q)
        X = f.extent(1e-12)
        xs = np.linspace(-X, X, 201)
        back = tr.inverse_transform(km, prof, xs)
        d_inv = max(d_inv, _ratio(_sup(back - f(xs)), _sup(f(np.linspace(-X, X, 2001)))))
        if km.is_real:
            n1 = tr.lp_norm(km, prof, 2)
            n2 = tr.lp_norm(km, f, 2)
            d_pl = max(d_pl, _ratio(abs(n1 - n2), n2))
    out["inversion"] = d_inv
    if km.is_real:
        out["plancherel"] = d_pl

    # Gaussian fixed point
    if any(isinstance(f, Zero) for f in smooth) and len(smooth) == 1:
        out["gaussian_fixed_point"] = 0.0
    else:
        lam = np.linspace(-10, 10, 81)
        out["gaussian_fixed_point"] = _sup(tr.dunkl_transform(km, Gaussian(1.0), lam).values
                                           - np.exp(-0.5 * lam ** 2))
    return out


def _abs_inner(km, f, g):
    """``int |f g| |x|^(2 Re k) dx`` at fixed order; only a defect scale."""
    X = min(f.extent(1e-16), g.extent(1e-16))
    q = QuadratureGrid(km.re, X, order=48, panel=min(f.panel, g.panel, X))
    return float(q.integrate(np.abs(f(q.nodes) * g(q.nodes)), complex_weight=False))


# --- finite-n inequalities from the proofs -------------------------------


def lemma_induction_defect(k, f, n, grid=2001):
    """``||T^n f - [T^(n-1) f' + k I_{T^(n-1) f', n-1}]||_inf / ||T^n f||_inf``."""
    km = Multiplicity.of(k)
    lhs = dunkl_power(km, f, n)
    h = dunkl_power(km, differentiate(f), n - 1)
    rhs_avg = moment_average(h, n - 1)
    x = np.linspace(-f.L, f.L, grid)
    diff = lhs(x) - (h(x) + km.value * rhs_avg(x))
    return _ratio(_sup(diff), _sup(lhs(x)))


def moment_commutation_defect(k, g, m, grid=2001):
    """``||T_k I_{g,m} - I_{T_k g, m+1}||_inf`` relative to the larger side."""
    km = Multiplicity.of(k)
    left = dunkl_apply(km, moment_average(g, m))
    right = moment_average(dunkl_apply(km, g), m + 1, L=g.L, N=max(g.degree, 2))
    x = np.linspace(-g.L, g.L, grid)
    return _ratio(_sup(left(x) - right(x)), max(_sup(left(x)), _sup(right(x)), 1e-300))


def gamma_ratio_violations(k, f, n_max=10, grid=4001, slack=1e-8):
    """Count sampled ``x`` and ``n <= n_max`` where
    ``|T_k^n f(x)| > gamma_ratio_factor(k, n) max_{|y|<=|x|} |f^(n)(y)| + slack``."""
    km = Multiplicity.of(k)
    x = np.linspace(0.0, f.L, grid)
    xs = np.concatenate([-x[:0:-1], x])
    bad = 0
    worst = -math.inf
    T = f
    D = f
    for n in range(1, n_max + 1):
        T = dunkl_apply(km, T)
        D = differentiate(D)
        dv = np.abs(D(xs))
        # running max of |f^(n)| over |y| <= |x|
        sym = np.maximum(dv[grid - 1:], dv[grid - 1::-1])
        run = np.maximum.accumulate(sym)
        bound = gamma_ratio_factor(km, n) * run + slack
        tv = np.maximum(np.abs(T(x)), np.abs(T(-x)))
        excess = tv - bound
        bad += int(np.sum(excess > 0))
        worst = max(worst, float(excess.max()))
    return bad, worst


def liminf_check(bl, ns=(2, 4, 8), eps=0.02, slack=1e-6):
    """``||T^2n f||_2 ||g||_2 >= (r - eps)^2n int_{|lambda| >= r - eps} |g|^2 |w_k|``.

    ``r`` is the estimated support radius of ``g = D_k f``; returns the
    smallest ``lhs - rhs`` normalised by ``lhs`` (negative means violated).
    """
    r = support_radius(bl.k, bl).radius
    g = bl.g
    gn = float(np.sqrt(np.einsum("j,j->", np.abs(g.values) ** 2, g.weights)))
    worst = math.inf
    for n in ns:
        lhs = float(bl.norms([2 * n], 2)[0]) * gn
        sel = np.abs(g.grid) >= r - eps
        rhs = (r - eps) ** (2 * n) * float(np.einsum("j,j->", np.abs(g.values[sel]) ** 2, g.weights[sel]))
        worst = min(worst, (lhs - rhs) / lhs + slack)
    return worst


# --- classical Fourier cross-check at k = 0 ------------------------------


def fourier_crosscheck(seed=0, ns=(1, 2, 4, 8, 16, 32, 64), ps=(1.0, 2.0, math.inf)):
    """Relative discrepancy between the ``k = 0`` results and the independent
    classical Fourier path, per experiment."""
    from . import classical as cl
    from .funcrep import Indicator
    from .kernel import psi

    rng = np.random.default_rng(seed)
    out = {}

    lam = rng.uniform(-10, 10, 200)
    x = rng.uniform(-10, 10, 200)
    z = x + 1j * rng.uniform(-2, 2, 200)
    a = np.concatenate([psi(0, lam, x), psi(0, lam, z)])
    b = np.concatenate([cl.kernel(lam, x), cl.kernel(lam, z)])
    out["kernel"] = _sup(a - b) / _sup(b)

    fam = default_family(seed)
    funcs = fam["gaussian"] + fam["polygauss"] + fam["proxy"] + [Bump(1.0, 0.5), Indicator(1.0)]
    lam = np.linspace(-8, 8, 17)
    d = 0.0
    for f in funcs:
        X = f.extent(1e-16)
        mine = tr.dunkl_transform(0, f, lam).values
        ref = cl.transform(f, lam, X, getattr(f, "breakpoints", ()))
        d = max(d, _sup(mine - ref) / _sup(ref))
    out["transform"] = d

    xs = np.linspace(-4, 4, 17)
    g = Gaussian(0.8)
    prof = tr.dunkl_transform(0, g, QuadratureGrid(0.0, 14.0, panel=0.25))
    ref = cl.inverse(lambda l: 0.8 * np.exp(-0.5 * (0.8 * l) ** 2), xs, 14.0)
    mine = tr.inverse_transform(0, prof, xs)
    out["inverse"] = _sup(mine - ref) / _sup(ref)

    d = 0.0
    for f in funcs[:-1]:
        for h in funcs[:-1]:
            if isinstance(f, ChebProxy) != isinstance(h, ChebProxy):
                continue
            X = min(f.extent(1e-16), h.extent(1e-16))
            bp = tuple(getattr(f, "breakpoints", ())) + tuple(getattr(h, "breakpoints", ()))
            mine = tr.weighted_inner(0, f, h)
            ref = cl.inner(f, h, X, bp)
            d = max(d, abs(mine - ref) / max(abs(ref), _abs_inner(Multiplicity(0), f, h)))
    out["inner"] = d

    d = 0.0
    for f in funcs:
        for p in ps:
            X = f.extent(1e-16)
            mine = tr.lp_norm(0, f, p)
            ref = cl.lp_norm(f, p, X, getattr(f, "breakpoints", ()))
            d = max(d, abs(mine - ref) / ref)
    out["norms"] = d

    bl = band_limited_synthesize_cached(0, 1.0)
    ref_bl = cl.BandLimitedPowers(bl.source, 1.0, bl.source.breakpoints)
    d = 0.0
    for p in ps:
        mine = bang_sequence(0, bl, p, max(ns), ns=ns)
        for n, _, a_n in mine.entries:
            ref = ref_bl.norm(n, p, bl.window) ** (1 / n)
            d = max(d, abs(a_n - ref) / ref)
    out["bang"] = d

    mine = support_radius(0, Gaussian(1.0), lam_max=12.0).radius
    top = abs(cl.transform(Gaussian(1.0), [0.0], 9.0)[0])
    ref = brentq(lambda l: abs(cl.transform(Gaussian(1.0), [l], 9.0)[0]) / top - SUPPORT_EPS,
                 5.0, 7.0, xtol=1e-14)
    out["support"] = abs(mine - ref) / ref

    f = Bump(1.0, 0.5)
    certs = growth_certify(0, f, 1.0, n=[0, 2], tau_max=1.0, sigma_max=10.0, grid=(21, 5),
                           axis_taus=())
    d = 0.0
    for c in certs:
        wfn = lambda Z, m=c.n: (1 + np.abs(Z)) ** m * np.exp(-np.abs(np.imag(Z)))
        F = lambda zz: cl.transform_complex(f, zz, 1.0, f.breakpoints)
        s1 = np.linspace(0, 10, 41)
        t1 = np.linspace(-1, 1, 9)
        ref = _grid_sup(F, wfn, s1, t1)
        d = max(d, abs(c.C_n - ref) / ref)
    out["growth"] = d
    return out


_BL_CACHE = {}


def band_limited_synthesize_cached(k, R, rho=0.9):
    key = (Multiplicity.of(k), float(R), float(rho))
    if key not in _BL_CACHE:
        _BL_CACHE[key] = tr.band_limited_synthesize(k, R, rho)
    return _BL_CACHE[key]
