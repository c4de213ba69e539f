"""Pure numpy implementation of the Dunkl kernel hot loops.

Everything here works in the variable ``w = i*lambda*z``.  The kernel is
``F(w) = E(w) + O(w)`` with ``E`` even, ``O`` odd, and

    E' = O,        O' + 2k O / w = E,        E(0) = 1, O(0) = 0.

The compiled module ``_ckernel`` implements the same functions with the
same signatures; ``dunklpw._backend`` picks one at import time.
"""

import math

import numpy as np

from .errors import KernelRangeError, TruncationError

# Inside this radius the Taylor series at the origin is summed directly;
# rounding there is bounded by eps * e^{|w|} ~ 1e-14.
R_DIRECT = 4.0
# Longest continuation step along a ray.  Steps start at R_DIRECT, so
# |h| <= |w_center| / 2 always holds.
H_RAY = 2.0
# Spacing of the tabulated expansions along the imaginary axis and the
# number of stored Taylor coefficients per centre.
TABLE_STEP = 1.0
TABLE_TERMS = 24
MAX_EXPONENT = 700.0
_TAYLOR_CAP = 200
_CHUNK = 1 << 18


def _gamma(k, n):
    return n if n % 2 == 0 else n + 2.0 * k


def check_range(w):
    re = np.max(np.abs(np.real(w)), initial=0.0)
    if re > MAX_EXPONENT:
        raise KernelRangeError(
            f"|Re(i*lambda*z)| = {re:.1f} exceeds {MAX_EXPONENT}; value would overflow")


def series_parts(k, w, tol=1e-15, n_min=8, n_cap=4096):
    """Sum the origin series for every entry of ``w``.

    Returns ``(E, O, dE, dO, O_over_w, tail, order)``.  ``tail`` bounds
    the discarded terms: since |gamma_n| >= n for Re k >= 0, every ratio
    |t_{n+1}/t_n| past the cut is at most q = |w|/(N+1).
    """
    w = np.asarray(w, dtype=complex)
    aw = np.abs(w)
    target = tol * np.exp(np.abs(w.real))
    t = np.ones_like(w)
    E = np.ones_like(w)
    O = np.zeros_like(w)
    dE = np.zeros_like(w)
    dO = np.zeros_like(w)
    Ow = np.zeros_like(w)
    n = 0
    while True:
        n += 1
        g = _gamma(k, n)
        dterm = t * (n / g)
        if n % 2:
            Ow += t / g
            t = t * w / g
            O += t
            dO += dterm
        else:
            t = t * w / g
            E += t
            dE += dterm
        if n >= n_min:
            q = aw / (n + 1)
            at = np.abs(t)
            if np.all((2.0 * at <= target) & (q <= 0.5)):
                break
        if n >= n_cap:
            q = aw / (n + 1)
            with np.errstate(divide="ignore"):
                bound = np.where(q < 1, np.abs(t) * q / (1 - q), np.inf)
            raise TruncationError(
                f"series did not reach tolerance within {n_cap} terms",
                achieved=float(np.max(bound / np.exp(np.abs(w.real)), initial=0.0)),
            )
    tail = np.abs(t) * q / (1.0 - q)
    return E, O, dE, dO, Ow, tail, n


def _taylor_step(k, wc, E0, O0, h):
    """Advance (E, O) from centre ``wc`` by ``h`` using the local recurrence.

    Returns the new values, their w-derivatives and the size of the last
    retained term (an a-posteriori truncation estimate).
    """
    ratio = h / wc
    e_prev = np.zeros_like(E0)
    e, o = E0, O0
    sE, sO = E0.copy(), O0.copy()
    sdE = np.zeros_like(E0)
    sdO = np.zeros_like(E0)
    scale = np.abs(E0) + np.abs(O0) + 1e-300
    quiet = 0
    j = 0
    while True:
        f = h / (j + 1)
        e_next = o * f
        o_next = f * (e + ratio * e_prev - ((j + 2.0 * k) / wc) * o)
        j += 1
        sE += e_next
        sO += o_next
        sdE += j * e_next
        sdO += j * o_next
        e_prev, e, o = e, e_next, o_next
        last = np.abs(e) + np.abs(o)
        if np.all(last <= 1e-18 * scale):
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
        if j > _TAYLOR_CAP:
            raise TruncationError("continuation step failed to converge",
                                  achieved=float(np.max(last / scale)))
    return sE, sO, sdE / h, sdO / h, 2.0 * last


def ray_parts(k, w, tol=1e-15):
    """Continue the origin series along the ray 0 -> w for |w| > R_DIRECT.

    Points are sorted by their step count so that the active set at each
    lockstep iteration is a prefix of the arrays.
    """
    w = np.asarray(w, dtype=complex)
    r = np.abs(w)
    u = w / r
    w0 = R_DIRECT * u
    E, O, _, _, _, tail, _ = series_parts(k, w0, tol)
    M = np.maximum(np.ceil((r - R_DIRECT) / H_RAY).astype(int), 1)
    h = (w - w0) / M
    order = np.argsort(-M, kind="stable")
    Ms, hs, wc = M[order], h[order], w0[order]
    E, O, tail = E[order], O[order], tail[order]
    dE = np.zeros_like(E)
    dO = np.zeros_like(E)
    mmax = int(Ms[0])
    neg = -Ms
    for s in range(mmax):
        cnt = int(np.searchsorted(neg, -(mmax - s), side="right"))
        sl = slice(0, cnt)
        En, On, dEn, dOn, est = _taylor_step(k, wc[sl], E[sl], O[sl], hs[sl])
        E[sl], O[sl], dE[sl], dO[sl] = En, On, dEn, dOn
        tail[sl] += est
        wc[sl] = wc[sl] + hs[sl]
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    E, O, dE, dO, tail = E[inv], O[inv], dE[inv], dO[inv], tail[inv]
    return E, O, dE, dO, O / w, tail, Ms[inv]


def kernel_parts(k, w, tol=1e-15):
    """(E, O, dE, dO, O/w, tail) for arbitrary complex ``w`` (flattened)."""
    w = np.asarray(w, dtype=complex).ravel()
    check_range(w)
    out = [np.empty_like(w) for _ in range(5)] + [np.empty(w.shape)]
    near = np.abs(w) <= R_DIRECT
    if near.any():
        res = series_parts(k, w[near], tol)
        for dst, src in zip(out, res[:6]):
            dst[near] = src
    far = ~near
    if far.any():
        res = ray_parts(k, w[far], tol)
        for dst, src in zip(out, res[:6]):
            dst[far] = src
    return tuple(out)


def psi(k, w, tol=1e-15):
    """F(w) elementwise for complex ``w`` of any shape."""
    w = np.asarray(w, dtype=complex)
    E, O = kernel_parts(k, w, tol)[:2]
    return (E + O).reshape(w.shape)


def axis_table(k, ymax):
    """Taylor coefficients of (E, O) at centres w_c = i*c, c = 0, 1, ...

    Returns an array of shape (2, C+1, TABLE_TERMS): index 0 holds the
    coefficients of E, index 1 those of O, in powers of the offset from
    the centre.
    """
    k = complex(k)
    C = int(math.ceil(abs(ymax) / TABLE_STEP)) + 1
    J = TABLE_TERMS
    tab = np.zeros((2, C + 1, J), dtype=complex)
    p = 1.0 + 0j
    for j in range(J):
        if j:
            p = p / _gamma(k, j)
        tab[j % 2, 0, j] = p
    E = O = None
    for c in range(1, C + 1):
        wc = 1j * c * TABLE_STEP
        if abs(wc) <= R_DIRECT:
            E, O = (v[0] for v in series_parts(k, np.array([wc]), 1e-17)[:2])
        else:
            prev = tab[:, c - 1, :]
            powers = (1j * TABLE_STEP) ** np.arange(J)
            E = np.dot(prev[0], powers)
            O = np.dot(prev[1], powers)
        e = tab[0, c]
        o = tab[1, c]
        e[0], o[0] = E, O
        e_prev = 0.0
        for j in range(J - 1):
            e[j + 1] = o[j] / (j + 1)
            o[j + 1] = (wc * e[j] + e_prev - (j + 2.0 * k) * o[j]) / (wc * (j + 1))
            e_prev = e[j]
    return tab


def eval_axis(tab, y):
    """psi at w = i*y for real ``y`` from a table built by ``axis_table``."""
    y = np.asarray(y, dtype=float)
    ay = np.abs(y)
    c = np.rint(ay / TABLE_STEP).astype(np.intp)
    if c.size and c.max() >= tab.shape[1]:
        raise ValueError("argument outside the tabulated range")
    d = 1j * (ay - c * TABLE_STEP)
    ec = tab[0][c]
    oc = tab[1][c]
    E = ec[..., -1]
    O = oc[..., -1]
    for j in range(tab.shape[2] - 2, -1, -1):
        E = E * d + ec[..., j]
        O = O * d + oc[..., j]
    return E + np.sign(y) * O


def matvec_axis(tab, a, b, V):
    """out[i, m] = sum_j psi(i * a_i * b_j) V[j, m] for real ``a``, ``b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    V = np.asarray(V, dtype=complex)
    out = np.empty((a.size, V.shape[1]), dtype=complex)
    rows = max(1, _CHUNK // max(b.size, 1))
    for s in range(0, a.size, rows):
        K = eval_axis(tab, np.outer(a[s:s + rows], b))
        out[s:s + rows] = np.einsum("ij,jm->im", K, V)
    return out


def matvec_general(k, a, b, V, tol=1e-15):
    """out[i, m] = sum_j psi(i * a_i * b_j) V[j, m] for complex ``a``, ``b``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    V = np.asarray(V, dtype=complex)
    out = np.empty((a.size, V.shape[1]), dtype=complex)
    rows = max(1, _CHUNK // max(b.size, 1))
    for s in range(0, a.size, rows):
        K = psi(k, 1j * np.outer(a[s:s + rows], b), tol)
        out[s:s + rows] = np.einsum("ij,jm->im", K, V)
    return out
