# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dunkl kernel hot loops.

Same algorithms and signatures as ``dunklpw._kernel_py``; see that module
for the mathematics.  Every output entry is computed independently and
every reduction runs in a fixed order, so results do not depend on the
number of OpenMP threads.
"""

import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.math cimport ceil, exp, fabs, rint, sqrt

from .errors import KernelRangeError, TruncationError
from ._kernel_py import MAX_EXPONENT, TABLE_STEP

cdef double R_DIRECT = 4.0
cdef double H_RAY = 2.0
cdef int N_CAP = 4096
cdef int TAYLOR_CAP = 200


cdef inline double cmod(double complex z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


cdef int series_point(double complex k, double complex w, double tol,
                      double complex *E, double complex *O) noexcept nogil:
    cdef double complex t = 1.0
    cdef double complex g
    cdef double aw = cmod(w)
    cdef double target = tol * exp(fabs(w.real))
    cdef int n = 0
    E[0] = 1.0
    O[0] = 0.0
    while True:
        n += 1
        if n % 2:
            g = n + 2.0 * k
            t = t * w / g
            O[0] = O[0] + t
        else:
            t = t * w / n
            E[0] = E[0] + t
        if n >= 8 and 2.0 * cmod(t) <= target and aw / (n + 1) <= 0.5:
            return 0
        if n >= N_CAP:
            return 1


cdef int taylor_step(double complex k, double complex wc, double complex h,
                     double complex *E, double complex *O) noexcept nogil:
    cdef double complex inv_wc = 1.0 / wc
    cdef double complex ratio = h * inv_wc
    cdef double complex e_prev = 0.0
    cdef double complex e = E[0]
    cdef double complex o = O[0]
    cdef double complex sE = e, sO = o, e_next, o_next, f
    cdef double scale = cmod(e) + cmod(o) + 1e-300
    cdef int quiet = 0
    cdef int j = 0
    while True:
        f = h * (1.0 / (j + 1))
        e_next = o * f
        o_next = f * (e + ratio * e_prev - ((j + 2.0 * k) * inv_wc) * o)
        j += 1
        sE = sE + e_next
        sO = sO + o_next
        e_prev = e
        e = e_next
        o = o_next
        if cmod(e) + cmod(o) <= 1e-18 * scale:
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
        if j > TAYLOR_CAP:
            return 1
    E[0] = sE
    O[0] = sO
    return 0


cdef int psi_point(double complex k, double complex w, double tol,
                   double complex *out) noexcept nogil:
    cdef double complex E, O, w0, h, wc
    cdef double r = cmod(w)
    cdef int M, s, err
    if r <= R_DIRECT:
        err = series_point(k, w, tol, &E, &O)
        out[0] = E + O
        return err
    w0 = w * (R_DIRECT / r)
    err = series_point(k, w0, tol, &E, &O)
    M = <int>ceil((r - R_DIRECT) / H_RAY)
    if M < 1:
        M = 1
    h = (w - w0) / M
    wc = w0
    for s in range(M):
        err = err | taylor_step(k, wc, h, &E, &O)
        wc = wc + h
    out[0] = E + O
    return err


cdef double complex psi_value(double complex k, double complex w, double tol,
                             int *err) noexcept nogil:
    cdef double complex v
    err[0] = err[0] | psi_point(k, w, tol, &v)
    return v


cdef inline double complex horner_axis(const double complex[:, :, ::1] tab,
                                       double y, double step) noexcept nogil:
    cdef double ay = fabs(y)
    cdef Py_ssize_t c = <Py_ssize_t>rint(ay / step)
    cdef double complex d = 1j * (ay - c * step)
    cdef Py_ssize_t J = tab.shape[2]
    cdef Py_ssize_t j
    cdef double complex E = tab[0, c, J - 1]
    cdef double complex O = tab[1, c, J - 1]
    for j in range(J - 2, -1, -1):
        E = E * d + tab[0, c, j]
        O = O * d + tab[1, c, j]
    if y < 0:
        return E - O
    if y > 0:
        return E + O
    return E


def _check_range(w):
    re = np.max(np.abs(np.real(w)), initial=0.0)
    if re > MAX_EXPONENT:
        raise KernelRangeError(
            f"|Re(i*lambda*z)| = {re:.1f} exceeds {MAX_EXPONENT}; value would overflow")


def _threads():
    from ._backend import thread_count
    return thread_count()


def psi(k, w, double tol=1e-15):
    """F(w) elementwise for complex ``w`` of any shape."""
    arr = np.ascontiguousarray(w, dtype=complex)
    _check_range(arr)
    flat = arr.ravel()
    out = np.empty_like(flat)
    cdef double complex[::1] wv = flat
    cdef double complex[::1] ov = out
    cdef double complex kk = complex(k)
    cdef Py_ssize_t i, n = flat.shape[0]
    cdef int bad = 0
    cdef int nt = _threads()
    for i in prange(n, nogil=True, num_threads=nt, schedule="static"):
        bad += psi_point(kk, wv[i], tol, &ov[i])
    if bad:
        raise TruncationError("kernel series or continuation failed to converge")
    return out.reshape(arr.shape)


def eval_axis(tab, y):
    """psi at w = i*y for real ``y`` from an ``axis_table``."""
    ya = np.ascontiguousarray(y, dtype=float)
    flat = ya.ravel()
    if flat.size and np.max(np.abs(flat)) / TABLE_STEP + 0.5 >= tab.shape[1]:
        raise ValueError("argument outside the tabulated range")
    out = np.empty(flat.shape, dtype=complex)
    cdef const double complex[:, :, ::1] tv = np.ascontiguousarray(tab)
    cdef const double[::1] yv = flat
    cdef double complex[::1] ov = out
    cdef double step = TABLE_STEP
    cdef Py_ssize_t i, n = flat.shape[0]
    cdef int nt = _threads()
    for i in prange(n, nogil=True, num_threads=nt, schedule="static"):
        ov[i] = horner_axis(tv, yv[i], step)
    return out.reshape(ya.shape)


def matvec_axis(tab, a, b, V):
    """out[i, m] = sum_j psi(i * a_i * b_j) V[j, m] for real ``a``, ``b``."""
    av = np.ascontiguousarray(a, dtype=float).ravel()
    bv = np.ascontiguousarray(b, dtype=float).ravel()
    Vc = np.ascontiguousarray(V, dtype=complex)
    if av.size and bv.size:
        top = np.max(np.abs(av)) * np.max(np.abs(bv))
        if top / TABLE_STEP + 0.5 >= tab.shape[1]:
            raise ValueError("argument outside the tabulated range")
    out = np.zeros((av.size, Vc.shape[1]), dtype=complex)
    cdef const double complex[:, :, ::1] tv = np.ascontiguousarray(tab)
    cdef const double[::1] A = av
    cdef const double[::1] B = bv
    cdef const double complex[:, ::1] W = Vc
    cdef double complex[:, ::1] O = out
    cdef double step = TABLE_STEP
    cdef Py_ssize_t i, j, m, na = av.shape[0], nb = bv.shape[0], nm = Vc.shape[1]
    cdef double complex p
    cdef int nt = _threads()
    for i in prange(na, nogil=True, num_threads=nt, schedule="static"):
        for j in range(nb):
            p = horner_axis(tv, A[i] * B[j], step)
            for m in range(nm):
                O[i, m] = O[i, m] + p * W[j, m]
    return out


def matvec_general(k, a, b, V, double tol=1e-15):
    """out[i, m] = sum_j psi(i * a_i * b_j) V[j, m] for complex ``a``, ``b``."""
    av = np.ascontiguousarray(a, dtype=complex).ravel()
    bv = np.ascontiguousarray(b, dtype=complex).ravel()
    Vc = np.ascontiguousarray(V, dtype=complex)
    _check_range(1j * np.outer(av, bv))
    out = np.zeros((av.size, Vc.shape[1]), dtype=complex)
    cdef const double complex[::1] A = av
    cdef const double complex[::1] B = bv
    cdef const double complex[:, ::1] W = Vc
    cdef double complex[:, ::1] O = out
    cdef double complex kk = complex(k)
    cdef Py_ssize_t i, j, m, na = av.shape[0], nb = bv.shape[0], nm = Vc.shape[1]
    cdef double complex p
    errs = np.zeros(av.size, dtype=np.intc)
    cdef int[::1] E = errs
    cdef int nt = _threads()
    for i in prange(na, nogil=True, num_threads=nt, schedule="static"):
        for j in range(nb):
            p = psi_value(kk, 1j * A[i] * B[j], tol, &E[i])
            for m in range(nm):
                O[i, m] = O[i, m] + p * W[j, m]
    if errs.any():
        raise TruncationError("kernel series or continuation failed to converge")
    return out
