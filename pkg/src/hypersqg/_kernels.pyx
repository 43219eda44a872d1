# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp, cos, log, log1p, fabs, ceil, fmax, fmin, pow, M_PI

cnp.import_array()

DEF LOG2 = 0.6931471805599453


cdef inline double _weighted_bump(double y1, double s, double ey, double cshift, double shift,
                                  double A, double c1, double r1, double M, int profile,
                                  double p) noexcept nogil:
    # omega~0(y1, s) * cosh(s - shift)^-p, sharing one exponential
    cdef double x1 = exp(0.5 * (y1 + s))
    cdef double x2 = ey / x1
    cdef double u = (x1 - c1) / r1
    cdef double t, phi, psi, c, e, v
    if fabs(u) > 1.0:
        return 0.0
    t = x2 / M
    if t < 0.0 or t > 1.0:
        return 0.0
    c = cos(0.5 * M_PI * u)
    phi = c * c
    if profile == 0 and t <= 0.5:
        psi = 1.0
    else:
        c = cos(0.5 * M_PI * (2.0 * t - 1.0))
        psi = c * c
    if cshift > 0.0:
        e = x1 * x1 * cshift
        return A * phi * psi * pow(0.5 * (e + 1.0 / e), -p)
    v = fabs(s - shift)
    return A * phi * psi * exp(-p * (v + log1p(exp(-2.0 * v)) - LOG2))


cdef double _one_section(double y1, double shift, double A, double c1, double r1, double M,
                         int profile, double p, double log_n, double log_N, double log_M,
                         double log_half_M, const double[::1] t_ref, const double[::1] w_ref,
                         double ppu) noexcept nogil:
    cdef double bounds[3]
    cdef int nb, j, k, q, cnt
    cdef int g = t_ref.shape[0]
    cdef double lo, hi, a, b, length, h, left, s, acc, panel, ey, cshift
    lo = fmax(2.0 * log_n - y1, y1 - 2.0 * log_M)
    hi = 2.0 * log_N - y1
    if hi < lo:
        hi = lo
    ey = exp(y1)
    # e^{s - shift} = x1^2 e^{-y1 - shift}; fall back to the direct form if that factor is extreme
    if fabs(y1 + shift) < 600.0:
        cshift = exp(-y1 - shift)
    else:
        cshift = 0.0
    bounds[0] = lo
    if profile == 0:
        bounds[1] = fmin(fmax(y1 - 2.0 * log_half_M, lo), hi)
        bounds[2] = hi
        nb = 3
    else:
        bounds[1] = hi
        nb = 2
    acc = 0.0
    for j in range(nb - 1):
        a = bounds[j]
        b = bounds[j + 1]
        length = b - a
        if length <= 0.0:
            continue
        cnt = <int>fmax(1.0, ceil(length * ppu - 1e-12))
        h = length / cnt
        for k in range(cnt):
            left = a + length * (<double>k / cnt)
            panel = 0.0
            for q in range(g):
                s = left + h * t_ref[q]
                panel = panel + w_ref[q] * _weighted_bump(y1, s, ey, cshift, shift, A, c1, r1,
                                                          M, profile, p)
            acc = acc + panel * h
    return acc


def section_integrals(y1, shift, double A, double c1, double r1, double M, int profile,
                      double alpha, t_ref, w_ref, double ppu, int workers=1):
    cdef const double[::1] yv = np.ascontiguousarray(y1, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(shift, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(t_ref, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w_ref, dtype=np.float64)
    cdef Py_ssize_t n = yv.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double p = 1.0 + 0.5 * alpha
    cdef double log_n = log(c1 - r1)
    cdef double log_N = log(c1 + r1)
    cdef double log_M = log(M)
    cdef double log_half_M = log(0.5 * M)
    cdef Py_ssize_t i
    if n == 0 or A == 0.0:
        return out_arr
    if workers < 1:
        workers = 1
    for i in prange(n, nogil=True, num_threads=workers, schedule="static"):
        out[i] = _one_section(yv[i], sv[i], A, c1, r1, M, profile, p, log_n, log_N,
                              log_M, log_half_M, tv, wv, ppu)
    return out_arr
