# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled shell-summation kernels.

Same contracts as qgas._kernels_py: exact integer shell counts for Z^2 and
Kahan-compensated reductions of the q-statistics integrands over shells or
explicit line arrays, in ascending deterministic order.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt

BACKEND_NAME = "cython"

cdef enum:
    C_KIND_NUMBER = 0
    C_KIND_LP = 1
    C_KIND_ENTROPY = 2
    C_KIND_ENERGY = 3
    C_EMODE_SQRT = 0
    C_EMODE_LIN = 1
    C_EMODE_REL = 2

KIND_NUMBER = C_KIND_NUMBER
KIND_LP = C_KIND_LP
KIND_ENTROPY = C_KIND_ENTROPY
KIND_ENERGY = C_KIND_ENERGY

EMODE_SQRT = C_EMODE_SQRT
EMODE_LIN = C_EMODE_LIN
EMODE_REL = C_EMODE_REL


cdef long long _isqrt(long long x) nogil:
    cdef long long r
    if x < 0:
        return -1
    r = <long long> sqrt(<double> x)
    while (r + 1) * (r + 1) <= x:
        r += 1
    while r * r > x:
        r -= 1
    return r


def torus_r2_counts_i32(long long n_max):
    """counts[n] = #{(i, j) in Z^2 : i^2 + j^2 = n} for n = 0..n_max, exact int32.

    Output windows of 2^21 entries are processed one at a time so the
    scattered increments stay cache-resident.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    counts_arr = np.zeros(n_max + 1, dtype=np.int32)
    cdef cnp.int32_t[::1] counts = counts_arr
    cdef long long window = 1 << 21
    cdef long long lo, hi, i, j, jlo, ii, v, kmax
    counts[0] = 1
    kmax = _isqrt(n_max)
    with nogil:
        i = 1
        while i <= kmax:
            counts[i * i] += 4
            i += 1
        lo = 0
        while lo <= n_max:
            hi = lo + window
            if hi > n_max + 1:
                hi = n_max + 1
            i = 1
            while i * i + 1 < hi:
                ii = i * i
                # j with lo <= ii + j^2 < hi and j >= 1
                if lo > ii:
                    jlo = _isqrt(lo - 1 - ii) + 1
                else:
                    jlo = 1
                j = jlo
                v = ii + j * j
                while v < hi:
                    counts[v] += 4
                    j += 1
                    v = ii + j * j
                i += 1
            lo = hi
    return counts_arr


def torus_r2_counts(long long n_max):
    """counts[n] = #{(i, j) in Z^2 : i^2 + j^2 = n} for n = 0..n_max, exact int64."""
    return torus_r2_counts_i32(n_max).astype(np.int64)


cdef inline double _term(double eps, double weight, int kind,
                         double beta, double z, double q) nogil:
    cdef double w, nu, one_plus
    w = z * exp(-beta * eps)
    if kind == C_KIND_LP:
        if q == 0.0:
            return weight * w
        return -weight * log1p(-q * w) / q
    nu = w / (1.0 - q * w)
    if kind == C_KIND_NUMBER:
        return weight * nu
    if kind == C_KIND_ENERGY:
        return weight * nu * eps
    # entropy bracket
    if nu <= 0.0:
        return 0.0
    if q == 0.0:
        return weight * nu * (1.0 - log(nu))
    one_plus = 1.0 + q * nu
    return weight * ((one_plus / q) * log1p(q * nu) - nu * log(nu))


def shell_reduce(cnp.int64_t[::1] counts, int kind, int emode,
                 double e1, double e2, double e3,
                 double beta, double z, double q, long long n_start=0):
    """(sum, sum of |terms|) of counts[n]*integrand(eps_n) over n >= n_start."""
    cdef double total = 0.0, comp = 0.0, abs_total = 0.0
    cdef double eps, term, y, t
    cdef long long n, size = counts.shape[0]
    cdef long long g
    if z == 0.0:
        return 0.0, 0.0
    with nogil:
        for n in range(n_start, size):
            g = counts[n]
            if g == 0:
                continue
            if emode == C_EMODE_SQRT:
                eps = e1 * sqrt(<double> n)
            elif emode == C_EMODE_LIN:
                eps = e1 * <double> n
            else:
                eps = sqrt(e2 * <double> n + e3)
            term = _term(eps, <double> g, kind, beta, z, q)
            abs_total += term if term >= 0.0 else -term
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
    return total, abs_total


def lines_reduce(cnp.float64_t[::1] energies, cnp.float64_t[::1] weights,
                 int kind, double beta, double z, double q):
    """(sum, sum of |terms|) of weights[i]*integrand(energies[i])."""
    cdef double total = 0.0, comp = 0.0, abs_total = 0.0
    cdef double term, y, t
    cdef Py_ssize_t i, n = energies.shape[0]
    if z == 0.0 or n == 0:
        return 0.0, 0.0
    if weights.shape[0] != n:
        raise ValueError("energies and weights must have equal length")
    with nogil:
        for i in range(n):
            term = _term(energies[i], weights[i], kind, beta, z, q)
            abs_total += term if term >= 0.0 else -term
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
    return total, abs_total
