"""Numpy fallback for the hot summation kernels.

Mirrors the API of the compiled extension `qgas._shellsum`.  Reductions are
chunked with a fixed chunk size and combined with Kahan compensation across
chunk partial sums, so repeated runs give bit-identical results regardless
of thread settings.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

_CHUNK = 1 << 20

# integrand kind codes (shared with the compiled backend)
KIND_NUMBER = 0
KIND_LP = 1
KIND_ENTROPY = 2
KIND_ENERGY = 3

# energy-map codes: eps_n = e1*sqrt(n), e1*n, sqrt(e2*n + e3)
EMODE_SQRT = 0
EMODE_LIN = 1
EMODE_REL = 2


def torus_r2_counts(n_max: int) -> np.ndarray:
    """counts[n] = #{(i, j) in Z^2 : i^2 + j^2 = n} for n = 0..n_max, exact."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    counts = np.zeros(n_max + 1, dtype=np.int64)
    counts[0] = 1
    kmax = math.isqrt(n_max)
    if kmax >= 1:
        sq = np.arange(1, kmax + 1, dtype=np.int64) ** 2
        counts[sq] += 4  # points on the axes, (±i, 0) and (0, ±j)
    # interior of the first quadrant, weight 4; buffered bincount flushes
    buf = np.empty(_CHUNK, dtype=np.int64)
    used = 0
    for i in range(1, kmax + 1):
        jmax = math.isqrt(n_max - i * i)
        if jmax < 1:
            break
        vals = i * i + sq[:jmax]
        m = vals.size
        while m > 0:
            take = min(m, _CHUNK - used)
            buf[used : used + take] = vals[:take]
            used += take
            vals = vals[take:]
            m -= take
            if used == _CHUNK:
                counts += 4 * np.bincount(buf, minlength=n_max + 1)
                used = 0
    if used:
        counts += 4 * np.bincount(buf[:used], minlength=n_max + 1)
    return counts


def torus_r2_counts_i32(n_max: int) -> np.ndarray:
    """int32 variant of torus_r2_counts (the values comfortably fit)."""
    return torus_r2_counts(n_max).astype(np.int32)


def _energies(n: np.ndarray, emode: int, e1: float, e2: float, e3: float) -> np.ndarray:
    if emode == EMODE_SQRT:
        return e1 * np.sqrt(n)
    if emode == EMODE_LIN:
        return e1 * n
    if emode == EMODE_REL:
        return np.sqrt(e2 * n + e3)
    raise ValueError(f"unknown emode {emode}")


def _integrand_terms(
    eps: np.ndarray, weights: np.ndarray, kind: int, beta: float, z: float, q: float
) -> np.ndarray:
    w = z * np.exp(-beta * eps)
    if kind == KIND_LP and q == 0.0:
        return weights * w
    nu = w / (1.0 - q * w)
    if kind == KIND_NUMBER:
        return weights * nu
    if kind == KIND_ENERGY:
        return weights * nu * eps
    if kind == KIND_LP:
        return weights * (-np.log1p(-q * w) / q)
    if kind == KIND_ENTROPY:
        out = np.zeros_like(nu)
        pos = nu > 0.0
        nup = nu[pos]
        if q == 0.0:
            out[pos] = nup * (1.0 - np.log(nup))
        else:
            out[pos] = ((1.0 + q * nup) / q) * np.log1p(q * nup) - nup * np.log(nup)
        return weights * out
    raise ValueError(f"unknown kind {kind}")


def shell_reduce(
    counts: np.ndarray,
    kind: int,
    emode: int,
    e1: float,
    e2: float,
    e3: float,
    beta: float,
    z: float,
    q: float,
    n_start: int = 0,
) -> tuple[float, float]:
    """(sum, sum of |terms|) of counts[n]*integrand(eps_n) over n >= n_start."""
    if z == 0.0:
        return 0.0, 0.0
    total = 0.0
    comp = 0.0
    abs_total = 0.0
    n = len(counts)
    for lo in range(n_start, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        sub = counts[lo:hi]
        nz = np.flatnonzero(sub)
        if nz.size == 0:
            continue
        ns = (lo + nz).astype(np.float64)
        eps = _energies(ns, emode, e1, e2, e3)
        terms = _integrand_terms(eps, sub[nz].astype(np.float64), kind, beta, z, q)
        chunk = float(np.sum(terms))
        abs_total += float(np.sum(np.abs(terms)))
        y = chunk - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total, abs_total


def lines_reduce(
    energies: np.ndarray,
    weights: np.ndarray,
    kind: int,
    beta: float,
    z: float,
    q: float,
) -> tuple[float, float]:
    """(sum, sum of |terms|) of weights[i]*integrand(energies[i])."""
    if z == 0.0 or len(energies) == 0:
        return 0.0, 0.0
    total = 0.0
    comp = 0.0
    abs_total = 0.0
    n = len(energies)
    for lo in range(0, n, _CHUNK):
        hi = min(lo + _CHUNK, n)
        terms = _integrand_terms(
            np.asarray(energies[lo:hi], dtype=np.float64),
            np.asarray(weights[lo:hi], dtype=np.float64),
            kind,
            beta,
            z,
            q,
        )
        chunk = float(np.sum(terms))
        abs_total += float(np.sum(np.abs(terms)))
        y = chunk - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total, abs_total
