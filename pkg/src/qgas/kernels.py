"""Backend selection and shared lattice-count helpers.

The compiled extension is preferred when importable; QSL_BACKEND=python (or
cython) forces a choice.  Both backends expose the same kernel API; results
are deterministic per backend.
"""

from __future__ import annotations

import math
import os

import numpy as np
import scipy.fft as _fft

from .errors import QGasError

_requested = os.environ.get("QSL_BACKEND", "auto").lower()

if _requested not in ("auto", "cython", "python"):
    raise QGasError(f"QSL_BACKEND must be auto, cython or python, not {_requested!r}")

if _requested == "python":
    from . import _kernels_py as backend
else:
    try:
        from . import _shellsum as backend  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "cython":
            raise QGasError("compiled backend requested via QSL_BACKEND but not built")
        from . import _kernels_py as backend

BACKEND_NAME = backend.BACKEND_NAME

KIND_NUMBER = 0
KIND_LP = 1
KIND_ENTROPY = 2
KIND_ENERGY = 3

EMODE_SQRT = 0
EMODE_LIN = 1
EMODE_REL = 2

torus_r2_counts = backend.torus_r2_counts
torus_r2_counts_i32 = backend.torus_r2_counts_i32
shell_reduce = backend.shell_reduce
lines_reduce = backend.lines_reduce

_FFT_MIN = 1 << 18


def squares_kernel(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Indices j^2 <= n_max and their lattice weights (1 for j=0, else 2)."""
    kmax = math.isqrt(n_max)
    sq = np.arange(kmax + 1, dtype=np.int64) ** 2
    w = np.full(kmax + 1, 2, dtype=np.int64)
    w[0] = 1
    return sq, w


def convolve_with_squares(counts: np.ndarray, n_max: int) -> np.ndarray:
    """Exact counts of r_{d+1} from r_d: out[n] = sum_j w_j counts[n - j^2].

    Small tables use integer slice adds; large ones a real FFT whose output
    is rounded and spot-verified against the defining sum.
    """
    counts = np.asarray(counts[: n_max + 1], dtype=np.int64)
    sq, w = squares_kernel(n_max)
    if n_max <= _FFT_MIN:
        out = np.zeros(n_max + 1, dtype=np.int64)
        for j2, wj in zip(sq.tolist(), w.tolist()):
            out[j2:] += wj * counts[: n_max + 1 - j2]
        return out

    size = _fft.next_fast_len(2 * n_max + 1, real=True)
    a = np.zeros(size, dtype=np.float64)
    a[: n_max + 1] = counts
    fa = _fft.rfft(a)
    a[:] = 0.0
    a[sq] = w
    fb = _fft.rfft(a)
    del a
    fa *= fb
    del fb
    conv = _fft.irfft(fa, n=size)[: n_max + 1]
    del fa
    out = np.rint(conv).astype(np.int64)
    drift = float(np.max(np.abs(conv - out)))
    if drift > 0.01:
        raise QGasError(f"FFT count convolution drift {drift:.3g} too large to round")
    _verify_convolution(out, counts, sq, w, n_max)
    return out


def _verify_convolution(out, counts, sq, w, n_max, spots: int = 32) -> None:
    rng = np.random.default_rng(12345)
    idx = np.unique(
        np.concatenate(
            [rng.integers(0, n_max + 1, size=spots), np.array([0, 1, n_max], dtype=np.int64)]
        )
    )
    for n in idx.tolist():
        mask = sq <= n
        expect = int(np.sum(w[mask] * counts[n - sq[mask]]))
        if int(out[n]) != expect:
            raise QGasError(f"FFT count convolution mismatch at n={n}: {out[n]} != {expect}")


def torus_shell_counts(d: int, n_max: int) -> np.ndarray:
    """Exact r_d(n) for n = 0..n_max via iterated square convolution."""
    if d < 1:
        raise QGasError("dimension must be >= 1")
    if n_max < 0:
        raise QGasError("n_max must be >= 0")
    if d == 1:
        counts = np.zeros(n_max + 1, dtype=np.int64)
        sq, w = squares_kernel(n_max)
        counts[sq] = w
        return counts
    counts = torus_r2_counts(n_max)
    for _ in range(d - 2):
        counts = convolve_with_squares(counts, n_max)
    return counts
