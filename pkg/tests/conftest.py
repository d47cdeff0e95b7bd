import math

import numpy as np
import pytest

from qgas import ThermoState, explicit_spectrum


def brute_force_lattice_sum(d, f, k_cap):
    """Direct sum of f(|k|^2) over k in Z^d with |k_i| <= k_cap."""
    rng = range(-k_cap, k_cap + 1)
    total = 0.0
    if d == 1:
        return math.fsum(f(k * k) for k in rng)
    if d == 2:
        return math.fsum(f(i * i + j * j) for i in rng for j in rng)
    if d == 3:
        return math.fsum(f(i * i + j * j + l * l) for i in rng for j in rng for l in rng)
    raise ValueError("brute force implemented for d <= 3")


def brute_force_shell_counts(d, n_max):
    """Histogram of |k|^2 over Z^d by direct enumeration."""
    cap = math.isqrt(n_max)
    counts = np.zeros(n_max + 1, dtype=np.int64)
    rng = range(-cap, cap + 1)
    if d == 1:
        for i in rng:
            if i * i <= n_max:
                counts[i * i] += 1
    elif d == 2:
        for i in rng:
            for j in rng:
                n = i * i + j * j
                if n <= n_max:
                    counts[n] += 1
    elif d == 3:
        for i in rng:
            for j in rng:
                ij = i * i + j * j
                if ij > n_max:
                    continue
                for l in rng:
                    n = ij + l * l
                    if n <= n_max:
                        counts[n] += 1
    else:
        raise ValueError("d <= 3 only")
    return counts


@pytest.fixture
def three_line_spectrum():
    return explicit_spectrum([(0.5, 1), (1.0, 2), (2.0, 3)])


@pytest.fixture
def fifty_line_spectrum():
    return explicit_spectrum([(0.1 * (i + 1), 1 + (i % 3)) for i in range(50)])


@pytest.fixture
def state_boltzmann():
    return ThermoState(beta=1.0, z=1.0, q=0.0)
