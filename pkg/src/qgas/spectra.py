"""Discrete spectra: torus momentum shells and the S^3 Dirac spectrum.

Torus sums over Z^d are grouped by the squared norm n = |k|^2 with exact
representation counts r_d(n), collapsing the lattice sum to one dimension.
Truncation radii come with certified tail bounds built from the occupation
bound nu(eps) <= z e^{-beta eps} / (1 - max(0, z q e^{-beta eps0})) and the
cumulative lattice-count bound #{|k|^2 <= x} <= (2 sqrt(x) + 1)^d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple, Union

import numpy as np
from scipy import special as sp

from . import kernels
from .core import (
    NATURAL,
    Dispersion,
    DispersionKind,
    ThermoState,
    Torus,
    UnitSystem,
    validate_state,
)
from .errors import DomainError, TailBoundFailure
from .qstat import ENERGY, ENTROPY, SpectralLine

# Default cap on the number of summed terms (shells for a torus, levels for
# the sphere) before a tolerance is declared unreachable.
MAX_TERMS_DEFAULT = 1_000_000_000


@dataclass(frozen=True)
class ShellTable:
    """Exact counts r_d(n) = #{k in Z^d : |k|^2 = n} for n = 0..n_max."""

    d: int
    counts: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.counts) - 1

    def total_points(self) -> int:
        return int(np.sum(self.counts))


def shell_counts(d: int, n_max: int) -> ShellTable:
    """Build the exact shell table by iterated convolution with r_1."""
    return ShellTable(d=d, counts=kernels.torus_shell_counts(d, n_max))


@dataclass(frozen=True)
class TorusSpectrum:
    """Shell-grouped spectrum of the d-torus for a given dispersion."""

    geometry: Torus
    dispersion: Dispersion
    units: UnitSystem = NATURAL
    n_max: int | None = None

    @property
    def eps_min(self) -> float:
        return self.energy_of_shell(0)

    def energy_params(self) -> Tuple[int, float, float, float]:
        """(emode, e1, e2, e3) with eps_n = e1*sqrt(n) | e1*n | sqrt(e2*n+e3)."""
        u, g, disp = self.units, self.geometry, self.dispersion
        if disp.kind is DispersionKind.MASSLESS:
            return kernels.EMODE_SQRT, u.c * u.h / g.L, 0.0, 0.0
        if disp.kind is DispersionKind.MASSIVE:
            return kernels.EMODE_LIN, u.h ** 2 / (2.0 * disp.m * g.L ** 2), 0.0, 0.0
        e2 = (u.c * u.h / g.L) ** 2
        e3 = (disp.m * u.c ** 2) ** 2
        return kernels.EMODE_REL, 0.0, e2, e3

    def energy_of_shell(self, n: int) -> float:
        emode, e1, e2, e3 = self.energy_params()
        if emode == kernels.EMODE_SQRT:
            return e1 * math.sqrt(n)
        if emode == kernels.EMODE_LIN:
            return e1 * n
        return math.sqrt(e2 * n + e3)

    def lines(self, n_limit: int | None = None) -> Iterator[SpectralLine]:
        """Spectral lines in strictly increasing energy (empty shells skipped)."""
        limit = self.n_max if n_limit is None else n_limit
        if limit is None:
            raise DomainError("unbounded spectrum: pass n_limit")
        table = shell_counts(self.geometry.d, limit)
        for n, g in enumerate(table.counts.tolist()):
            if g:
                yield SpectralLine(self.energy_of_shell(n), int(g))


@dataclass(frozen=True)
class SphereSpectrum:
    """|D|-spectrum (k + 1/2), k >= 1, of the Dirac operator on S^3_R.

    Each line carries the proof weight k(k+1); the two ± branches of the
    Dirac spectrum double every level, which enters sums through
    `degeneracy_factor` (total multiplicity 2k(k+1)).
    """

    R: float
    dispersion: Dispersion
    units: UnitSystem = NATURAL
    k_max: int | None = None
    degeneracy_factor: int = 2

    @property
    def scale(self) -> float:
        """Energy scale: eps_k = scale*(k+1/2) (massless) or scale*(k+1/2)^2."""
        u, disp = self.units, self.dispersion
        hbar = u.hbar
        if disp.kind is DispersionKind.MASSLESS:
            return u.c * hbar / self.R
        if disp.kind is DispersionKind.MASSIVE:
            return hbar ** 2 / (2.0 * disp.m * self.R ** 2)
        raise DomainError("sphere spectrum supports massless and massive dispersions")

    def energy_of_level(self, k: int) -> float:
        x = k + 0.5
        if self.dispersion.kind is DispersionKind.MASSLESS:
            return self.scale * x
        return self.scale * x * x

    @property
    def eps_min(self) -> float:
        return self.energy_of_level(1)

    def lines(self, k_limit: int | None = None) -> Iterator[SpectralLine]:
        limit = self.k_max if k_limit is None else k_limit
        if limit is None:
            raise DomainError("unbounded spectrum: pass k_limit")
        for k in range(1, limit + 1):
            yield SpectralLine(self.energy_of_level(k), k * (k + 1))

    def arrays(self, k_limit: int) -> Tuple[np.ndarray, np.ndarray]:
        ks = np.arange(1, k_limit + 1, dtype=np.float64)
        x = ks + 0.5
        if self.dispersion.kind is DispersionKind.MASSLESS:
            energies = self.scale * x
        else:
            energies = self.scale * x * x
        weights = ks * (ks + 1.0)
        return energies, weights


@dataclass(frozen=True)
class ExplicitSpectrum:
    """A hand-given finite list of spectral lines (test and probe helper)."""

    line_list: Tuple[SpectralLine, ...]

    def __post_init__(self):
        energies = [l.energy for l in self.line_list]
        if any(b <= a for a, b in zip(energies, energies[1:])):
            raise DomainError("energies must be strictly increasing")

    @property
    def eps_min(self) -> float:
        return self.line_list[0].energy if self.line_list else math.inf

    def lines(self) -> Iterator[SpectralLine]:
        return iter(self.line_list)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        e = np.array([l.energy for l in self.line_list], dtype=np.float64)
        w = np.array([l.multiplicity for l in self.line_list], dtype=np.float64)
        return e, w


DiscreteSpectrum = Union[TorusSpectrum, SphereSpectrum, ExplicitSpectrum]


def torus_spectrum(
    geometry: Torus,
    dispersion: Dispersion,
    units: UnitSystem = NATURAL,
    n_max: int | None = None,
) -> TorusSpectrum:
    return TorusSpectrum(geometry, dispersion, units, n_max)


def sphere3_spectrum(
    R: float,
    dispersion: Dispersion,
    units: UnitSystem = NATURAL,
    k_max: int | None = None,
) -> SphereSpectrum:
    return SphereSpectrum(R, dispersion, units, k_max)


def explicit_spectrum(pairs: Sequence[Tuple[float, int]]) -> ExplicitSpectrum:
    return ExplicitSpectrum(tuple(SpectralLine(e, g) for e, g in pairs))


# ---------------------------------------------------------------------------
# Certified tail bounds
# ---------------------------------------------------------------------------


def _upper_gamma(a: float, x: float) -> float:
    """Upper incomplete gamma Gamma(a, x) (a > 0)."""
    return float(sp.gammaincc(a, x)) * math.gamma(a)


def _kappa(state: ThermoState, eps_min: float) -> float:
    """Pole prefactor 1/(1 - max(0, z q e^{-beta eps_min})) from the trace-class proof."""
    if state.q <= 0:
        return 1.0
    x = state.z * state.q * math.exp(-state.beta * eps_min)
    if x >= 1.0:
        raise TailBoundFailure("state sits on the occupation pole; no tail bound")
    return 1.0 / (1.0 - x)


def _torus_tails(spec: TorusSpectrum, state: ThermoState, N: int) -> Tuple[float, float]:
    """(T0, T1): bounds on the tails of sum r_d(n) nu(eps_n) and of the same
    sum weighted by eps_n, beyond shell N (N >= 1)."""
    d = spec.geometry.d
    emode, e1, e2, e3 = spec.energy_params()
    zk = state.z * _kappa(state, spec.eps_min)
    beta = state.beta
    if zk == 0.0:
        return 0.0, 0.0
    if emode == kernels.EMODE_REL:
        # eps_n >= sqrt(e2) sqrt(n) and eps_n <= sqrt(e2) sqrt(n) + sqrt(e3)
        b = beta * math.sqrt(e2)
        t0 = _tail_sqrt(d, zk, b, N)
        t1 = math.sqrt(e2) * _tail_sqrt_weighted(d, zk, b, N) + math.sqrt(e3) * t0
        return t0, t1
    if emode == kernels.EMODE_SQRT:
        b = beta * e1
        return _tail_sqrt(d, zk, b, N), e1 * _tail_sqrt_weighted(d, zk, b, N)
    c = beta * e1
    return _tail_lin(d, zk, c, N), e1 * _tail_lin_weighted(d, zk, c, N)


def _count_prefactor(d: int, N: int) -> float:
    """kappa_d with #{|k|^2 <= x} <= kappa_d x^{d/2} for x >= N >= 1.

    Unit cubes centred on lattice points inside radius sqrt(x) lie within
    radius sqrt(x) + sqrt(d)/2, so the count is at most
    V_d (sqrt(x) + sqrt(d)/2)^d; (2 sqrt(x) + 1)^d is kept as a fallback.
    """
    vd = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    ball = vd * (1.0 + 0.5 * math.sqrt(d) / math.sqrt(N)) ** d
    cube = (2.0 + 1.0 / math.sqrt(N)) ** d
    return min(ball, cube)


def _tail_sqrt(d: int, zk: float, b: float, N: int) -> float:
    if d == 1:
        x = math.exp(-b)
        return 2.0 * zk * x ** (math.isqrt(N) + 1) / (1.0 - x)
    return zk * _count_prefactor(d, N) * _upper_gamma(d + 1, b * math.sqrt(N)) / b ** d


def _tail_sqrt_weighted(d: int, zk: float, b: float, N: int) -> float:
    """Tail of sum r_d(n) sqrt(n) e^{-b sqrt(n)} beyond N (times zk)."""
    if d == 1:
        K = math.isqrt(N)
        x = math.exp(-b)
        return 2.0 * zk * x ** (K + 1) * ((K + 1) / (1 - x) + x / (1 - x) ** 2)
    if b * math.sqrt(N) < 1.0:  # sqrt(x) e^{-b sqrt(x)} not yet decreasing
        return math.inf
    return zk * _count_prefactor(d, N) * _upper_gamma(d + 2, b * math.sqrt(N)) / b ** (d + 1)


def _tail_lin(d: int, zk: float, c: float, N: int) -> float:
    if d == 1:
        K = math.isqrt(N)
        return 2.0 * zk * math.exp(-c * (K + 1) ** 2) / (1.0 - math.exp(-2.0 * c * (K + 1)))
    return zk * _count_prefactor(d, N) * _upper_gamma(d / 2 + 1, c * N) / c ** (d / 2)


def _tail_lin_weighted(d: int, zk: float, c: float, N: int) -> float:
    if d >= 2 and c * N < 1.0:  # x e^{-c x} not yet decreasing
        return math.inf
    if d == 1:
        K = math.isqrt(N)
        x = math.exp(-2.0 * c * (K + 1))
        head = math.exp(-c * (K + 1) ** 2)
        # sum_{k>K} k^2 e^{-c k^2} <= head * sum_{j>=0} (K+1+j)^2 x^j
        s = (K + 1) ** 2 / (1 - x) + 2 * (K + 1) * x / (1 - x) ** 2 + x * (1 + x) / (1 - x) ** 3
        return 2.0 * zk * head * s
    return zk * _count_prefactor(d, N) * _upper_gamma(d / 2 + 2, c * N) / c ** (d / 2 + 1)


def _sphere_tails(spec: SphereSpectrum, state: ThermoState, K: int) -> Tuple[float, float]:
    """(T0, T1) bounds beyond level K for the sphere (degeneracy factor included).

    Sum-vs-integral comparisons require the summand to be decreasing past K;
    below that threshold the bound is reported as +inf and the truncation
    search simply keeps growing K.
    """
    s = spec.scale
    beta = state.beta
    zk = state.z * _kappa(state, spec.eps_min) * spec.degeneracy_factor
    if zk == 0.0:
        return 0.0, 0.0
    c = beta * s
    if spec.dispersion.kind is DispersionKind.MASSLESS:
        # weights k(k+1) <= (k+1)^2 =: j^2, eps = s(j - 1/2)
        if c * (K + 1) < 2.0:
            return math.inf, math.inf
        pref = zk * math.exp(c / 2.0)
        t0 = pref * _upper_gamma(3, c * (K + 1)) / c ** 3
        t1 = s * pref * _upper_gamma(4, c * (K + 1)) / c ** 4
        return t0, t1
    # massive: eps >= s k^2, weights k(k+1) <= 2 k^2
    if c * K * K < 1.5:
        return math.inf, math.inf
    u = c * K * K
    t0 = zk * _upper_gamma(1.5, u) / c ** 1.5
    # eps <= s(k+1)^2 <= 4 s k^2
    t1 = zk * 4.0 * s * _upper_gamma(2.5, u) / c ** 2.5
    return t0, t1


def tail_bound(spectrum: DiscreteSpectrum, state: ThermoState, kind: str, N: int) -> float:
    """Certified bound on the dropped part of the `kind` sum beyond index N.

    N is a shell index for torus spectra and a level index k for the sphere.
    Number and LP integrands are bounded by z kappa e^{-beta eps}; energy adds
    one eps weight; the entropy bracket at equilibrium equals
    (1/q) ln(1+q nu) + nu (beta eps - ln z) and is bounded accordingly.
    """
    if isinstance(spectrum, ExplicitSpectrum):
        return 0.0
    if isinstance(spectrum, TorusSpectrum):
        t0, t1 = _torus_tails(spectrum, state, N)
        eps_start = spectrum.energy_of_shell(N)
    else:
        t0, t1 = _sphere_tails(spectrum, state, N)
        eps_start = spectrum.energy_of_level(N)
    if kind in ("number", "lp"):
        return t0
    if kind == ENERGY:
        return t1
    if kind == ENTROPY:
        if state.z == 0.0:
            return 0.0
        nu0 = state.z * math.exp(-state.beta * eps_start)
        kappa2 = 1.0 if state.q >= 0 else 1.0 / max(1.0 - abs(state.q) * nu0, 0.5)
        return (kappa2 + abs(math.log(state.z))) * t0 + state.beta * t1
    raise DomainError(f"unknown kind {kind!r}")


def truncation_radius(
    spectrum: DiscreteSpectrum,
    state: ThermoState,
    tol: float,
    kind: str = "number",
    max_terms: int = MAX_TERMS_DEFAULT,
) -> Tuple[int, float]:
    """Smallest truncation index with certified `kind` tail <= tol.

    Returns (index, bound at that index); index counts shells (torus) or
    levels (sphere).  Raises TailBoundFailure when the cap on summed terms
    is exceeded.
    """
    if isinstance(spectrum, ExplicitSpectrum):
        return len(spectrum.line_list), 0.0
    validate_state(state, spectrum.eps_min)
    if state.z == 0.0:
        return 0, 0.0
    if math.isinf(tol):
        return 0, tail_bound(spectrum, state, kind, 1)

    def terms_at(index: int) -> int:
        if isinstance(spectrum, TorusSpectrum):
            return math.isqrt(index) + 1 if spectrum.geometry.d == 1 else index + 1
        return index

    lo = 1
    hi = 1
    while tail_bound(spectrum, state, kind, hi) > tol:
        hi *= 2
        if terms_at(hi) > max_terms:
            raise TailBoundFailure(
                f"tolerance {tol:.3g} needs more than max_terms={max_terms} summed terms"
            )
    while lo < hi:
        mid = (lo + hi) // 2
        if tail_bound(spectrum, state, kind, mid) <= tol:
            hi = mid
        else:
            lo = mid + 1
    return hi, tail_bound(spectrum, state, kind, hi)
