"""Pointwise q-statistics: occupation law, partition function, entropy.

The occupation of a level eps is nu_q(eps) = 1/(z^{-1} e^{beta*eps} - q).
All formulas are evaluated through w = z*e^{-beta*eps}, which stays finite
for arbitrarily large beta*eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

from .core import NATURAL, ThermoState, UnitSystem, validate_state
from .errors import DomainError

NUMBER = "number"
LP = "lp"
ENTROPY = "entropy"
ENERGY = "energy"
KINDS = (NUMBER, LP, ENTROPY, ENERGY)


@dataclass(frozen=True)
class SpectralLine:
    """One eigenvalue with its (finite) multiplicity."""

    energy: float
    multiplicity: int

    def __post_init__(self):
        if self.energy < 0 or not math.isfinite(self.energy):
            raise DomainError("energy must be finite and >= 0")
        if self.multiplicity < 1:
            raise DomainError("multiplicity must be a positive integer")


@dataclass(frozen=True)
class OccupationProfile:
    """Candidate per-level populations nu(eps), not necessarily at equilibrium."""

    entries: Tuple[Tuple[SpectralLine, float], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[SpectralLine, float]]) -> "OccupationProfile":
        entries = tuple(pairs)
        for line, nu in entries:
            if nu < 0:
                raise DomainError(f"population nu = {nu} < 0 at eps = {line.energy}")
        return cls(entries)

    def total_number(self) -> float:
        return math.fsum(line.multiplicity * nu for line, nu in self.entries)

    def total_energy(self) -> float:
        return math.fsum(line.multiplicity * nu * line.energy for line, nu in self.entries)


def occupation(eps: float, state: ThermoState) -> float:
    """Average population nu_q(eps) = 1/(z^{-1} e^{beta eps} - q)."""
    if state.z == 0.0:
        return 0.0
    validate_state(state, eps)
    w = state.z * math.exp(-state.beta * eps)
    return w / (1.0 - state.q * w)


def level_population(line: SpectralLine, state: ThermoState) -> float:
    """n_q(eps) = g(eps) * nu_q(eps)."""
    return line.multiplicity * occupation(line.energy, state)


def _entropy_bracket(nu: float, q: float) -> float:
    """Per-level entropy summand at population nu (units of kB, no degeneracy)."""
    if nu == 0.0:
        return 0.0
    if nu < 0:
        raise DomainError("population must be >= 0")
    if q == 0.0:
        return nu * (1.0 - math.log(nu))
    one_plus = 1.0 + q * nu
    if one_plus <= 0.0:
        raise DomainError(f"1 + q*nu = {one_plus} <= 0 outside the entropy domain")
    return (one_plus / q) * math.log(one_plus) - nu * math.log(nu)


def entropy_functional(profile: OccupationProfile, q: float) -> float:
    """S_q({nu}) in units of kB, summed with degeneracies.

    q != 0 uses the deformed functional, q = 0 the Boltzmann reduction
    sum g*nu*(1 - ln nu); the nu -> 0 limit contributes 0.
    """
    if not (-1.0 <= q <= 1.0):
        raise DomainError("q must lie in [-1, 1]")
    return math.fsum(
        line.multiplicity * _entropy_bracket(nu, q) for line, nu in profile.entries
    )


def integrand(kind: str, eps: float, state: ThermoState, units: UnitSystem = NATURAL) -> float:
    """Pointwise value of the spectral-action integrand of the given kind.

    number: h*nu_q(eps)                     lp: -(h/q) ln(1 - z q e^{-beta eps})
    energy: nu_q(eps)*eps                   entropy: per-level bracket at nu_q
    """
    if kind not in KINDS:
        raise DomainError(f"unknown integrand kind {kind!r}")
    if state.z == 0.0:
        return 0.0
    validate_state(state, eps)
    w = state.z * math.exp(-state.beta * eps)
    nu = w / (1.0 - state.q * w)
    if kind == NUMBER:
        return units.h * nu
    if kind == ENERGY:
        return nu * eps
    if kind == ENTROPY:
        return _entropy_bracket(nu, state.q)
    # Landau-potential integrand
    if state.q == 0.0:
        return units.h * w
    return -(units.h / state.q) * math.log1p(-state.q * w)


def _finite_log_z(lines: Sequence[SpectralLine], state: ThermoState) -> float:
    """ln Z_q over an explicit finite line list (no truncation machinery)."""
    if state.z == 0.0:
        return 0.0
    eps_min = min(line.energy for line in lines)
    validate_state(state, eps_min)
    q, z, beta = state.q, state.z, state.beta
    if q == 0.0:
        return z * math.fsum(l.multiplicity * math.exp(-beta * l.energy) for l in lines)
    return -(1.0 / q) * math.fsum(
        l.multiplicity * math.log1p(-q * z * math.exp(-beta * l.energy)) for l in lines
    )


def log_grand_partition(spectrum, state: ThermoState, tol: float):
    """ln Z_q over a DiscreteSpectrum, as a SumResult with certified tail.

    For q != 0 this is -(1/q) sum g ln(1 - z q e^{-beta eps}); for q = 0 it
    degenerates to z * Tr e^{-beta H}.
    """
    from . import spectral_sum

    res = spectral_sum.spectral_action(LP, spectrum, state, NATURAL, tol)
    return res


def landau_potential(spectrum, state: ThermoState, tol: float, units: UnitSystem = NATURAL) -> float:
    """Omega_q = -(1/beta) ln Z_q (an energy)."""
    return -pressure_volume(spectrum, state, tol, units)


def pressure_volume(spectrum, state: ThermoState, tol: float, units: UnitSystem = NATURAL) -> float:
    """PV = kB*T ln Z_q = -Omega_q; for q = 0 equals kB*T*z*Tr e^{-beta H}."""
    ln_z = log_grand_partition(spectrum, state, tol)
    return ln_z.value / state.beta


def equilibrium_entropy(spectrum, state: ThermoState, tol: float) -> float:
    """S_q(beta, z) in units of kB: the entropy functional at nu = nu_q."""
    from . import spectral_sum

    if state.z == 0.0:
        return 0.0
    res = spectral_sum.spectral_action(ENTROPY, spectrum, state, NATURAL, tol)
    return res.value


def equilibrium_profile(lines: Sequence[SpectralLine], state: ThermoState) -> OccupationProfile:
    """The equilibrium populations nu_q(eps) over an explicit line list."""
    return OccupationProfile.from_pairs((l, occupation(l.energy, state)) for l in lines)


def derivative_theorem_check(
    lines: Sequence[SpectralLine],
    state: ThermoState,
    level_index: int,
    h_step: float | None = None,
) -> Tuple[float, float, float]:
    """Check -(1/beta) d(ln Z_q)/d(eps_level) = n_q(eps_level) by central difference.

    Returns (lhs, rhs, |lhs - rhs|).  The default step is 1e-5*max(1, eps).
    """
    lines = list(lines)
    if not 0 <= level_index < len(lines):
        raise DomainError("level_index out of range")
    target = lines[level_index]
    if h_step is None:
        h_step = 1e-5 * max(1.0, target.energy)

    def log_z_at(eps: float) -> float:
        shifted: List[SpectralLine] = list(lines)
        shifted[level_index] = SpectralLine(eps, target.multiplicity)
        return _finite_log_z(shifted, state)

    up = log_z_at(target.energy + h_step)
    down = log_z_at(max(target.energy - h_step, 0.0))
    denom = (target.energy + h_step) - max(target.energy - h_step, 0.0)
    lhs = -(up - down) / (denom * state.beta)
    rhs = level_population(target, state)
    return lhs, rhs, abs(lhs - rhs)
