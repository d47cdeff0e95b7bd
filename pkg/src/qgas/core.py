"""Thermodynamic state, unit systems, dispersion relations and geometries.

Everything downstream works with a single dimensionless scale parameter
(e.g. a = beta*c*h/L for the massless torus); unit prefactors are applied
only on output, which keeps SI runs free of float overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .errors import DomainError, PoleViolation

# Constants used by the SI mode (J s, m/s, J/K).
PLANCK_H_SI = 6.626070040e-34
SPEED_C_SI = 299792458.0
BOLTZMANN_SI = 1.3806488e-23


@dataclass(frozen=True)
class UnitSystem:
    """Unit constants. Natural mode fixes h = c = kB = 1."""

    h: float = 1.0
    c: float = 1.0
    kB: float = 1.0
    mode: str = "natural"

    def __post_init__(self):
        if self.h <= 0 or self.c <= 0 or self.kB <= 0:
            raise DomainError("unit constants must be positive")

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * math.pi)

    @classmethod
    def natural(cls) -> "UnitSystem":
        return cls()

    @classmethod
    def si(cls) -> "UnitSystem":
        return cls(h=PLANCK_H_SI, c=SPEED_C_SI, kB=BOLTZMANN_SI, mode="si")


NATURAL = UnitSystem.natural()
SI = UnitSystem.si()


class DispersionKind(str, Enum):
    MASSLESS = "massless"
    MASSIVE = "massive"
    RELATIVISTIC = "relativistic"


@dataclass(frozen=True)
class Dispersion:
    """Single-particle Hamiltonian as a function of momentum modulus p.

    massless:     H = c*p
    massive:      H = p^2 / (2m)
    relativistic: H = c*sqrt(p^2 + m^2 c^2)
    """

    kind: DispersionKind
    m: float = 0.0

    def __post_init__(self):
        kind = DispersionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (DispersionKind.MASSIVE, DispersionKind.RELATIVISTIC):
            if self.m <= 0:
                raise DomainError(f"{kind.value} dispersion requires mass m > 0")
        elif self.m != 0.0:
            raise DomainError("massless dispersion carries no mass")

    @property
    def alpha(self) -> int:
        """Power of momentum in H near the scale that sets the cutoff."""
        return 2 if self.kind is DispersionKind.MASSIVE else 1

    def energy(self, p: float, units: UnitSystem = NATURAL) -> float:
        if self.kind is DispersionKind.MASSLESS:
            return units.c * p
        if self.kind is DispersionKind.MASSIVE:
            return p * p / (2.0 * self.m)
        c = units.c
        return c * math.sqrt(p * p + (self.m * c) ** 2)


def massless() -> Dispersion:
    return Dispersion(DispersionKind.MASSLESS)


def massive(m: float) -> Dispersion:
    return Dispersion(DispersionKind.MASSIVE, m=m)


def relativistic(m: float = 1.0) -> Dispersion:
    return Dispersion(DispersionKind.RELATIVISTIC, m=m)


@dataclass(frozen=True)
class Torus:
    """Periodic box [0, L]^d."""

    d: int
    L: float

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("torus dimension d must be >= 1")
        if self.L <= 0:
            raise DomainError("torus side L must be > 0")


@dataclass(frozen=True)
class Sphere3:
    """Round three-sphere of radius R."""

    R: float

    def __post_init__(self):
        if self.R <= 0:
            raise DomainError("sphere radius R must be > 0")


@dataclass(frozen=True)
class Continuum:
    """Infinitely extended system of volume V in R^d."""

    d: int
    V: float

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("continuum dimension d must be >= 1")
        if self.V <= 0:
            raise DomainError("continuum volume V must be > 0")


Geometry = Union[Torus, Sphere3, Continuum]


@dataclass(frozen=True)
class ThermoState:
    """Thermodynamic point (beta, z, q).

    beta > 0 is the inverse temperature 1/(kB*T), z >= 0 the activity
    e^{beta*mu} and q in [-1, 1] the statistics deformation (q = -1 Fermi,
    q = 0 Boltzmann, q = 1 Bose).  z = 0 is the trivial continuation with
    all occupations zero.
    """

    beta: float
    z: float
    q: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"beta must satisfy beta > 0, got {self.beta}")
        if not (self.z >= 0 and math.isfinite(self.z)):
            raise DomainError(f"activity must satisfy z >= 0, got {self.z}")
        if not (-1.0 <= self.q <= 1.0):
            raise DomainError(f"deformation must satisfy -1 <= q <= 1, got {self.q}")

    @property
    def mu(self) -> float:
        """Chemical potential ln(z)/beta (−inf at z = 0)."""
        return -math.inf if self.z == 0 else math.log(self.z) / self.beta

    def with_beta(self, beta: float) -> "ThermoState":
        return ThermoState(beta=beta, z=self.z, q=self.q)


def pole_margin(state: ThermoState, eps_min: float) -> float:
    """1 - z*q*e^{-beta*eps_min}; the sum over a spectrum with minimum
    eps_min is admissible for q > 0 iff this is strictly positive."""
    if state.q <= 0 or state.z == 0:
        return 1.0
    return 1.0 - state.z * state.q * math.exp(-state.beta * eps_min)


def validate_state(state: ThermoState, eps_min: float) -> None:
    """Check admissibility of (beta, z, q) against a spectrum minimum.

    Accepts iff q <= 0 (any z >= 0) or q > 0 with z*q*e^{-beta*eps_min} < 1.
    Raises PoleViolation naming the violated bound otherwise.
    """
    if not math.isfinite(eps_min):
        raise DomainError("eps_min must be finite")
    if state.q <= 0:
        return
    x = state.z * state.q * math.exp(-state.beta * eps_min)
    if x >= 1.0:
        raise PoleViolation(
            f"z*q*exp(-beta*eps_min) = {x:.6g} >= 1 "
            f"(need z < exp(beta*eps_min)/q = {math.exp(state.beta * eps_min) / state.q:.6g})"
        )


def is_admissible(state: ThermoState, eps_min: float) -> bool:
    try:
        validate_state(state, eps_min)
    except PoleViolation:
        return False
    return True


def cutoff_from_beta(beta: float, dispersion: Dispersion) -> float:
    """Natural cutoff: 1/beta (massless, relativistic) or 1/sqrt(beta) (massive)."""
    if beta <= 0:
        raise DomainError("beta must be > 0")
    if dispersion.kind is DispersionKind.MASSIVE:
        return 1.0 / math.sqrt(beta)
    return 1.0 / beta
