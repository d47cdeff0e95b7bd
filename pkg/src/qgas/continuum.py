"""Continuum-limit spectral actions: leading coefficients, critical density,
condensation predicate and the condensate term.

After the passage to the continuum the number action reduces to a single
power law C * beta^{-d/alpha} plus (for q in (0, 1]) a beta-independent
condensate term a*h*z/(1 - z q).
"""

from __future__ import annotations

from dataclasses import dataclass
from .core import NATURAL, Dispersion, DispersionKind, ThermoState, UnitSystem
from .errors import DivergentInput, DomainError
from .specfun import bose_fermi_integral, solid_angle


@dataclass(frozen=True)
class ContinuumCase:
    """One of the six continuum cases: (dimension, dispersion) at a state."""

    d: int
    dispersion: Dispersion
    state: ThermoState
    V: float = 1.0
    units: UnitSystem = NATURAL

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("dimension must be >= 1")
        if self.V <= 0:
            raise DomainError("volume must be > 0")
        if self.dispersion.kind is DispersionKind.RELATIVISTIC:
            raise DomainError("continuum cases cover massless and massive dispersions")
        # continuum minimum of the spectrum is 0, so z q < 1 strictly
        if self.state.q > 0 and self.state.z * self.state.q >= 1.0:
            raise DomainError(
                "z*q >= 1 not admissible off the condensation endpoint "
                "(use critical_density for the z -> 1/q limit)"
            )

    @property
    def alpha(self) -> int:
        return self.dispersion.alpha


@dataclass(frozen=True)
class CondensateSpec:
    """Dimensionless condensate strength a >= 0 (a user input, never inferred)."""

    a: float = 0.0

    def __post_init__(self):
        if self.a < 0:
            raise DomainError("condensate strength must be >= 0")


@dataclass(frozen=True)
class CriticalDensity:
    """Finite(value) / Divergent verdict for the critical-density integral."""

    finite: bool
    value: float | None = None

    @property
    def verdict(self) -> str:
        return "finite" if self.finite else "divergent"


def condensation_possible(d: int, dispersion: Dispersion) -> bool:
    """Condensation occurs iff d >= 2 (massless) or d >= 3 (massive)."""
    return d > dispersion.alpha


def critical_density(d: int, dispersion: Dispersion, tol: float = 1e-10) -> CriticalDensity:
    """The z -> 1/q endpoint integral int y^{d-1}/(e^{y^alpha} - 1) dy.

    Finite (and equal to (1/alpha) Gamma(d/alpha) zeta(d/alpha)) iff the
    integrand is integrable at 0, i.e. d > alpha.
    """
    alpha = dispersion.alpha
    if d <= alpha:
        return CriticalDensity(finite=False)
    value = bose_fermi_integral(d, 1.0, 1.0, alpha, tol=tol)
    return CriticalDensity(finite=True, value=value)


def continuum_coefficient(case: ContinuumCase, tol: float = 1e-12) -> float:
    """Leading coefficient C in S_Number = C * beta^{-d/alpha} (+ condensate).

    Massless: C = V Omega_d / (h^{d-1} c^d) * J,  massive: the same with
    (2m)^{d/2} in place of 1/c^d, where J is the Bose/Fermi integral
    int y^{d-1}/(z^{-1} e^{y^alpha} - q) dy.
    """
    st, u = case.state, case.units
    if st.z == 0.0:
        return 0.0
    J = bose_fermi_integral(case.d, st.q, st.z, case.alpha, tol=tol)
    if case.dispersion.kind is DispersionKind.MASSLESS:
        return case.V * solid_angle(case.d) / (u.h ** (case.d - 1) * u.c ** case.d) * J
    m = case.dispersion.m
    return case.V * solid_angle(case.d) * (2.0 * m) ** (case.d / 2.0) / u.h ** (case.d - 1) * J


def condensate_term(spec: CondensateSpec, state: ThermoState, units: UnitSystem = NATURAL) -> float:
    """Beta-independent condensate addend a*h*z/(1 - z q), q in (0, 1]."""
    if spec.a == 0.0:
        return 0.0
    if not 0.0 < state.q <= 1.0:
        raise DomainError("a nonzero condensate needs q in (0, 1]")
    if state.z * state.q >= 1.0:
        raise DomainError("condensate term needs z q < 1")
    return spec.a * units.h * state.z / (1.0 - state.z * state.q)


def continuum_spectral_action(
    case: ContinuumCase,
    spec: CondensateSpec = CondensateSpec(0.0),
    beta: float | None = None,
    tol: float = 1e-12,
) -> float:
    """C * beta^{-d/alpha} plus the condensate term.

    A nonzero condensate strength is rejected in dimensions where the
    critical density diverges (massless d = 1, massive d <= 2).
    """
    b = case.state.beta if beta is None else beta
    if b <= 0:
        raise DomainError("beta must be > 0")
    if spec.a > 0 and not condensation_possible(case.d, case.dispersion):
        raise DomainError(
            f"condensation impossible for {case.dispersion.kind.value} d={case.d}; a must be 0"
        )
    lead = continuum_coefficient(case, tol) * b ** (-case.d / case.alpha)
    if spec.a == 0.0:
        return lead
    return lead + condensate_term(spec, case.state, case.units)
