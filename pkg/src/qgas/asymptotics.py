"""Asymptotic expansions of the number spectral action in the cutoff 1/beta.

The zeta-regularized expansion engine
    sum_{k>=1} g(eps k) ~ (1/eps) int_0^inf g + sum_n zeta(-n) g^{(n)}(0) eps^n / n!
is implemented once and reused for the 1d massless torus and for the four
series of the S^3 decomposition.  Its validity is restricted to q in [-1, 0];
for q in (0, 1] the same formulas are exposed only under the conjectural tag.

Expansions carry exact Fraction coefficients when the inputs are rational
(and the integrals degenerate, i.e. q = 0), otherwise floats derived from
256-bit jets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .core import NATURAL, Dispersion, ThermoState, Torus, UnitSystem
from .errors import DegenerateFit, DomainError
from .specfun import (
    bernoulli,
    bose_fermi_integral,
    occupation_jet,
    solid_angle,
    theta3_sum,
    zeta_neg_int,
)

SUPERPOLYNOMIAL = "superpolynomial"
POWER_BOUNDED = "power"
CONJECTURAL = "conjectural"


@dataclass(frozen=True)
class RemainderClass:
    kind: str
    power: Fraction | None = None

    def __str__(self) -> str:
        if self.kind == POWER_BOUNDED:
            return f"o(beta^{self.power})"
        if self.kind == SUPERPOLYNOMIAL:
            return "o(beta^inf)"
        return "conjectural"


def superpolynomial() -> RemainderClass:
    return RemainderClass(SUPERPOLYNOMIAL)


def power_bounded(p) -> RemainderClass:
    return RemainderClass(POWER_BOUNDED, Fraction(p))


def conjectural() -> RemainderClass:
    return RemainderClass(CONJECTURAL)


@dataclass(frozen=True)
class AsymptoticExpansion:
    """Finite sum of coeff * beta^p with (half-)integer rational exponents."""

    terms: Tuple[Tuple[Fraction, object], ...]  # sorted by exponent
    remainder: RemainderClass
    provenance: str

    @classmethod
    def from_dict(cls, d: Dict, remainder: RemainderClass, provenance: str):
        items = tuple(sorted(((Fraction(p), c) for p, c in d.items()), key=lambda t: t[0]))
        return cls(items, remainder, provenance)

    def coefficient(self, p):
        p = Fraction(p)
        for q_, c in self.terms:
            if q_ == p:
                return c
        return 0.0

    def exponents(self) -> List[Fraction]:
        return [p for p, _ in self.terms]

    def evaluate(self, beta: float) -> float:
        return math.fsum(float(c) * beta ** float(p) for p, c in self.terms)

    def truncate(self, P) -> "AsymptoticExpansion":
        P = Fraction(P)
        return AsymptoticExpansion(
            tuple((p, c) for p, c in self.terms if p <= P), self.remainder, self.provenance
        )

    def drop_zero(self, tol: float = 0.0) -> "AsymptoticExpansion":
        return AsymptoticExpansion(
            tuple((p, c) for p, c in self.terms if abs(float(c)) > tol),
            self.remainder,
            self.provenance,
        )


# ---------------------------------------------------------------------------
# Torus expansions
# ---------------------------------------------------------------------------


def massive_torus_expansion(
    geometry: Torus,
    dispersion: Dispersion,
    state: ThermoState,
    units: UnitSystem = NATURAL,
) -> AsymptoticExpansion:
    """Single-term expansion C * beta^{-d/2} + o(beta^inf), massive torus."""
    d, L, m = geometry.d, geometry.L, dispersion.m
    if m <= 0:
        raise DomainError("massive expansion needs m > 0")
    if state.z == 0.0:
        return AsymptoticExpansion.from_dict({}, superpolynomial(), "massive-torus")
    J = bose_fermi_integral(d, state.q, state.z, 2)
    coeff = L ** d * solid_angle(d) * (2.0 * m) ** (d / 2.0) / units.h ** (d - 1) * J
    return AsymptoticExpansion.from_dict(
        {Fraction(-d, 2): coeff}, superpolynomial(), "massive-torus"
    )


def massless_torus_leading(
    geometry: Torus,
    state: ThermoState,
    units: UnitSystem = NATURAL,
) -> AsymptoticExpansion:
    """Leading term C * beta^{-d} + o(beta^{-d}), massless torus."""
    d, L = geometry.d, geometry.L
    if state.z == 0.0:
        return AsymptoticExpansion.from_dict({}, power_bounded(-d), "massless-torus-leading")
    J = bose_fermi_integral(d, state.q, state.z, 1)
    coeff = L ** d * solid_angle(d) / (units.c ** d * units.h ** (d - 1)) * J
    return AsymptoticExpansion.from_dict(
        {Fraction(-d): coeff}, power_bounded(-d), "massless-torus-leading"
    )


def _zeta_series_terms(
    q: float, z: float, scale_a, order: int, exact: bool, precision_bits: int = 256
) -> List:
    """Jet coefficients c^f_n (f = occupation) used by the zeta expansions."""
    jet = occupation_jet(q, z, scale_a, order, precision_bits=precision_bits, exact=exact)
    return list(jet.coefficients)


def massless_1d_zeta_expansion(
    state: ThermoState,
    geometry: Torus,
    units: UnitSystem = NATURAL,
    order: int = 5,
    exact: bool = False,
    allow_conjectural: bool = False,
    precision_bits: int = 256,
) -> AsymptoticExpansion:
    """Full zeta-regularized expansion for the 1d massless torus.

    Terms: (2L/c) J0 beta^{-1}; constant h z/(1-z q) + 2 h zeta(0) c_0 (which
    cancels identically); and 2 h zeta(-n) c_n / n! beta^n for n = 1..order,
    the even ones vanishing through zeta(-2k) = 0.

    Valid as stated for q in [-1, 0]; q in (0, 1] requires
    allow_conjectural=True and tags the result conjectural.
    """
    if geometry.d != 1:
        raise DomainError("this expansion is the d = 1 case")
    q, z = state.q, state.z
    if q > 0 and not allow_conjectural:
        raise DomainError("zeta expansion proven for q in [-1, 0]; pass allow_conjectural")
    remainder = superpolynomial() if q <= 0 else conjectural()
    h, c, L = units.h, units.c, geometry.L
    if z == 0.0:
        return AsymptoticExpansion.from_dict({}, remainder, "massless-1d-zeta")
    if exact:
        if q != 0:
            raise DomainError(
                "exact coefficients require q = 0 (the p = -1 integral is z exactly)"
            )
        zf, hf, cf, Lf = map(Fraction, (z, h, c, L))
        scale_a = cf * hf / Lf
        # exact jets run the same exponential/reciprocal pipeline over Fractions
        jet = occupation_jet(Fraction(0), zf, scale_a, order, exact=True)
        coeffs = jet.coefficients
        terms: Dict = {Fraction(-1): 2 * zf * Lf / cf}
        terms[Fraction(0)] = hf * zf + 2 * hf * zeta_neg_int(0) * coeffs[0]
        for n in range(1, order + 1):
            terms[Fraction(n)] = 2 * hf * zeta_neg_int(n) * coeffs[n]
        return AsymptoticExpansion.from_dict(terms, remainder, "massless-1d-zeta")

    J0 = bose_fermi_integral(1, q, z, 1)
    coeffs = _zeta_series_terms(q, z, c * h / L, order, False, precision_bits)
    terms = {Fraction(-1): 2.0 * L / c * J0}
    terms[Fraction(0)] = h * z / (1.0 - z * q) + 2.0 * h * float(zeta_neg_int(0)) * float(coeffs[0])
    for n in range(1, order + 1):
        terms[Fraction(n)] = 2.0 * h * float(zeta_neg_int(n)) * float(coeffs[n])
    return AsymptoticExpansion.from_dict(terms, remainder, "massless-1d-zeta")


def massless_1d_q0_exact(
    z,
    geometry: Torus,
    units: UnitSystem = NATURAL,
    order: int = 5,
    exact: bool = False,
) -> Tuple[AsymptoticExpansion, Callable[[float], float]]:
    """Bernoulli-number expansion of the q = 0 massless 1d torus, plus the
    closed form z h (e^a + 1)/(e^a - 1), a = beta c h / L, as an evaluator.

    Terms: 2 z L / c at p = -1 and 2 z h (c h/L)^{2n-1} B_{2n}/(2n)! at
    p = 2n - 1 for n = 1..ceil(order/2).
    """
    h, c, L = units.h, units.c, geometry.L
    if exact:
        zf, hf, cf, Lf = map(Fraction, (z, h, c, L))
        a = cf * hf / Lf
        terms: Dict = {Fraction(-1): 2 * zf * Lf / cf}
        n = 1
        while 2 * n - 1 <= order:
            terms[Fraction(2 * n - 1)] = (
                2 * zf * hf * a ** (2 * n - 1) * bernoulli(2 * n) / math.factorial(2 * n)
            )
            n += 1
    else:
        a = c * h / L
        terms = {Fraction(-1): 2.0 * z * L / c}
        n = 1
        while 2 * n - 1 <= order:
            terms[Fraction(2 * n - 1)] = (
                2.0 * z * h * a ** (2 * n - 1) * float(bernoulli(2 * n)) / math.factorial(2 * n)
            )
            n += 1

    af = float(c * h / L)

    def closed_form(beta: float) -> float:
        x = af * beta
        return float(z) * float(h) * (math.exp(x) + 1.0) / math.expm1(x)

    return (
        AsymptoticExpansion.from_dict(terms, superpolynomial(), "massless-1d-q0"),
        closed_form,
    )


def massive_1d_q0_theta(
    z: float,
    m: float,
    geometry: Torus,
    units: UnitSystem = NATURAL,
) -> Tuple[AsymptoticExpansion, Callable[[float], float]]:
    """Leading term z L sqrt(2 pi m) beta^{-1/2} and the exact theta-function
    evaluator z h theta3(beta h^2/(2 m L^2)); Poisson corrections are
    e^{-2 m L^2 pi^2 n^2/(h^2 beta)}, i.e. o(beta^inf)."""
    if m <= 0:
        raise DomainError("mass must be > 0")
    h, L = units.h, geometry.L
    coeff = z * L * math.sqrt(2.0 * math.pi * m)
    scale = h * h / (2.0 * m * L * L)

    def exact(beta: float) -> float:
        return z * h * theta3_sum(beta * scale)

    return (
        AsymptoticExpansion.from_dict(
            {Fraction(-1, 2): coeff}, superpolynomial(), "massive-1d-theta"
        ),
        exact,
    )


# ---------------------------------------------------------------------------
# Sphere expansions
# ---------------------------------------------------------------------------


def sphere_massive_expansion(
    state: ThermoState,
    R: float,
    m: float,
    units: UnitSystem = NATURAL,
) -> AsymptoticExpansion:
    """Two-term massive S^3 expansion:
    4 pi (sqrt(2m) R)^3/hbar^2 * I2 * beta^{-3/2} - pi sqrt(2m) R * I0 * beta^{-1/2}.
    """
    if m <= 0 or R <= 0:
        raise DomainError("need m > 0 and R > 0")
    if state.z == 0.0:
        return AsymptoticExpansion.from_dict({}, superpolynomial(), "sphere-massive")
    hbar = units.hbar
    I2 = bose_fermi_integral(3, state.q, state.z, 2)
    I0 = bose_fermi_integral(1, state.q, state.z, 2)
    lead = 4.0 * math.pi * (math.sqrt(2.0 * m) * R) ** 3 / hbar ** 2 * I2
    sub = -math.pi * math.sqrt(2.0 * m) * R * I0
    return AsymptoticExpansion.from_dict(
        {Fraction(-3, 2): lead, Fraction(-1, 2): sub}, superpolynomial(), "sphere-massive"
    )


def sphere_massless_expansion(
    state: ThermoState,
    R: float,
    units: UnitSystem = NATURAL,
    order: int = 5,
    allow_conjectural: bool = False,
    precision_bits: int = 256,
) -> AsymptoticExpansion:
    """Massless S^3 expansion assembled from the four-series decomposition.

    With f(x) = 2h/(z^{-1} e^{a x} - q), a = c hbar / R, and g = x^2 f:
      S ~ (int g) beta^{-3} + sum_n zeta(-n) c^g_n (2^{-n}-1) beta^{n-2}
          - (1/4)(int f) beta^{-1} + (1/4) sum_n zeta(-n) c^f_n (1-2^{-n}) beta^n.
    g(0) = g'(0) = 0 makes the candidate beta^{-2} term vanish; this is
    computed through the jets rather than assumed.
    """
    q, z = state.q, state.z
    if q > 0 and not allow_conjectural:
        raise DomainError("sphere massless expansion proven for q in [-1, 0]")
    remainder = superpolynomial() if q <= 0 else conjectural()
    if z == 0.0:
        return AsymptoticExpansion.from_dict({}, remainder, "sphere-massless")
    h = units.h
    a = units.c * units.hbar / R
    J2 = bose_fermi_integral(3, q, z, 1)
    J0 = bose_fermi_integral(1, q, z, 1)
    int_g = 2.0 * h * J2 / a ** 3
    int_f = 2.0 * h * J0 / a

    f_jet = occupation_jet(q, z, a, order + 2, precision_bits=precision_bits).scale(2.0 * h)
    g_jet = f_jet.shift_x2()

    terms: Dict = {Fraction(-3): int_g, Fraction(-1): -0.25 * int_f}
    for n in range(0, order + 3):
        p = n - 2
        if p > order:
            continue
        zc = float(zeta_neg_int(n))
        contrib = zc * float(g_jet.coefficients[n]) * (0.5 ** n - 1.0)
        terms[Fraction(p)] = terms.get(Fraction(p), 0.0) + contrib
    for n in range(0, order + 1):
        zc = float(zeta_neg_int(n))
        contrib = 0.25 * zc * float(f_jet.coefficients[n]) * (1.0 - 0.5 ** n)
        terms[Fraction(n)] = terms.get(Fraction(n), 0.0) + contrib
    return AsymptoticExpansion.from_dict(terms, remainder, "sphere-massless")


def sphere_massless_terms_mp(
    state: ThermoState,
    R: float,
    units: UnitSystem = NATURAL,
    order: int = 5,
    prec: int = 256,
) -> List[Tuple[Fraction, "object"]]:
    """High-precision (mpf) coefficients of the massless sphere expansion.

    Same assembly as sphere_massless_expansion but with the Bose/Fermi
    integrals taken from mpmath's polylog, so residual studies are not
    limited by float64 coefficient noise.  q in [-1, 0], z > 0 with z*q > -1
    required (mpmath polylog domain).
    """
    import mpmath as mp

    q, z = state.q, state.z
    if q > 0:
        raise DomainError("mp sphere expansion restricted to q in [-1, 0]")
    with mp.workprec(prec):
        h = mp.mpf(units.h)
        a = mp.mpf(units.c) * mp.mpf(units.h) / (2 * mp.pi) / mp.mpf(R)
        zm, qm = mp.mpf(z), mp.mpf(q)
        if q == 0:
            J2, J0 = 2 * zm, zm
        else:
            J2 = mp.gamma(3) * mp.polylog(3, zm * qm) / qm
            J0 = mp.gamma(1) * mp.polylog(1, zm * qm) / qm
        terms: Dict = {
            Fraction(-3): 2 * h * J2 / a ** 3,
            Fraction(-1): -mp.mpf(0.25) * 2 * h * J0 / a,
        }
        f_jet = occupation_jet(q, z, float(a), order + 2, precision_bits=prec).scale(2 * h)
        g_jet = f_jet.shift_x2()
        for n in range(0, order + 3):
            p = n - 2
            if p > order:
                continue
            zc = zeta_neg_int(n)
            contrib = (
                mp.mpf(zc.numerator) / zc.denominator * g_jet.coefficients[n]
                * (mp.mpf(2) ** (-n) - 1)
            )
            terms[Fraction(p)] = terms.get(Fraction(p), mp.mpf(0)) + contrib
        for n in range(0, order + 1):
            zc = zeta_neg_int(n)
            contrib = (
                mp.mpf(0.25) * mp.mpf(zc.numerator) / zc.denominator
                * f_jet.coefficients[n] * (1 - mp.mpf(2) ** (-n))
            )
            terms[Fraction(n)] = terms.get(Fraction(n), mp.mpf(0)) + contrib
    return sorted(terms.items(), key=lambda t: t[0])


def sphere_massless_q0_closed_form(
    z: float, R: float, units: UnitSystem = NATURAL
) -> Callable[[float], float]:
    """Exact q = 0 massless sphere action 4 h z u^{3/2}/(1-u)^3, u = e^{-a beta}."""

    a = units.c * units.hbar / R
    h = units.h

    def exact(beta: float) -> float:
        u = math.exp(-a * beta)
        return 4.0 * h * z * u ** 1.5 / (-math.expm1(-a * beta)) ** 3

    return exact


# ---------------------------------------------------------------------------
# Conjectures and the relativistic case
# ---------------------------------------------------------------------------


def conjecture_anzaf(
    d: int,
    state: ThermoState,
    geometry: Torus,
    units: UnitSystem = NATURAL,
    order: int = 5,
    precision_bits: int = 256,
) -> AsymptoticExpansion:
    """The multi-dimensional ansatz: binomial tower of lower-dimensional
    leading terms plus the d-scaled zeta series; always tagged conjectural
    (except d = 1 where it reduces to the proven expansion)."""
    if d < 1:
        raise DomainError("d must be >= 1")
    q, z = state.q, state.z
    h, c, L = units.h, units.c, geometry.L
    remainder = superpolynomial() if (d == 1 and q <= 0) else conjectural()
    if z == 0.0:
        return AsymptoticExpansion.from_dict({}, remainder, "anzaf")
    terms: Dict = {}
    for s in range(d):
        dd = d - s
        J = bose_fermi_integral(dd, q, z, 1)
        coeff = (
            math.comb(d, s)
            * L ** dd
            * solid_angle(dd)
            / (c ** dd * h ** (dd - 1))
            * J
        )
        terms[Fraction(-dd)] = coeff
    coeffs = _zeta_series_terms(q, z, c * h / L, order, False, precision_bits)
    terms[Fraction(0)] = h * z / (1.0 - z * q) + 2.0 * d * h * float(zeta_neg_int(0)) * float(
        coeffs[0]
    )
    for n in range(1, order + 1):
        terms[Fraction(n)] = 2.0 * d * h * float(zeta_neg_int(n)) * float(coeffs[n])
    return AsymptoticExpansion.from_dict(terms, remainder, "anzaf")


def relativistic_leading(
    d: int,
    beta_grid: Sequence[float] | None = None,
    tol: float = 1e-8,
) -> AsymptoticExpansion | Tuple[AsymptoticExpansion, OrderFit]:
    """Leading term Omega_d Gamma(d) beta^{-d} of sum e^{-beta sqrt(k^2+1)}.

    With a beta grid, also fits the decay of exact*beta^d - coefficient over
    the grid (certified sums at relative tolerance `tol`) and returns
    (expansion, fit)."""
    coeff = solid_angle(d) * math.gamma(d)
    expansion = AsymptoticExpansion.from_dict(
        {Fraction(-d): coeff}, power_bounded(-d), "relativistic-leading"
    )
    if beta_grid is None:
        return expansion
    from .spectral_sum import relativistic_sum

    points = []
    for beta in beta_grid:
        res = relativistic_sum(d, beta, tol=tol * coeff * beta ** (-d))
        scaled = res.value * beta ** d - coeff
        floor = residual_floor(res.value, res.tail_bound) * beta ** d
        points.append((beta, abs(scaled), floor))
    return expansion, fit_loglog(points)


# ---------------------------------------------------------------------------
# Order fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderFit:
    """Least-squares slope of log|residual| against log beta."""

    slope: float
    intercept: float
    r_squared: float
    window: Tuple[float, float]
    points_used: int = 0
    points_floored: int = 0
    window_shrunk: bool = False

    def __post_init__(self):
        if not (0.0 <= self.r_squared <= 1.0 or math.isnan(self.r_squared)):
            raise DomainError("r_squared out of [0, 1]")


def residual_floor(value: float, tail_bound: float) -> float:
    """Residuals at or below ~10x the certified error budget carry no signal."""
    return 10.0 * (tail_bound + np.finfo(float).eps * abs(value))


def fit_loglog(points: Sequence[Tuple[float, float, float]]) -> OrderFit:
    """Least-squares slope of log|residual| vs log beta.

    `points` rows are (beta, |residual|, floor); rows at or below the floor
    are dropped (flagging a shrunk window).  Fewer than two usable rows
    raise DegenerateFit.
    """
    logs: List[Tuple[float, float]] = []
    floored = 0
    for beta, resid, floor in points:
        if resid <= floor or resid == 0.0:
            floored += 1
            continue
        logs.append((math.log(beta), math.log(resid)))
    if len(logs) < 2:
        raise DegenerateFit(
            f"{floored}/{len(points)} residuals at the certified floor; no slope to fit"
        )
    x = np.array([p[0] for p in logs])
    y = np.array([p[1] for p in logs])
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    betas = [math.exp(v) for v in x]
    return OrderFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r2,
        window=(min(betas), max(betas)),
        points_used=len(logs),
        points_floored=floored,
        window_shrunk=floored > 0,
    )


def order_fit(
    sweep: Sequence[Tuple[float, float, float]],
    expansion: AsymptoticExpansion,
    truncation_power,
    beta_window: Tuple[float, float] | None = None,
) -> OrderFit:
    """Fit the decay order of exact-minus-truncated-expansion residuals.

    `sweep` rows are (beta, exact value, certified error bound).  Points with
    |residual| at the floor are excluded (flagging the shrunk window); if
    none remain, DegenerateFit is raised, which for a superpolynomial claim
    is a pass by itself.
    """
    trunc = expansion.truncate(truncation_power)
    points = []
    for beta, exact, bound in sweep:
        if beta_window and not (beta_window[0] <= beta <= beta_window[1]):
            continue
        resid = exact - trunc.evaluate(beta)
        points.append((beta, abs(resid), residual_floor(exact, bound)))
    return fit_loglog(points)


# ---------------------------------------------------------------------------
# Conjecture probes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    """Structured outcome of a conjecture probe (never a hard gate)."""

    name: str
    conjectured: float
    fitted: float
    rel_discrepancy: float
    agrees: bool
    details: dict = field(default_factory=dict)

    def summary(self) -> str:
        status = "CONSISTENT" if self.agrees else "DISCREPANT"
        return (
            f"[{status}] {self.name}: conjectured={self.conjectured:.8g} "
            f"fitted={self.fitted:.8g} rel_discrepancy={self.rel_discrepancy:.3g}"
        )


def anzaf_subleading_probe(
    d: int,
    state: ThermoState,
    geometry: Torus,
    sweep: Sequence[Tuple[float, float, float]],
    units: UnitSystem = NATURAL,
    rel_tol: float = 0.05,
) -> ProbeReport:
    """Probe the conjectured beta^{-(d-1)} coefficient against exact sums.

    Fits (exact - leading) * beta^{d-1} = c0 + c1 * beta and compares the
    extrapolated c0 with the conjectured binom(d, 1)-term coefficient.
    """
    lead = massless_torus_leading(geometry, state, units)
    conj = conjecture_anzaf(d, state, geometry, units, order=1)
    target = float(conj.coefficient(-(d - 1)))
    xs, ys = [], []
    for beta, exact, _bound in sweep:
        resid = exact - lead.evaluate(beta)
        xs.append(beta)
        ys.append(resid * beta ** (d - 1))
    c1, c0 = np.polyfit(np.array(xs), np.array(ys), 1)
    fitted = float(c0)
    denom = max(abs(target), 1e-300)
    rel = abs(fitted - target) / denom
    return ProbeReport(
        name=f"anzaf d={d} subleading",
        conjectured=target,
        fitted=fitted,
        rel_discrepancy=rel,
        agrees=rel <= rel_tol,
        details={
            "betas": list(xs),
            "scaled_residuals": list(map(float, ys)),
            "linear_term": float(c1),
        },
    )
