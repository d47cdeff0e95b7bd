"""Special functions and high-precision series tooling.

Bernoulli numbers and zeta values at negative integers are exact rationals
(convention B_1 = -1/2, generating function x/(e^x - 1)).  The polylogarithm
is evaluated by direct series with certified tail bounds, an alternating
acceleration for negative arguments, and an Euler-Maclaurin tail correction
near x = 1.  Taylor jets run either over exact Fractions or over mpmath
floats at a configurable precision.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Tuple, Union

import mpmath as mp
from scipy import integrate
from scipy import special as sp

from .errors import DivergentInput, DomainError, PoleViolation, PrecisionExhausted

# ---------------------------------------------------------------------------
# Bernoulli numbers and zeta at negative integers (exact rationals)
# ---------------------------------------------------------------------------

_bernoulli_cache: List[Fraction] = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli(n: int) -> Fraction:
    """B_n as an exact Fraction, B_1 = -1/2.

    Defining recurrence sum_{k=0}^{n} C(n+1, k) B_k = 0 for n >= 1.
    """
    if n < 0:
        raise DomainError("Bernoulli index must be >= 0")
    if n < len(_bernoulli_cache):
        return _bernoulli_cache[n]
    with _bernoulli_lock:
        while len(_bernoulli_cache) <= n:
            m = len(_bernoulli_cache)
            acc = Fraction(0)
            for k in range(m):
                acc += math.comb(m + 1, k) * _bernoulli_cache[k]
            _bernoulli_cache.append(-acc / (m + 1))
    return _bernoulli_cache[n]


def zeta_neg_int(n: int) -> Fraction:
    """zeta(-n) = (-1)^n B_{n+1}/(n+1); zeta(0) = -1/2, zeta(-2k) = 0."""
    if n < 0:
        raise DomainError("use n >= 0 for zeta(-n)")
    return (-1) ** n * bernoulli(n + 1) / (n + 1)


def solid_angle(d: int) -> float:
    """Surface measure of the unit (d-1)-sphere, Omega_d = 2 pi^{d/2}/Gamma(d/2)."""
    if d < 1:
        raise DomainError("dimension d must be >= 1")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


# ---------------------------------------------------------------------------
# Polylogarithm Li_s(x) for s > 0, |x| <= 1
# ---------------------------------------------------------------------------

_DIRECT_TERM_CAP = 10_000


def _polylog_em_tail(s: float, lam: float, k_from: int, m: int = 3) -> Tuple[float, float]:
    """(tail, error bound) for sum_{k >= k_from} e^{-lam k} k^{-s} by Euler-Maclaurin.

    phi^{(n)}(t) = p_n(t) phi(t) with p_n a polynomial in 1/t; the remainder
    uses |R_m| <= 2 zeta(2m)/(2 pi)^{2m} * int |phi^{(2m)}|.
    """
    a = float(k_from)

    def phi(t: float) -> float:
        return math.exp(-lam * t) * t ** (-s)

    # p_n as {power of 1/t: coefficient}; p_{n+1} = p_n' - (lam + s/t) p_n
    p = {0: 1.0}
    polys = [dict(p)]
    for _ in range(2 * m):
        nxt: dict = {}
        for j, c in p.items():
            nxt[j + 1] = nxt.get(j + 1, 0.0) - (j + s) * c
            nxt[j] = nxt.get(j, 0.0) - lam * c
        p = nxt
        polys.append(dict(p))

    integral = float(mp.power(lam, s - 1) * mp.gammainc(1 - s, lam * a))
    tail = integral + 0.5 * phi(a)
    for j in range(1, m + 1):
        deriv = sum(c * a ** (-jj) for jj, c in polys[2 * j - 1].items()) * phi(a)
        tail -= float(bernoulli(2 * j)) / math.factorial(2 * j) * deriv
    poly_bound = sum(abs(c) * a ** (-jj) for jj, c in polys[2 * m].items())
    err = 2.0 * float(mp.zeta(2 * m)) / (2.0 * math.pi) ** (2 * m) * poly_bound * integral
    return tail, abs(err)


def _polylog_cvz(s: float, y: float, tol: float) -> float:
    """Cohen-Villegas-Zagier acceleration of -sum_{k>=1} (-y)^k / k^s, 0 < y <= 1."""
    a0 = y
    n = max(8, int(math.log(max(3.0 * a0 / tol, 10.0)) / math.log(3.0 + math.sqrt(8.0))) + 3)
    d = (3.0 + math.sqrt(8.0)) ** n
    d = (d + 1.0 / d) / 2.0
    b = -1.0
    c = -d
    acc = 0.0
    for k in range(n):
        c = b - c
        acc += c * (y ** (k + 1) / (k + 1) ** s)
        b *= (k + n) * (k - n) / ((k + 0.5) * (k + 1.0))
    return -acc / d


def polylog(s: float, x: float, tol: float = 1e-13) -> float:
    """Li_s(x) = sum_{k>=1} x^k / k^s for s > 0, |x| <= 1 (x = 1 needs s > 1)."""
    if not s > 0:
        raise DomainError("polylog implemented for s > 0 only")
    if abs(x) > 1:
        raise DomainError("polylog implemented for |x| <= 1 only")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        if s <= 1.0:
            raise DivergentInput(f"Li_{s}(1) diverges (needs s > 1)")
        return float(mp.zeta(s))
    if x == -1.0:
        if s == 1.0:
            return -math.log(2.0)
        return float(-(1.0 - mp.power(2.0, 1.0 - s)) * mp.zeta(s))
    if s == 1.0:
        return -math.log1p(-x)

    if x < 0.0:
        y = -x
        if y > 0.995:
            return _polylog_cvz(s, y, tol)
        total = 0.0
        term = -y
        k = 1
        while abs(term) > tol and k < _DIRECT_TERM_CAP:
            total += term
            k += 1
            term = (-y) ** k / k ** s
        return total

    # 0 < x < 1: direct series, Euler-Maclaurin correction if the geometric
    # tail bound cannot reach tol within the term cap.
    total = 0.0
    k = 1
    while k <= _DIRECT_TERM_CAP:
        term = x ** k / k ** s
        total += term
        bound = x ** (k + 1) / ((k + 1) ** s * (1.0 - x))
        if bound <= tol:
            return total
        k += 1
    lam = -math.log(x)
    tail, err = _polylog_em_tail(s, lam, k)
    if err > tol:
        # one refinement: push the direct sum further before the EM tail
        while k <= 200_000:
            total += x ** k / k ** s
            k += 1
        tail, err = _polylog_em_tail(s, lam, k)
    return total + tail


# ---------------------------------------------------------------------------
# Bose/Fermi integrals int_0^inf y^{d-1} / (z^{-1} e^{y^alpha} - q) dy
# ---------------------------------------------------------------------------


def bose_fermi_integral(d_eff: float, q: float, z: float, alpha: int, tol: float = 1e-12) -> float:
    """Closed form (1/alpha) Gamma(d/alpha) Li_{d/alpha}(z q)/q (q != 0).

    For q = 0 the polylog degenerates and the value is (1/alpha) Gamma(d/alpha) z.
    Arguments z*q < -1 (deep Fermi-side fugacity) fall outside the polylog
    domain and are evaluated by the quadrature route instead.
    """
    if d_eff <= 0:
        raise DomainError("effective dimension must be > 0")
    if alpha not in (1, 2):
        raise DomainError("alpha must be 1 (massless) or 2 (massive)")
    if z < 0:
        raise DomainError("activity z must be >= 0")
    if z == 0.0:
        return 0.0
    s = d_eff / alpha
    if q == 0.0:
        return math.gamma(s) * z / alpha
    x = z * q
    if x > 1.0:
        raise PoleViolation(f"z*q = {x:.6g} > 1: occupation pole inside the continuum")
    if x == 1.0:
        if s <= 1.0:
            raise DivergentInput(
                f"integral diverges at z*q = 1 for d/alpha = {s:.4g} <= 1"
            )
        return math.gamma(s) * float(mp.zeta(s)) / (alpha * q)
    if x < -1.0:
        return bose_fermi_integral_quad(d_eff, q, z, alpha, tol)
    return math.gamma(s) * polylog(s, x, tol=tol * abs(q) * alpha / (2 * math.gamma(s))) / (alpha * q)


def bose_fermi_integral_quad(
    d_eff: float, q: float, z: float, alpha: int, tol: float = 1e-10
) -> float:
    """Adaptive-quadrature evaluation with a certified exponential tail bound.

    Independent of the polylog route; used as its oracle and as the general
    fallback for z*|q| > 1.
    """
    if d_eff <= 0:
        raise DomainError("effective dimension must be > 0")
    if alpha not in (1, 2):
        raise DomainError("alpha must be 1 or 2")
    if z == 0.0:
        return 0.0
    if q > 0 and z * q > 1.0:
        raise PoleViolation(f"z*q = {z * q:.6g} > 1")
    if q > 0 and z * q == 1.0 and d_eff <= alpha:
        raise DivergentInput("integral diverges at the condensation endpoint")

    def f(y: float) -> float:
        w = z * math.exp(-(y ** alpha))
        return y ** (d_eff - 1) * w / (1.0 - q * w)

    # pick Y so the certified tail z*kappa*Gamma(d/alpha, Y^alpha)/alpha <= tol/10
    Y = max(2.0, (40.0) ** (1.0 / alpha))
    for _ in range(60):
        u = Y ** alpha
        kappa = 1.0 / (1.0 - q * z * math.exp(-u)) if q > 0 else 1.0
        tail = z * kappa * sp.gammaincc(d_eff / alpha, u) * math.gamma(d_eff / alpha) / alpha
        if tail <= tol / 10.0:
            break
        Y *= 1.3
    val, quad_err = integrate.quad(f, 0.0, Y, limit=400, epsabs=tol / 10.0, epsrel=1e-13)
    return val + tail / 2.0 if tail > quad_err else val


# ---------------------------------------------------------------------------
# Jacobi theta sum  theta3(a) = sum_{k in Z} e^{-a k^2}
# ---------------------------------------------------------------------------


def theta3_sum(a: float, tol: float = 1e-15, method: str = "auto") -> float:
    """Evaluate sum_{k in Z} e^{-a k^2} with a certified truncation.

    method 'direct' sums the defining series, 'poisson' the modular image
    sqrt(pi/a) * sum e^{-pi^2 n^2 / a}; 'auto' picks whichever converges
    faster (direct for a >= pi).
    """
    if a <= 0:
        raise DomainError("theta3_sum needs a > 0")
    if method == "auto":
        method = "direct" if a >= math.pi else "poisson"
    if method == "poisson":
        return math.sqrt(math.pi / a) * theta3_sum(math.pi * math.pi / a, tol, "direct")
    if method != "direct":
        raise DomainError(f"unknown method {method!r}")
    total = 1.0
    k = 1
    while True:
        term = 2.0 * math.exp(-a * k * k)
        total += term
        # remaining terms decay at least geometrically with ratio e^{-a(2k+3)}
        bound = 2.0 * math.exp(-a * (k + 1) * (k + 1)) / (1.0 - math.exp(-a * (2 * k + 3)))
        if bound <= tol * total:
            return total
        k += 1
        if k > 10_000_000:  # unreachable for a > 0 but keeps the loop total
            raise DomainError("theta3_sum failed to converge")


# ---------------------------------------------------------------------------
# Taylor jets
# ---------------------------------------------------------------------------

Coeff = Union[Fraction, mp.mpf]


@dataclass(frozen=True)
class TaylorJet:
    """Truncated power series sum c_k x^k at 0; c_k = f^{(k)}(0)/k!.

    Coefficients are either exact Fractions or mpmath floats carried at
    `precision_bits`.  Arithmetic is closed under add, multiply, scalar,
    reciprocal and exponential of a zero-constant jet.
    """

    coefficients: Tuple[Coeff, ...]
    precision_bits: int | None = None

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __add__(self, other: "TaylorJet") -> "TaylorJet":
        n = min(self.order, other.order)
        return TaylorJet(
            tuple(self.coefficients[k] + other.coefficients[k] for k in range(n + 1)),
            self.precision_bits,
        )

    def __mul__(self, other: "TaylorJet") -> "TaylorJet":
        n = min(self.order, other.order)
        out = []
        for k in range(n + 1):
            acc = self.coefficients[0] * other.coefficients[k]
            for j in range(1, k + 1):
                acc += self.coefficients[j] * other.coefficients[k - j]
            out.append(acc)
        return TaylorJet(tuple(out), self.precision_bits)

    def scale(self, factor) -> "TaylorJet":
        return TaylorJet(tuple(factor * c for c in self.coefficients), self.precision_bits)

    def shift_x2(self) -> "TaylorJet":
        """Multiply by x^2 (used to form g(x) = x^2 f(x)); keeps the order."""
        zero = self.coefficients[0] * 0
        coeffs = (zero, zero) + self.coefficients[: max(self.order - 1, 0)]
        return TaylorJet(coeffs, self.precision_bits)

    def reciprocal(self) -> "TaylorJet":
        c0 = self.coefficients[0]
        if c0 == 0:
            raise PoleViolation("jet reciprocal requires a nonzero constant term")
        inv0 = 1 / c0 if isinstance(c0, Fraction) else mp.mpf(1) / c0
        out = [inv0]
        for k in range(1, self.order + 1):
            acc = self.coefficients[1] * out[k - 1]
            for j in range(2, k + 1):
                acc += self.coefficients[j] * out[k - j]
            out.append(-inv0 * acc)
        return TaylorJet(tuple(out), self.precision_bits)

    def exp(self) -> "TaylorJet":
        """exp of a jet with zero constant term (exact in Fraction mode)."""
        if self.coefficients[0] != 0:
            raise DomainError("jet exp implemented for zero constant term")
        one = (
            Fraction(1)
            if isinstance(self.coefficients[0], Fraction)
            else mp.mpf(1)
        )
        out = [one]
        for k in range(1, self.order + 1):
            acc = self.coefficients[1] * out[k - 1] * 1
            for j in range(2, k + 1):
                acc += j * self.coefficients[j] * out[k - j]
            out.append(acc / k)
        return TaylorJet(tuple(out), self.precision_bits)

    def derivative(self, n: int) -> Coeff:
        """f^{(n)}(0) = n! * c_n."""
        if not 0 <= n <= self.order:
            raise DomainError(f"derivative order {n} outside jet order {self.order}")
        return self.coefficients[n] * math.factorial(n)


def _linear_jet(a, order: int, precision_bits: int | None) -> TaylorJet:
    zero = a * 0
    coeffs = [zero] * (order + 1)
    if order >= 1:
        coeffs[1] = a
    return TaylorJet(tuple(coeffs), precision_bits)


def occupation_jet(
    q: float,
    z: float,
    scale_a: float,
    order: int,
    precision_bits: int = 256,
    exact: bool = False,
) -> TaylorJet:
    """Jet of x -> 1/(z^{-1} e^{a x} - q) at 0.

    Built as jet-exponential followed by jet-reciprocal.  With exact=True
    the inputs must be rational and the coefficients come out as Fractions;
    otherwise mpmath floats at `precision_bits` are used.
    """
    if order < 0:
        raise DomainError("jet order must be >= 0")
    if z <= 0:
        raise DomainError("occupation jet needs z > 0")
    if z * q >= 1.0 and q > 0:
        raise PoleViolation("z*q >= 1: jet base point sits on the occupation pole")
    if exact:
        zq, qq, aq = Fraction(z), Fraction(q), Fraction(scale_a)
        if 1 / zq - qq == 0:
            raise PoleViolation("z^{-1} - q = 0")
        expo = _linear_jet(aq, order, None).exp().scale(1 / zq)
        shifted = list(expo.coefficients)
        shifted[0] = shifted[0] - qq
        return TaylorJet(tuple(shifted), None).reciprocal()
    with mp.workprec(precision_bits):
        zm, qm, am = mp.mpf(z), mp.mpf(q), mp.mpf(scale_a)
        if 1 / zm - qm == 0:
            raise PoleViolation("z^{-1} - q = 0")
        expo = _linear_jet(am, order, precision_bits).exp().scale(1 / zm)
        shifted = list(expo.coefficients)
        shifted[0] = shifted[0] - qm
        return TaylorJet(tuple(shifted), precision_bits).reciprocal()


def occupation_derivatives(
    q: float, z: float, scale_a: float, order: int, precision_bits: int = 256
) -> List[mp.mpf]:
    """c_n = d^n/dx^n (1/(z^{-1} e^{a x} - q))|_{x=0} for n = 0..order."""
    jet = occupation_jet(q, z, scale_a, order, precision_bits)
    with mp.workprec(precision_bits):
        return [jet.coefficients[n] * mp.factorial(n) for n in range(order + 1)]


def derivative_growth_sequence(
    q: float,
    z: float,
    scale_a: float,
    n_max: int,
    precision_bits: int = 256,
    min_digits: int = 8,
) -> List[Tuple[int, float, float]]:
    """Rows (n, |g^{(2n)}(0)|^{1/(2n)}, significant_digits) for n = 1..n_max.

    g(x) = 1/(z^{-1} e^{a x} - q).  Significant digits are estimated by
    recomputing every coefficient at twice the working precision; dropping
    below `min_digits` raises PrecisionExhausted with the failing n.
    """
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    order = 2 * n_max
    base = occupation_jet(q, z, scale_a, order, precision_bits)
    check = occupation_jet(q, z, scale_a, order, 2 * precision_bits)
    rows: List[Tuple[int, float, float]] = []
    with mp.workprec(2 * precision_bits):
        for n in range(1, n_max + 1):
            c_lo = base.coefficients[2 * n] * mp.factorial(2 * n)
            c_hi = check.coefficients[2 * n] * mp.factorial(2 * n)
            if c_hi == 0:
                digits = precision_bits * 0.30103
            else:
                diff = abs(c_lo - c_hi) / abs(c_hi)
                digits = float(-mp.log10(diff)) if diff > 0 else precision_bits * 0.30103
            if digits < min_digits:
                raise PrecisionExhausted(
                    f"only {digits:.1f} significant digits at derivative order {2 * n} "
                    f"(precision_bits={precision_bits})",
                    n=n,
                )
            growth = float(mp.power(abs(c_hi), mp.mpf(1) / (2 * n)))
            rows.append((n, growth, digits))
    return rows
