import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from qgas.errors import DivergentInput, DomainError, PoleViolation, PrecisionExhausted
from qgas.specfun import (
    TaylorJet,
    bernoulli,
    bose_fermi_integral,
    bose_fermi_integral_quad,
    derivative_growth_sequence,
    occupation_jet,
    polylog,
    solid_angle,
    theta3_sum,
    zeta_neg_int,
)


def akiyama_tanigawa(n):
    """Independent Bernoulli oracle (first kind, B1 = -1/2)."""
    a = [Fraction(0)] * (n + 1)
    out = []
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    # AT yields B1 = +1/2 ("second kind"); flip odd-index signs
    return [b if i % 2 == 0 else -b for i, b in enumerate(out)]


def test_bernoulli_against_akiyama_tanigawa():
    oracle = akiyama_tanigawa(20)
    for n in range(21):
        assert bernoulli(n) == oracle[n], n
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(12) == Fraction(-691, 2730)


def test_bernoulli_defining_recurrence():
    for n in range(1, 25):
        acc = sum(math.comb(n + 1, k) * bernoulli(k) for k in range(n + 1))
        assert acc == 0, n


def test_zeta_negative_integers():
    assert zeta_neg_int(0) == Fraction(-1, 2)
    assert zeta_neg_int(1) == Fraction(-1, 12)
    assert zeta_neg_int(2) == 0
    assert zeta_neg_int(3) == Fraction(1, 120)
    for k in range(1, 12):
        assert zeta_neg_int(2 * k) == 0


def test_solid_angle():
    assert solid_angle(1) == pytest.approx(2.0)
    assert solid_angle(2) == pytest.approx(2 * math.pi)
    assert solid_angle(3) == pytest.approx(4 * math.pi)
    assert solid_angle(4) == pytest.approx(2 * math.pi ** 2)


def test_polylog_known_values():
    assert polylog(1.0, 0.5) == pytest.approx(math.log(2.0), rel=1e-13)
    assert polylog(2.0, 1.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-13)
    # direct-series oracle at x = -1 (alternating, 3/4 zeta(3))
    zeta3 = 1.2020569031595942854
    assert polylog(3.0, -1.0) == pytest.approx(-0.75 * zeta3, abs=1e-12)


def test_polylog_divergent_and_domain():
    with pytest.raises(DivergentInput):
        polylog(1.0, 1.0)
    with pytest.raises(DomainError):
        polylog(2.0, 1.5)
    with pytest.raises(DomainError):
        polylog(-1.0, 0.5)
    assert polylog(2.0, 0.0) == 0.0


@pytest.mark.parametrize(
    "s,x",
    [
        (0.5, 0.3), (0.5, -0.8), (1.5, 0.9), (1.5, -1.0), (2.5, 0.999),
        (3.0, 0.5), (1.0, -0.99), (0.75, 0.9995), (2.0, -0.9999), (1.2, 0.99999),
    ],
)
def test_polylog_against_mpmath(s, x):
    expect = float(mp.polylog(s, x))
    assert polylog(s, x, tol=1e-13) == pytest.approx(expect, rel=1e-11, abs=1e-12)


@settings(max_examples=40)
@given(s=st.floats(0.3, 4.0), x=st.floats(-0.999, 0.999))
def test_polylog_property_vs_mpmath(s, x):
    # mpmath's own polylog loses accuracy for s *near* (but not at) integers;
    # snap those to the exact integer where its integer path is reliable
    if abs(s - round(s)) < 1e-6:
        s = float(round(s))
        if s < 0.5 or (x == 1.0 and s <= 1.0):
            return
    expect = float(mp.re(mp.polylog(s, x)))
    assert polylog(s, x, tol=1e-12) == pytest.approx(expect, rel=1e-9, abs=1e-11)


def test_bose_fermi_closed_forms():
    # d=1, alpha=1, q=0, z=1: int e^{-y} dy = 1
    assert bose_fermi_integral(1, 0.0, 1.0, 1) == pytest.approx(1.0)
    # d=3, alpha=1, q=1, z=1: Gamma(3) Li_3(1) = 2 zeta(3)
    assert bose_fermi_integral(3, 1.0, 1.0, 1) == pytest.approx(
        2 * 1.2020569031595942854, rel=1e-12
    )
    # d=3, alpha=2, q=0, z=1: int y^2 e^{-y^2} dy = sqrt(pi)/4
    assert bose_fermi_integral(3, 0.0, 1.0, 2) == pytest.approx(
        math.sqrt(math.pi) / 4, rel=1e-13
    )


def test_bose_fermi_errors():
    with pytest.raises(DivergentInput):
        bose_fermi_integral(1, 1.0, 1.0, 1)  # d = alpha: divergent at endpoint
    with pytest.raises(DivergentInput):
        bose_fermi_integral(2, 1.0, 1.0, 2)
    with pytest.raises(PoleViolation):
        bose_fermi_integral(3, 1.0, 2.0, 1)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("alpha", [1, 2])
@pytest.mark.parametrize(
    "q,z",
    [(0.0, 1.0), (-1.0, 1.0), (-0.5, 2.0), (0.5, 1.2), (1.0, 1.0), (0.9, 0.4)],
)
def test_bose_fermi_vs_quadrature(d, alpha, q, z):
    """Polylog closed form against the adaptive-quadrature oracle, 1e-10."""
    if q > 0 and z * q >= 1.0 and d <= alpha:
        return  # divergent endpoint, covered separately
    closed = bose_fermi_integral(d, q, z, alpha, tol=1e-12)
    quad = bose_fermi_integral_quad(d, q, z, alpha, tol=1e-12)
    assert closed == pytest.approx(quad, rel=1e-10, abs=1e-12)


def test_bose_fermi_deep_fermi_fugacity_falls_back_to_quadrature():
    # z|q| > 1 leaves the polylog domain; value must still match quadrature
    val = bose_fermi_integral(2, -1.0, 3.0, 1)
    quad = bose_fermi_integral_quad(2, -1.0, 3.0, 1)
    assert val == pytest.approx(quad, rel=1e-10)


def test_theta3_values():
    # large a: only k=0 survives
    assert theta3_sum(80.0) == pytest.approx(1.0, rel=1e-12)
    # self-dual point: theta3(pi) = pi^{1/4}/Gamma(3/4)
    expect = math.pi ** 0.25 / math.gamma(0.75)
    assert theta3_sum(math.pi) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("a", [10 ** e for e in (-4, -3, -2, -1, 0)] + [2.0, 5.0, 10.0])
def test_theta3_dual_representations(a):
    direct = theta3_sum(a, method="direct")
    poisson = theta3_sum(a, method="poisson")
    assert direct == pytest.approx(poisson, rel=1e-12)


def test_theta3_against_mpmath():
    for a in (0.05, 0.7, 3.0):
        expect = float(mp.jtheta(3, 0, mp.exp(-a)))
        assert theta3_sum(a) == pytest.approx(expect, rel=1e-13)


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------


def test_jet_arithmetic_roundtrip():
    with mp.workprec(128):
        a = TaylorJet(tuple(mp.mpf(v) for v in (2.0, 1.0, 0.5, 0.25)), 128)
        prod = a * a.reciprocal()
        assert float(prod.coefficients[0]) == pytest.approx(1.0)
        for c in prod.coefficients[1:]:
            assert abs(float(c)) < 1e-30


def test_jet_exact_fraction_mode():
    a = TaylorJet((Fraction(0), Fraction(1, 2), Fraction(0), Fraction(0)))
    e = a.exp()
    assert e.coefficients[0] == 1
    assert e.coefficients[1] == Fraction(1, 2)
    assert e.coefficients[2] == Fraction(1, 8)
    assert e.coefficients[3] == Fraction(1, 48)


def test_occupation_jet_q0_exponential():
    jet = occupation_jet(0.0, 1.0, 1.0, 6)
    for n, c in enumerate(jet.coefficients):
        expect = (-1.0) ** n / math.factorial(n)
        assert float(c) == pytest.approx(expect, rel=1e-30, abs=1e-40)


def test_occupation_jet_point_value_and_first_derivative():
    q, z, a = -1.0, 1.0, 1.0
    jet = occupation_jet(q, z, a, 3)
    assert float(jet.coefficients[0]) == pytest.approx(z / (1 - z * q))  # 1/2
    # c1 = -z^{-1} a / (z^{-1} + 1)^2 = -1/4 (symbolic oracle)
    assert float(jet.derivative(1)) == pytest.approx(-0.25)


def test_occupation_jet_pole():
    with pytest.raises(PoleViolation):
        occupation_jet(1.0, 1.0, 1.0, 3)


def test_occupation_jet_vs_finite_differences():
    """Jet derivatives against central finite differences at matched precision.

    FD orders 1..4 with steps tuned per order; the FD error budget is
    O(h^2 f''') at binary64, so tolerances are loose but meaningful.
    """
    q, z, a = 0.5, 0.9, 1.3

    def f(x):
        return 1.0 / (math.exp(a * x) / z - q)

    jet = occupation_jet(q, z, a, 4)
    h = 1e-5
    fd1 = (f(h) - f(-h)) / (2 * h)
    fd2 = (f(h) - 2 * f(0) + f(-h)) / (h * h)
    h3 = 1e-3
    fd3 = (f(2 * h3) - 2 * f(h3) + 2 * f(-h3) - f(-2 * h3)) / (2 * h3 ** 3)
    fd4 = (f(2 * h3) - 4 * f(h3) + 6 * f(0) - 4 * f(-h3) + f(-2 * h3)) / h3 ** 4
    assert float(jet.derivative(1)) == pytest.approx(fd1, rel=1e-9)
    assert float(jet.derivative(2)) == pytest.approx(fd2, rel=1e-5)
    assert float(jet.derivative(3)) == pytest.approx(fd3, rel=1e-4)
    assert float(jet.derivative(4)) == pytest.approx(fd4, rel=1e-3)


def test_exact_jet_matches_float_jet():
    ex = occupation_jet(Fraction(-1), Fraction(1), Fraction(2), 8, exact=True)
    fl = occupation_jet(-1.0, 1.0, 2.0, 8)
    for ce, cf in zip(ex.coefficients, fl.coefficients):
        assert float(ce) == pytest.approx(float(cf), rel=1e-60, abs=1e-70)


def test_derivative_growth_sequence():
    rows = derivative_growth_sequence(0.0, 1.0, 1.0, 10)
    for n, growth, digits in rows:
        assert growth == pytest.approx(1.0)  # |c_{2n}| = 1 for q=0, z=a=1
        assert digits >= 8
    rows = derivative_growth_sequence(0.5, 1.0, 1.0, 8)
    jet = occupation_jet(0.5, 1.0, 1.0, 16, 512)
    c2 = float(jet.derivative(2))
    assert rows[0][1] == pytest.approx(math.sqrt(abs(c2)), rel=1e-10)


def test_derivative_growth_precision_exhaustion():
    with pytest.raises(PrecisionExhausted) as err:
        derivative_growth_sequence(0.5, 1.0, 1.0, 60, precision_bits=24)
    assert err.value.n is not None


def test_bernoulli_cache_thread_safety():
    """Concurrent reads with synchronized writes; results unchanged."""
    import threading

    import qgas.specfun as sf

    sf._bernoulli_cache[:] = [Fraction(1)]  # reset to force concurrent growth
    results = []

    def worker():
        results.append([bernoulli(n) for n in range(80)])

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    oracle = akiyama_tanigawa(79)
    for r in results:
        assert r == oracle
