"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Tolerances are pinned here, not calibrated elsewhere.
"""

import math
import time
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from qgas import (
    NATURAL,
    ThermoState,
    Torus,
    explicit_spectrum,
    massive,
    massless,
    relativistic_sum,
    spectral_action,
    sphere3_spectrum,
    torus_spectrum,
)
from qgas.asymptotics import (
    anzaf_subleading_probe,
    fit_loglog,
    massive_torus_expansion,
    massless_1d_q0_exact,
    massless_1d_zeta_expansion,
    massless_torus_leading,
    residual_floor,
    sphere_massless_expansion,
    sphere_massless_terms_mp,
)
from qgas.continuum import critical_density
from qgas.errors import DegenerateFit
from qgas.qstat import NUMBER, derivative_theorem_check, log_grand_partition
from qgas.specfun import (
    bose_fermi_integral,
    bose_fermi_integral_quad,
    derivative_growth_sequence,
    occupation_jet,
    solid_angle,
    theta3_sum,
    zeta_neg_int,
)
from qgas.spectral_sum import number_sum_mp

ZETA3 = 1.2020569031595942854


def report(name: str, ok: bool, detail: str = "") -> bool:
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'} | {name}" + (f" | {detail}" if detail else ""))
    return ok


def test_closed_form_oracle_1d_massless():
    """spectral_action equals z h (e^a+1)/(e^a-1) to 1e-12 relative."""
    spec = torus_spectrum(Torus(1, 1.0), massless(), NATURAL)
    worst = 0.0
    for z in (0.5, 1.0):
        for a in np.geomspace(1e-3, 10.0, 20):
            res = spectral_action(NUMBER, spec, ThermoState(float(a), z, 0.0), NATURAL, 1e-14)
            expect = z * (math.exp(a) + 1.0) / (math.exp(a) - 1.0)
            worst = max(worst, abs(res.value - expect) / expect)
    ok = worst <= 1e-12
    assert report("closed-form oracle (1d massless, q=0)", ok, f"worst rel={worst:.2e}")


def test_theta_identity_1d_massive():
    """Direct shell sum vs Poisson theta3 form, 1e-12 relative, a in [1e-4, 10]."""
    spec = torus_spectrum(Torus(1, 1.0), massive(0.5), NATURAL)  # a = beta
    worst = 0.0
    for a in np.geomspace(1e-4, 10.0, 25):
        res = spectral_action(NUMBER, spec, ThermoState(float(a), 1.0, 0.0), NATURAL, 1e-15)
        for method in ("direct", "poisson"):
            th = theta3_sum(float(a), method=method)
            worst = max(worst, abs(res.value - th) / th)
    ok = worst <= 1e-12
    assert report("theta identity (1d massive, q=0)", ok, f"worst rel={worst:.2e}")


def test_berrie_order_check():
    """q=-1, z=1: residual slope of the order-3 truncation >= 3.85 over
    beta = 2^-4..2^-10 (true next term is p=5).  Runtime < 1 min."""
    t0 = time.time()
    spec = torus_spectrum(Torus(1, 1.0), massless(), NATURAL)
    st = ThermoState(1.0, 1.0, -1.0)
    jet = occupation_jet(Fraction(-1), Fraction(1), Fraction(1), 3, exact=True)
    const = Fraction(1, 2) + 2 * zeta_neg_int(0) * jet.coefficients[0]
    points = []
    with mp.workdps(50):
        ln2 = mp.log(2)
        for j in range(4, 11):
            b = mp.mpf(2) ** -j
            exact = number_sum_mp(spec, st.with_beta(float(b)), dps=50)
            pred = 2 * ln2 / b + mp.mpf(const.numerator) / const.denominator
            for n in (1, 2, 3):
                cn = 2 * zeta_neg_int(n) * jet.coefficients[n]
                pred += mp.mpf(cn.numerator) / cn.denominator * b ** n
            points.append((float(b), float(abs(exact - pred)), 1e-40))
    fit = fit_loglog(points)
    elapsed = time.time() - t0
    ok = fit.slope >= 3.85 and elapsed < 60.0
    assert report(
        "berrie order check (q=-1, truncated after p=3)",
        ok,
        f"slope={fit.slope:.3f} r2={fit.r_squared:.5f} runtime={elapsed:.1f}s",
    )


def test_berrie_anzze_identity():
    """Exact-rational termwise equality through order 9 at q=0."""
    geom = Torus(1, 1.0)
    ok = True
    for z in (Fraction(1, 2), Fraction(1), Fraction(3, 4)):
        via_zeta = massless_1d_zeta_expansion(
            ThermoState(1.0, float(z), 0.0), geom, order=9, exact=True
        )
        via_bern, _ = massless_1d_q0_exact(z, geom, order=9, exact=True)
        dz, db = dict(via_zeta.terms), dict(via_bern.terms)
        for p in set(dz) | set(db):
            ok &= dz.get(p, Fraction(0)) == db.get(p, Fraction(0))
        ok &= dz[Fraction(0)] == 0
    assert report("berrie<->anzze exact identity through order 9", ok)


def test_mssv_superpolynomial_remainder():
    """Massive torus d in {1,2}: residual * beta^{-p} strictly decreasing for
    p = 1..4 over the points above the certified floor; points at the floor
    (both the sum's certificate and the coefficient's own float error) are
    exempt per the criterion's floor clause."""
    results = []
    for d in (1, 2):
        for q, z in ((-1.0, 1.0), (0.0, 1.0), (0.5, 0.9)):
            geom = Torus(d, 1.0)
            spec = torus_spectrum(geom, massive(0.5), NATURAL)  # scale a = beta
            exp = massive_torus_expansion(geom, massive(0.5), ThermoState(1, z, q))
            C = float(exp.coefficient(Fraction(-d, 2)))
            rows = []
            for j in range(3, 9):
                b = 2.0 ** -j
                r = spectral_action(NUMBER, spec, ThermoState(b, z, q), NATURAL, 1e-13)
                resid = r.value - exp.evaluate(b)
                pred_err = (1e-12 + 8 * np.finfo(float).eps * C) * b ** (-d / 2)
                floor = residual_floor(r.value, r.tail_bound) + 10 * pred_err
                rows.append((b, resid, floor))
            for p in (1, 2, 3, 4):
                usable = [
                    (b, abs(res) * b ** (-p)) for b, res, fl in rows if abs(res) > fl
                ]
                decreasing = all(a[1] > b_[1] for a, b_ in zip(usable, usable[1:]))
                results.append(decreasing)
    ok = all(results)
    assert report(
        "mssv superpolynomial remainder (massive torus)",
        ok,
        f"{sum(results)}/{len(results)} (d, q, p) combinations",
    )


def test_lere_leading_term():
    """Massless torus d in {2,3}, q in {-1,0}: |exact*beta^d/C - 1| <= 0.02
    at beta = 2^-10."""
    beta = 2.0 ** -10
    worst = 0.0
    for d in (2, 3):
        geom = Torus(d, 1.0)
        spec = torus_spectrum(geom, massless(), NATURAL)
        for q in (-1.0, 0.0):
            state = ThermoState(beta, 1.0, q)
            C = massless_torus_leading(geom, state).coefficient(-d)
            res = spectral_action(NUMBER, spec, state, NATURAL, tol=5e-3 * C / beta ** d)
            ratio = res.value * beta ** d / C
            worst = max(worst, abs(ratio - 1.0))
    ok = worst <= 0.02
    assert report("lere leading term (massless torus d=2,3)", ok, f"worst |ratio-1|={worst:.2e}")


def test_sphere_massive_two_term():
    """Residual after both terms decays (relative to the beta^{-1/2} term)
    with fitted slope >= 0.4; floor-aware."""
    R = 1.0 / (2 * math.pi)  # scale hbar^2/(2 m R^2) = 1 for m = 1/2
    spec = sphere3_spectrum(R, massive(0.5), NATURAL)
    details = []
    ok = True
    for q in (-1.0, 0.0):
        st = ThermoState(1.0, 1.0, q)
        with mp.workdps(90):
            if q == 0.0:
                I2 = mp.sqrt(mp.pi) / 4
                I0 = mp.sqrt(mp.pi) / 2
            else:
                I2 = -mp.gamma(mp.mpf(3) / 2) / 2 * mp.polylog(mp.mpf(3) / 2, -1)
                I0 = -mp.gamma(mp.mpf(1) / 2) / 2 * mp.polylog(mp.mpf(1) / 2, -1)
            lead, sub = 2 * I2, -I0 / 2  # 4 pi (sqrt(2m) R)^3/hbar^2 = 2; pi sqrt(2m) R = 1/2
            points = []
            for j in range(0, 5):
                b = mp.mpf(2) ** -j
                exact = number_sum_mp(spec, st.with_beta(float(b)), dps=90, rel_eps=1e-80)
                resid = exact - (lead * b ** mp.mpf("-1.5") + sub * b ** mp.mpf("-0.5"))
                scaled = abs(resid) * b ** mp.mpf("0.5")
                points.append((float(b), float(scaled), 1e-75))
        try:
            fit = fit_loglog(points)
            details.append(f"q={q}: slope={fit.slope:.2f}")
            ok &= fit.slope >= 0.4
        except DegenerateFit:
            details.append(f"q={q}: all residuals at floor (superpolynomial)")
    assert report("sphere massive two-term expansion", ok, "; ".join(details))


def test_sphere_massless_expansion():
    """q=0: assembled expansion matches the closed-form oracle termwise
    through order 5 at 1e-10; q=-1: residual slope ~ first omitted order."""
    z, R = 1.0, 1.0
    e = sphere_massless_expansion(ThermoState(1, z, 0.0), R, order=5)
    am = 1 / (2 * mp.pi)
    termwise_ok = True
    with mp.workdps(40):

        def bracket(x):
            if x == 0:
                return mp.mpf(4) * z
            return 4 * z * mp.e ** (-1.5 * x) * (x / (1 - mp.e ** (-x))) ** 3

        ts = mp.taylor(bracket, 0, 9)
        for k, t in enumerate(ts):
            p = k - 3
            if p > 5:
                break
            oracle = float(t * am ** p)
            got = float(e.coefficient(p))
            termwise_ok &= abs(got - oracle) <= 1e-10 * max(1.0, abs(oracle))

    st = ThermoState(1.0, 1.0, -1.0)
    terms = sphere_massless_terms_mp(st, R, order=3, prec=300)
    spec = sphere3_spectrum(R, massless(), NATURAL)
    points = []
    with mp.workdps(45):
        for j in range(2, 7):
            b = mp.mpf(2) ** -j
            exact = number_sum_mp(spec, st.with_beta(float(b)), dps=45)
            pred = mp.fsum(c * b ** mp.mpf(str(p)) for p, c in terms)
            points.append((float(b), float(abs(exact - pred)), 1e-40))
    fit = fit_loglog(points)
    slope_ok = abs(fit.slope - 5.0) <= 0.3  # p=4 vanishes; first omitted is p=5
    ok = termwise_ok and slope_ok
    assert report(
        "sphere massless expansion (masswr)",
        ok,
        f"q=0 termwise<=1e-10: {termwise_ok}; q=-1 slope={fit.slope:.3f}",
    )


def test_polylog_quadrature_agreement():
    """Closed forms vs adaptive quadrature <= 1e-10, d=1..4, alpha in {1,2}."""
    worst = 0.0
    combos = 0
    for d in (1, 2, 3, 4):
        for alpha in (1, 2):
            for q, z in ((0.0, 1.0), (-1.0, 1.0), (-0.5, 2.0), (0.5, 1.2), (1.0, 1.0)):
                if q > 0 and z * q >= 1.0 and d <= alpha:
                    continue  # divergent endpoint
                closed = bose_fermi_integral(d, q, z, alpha, tol=1e-12)
                quad = bose_fermi_integral_quad(d, q, z, alpha, tol=1e-12)
                worst = max(worst, abs(closed - quad) / max(abs(quad), 1e-30))
                combos += 1
    ok = worst <= 1e-10
    assert report(
        "polylog/quadrature agreement", ok, f"worst rel={worst:.2e} over {combos} combos"
    )


def test_condensation_predicate():
    checks = [
        (not critical_density(1, massless()).finite),
        critical_density(2, massless()).finite,
        critical_density(3, massless()).finite,
        (not critical_density(2, massive(1.0)).finite),
        critical_density(3, massive(1.0)).finite,
    ]
    value = critical_density(3, massless()).value
    checks.append(abs(value - 2 * ZETA3) <= 1e-8)
    ok = all(checks)
    assert report(
        "condensation predicate", ok, f"massless d=3 value={value:.10f} vs 2*zeta(3)"
    )


def test_relativistic_leading_term():
    """d in {1,2,3}: exact*beta^d -> Omega_d Gamma(d), |ratio-1| <= 0.05 by
    beta = 2^-8; residual certified negative throughout."""
    ok = True
    details = []
    for d in (1, 2, 3):
        C = solid_angle(d) * math.gamma(d)
        sign_ok = True
        last_ratio = None
        for j in range(3, 9):
            b = 2.0 ** -j
            tol = max(b * b / 10.0, 3e-6) * C / b ** d
            r = relativistic_sum(d, b, tol=tol)
            resid = r.value - C / b ** d
            sign_ok &= resid + r.tail_bound < 0.0
            last_ratio = r.value * b ** d / C
        ok_d = abs(last_ratio - 1.0) <= 0.05 and sign_ok
        details.append(f"d={d}: |ratio-1|={abs(last_ratio - 1):.2e} sign_ok={sign_ok}")
        ok &= ok_d
    assert report("relativistic leading term", ok, "; ".join(details))


def test_q_to_zero_continuity(fifty_line_spectrum):
    """|ln Z_q - ln Z_0| has log-log slope 1.0 +/- 0.1 in |q|."""
    state0 = ThermoState(1.0, 0.8, 0.0)
    z0 = log_grand_partition(fifty_line_spectrum, state0, 1e-15).value
    qs = [1e-2, 1e-3, 1e-4]
    pts = []
    for q in qs:
        diff = abs(
            log_grand_partition(fifty_line_spectrum, ThermoState(1.0, 0.8, q), 1e-15).value - z0
        )
        pts.append((math.log(q), math.log(diff)))
    slope = np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)[0]
    ok = abs(slope - 1.0) <= 0.1
    assert report("q->0 continuity of ln Z", ok, f"fitted slope={slope:.4f}")


def test_derivative_theorem():
    """FD check of -(1/beta) d ln Z/d eps = n_q over 9 (q, z) combinations."""
    lines = list(explicit_spectrum([(0.5, 1), (1.0, 2), (2.0, 3)]).lines())
    combos = [(-1.0, 1.0), (-1.0, 3.0), (-0.5, 0.7), (0.0, 1.0), (0.0, 2.5),
              (0.25, 1.1), (0.5, 0.5), (0.75, 0.9), (1.0, 0.6)]
    worst = 0.0
    for q, z in combos:
        _, rhs, diff = derivative_theorem_check(lines, ThermoState(1.0, z, q), 1)
        worst = max(worst, diff / max(1.0, abs(rhs)))
    ok = worst <= 1e-6
    assert report("derivative theorem (9 combos)", ok, f"worst rel diff={worst:.2e}")


def test_entropy_stationarity():
    """Lagrangian FD gradient <= 1e-6 at nu_q on a 4-line spectrum."""
    from qgas.qstat import OccupationProfile, entropy_functional, equilibrium_profile

    lines = list(explicit_spectrum([(0.5, 1), (1.0, 2), (2.0, 3), (3.5, 1)]).lines())
    step = 1e-5
    worst = 0.0
    for q, z in ((-1.0, 1.5), (-0.5, 1.0), (0.0, 0.8), (0.5, 0.9), (1.0, 0.5)):
        state = ThermoState(1.0, z, q)
        nus = [nu for _, nu in equilibrium_profile(lines, state).entries]

        def s_at(vec):
            return entropy_functional(OccupationProfile.from_pairs(list(zip(lines, vec))), q)

        def grad(i):
            up, dn = list(nus), list(nus)
            up[i] += step
            dn[i] -= step
            return (s_at(up) - s_at(dn)) / (2 * step)

        g0, g1 = lines[0].multiplicity, lines[1].multiplicity
        e0, e1 = lines[0].energy, lines[1].energy
        s0, s1 = grad(0), grad(1)
        det = g0 * e0 * g1 - g1 * e1 * g0
        lam1 = (s0 * g1 - s1 * g0) / det
        lam2 = (s1 * g0 * e0 - s0 * g1 * e1) / det
        for i in (2, 3):
            gi, ei = lines[i].multiplicity, lines[i].energy
            worst = max(worst, abs(grad(i) - lam1 * gi * ei - lam2 * gi))
    ok = worst <= 1e-6
    assert report("entropy stationarity (4-line spectrum)", ok, f"worst grad={worst:.2e}")


def test_derivative_growth_sequence():
    """q=0.5, z=1.0, n <= 40 at 256 bits: >= 8 significant digits everywhere;
    max growth within 1% of the 512-bit recomputation."""
    rows256 = derivative_growth_sequence(0.5, 1.0, 1.0, 40, precision_bits=256)
    rows512 = derivative_growth_sequence(0.5, 1.0, 1.0, 40, precision_bits=512)
    min_digits = min(r[2] for r in rows256)
    m256 = max(r[1] for r in rows256)
    m512 = max(r[1] for r in rows512)
    ok = min_digits >= 8 and abs(m256 - m512) / m512 <= 0.01
    assert report(
        "derivative-growth sequence (figure data)",
        ok,
        f"min digits={min_digits:.1f}, max growth 256b={m256:.6f} vs 512b={m512:.6f}",
    )


def test_conjecture_probes():
    """anzaf d=2 probe: fitted beta^{-1} coefficient vs conjectured value.

    Not a hard gate: a discrepancy is acceptance-passing provided the probe
    emits a structured report (and it does: the measured coefficient is ~0,
    the conjectured one is 4 ln 2)."""
    st = ThermoState(1.0, 1.0, -1.0)
    geom = Torus(2, 1.0)
    spec = torus_spectrum(geom, massless(), NATURAL)
    sweep = []
    for j in (5, 6, 7, 8):
        b = 2.0 ** -j
        r = spectral_action(NUMBER, spec, st.with_beta(b), NATURAL, 1e-6 / b ** 2)
        sweep.append((b, r.value, r.tail_bound))
    probe = anzaf_subleading_probe(2, st, geom, sweep)
    structured = (
        probe.name
        and math.isfinite(probe.fitted)
        and math.isfinite(probe.conjectured)
        and "betas" in probe.details
    )
    print("  probe report:", probe.summary())
    if not probe.agrees:
        print(
            "  structured discrepancy: conjectured"
            f" {probe.conjectured:.6f}, fitted {probe.fitted:.3e},"
            f" linear term {probe.details['linear_term']:.3e}"
        )
    ok = bool(structured)
    assert report(
        "conjecture probes (anzaf d=2; berrie0 evidence via figure data)",
        ok,
        f"agrees={probe.agrees} rel_discrepancy={probe.rel_discrepancy:.3g}",
    )
