import math

import pytest
from hypothesis import given, strategies as st

from qgas import (
    NATURAL,
    SI,
    DomainError,
    PoleViolation,
    ThermoState,
    Torus,
    cutoff_from_beta,
    is_admissible,
    massive,
    massless,
    relativistic,
    validate_state,
)
from qgas.core import Continuum, Sphere3


def test_state_field_validation():
    with pytest.raises(DomainError):
        ThermoState(beta=0.0, z=1.0, q=0.0)
    with pytest.raises(DomainError):
        ThermoState(beta=1.0, z=-0.1, q=0.0)
    with pytest.raises(DomainError, match="-1 <= q <= 1"):
        ThermoState(beta=1.0, z=1.0, q=1.5)


def test_admissibility_examples():
    # z*q = 0.5 < 1 at eps_min = 0
    validate_state(ThermoState(1.0, 0.5, 1.0), 0.0)
    # z*q*e^0 = 1: denominator vanishes at eps = 0
    with pytest.raises(PoleViolation):
        validate_state(ThermoState(1.0, 1.0, 1.0), 0.0)
    # Fermi side admits any activity
    validate_state(ThermoState(1.0, 10.0, -1.0), 0.0)


def test_z_zero_is_always_admissible():
    validate_state(ThermoState(1.0, 0.0, 1.0), 0.0)


def test_admissibility_monotone_in_z():
    state = ThermoState(1.0, 0.9, 1.0)
    validate_state(state, 0.0)
    for z in (0.5, 0.1, 0.0):
        validate_state(ThermoState(1.0, z, 1.0), 0.0)


@given(
    beta=st.floats(0.05, 20),
    z=st.floats(0.0, 50),
    q=st.floats(-1, 1),
    eps_min=st.floats(0, 3),
    shrink=st.floats(0.0, 1.0),
)
def test_admissibility_monotone_property(beta, z, q, eps_min, shrink):
    if is_admissible(ThermoState(beta, z, q), eps_min):
        assert is_admissible(ThermoState(beta, z * shrink, q), eps_min)


def test_cutoff_values():
    assert cutoff_from_beta(0.01, massless()) == pytest.approx(100.0)
    assert cutoff_from_beta(0.01, massive(1.0)) == pytest.approx(10.0)
    assert cutoff_from_beta(1.0, massive(2.0)) == 1.0
    assert cutoff_from_beta(0.01, relativistic(1.0)) == pytest.approx(100.0)


def test_dispersion_energies():
    assert massless().energy(2.0) == 2.0
    assert massive(0.5).energy(3.0) == pytest.approx(9.0)
    assert relativistic(1.0).energy(0.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        massive(0.0)


def test_geometry_validation():
    with pytest.raises(DomainError):
        Torus(0, 1.0)
    with pytest.raises(DomainError):
        Torus(1, -1.0)
    with pytest.raises(DomainError):
        Sphere3(0.0)
    with pytest.raises(DomainError):
        Continuum(2, 0.0)


def test_units():
    assert NATURAL.h == NATURAL.c == NATURAL.kB == 1.0
    assert SI.h == pytest.approx(6.626070040e-34)
    assert SI.c == 299792458.0
    assert SI.kB == pytest.approx(1.3806488e-23)
    assert SI.hbar == pytest.approx(SI.h / (2 * math.pi))


def test_mu_recovers_activity():
    st_ = ThermoState(beta=2.0, z=3.0, q=0.0)
    assert math.exp(st_.beta * st_.mu) == pytest.approx(3.0)
    assert ThermoState(1.0, 0.0, 0.0).mu == -math.inf
