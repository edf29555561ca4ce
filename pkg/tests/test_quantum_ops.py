import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hjcsim.quantum_ops import (boltzmann_weights, displacement_element, displacement_matrix, fc_factor,
                                lowering, raising)
from oracles import exact_displacement, expm_displacement


def test_zero_zero_overlap():
    assert displacement_element(0, 0, 1.0) == pytest.approx(math.exp(-0.5), rel=1e-14)
    assert fc_factor(0, 0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)


@pytest.mark.parametrize("m, n", [(0, 0), (3, 3), (2, 5), (7, 1)])
def test_identity_displacement(m, n):
    assert displacement_element(m, n, 0.0) == (1.0 if m == n else 0.0)


def test_matches_expm_oracle_single_entry():
    ref = expm_displacement(0.7)
    assert displacement_element(3, 1, 0.7) == pytest.approx(ref[3, 1], abs=1e-10)


@pytest.mark.parametrize("lam", [-3.0, -1.3, -0.2, 0.5, 1.0, 2.1, 3.0])
def test_matches_expm_oracle_block(lam):
    ref = expm_displacement(lam)[:11, :11]
    assert np.abs(displacement_matrix(11, lam) - ref).max() <= 1e-10


@pytest.mark.parametrize("lam", [Fraction(-3), Fraction(-5, 4), Fraction(1, 3), Fraction(7, 5), Fraction(3)])
def test_recurrence_against_exact_rational_evaluation(lam):
    for m in range(11):
        for n in range(11):
            exact = exact_displacement(m, n, lam)
            assert displacement_element(m, n, float(lam)) == pytest.approx(exact, abs=1e-12)


def test_large_quantum_numbers_do_not_overflow():
    v = displacement_element(120, 100, 1.5)
    assert math.isfinite(v) and abs(v) <= 1
    col = [displacement_element(m, 100, 1.5) ** 2 for m in range(400)]
    assert sum(col) == pytest.approx(1.0, abs=1e-9)


def test_fc_one_zero():
    assert fc_factor(1, 0, 1.0) == pytest.approx(math.exp(-1), rel=1e-14)


@pytest.mark.parametrize("lam", [0.3, 1.0, 1.5, 2.0])
def test_fc_completeness(lam):
    total = sum(fc_factor(m, 0, lam) for m in range(60))
    assert total == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(m=st.integers(0, 12), n=st.integers(0, 12), lam=st.floats(-3, 3))
def test_symmetries(m, n, lam):
    d = displacement_element(m, n, lam)
    assert abs(d) <= 1 + 1e-12
    assert d == pytest.approx((-1) ** (m - n) * displacement_element(n, m, lam), abs=1e-14)
    f = fc_factor(m, n, lam)
    assert f == pytest.approx(fc_factor(n, m, -lam), abs=1e-14)
    assert f == pytest.approx(fc_factor(n, m, lam), abs=1e-14)


@pytest.mark.parametrize("lam", [0.25, 0.6, 1.0])
def test_truncated_unitarity(lam):
    d = displacement_matrix(60, lam)
    err = d.T @ d - np.eye(60)
    assert np.abs(err[:20, :20]).max() <= 1e-8


def test_ladder_operators():
    b, bd = lowering(5), raising(5)
    assert np.allclose(np.diag(bd @ b), np.arange(5))


def test_boltzmann():
    assert np.array_equal(boltzmann_weights(0.0, 1.0, 4), [1, 0, 0, 0, 0])
    w = boltzmann_weights(0.1, 1.0, 4)
    assert w[0] == pytest.approx(0.9999546, abs=1e-7)
    assert w[1] / w[0] == pytest.approx(math.exp(-10), rel=1e-12)
    assert w.sum() == pytest.approx(1.0)
    assert np.allclose(boltzmann_weights(1e12, 1.0, 3), 0.25)
