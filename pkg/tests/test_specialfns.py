import math

import numpy as np
import pytest

from dunklmc.errors import AccuracyError, PreconditionError
from dunklmc.specialfns import (SeriesAccuracy, bessel_j_normalized, gamma_fn,
                                kummer_m, kummer_m_log)
from oracle_specialfns import bessel_oracle, gamma_oracle, kummer_oracle, \
    log_kummer_oracle


def test_kummer_trivial_values():
    assert kummer_m(0.8, 2.6, 0.0) == pytest.approx(1.0, abs=1e-15)
    for s in (-7.0, 0.5, 13.0):
        assert kummer_m(0.0, 1.0, s) == pytest.approx(1.0, abs=1e-15)


def test_kummer_exponential_identity():
    # M(1, 2, s) = (e^s - 1)/s
    assert kummer_m(1.0, 2.0, 1.0) == pytest.approx(math.e - 1.0, rel=1e-12)
    assert kummer_m(1.0, 2.0, 1.0) == pytest.approx(
        float(kummer_oracle(1, 2, 1)), rel=1e-12)


def test_kummer_against_oracle_small_grid():
    for k in (0.0, 0.7, 1.5, 3.0):
        for s in (-20.0, -5.0, -0.3, 0.3, 5.0, 20.0):
            mine = kummer_m(k, 2 * k + 1, s)
            ref = float(kummer_oracle(k, 2 * k + 1, s))
            assert mine == pytest.approx(ref, rel=1e-10)


def test_kummer_transformation_invariance():
    acc = SeriesAccuracy(rel_tol=1e-13, max_terms=2000)
    for (a, b) in ((0.9, 2.8), (1.5, 4.0)):
        for s in (-10.0, -6.0, -1.5):
            direct = kummer_m(a, b, s, acc, _force_direct=True)
            transformed = kummer_m(a, b, s, acc)
            assert transformed == pytest.approx(direct, rel=1e-10)


def test_kummer_log_matches_oracle_large_arguments():
    for s in (-900.0, -120.0, 300.0):
        mine = float(kummer_m_log(0.7, 2.4, np.array([s]))[0])
        ref = float(log_kummer_oracle(0.7, 2.4, s))
        assert mine == pytest.approx(ref, rel=1e-11, abs=1e-11)


def test_kummer_nonconvergence_carries_partial():
    with pytest.raises(AccuracyError) as err:
        kummer_m(1.0, 2.0, 80.0, SeriesAccuracy(rel_tol=1e-12, max_terms=10))
    assert err.value.partial is not None


def test_kummer_preconditions():
    with pytest.raises(PreconditionError):
        kummer_m(0.5, 0.0, 1.0)
    with pytest.raises(PreconditionError):
        kummer_m(-0.5, 1.0, 1.0)


def test_bessel_trivial_and_classical():
    assert bessel_j_normalized(0.7, 0.0) == pytest.approx(1.0, abs=1e-15)
    # j_{1/2}(z) = sin(z)/z
    assert bessel_j_normalized(0.5, math.pi) == pytest.approx(0.0, abs=1e-13)
    assert bessel_j_normalized(0.5, 1.0) == pytest.approx(math.sin(1.0), rel=1e-12)


def test_bessel_even_and_oracle():
    z = np.array([-3.2, 3.2])
    v = bessel_j_normalized(1.2, z)
    assert v[0] == v[1]
    for lam in (-0.3, 0.5, 2.5):
        for zz in (0.25, 2.0, 8.0):
            ref = float(bessel_oracle(lam, zz))
            assert bessel_j_normalized(lam, zz) == pytest.approx(ref, rel=1e-10,
                                                                 abs=1e-12)


def test_bessel_precondition():
    with pytest.raises(PreconditionError):
        bessel_j_normalized(-1.0, 1.0)


def test_gamma_values_and_functional_equation(rng):
    assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    for _ in range(30):
        x = rng.uniform(0.5, 10.0)
        assert gamma_fn(x + 1.0) == pytest.approx(x * gamma_fn(x), rel=1e-12)
    for x in (0.3, 1.7, 4.2, -0.7, -2.3, 11.5):
        assert gamma_fn(x) == pytest.approx(float(gamma_oracle(x)), rel=1e-13)


def test_gamma_poles():
    for x in (0.0, -1.0, -4.0):
        with pytest.raises(PreconditionError):
            gamma_fn(x)


def test_series_accuracy_invariants():
    with pytest.raises(PreconditionError):
        SeriesAccuracy(rel_tol=1.5)
    with pytest.raises(PreconditionError):
        SeriesAccuracy(max_terms=5)
