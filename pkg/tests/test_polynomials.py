import random
from fractions import Fraction

import numpy as np
import pytest

from dunklmc.errors import InternalInvariantError
from dunklmc.polynomials import MultivariatePolynomial as P


def _random_poly(rng, d, deg=5, terms=7):
    out = {}
    for _ in range(terms):
        mono = tuple(rng.randint(0, deg) for _ in range(d))
        if sum(mono) <= deg:
            out[mono] = Fraction(rng.randint(-8, 8), rng.randint(1, 5))
    return P(d, out)


def test_zero_coefficients_dropped():
    p = P(2, {(1, 0): Fraction(1), (0, 1): Fraction(0)})
    assert (1, 0) in p.terms and (0, 1) not in p.terms
    assert (p - p).is_zero()


def test_ring_ops_agree_with_evaluation(rng):
    pyrng = random.Random(5)
    for _ in range(10):
        p = _random_poly(pyrng, 3)
        q = _random_poly(pyrng, 3)
        x = rng.standard_normal(3)
        assert (p + q)(x) == pytest.approx(p(x) + q(x), rel=1e-12, abs=1e-12)
        assert (p * q)(x) == pytest.approx(p(x) * q(x), rel=1e-11, abs=1e-11)


def test_partial_derivative():
    x1, x2 = P.variable(0, 2), P.variable(1, 2)
    p = x1 * x1 * x2 + 3 * x2
    assert p.partial(0) == 2 * (x1 * x2)
    assert p.partial(1) == x1 * x1 + P.constant(2, 3)


def test_divide_by_linear_roundtrip():
    pyrng = random.Random(11)
    for _ in range(15):
        d = pyrng.choice((2, 3))
        q = _random_poly(pyrng, d)
        coeffs = [Fraction(pyrng.randint(-3, 3)) for _ in range(d)]
        if all(c == 0 for c in coeffs):
            coeffs[0] = Fraction(1)
        L = P(d, {tuple(1 if j == i else 0 for j in range(d)): c
                  for i, c in enumerate(coeffs) if c != 0})
        prod = q * L
        assert prod.divide_by_linear(coeffs) == q


def test_divide_remainder_raises():
    x1 = P.variable(0, 2)
    one = P.constant(2, 1)
    with pytest.raises(InternalInvariantError):
        (x1 + one).divide_by_linear([Fraction(0), Fraction(1)])


def test_compose_linear_permutation():
    x1, x2 = P.variable(0, 2), P.variable(1, 2)
    p = x1 * x1 + 2 * x2
    swap = [[Fraction(0), Fraction(1)], [Fraction(1), Fraction(0)]]
    assert p.compose_linear(swap) == x2 * x2 + 2 * x1


def test_compose_linear_matches_pointwise(rng):
    pyrng = random.Random(3)
    p = _random_poly(pyrng, 2, deg=4)
    mat = [[Fraction(1, 2), Fraction(-1)], [Fraction(2), Fraction(1, 3)]]
    comp = p.compose_linear(mat)
    M = np.array([[0.5, -1.0], [2.0, 1.0 / 3.0]])
    for _ in range(5):
        x = rng.standard_normal(2)
        assert comp(x) == pytest.approx(p(M @ x), rel=1e-10, abs=1e-10)


def test_degree_and_homogeneity():
    sq = P.squared_norm(3)
    assert sq.degree() == 2 and sq.is_homogeneous()
    assert (sq + P.constant(3, 1)).is_homogeneous() is False
    assert P(3, {}).degree() == -1


def test_inexact_flag_propagates():
    p = P.variable(0, 2)
    q = p * 0.5
    assert q.exact is False
    assert (p + q).exact is False
    assert (p * Fraction(1, 2)).exact is True
