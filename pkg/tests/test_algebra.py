import math
import random
from fractions import Fraction

import numpy as np
import pytest

from dunklmc.algebra import (as_field, dunkl_laplacian_numeric,
                             dunkl_laplacian_numeric_batch,
                             dunkl_laplacian_poly, dunkl_t)
from dunklmc.errors import SingularityError
from dunklmc.fields import g_lambda_field, squared_norm_field
from dunklmc.polynomials import MultivariatePolynomial as P
from dunklmc.rootsys import build_root_system


def _rand_poly(pyrng, d, deg=6, terms=8):
    out = {}
    for _ in range(terms):
        mono = tuple(pyrng.randint(0, deg) for _ in range(d))
        if sum(mono) <= deg:
            out[mono] = Fraction(pyrng.randint(-9, 9), pyrng.randint(1, 7))
    return P(d, out)


def test_one_dimensional_examples():
    sys = build_root_system("z2_product", 1, [0.7])
    x = P.variable(0, 1)
    assert dunkl_t(sys, 1, x * x) == 2 * x
    expected = P.constant(1, 1 + 2 * Fraction(0.7))
    assert dunkl_t(sys, 1, x) == expected
    assert dunkl_t(sys, 1, P.constant(1, 9)).is_zero()


def test_laplacian_of_squared_norm(z2_mixed, a3):
    for sys in (z2_mixed, a3):
        sq = P.squared_norm(sys.dim)
        expected = Fraction(2 * sys.dim) + 4 * sum(Fraction(float(k))
                                                   for k in sys.multiplicity)
        assert dunkl_laplacian_poly(sys, sq) == P.constant(sys.dim, expected)


def test_harmonic_and_nonharmonic_monomials(z2_mixed):
    x1 = P.variable(0, 2)
    x2 = P.variable(1, 2)
    assert dunkl_laplacian_poly(z2_mixed, x1).is_zero()
    assert dunkl_laplacian_poly(z2_mixed, x1 * x2).is_zero()
    k1 = Fraction(float(z2_mixed.multiplicity[0]))
    assert dunkl_laplacian_poly(z2_mixed, x1 * x1) \
        == P.constant(2, Fraction(2) + 4 * k1)


def test_commutativity_random(z2_mixed, a3):
    pyrng = random.Random(8)
    for sys in (z2_mixed, a3):
        d = sys.dim
        pairs = [(i, j) for i in range(1, d + 1) for j in range(i + 1, d + 1)]
        for _ in range(10):
            p = _rand_poly(pyrng, d)
            i, j = pairs[pyrng.randrange(len(pairs))]
            assert dunkl_t(sys, i, dunkl_t(sys, j, p)) \
                == dunkl_t(sys, j, dunkl_t(sys, i, p))


def test_degree_drop_on_homogeneous(a3):
    p = P(3, {(2, 2, 2): Fraction(3), (6, 0, 0): Fraction(1),
              (1, 2, 3): Fraction(-2)})
    q = dunkl_t(a3, 2, p)
    assert q.degree() == 5 and q.is_homogeneous()


def test_k_zero_reduces_to_classical_laplacian():
    sys = build_root_system("z2_product", 3, [0.0, 0.0, 0.0])
    pyrng = random.Random(2)
    for _ in range(5):
        p = _rand_poly(pyrng, 3, deg=5)
        classical = P(3, {})
        for j in range(3):
            classical = classical + p.partial(j).partial(j)
        assert dunkl_laplacian_poly(sys, p) == classical


def test_dihedral_inexact_route(dihedral3):
    p = P.squared_norm(2)
    out = dunkl_laplacian_poly(dihedral3, p)
    assert out.exact is False
    [(mono, coeff)] = [(m, c) for m, c in out.terms.items()]
    assert mono == (0, 0)
    assert coeff == pytest.approx(2 * 2 + 4 * dihedral3.gamma, rel=1e-10)


def test_numeric_on_squared_norm(z2_pair):
    f = squared_norm_field(2)
    f = as_field(lambda p: float(p[0] ** 2 + p[1] ** 2))  # black box, no analytic
    val = dunkl_laplacian_numeric(z2_pair, f, np.array([0.4, 0.9]), h=1e-4)
    assert val == pytest.approx(2 * 2 + 4 * z2_pair.gamma, abs=1e-6)


def test_numeric_barrier_near_zero(z2_pair):
    g = g_lambda_field(z2_pair)
    x = np.array([1.0, 1.0]) / math.sqrt(2.0)
    val = dunkl_laplacian_numeric(z2_pair, g, x)
    scale = float(np.linalg.norm(x)) ** (-2 * z2_pair.lam - 2)
    assert abs(val) <= 1e-4 * scale


def test_numeric_constant_is_exactly_zero(z2_pair):
    f = as_field(lambda p: 3.25)
    assert dunkl_laplacian_numeric(z2_pair, f, np.array([0.3, 0.7])) == 0.0


def test_numeric_proximity_error_names_root(z2_pair):
    f = squared_norm_field(2)
    with pytest.raises(SingularityError) as err:
        dunkl_laplacian_numeric(z2_pair, f, np.array([1e-6, 0.8]), h=1e-4)
    assert err.value.root == 0


def test_numeric_matches_exact_with_h_squared_rate(z2_pair, rng):
    pyrng = random.Random(4)
    for _ in range(4):
        p = _rand_poly(pyrng, 2, deg=4, terms=6)
        exact_img = dunkl_laplacian_poly(z2_pair, p)
        f = as_field(lambda q, p=p: p(q))
        while True:
            x = rng.uniform(-1.5, 1.5, size=2)
            if np.min(np.abs(x)) > 0.05:
                break
        target = exact_img(x)
        errs = []
        for h in (2e-3, 1e-3, 5e-4):
            errs.append(abs(dunkl_laplacian_numeric(z2_pair, f, x, h=h) - target))
        # local truncation is O(h^2); allow slack for roundoff floors
        if errs[0] > 1e-7:
            assert errs[2] <= errs[0] / 2.0


def test_numeric_batch_matches_scalar(z2_pair):
    # compare on a black-box field so both sides take the stencil route
    g = g_lambda_field(z2_pair)
    bare = as_field(lambda p: float(np.sum(p * p)) ** (-z2_pair.lam))
    pts = np.array([[0.8, 0.5], [1.2, -0.7], [0.5, 1.4]])
    vals, ok = dunkl_laplacian_numeric_batch(z2_pair, bare, pts)
    assert np.all(ok)
    for i, p in enumerate(pts):
        scalar = dunkl_laplacian_numeric(z2_pair, bare, p)
        assert vals[i] == pytest.approx(scalar, abs=1e-9)
    # and both stay near zero: the field is Delta_k-harmonic
    scale = np.linalg.norm(pts, axis=1) ** (-2 * z2_pair.lam - 2)
    assert np.max(np.abs(vals) / scale) < 1e-4


def test_numeric_batch_flags_proximity(z2_pair):
    g = squared_norm_field(2)
    pts = np.array([[0.5, 0.5], [1e-9, 0.5]])
    vals, ok = dunkl_laplacian_numeric_batch(z2_pair, g, pts)
    assert ok[0] and not ok[1]
    assert vals[1] == 0.0
