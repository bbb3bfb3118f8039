import math

import numpy as np
import pytest

from dunklmc.errors import ConfigError, PreconditionError
from dunklmc.rootsys import (Family, build_root_system, enumerate_group,
                             orbit, reflect, weight)


def test_z2_construction_constants(z2_mixed):
    assert z2_mixed.gamma == pytest.approx(1.5)
    assert z2_mixed.lam == pytest.approx(1.5)
    norms = np.sum(z2_mixed.positive_roots ** 2, axis=1)
    assert np.allclose(norms, 2.0, atol=1e-12)


def test_lambda_gate_names_lambda():
    with pytest.raises(PreconditionError, match="lambda"):
        build_root_system("z2_product", 1, [0.3])


def test_a_type_orbit_and_gamma(a3):
    assert len(a3.positive_roots) == 3
    assert a3.gamma == pytest.approx(2.1)
    assert np.allclose(np.sum(a3.positive_roots ** 2, axis=1), 2.0)


def test_multiplicity_count_mismatch():
    with pytest.raises(ConfigError, match="orbit"):
        build_root_system("z2_product", 2, [0.5])
    with pytest.raises(ConfigError, match="orbit"):
        build_root_system("a_type", 3, [0.5, 0.5])


def test_reflect_examples(z2_mixed):
    a1 = z2_mixed.positive_roots[0]
    assert np.allclose(reflect(np.array([1.0, 2.0]), a1), [-1.0, 2.0])
    on_plane = np.array([0.0, 3.0])
    assert np.allclose(reflect(on_plane, a1), on_plane)


def test_reflect_is_involutive_isometry(z2_mixed, a3, rng):
    for sys in (z2_mixed, a3):
        for _ in range(20):
            x = rng.standard_normal(sys.dim)
            for a in sys.positive_roots:
                y = reflect(x, a)
                assert np.max(np.abs(reflect(y, a) - x)) <= 1e-12
                assert abs(np.linalg.norm(y) - np.linalg.norm(x)) <= 1e-12


def test_weight_hand_value(z2_mixed):
    # prod |<x, sqrt2 e_i>|^(2 k_i) at x = (1, 2) with k = (0.5, 1.0)
    assert weight(z2_mixed, np.array([1.0, 2.0])) == pytest.approx(8 * math.sqrt(2))


def test_weight_k_zero_is_one(brownian2, rng):
    assert weight(brownian2, rng.standard_normal(2)) == pytest.approx(1.0)


def test_weight_w_invariant(z2_mixed, a3, dihedral3, rng):
    for sys in (z2_mixed, a3, dihedral3):
        x = rng.standard_normal(sys.dim)
        w0 = weight(sys, x)
        for g in enumerate_group(sys):
            assert weight(sys, g.apply(x)) == pytest.approx(w0, rel=1e-10)


def test_group_orders(z2_mixed, a3, dihedral3):
    assert len(enumerate_group(z2_mixed)) == 4
    assert len(enumerate_group(a3)) == 6        # S_3
    assert len(enumerate_group(dihedral3)) == 6  # order 2m
    b3 = build_root_system("b_type", 3, [0.4, 0.2])
    assert len(enumerate_group(b3)) == 48        # 2^d d!


def test_group_closure_properties(z2_mixed, a3):
    for sys in (z2_mixed, a3):
        mats = [g.matrix for g in enumerate_group(sys)]
        keys = {np.round(m, 9).tobytes() for m in ((m + 0.0) for m in mats)}
        assert any(np.allclose(m, np.eye(sys.dim)) for m in mats)
        for m in mats:
            assert (np.round(m.T, 9) + 0.0).tobytes() in keys  # inverses
            assert np.max(np.abs(m @ m.T - np.eye(sys.dim))) <= 1e-12


def test_group_element_word_reproduces_matrix(a3):
    # word composes left to right: matrix = R[w0] @ R[w1] @ ...
    for g in enumerate_group(a3):
        acc = np.eye(a3.dim)
        for gi in g.word:
            acc = acc @ a3.reflection_matrix(gi)
        assert np.allclose(acc, g.matrix, atol=1e-12)


def test_orbit_examples(z2_mixed):
    pts = orbit(z2_mixed, np.array([0.6, 0.0]))
    assert len(pts) == 2
    assert any(np.allclose(p, [-0.6, 0.0]) for p in pts)
    assert len(orbit(z2_mixed, np.zeros(2))) == 1


def test_orbit_divides_group_order(a3, dihedral3, rng):
    for sys in (a3, dihedral3):
        n = len(enumerate_group(sys))
        for _ in range(5):
            m = len(orbit(sys, rng.standard_normal(sys.dim)))
            assert n % m == 0


def test_gamma_equals_orbit_sum(z2_mixed, a3, dihedral3):
    b3 = build_root_system("b_type", 3, [0.4, 0.2])
    for sys in (z2_mixed, a3, dihedral3, b3):
        total = sum(len(ob) * sys.multiplicity[next(iter(ob))]
                    for ob in sys.root_orbits())
        assert total == pytest.approx(sys.gamma, rel=1e-12)


def test_parallel_roots_rejected():
    with pytest.raises(ConfigError, match="parallel"):
        build_root_system("custom", 2, None,
                          custom_roots=[[1.0, 0.0], [2.0, 0.0]],
                          custom_multiplicities=[0.5, 0.5])


def test_custom_non_invariant_multiplicity_rejected():
    # A_2 root triple carries one W-orbit; unequal k must fail
    roots = [[1, -1, 0], [0, 1, -1], [1, 0, -1]]
    with pytest.raises(PreconditionError, match="W-invariant"):
        build_root_system("custom", 3, None, custom_roots=roots,
                          custom_multiplicities=[0.5, 0.5, 0.9])


def test_custom_infinite_group_hits_cap():
    th = 1.0  # irrational multiple of pi: reflections generate an infinite group
    roots = [[1.0, 0.0], [math.cos(th), math.sin(th)]]
    with pytest.raises(ConfigError, match="cap"):
        build_root_system("custom", 2, None, custom_roots=roots,
                          custom_multiplicities=[0.5, 0.5], group_cap=256)


def test_dihedral_even_orbits():
    d4 = build_root_system("dihedral", 2, [0.5, 0.7], dihedral_m=4)
    assert len(enumerate_group(d4)) == 8
    assert d4.gamma == pytest.approx(2 * 0.5 + 2 * 0.7)
    assert len(d4.root_orbits()) == 2


def test_rescaling_of_custom_roots():
    sys = build_root_system("custom", 2, None, custom_roots=[[3.0, 0.0], [0.0, 0.25]],
                            custom_multiplicities=[0.6, 0.9])
    assert np.allclose(np.sum(sys.positive_roots ** 2, axis=1), 2.0)
    assert sys.family is Family.CUSTOM
