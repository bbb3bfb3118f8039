import numpy as np
import pytest

from dunklmc.domains import Domain, GammaD
from dunklmc.errors import ConfigError


def test_ball_membership_and_distances():
    b = Domain.ball([0.5, 0.0], 0.3)
    assert b.contains([0.5, 0.1])
    assert not b.contains([0.5, 0.31])
    assert not b.contains([0.5, 0.3])  # open set
    assert b.distance_outside([0.5, 0.5]) == pytest.approx(0.2)
    assert b.distance_outside([0.5, 0.0]) == 0.0
    assert b.boundary_distance_inside([0.5, 0.0]) == pytest.approx(0.3)
    assert b.bounding_radius == pytest.approx(0.8)


def test_annulus_membership():
    a = Domain.annulus(0.5, 2.0)
    assert a.contains([1.0, 0.0])
    assert not a.contains([0.3, 0.0])
    assert not a.contains([0.0, 2.5])
    assert a.boundary_distance_inside([1.0, 0.0]) == pytest.approx(0.5)
    assert a.distance_outside([0.1, 0.0]) == pytest.approx(0.4)


def test_box_membership():
    b = Domain.box([-1.0, 0.0], [1.0, 2.0])
    assert b.contains([0.0, 1.0])
    assert not b.contains([0.0, 2.1])
    assert b.boundary_distance_inside([0.0, 1.0]) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        Domain.box([0.0, 0.0], [1.0, -1.0])


def test_custom_predicate():
    c = Domain.custom(lambda p: abs(p[0]) + abs(p[1]) < 1.0, 2,
                      bounding_radius=1.0)
    assert c.contains([0.4, 0.4])
    assert not c.contains([0.8, 0.4])


def test_w_invariance_flags(z2_pair, dihedral3):
    assert Domain.ball([0.0, 0.0], 1.0).w_invariant(z2_pair)
    assert not Domain.ball([0.6, 0.0], 0.3).w_invariant(z2_pair)
    assert Domain.annulus(0.5, 2.0).w_invariant(dihedral3)
    assert Domain.box([-1.0, -2.0], [1.0, 2.0]).w_invariant(z2_pair)
    assert not Domain.box([0.0, -1.0], [1.0, 1.0]).w_invariant(z2_pair)
    # dihedral m=3 maps an axis box off itself
    assert not Domain.box([-1.0, -1.0], [1.0, 1.0]).w_invariant(dihedral3)


def test_gamma_d_membership_examples(z2_pair):
    dom = Domain.ball([0.6, 0.0], 0.3)
    gd = GammaD(z2_pair, dom)
    assert gd.membership(np.array([-0.6, 0.0]))       # reflected center
    assert not gd.membership(np.array([0.6, 0.0]))    # inside D itself
    assert gd.membership(np.array([0.6, 0.3]))        # on the sphere
    assert not gd.membership(np.array([5.0, 5.0]))    # far away


def test_gamma_d_reduces_to_boundary_for_invariant(z2_pair):
    gd = GammaD(z2_pair, Domain.ball([0.0, 0.0], 1.0))
    assert gd.membership(np.array([1.0, 0.0]))
    assert not gd.membership(np.array([0.99, 0.0]))
    assert not gd.membership(np.array([1.1, 0.0]))
    assert gd.membership(np.array([1.0 + 1e-10, 0.0]))


def test_membership_fraction(z2_pair):
    dom = Domain.ball([0.6, 0.0], 0.3)
    gd = GammaD(z2_pair, dom)
    pts = np.array([[-0.6, 0.0], [0.6, 0.3], [3.0, 3.0], [0.6, 0.0]])
    assert gd.membership_fraction(pts, tol=1e-9) == pytest.approx(0.5)


def test_encode_codes():
    from dunklmc.domains import DOM_ANNULUS, DOM_BALL, DOM_BOX
    assert Domain.ball([0.0, 0.0], 1.0).encode()[0] == DOM_BALL
    assert Domain.annulus(0.5, 2.0).encode()[0] == DOM_ANNULUS
    assert Domain.box([0.0, 0.0], [1.0, 1.0]).encode()[0] == DOM_BOX
    with pytest.raises(ConfigError):
        Domain.custom(lambda p: True, 2, 1.0).encode()
