import math

import numpy as np
import pytest

from dunklmc.domains import Domain
from dunklmc.errors import CapabilityError, PreconditionError
from dunklmc.fields import dunkl_laplacian_field_1d, poly_bump_1d
from dunklmc.kernels import (KernelContext, chapman_kolmogorov_residual,
                             dunkl_kernel_z2, green_function, heat_kernel,
                             normalization_c_k_closed,
                             normalization_c_k_numeric, occupation_time_ball,
                             QuadratureSettings, transition_mass)
from dunklmc.process import SimConfig
from dunklmc.rootsys import Family, RootSystem, build_root_system

# frozen from the 50-digit oracle: E_{1/2}(1,1) = e * M(0.5, 2, -2),
# cross-checked against I_0(1) + I_1(1)
E_HALF_AT_ONE = 1.8312249817444934


@pytest.fixture(scope="module")
def ctx1_half():
    sys = RootSystem(Family.Z2_PRODUCT, 1, np.eye(1), np.array([0.5]),
                     require_transience=False)
    return KernelContext(sys)


@pytest.fixture(scope="module")
def ctx1_k08():
    return KernelContext(build_root_system("z2_product", 1, [0.8]))


@pytest.fixture(scope="module")
def ctx3_zero():
    return KernelContext(build_root_system("z2_product", 3, [0.0, 0.0, 0.0]))


def test_normalization_closed_forms(ctx1_half):
    assert ctx1_half.c_k == pytest.approx(2 * math.sqrt(2.0), rel=1e-12)
    c0 = KernelContext(build_root_system("z2_product", 2, [0.0, 0.0]))
    assert c0.c_k == pytest.approx(2 * math.pi, rel=1e-12)


def test_normalization_product_structure():
    quad = QuadratureSettings()
    ca = normalization_c_k_numeric(
        build_root_system("z2_product", 1, [0.8]), quad)
    cb = normalization_c_k_numeric(
        RootSystem(Family.Z2_PRODUCT, 1, np.eye(1), np.array([1.3]),
                   require_transience=False), quad)
    cab = normalization_c_k_numeric(
        build_root_system("z2_product", 2, [0.8, 1.3]), quad)
    assert cab == pytest.approx(ca * cb, rel=1e-9)


def test_normalization_numeric_matches_gamma_form():
    for ks in ([0.8], [0.6, 1.3]):
        sys = build_root_system("z2_product", len(ks), ks)
        assert normalization_c_k_numeric(sys, QuadratureSettings()) \
            == pytest.approx(normalization_c_k_closed(sys), rel=1e-10)


def test_capability_gate():
    a3 = build_root_system("a_type", 3, [0.7])
    with pytest.raises(CapabilityError):
        KernelContext(a3)
    # but k == 0 on any family is fine
    a3_zero = build_root_system("a_type", 3, [0.0])
    KernelContext(a3_zero)


def test_dunkl_kernel_values(ctx1_half):
    one = np.array([1.0])
    assert dunkl_kernel_z2(ctx1_half, one, np.array([0.0])) == pytest.approx(1.0)
    assert dunkl_kernel_z2(ctx1_half, one, one) == pytest.approx(
        E_HALF_AT_ONE, rel=1e-12)
    # symmetry
    x, y = np.array([0.7]), np.array([-1.4])
    assert dunkl_kernel_z2(ctx1_half, x, y) == pytest.approx(
        dunkl_kernel_z2(ctx1_half, y, x), rel=1e-13)


def test_dunkl_kernel_k_zero_is_exponential(ctx3_zero, rng):
    x, y = rng.standard_normal(3), rng.standard_normal(3)
    assert dunkl_kernel_z2(ctx3_zero, x, y) == pytest.approx(
        math.exp(float(x @ y)), rel=1e-13)


def test_heat_kernel_gaussian_reduction(rng):
    ctx = KernelContext(build_root_system("z2_product", 2, [0.0, 0.0]))
    x, y = rng.standard_normal(2), rng.standard_normal(2)
    t = 0.7
    ref = math.exp(-float(np.sum((x - y) ** 2)) / (2 * t)) / (2 * math.pi * t)
    assert heat_kernel(ctx, t, x, y) == pytest.approx(ref, rel=1e-12)


def test_heat_kernel_symmetry(ctx1_k08, rng):
    for _ in range(5):
        x, y = rng.standard_normal(1), rng.standard_normal(1)
        assert heat_kernel(ctx1_k08, 0.4, x, y) == pytest.approx(
            heat_kernel(ctx1_k08, 0.4, y, x), rel=1e-13)


def test_transition_mass_is_one(ctx1_k08):
    for t in (0.5, 1.0):
        assert transition_mass(ctx1_k08, t, np.array([0.3])) \
            == pytest.approx(1.0, abs=1e-8)


def test_chapman_kolmogorov(ctx1_k08):
    for (s, t) in ((0.3, 0.7), (0.5, 0.5)):
        assert chapman_kolmogorov_residual(ctx1_k08, s, t, 0.25, -0.6) <= 1e-6


def test_green_closed_form_k0_d3(ctx3_zero, rng):
    x, y = rng.standard_normal(3) * 0.4, rng.standard_normal(3) * 0.4 + 1.0
    r = float(np.linalg.norm(x - y))
    assert green_function(ctx3_zero, x, y) == pytest.approx(
        1.0 / (2 * math.pi * r), rel=1e-8)
    # halving the separation doubles the value
    g1 = green_function(ctx3_zero, np.zeros(3), np.array([0.5, 0.0, 0.0]))
    g2 = green_function(ctx3_zero, np.zeros(3), np.array([1.0, 0.0, 0.0]))
    assert g1 == pytest.approx(2 * g2, rel=1e-8)


def test_green_symmetry_and_diagonal(ctx1_k08):
    x, y = np.array([0.4]), np.array([1.1])
    assert green_function(ctx1_k08, x, y) == pytest.approx(
        green_function(ctx1_k08, y, x), rel=1e-8)
    assert green_function(ctx1_k08, x, x) == math.inf


def test_occupation_closed_form(z2_mixed):
    assert occupation_time_ball(z2_mixed, 1.0, np.zeros(2)) \
        == pytest.approx(1.0 / 3.0)  # lambda = 1.5
    edge = occupation_time_ball(z2_mixed, 1.0, np.array([1.0, 0.0]))
    assert edge == pytest.approx(1.0 / 3.0 - 1.0 / 5.0)
    assert edge > 0
    vals = [occupation_time_ball(z2_mixed, 1.0, np.array([r, 0.0]))
            for r in (0.0, 0.3, 0.6, 0.9)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    with pytest.raises(PreconditionError):
        occupation_time_ball(z2_mixed, 1.0, np.array([1.5, 0.0]))


def test_green_hyperharmonicity_against_harmonic_measure(ctx1_k08):
    """(1/n) sum G(Z_j, y) <= G(x, y) + 3 se for exits Z_j of an interval
    and y outside the sampled closure."""
    from dunklmc.dirichlet import harmonic_measure
    sys = ctx1_k08.sys
    D = Domain.ball(np.array([0.7]), 0.5)
    x = np.array([0.7])
    y = np.array([2.0])
    est = harmonic_measure(sys, D, x, SimConfig(seed=21, paths=400))
    gvals = np.array([green_function(ctx1_k08, z, y) for z in est.exit_points])
    mean = float(np.mean(gvals))
    se = float(np.std(gvals, ddof=1) / math.sqrt(len(gvals)))
    assert mean <= green_function(ctx1_k08, x, y) + 3 * se


def test_green_exchange_identity(ctx1_k08):
    """int G(x, z) H_D(y, dz) = int G(y, z) H_D(x, dz) (d=1 interval)."""
    from dunklmc.dirichlet import harmonic_measure
    sys = ctx1_k08.sys
    D = Domain.ball(np.array([0.7]), 0.5)
    x, y = np.array([0.5]), np.array([0.9])
    cfg = SimConfig(seed=33, paths=500)
    est_y = harmonic_measure(sys, D, y, cfg, stream_id=0)
    est_x = harmonic_measure(sys, D, x, cfg, stream_id=1)
    gx = np.array([green_function(ctx1_k08, x, z) for z in est_y.exit_points])
    gy = np.array([green_function(ctx1_k08, y, z) for z in est_x.exit_points])
    m1, s1 = float(np.mean(gx)), float(np.std(gx, ddof=1) / math.sqrt(len(gx)))
    m2, s2 = float(np.mean(gy)), float(np.std(gy, ddof=1) / math.sqrt(len(gy)))
    assert abs(m1 - m2) <= 3 * math.hypot(s1, s2)


def test_green_laplacian_pairing(ctx1_k08):
    """int G(x, y) Delta_k f(y) w(y) dy = -2 f(x) for compactly
    supported C^2 f (d = 1), within 1e-3."""
    sys = ctx1_k08.sys
    f = poly_bump_1d(0.3, 0.9)
    x = 0.6
    k = float(sys.multiplicity[0])

    def integrand(ys):
        vals = dunkl_laplacian_field_1d(sys, f, ys)
        w = (2.0 ** k) * np.abs(ys) ** (2 * k)
        G = np.array([green_function(ctx1_k08, np.array([x]), np.array([yy]))
                      for yy in ys])
        return vals * w * G

    # grade the G singularity at y = x with y = x +- u^3 on the support,
    # and integrate the reflected wing directly
    from numpy.polynomial.legendre import leggauss
    gx, gw = leggauss(48)

    def graded(a, b):  # integrate over [a, b] with cube grading toward x
        if a >= x or b <= x:
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            ys = mid + half * gx
            return float(np.sum(integrand(ys) * gw * half))
        total = 0.0
        for lo, hi, sgn in ((x, b, 1.0), (a, x, -1.0)):
            span = abs(hi - x) if sgn > 0 else abs(x - lo)
            u_hi = span ** (1.0 / 3.0)
            u = 0.5 * u_hi * (gx + 1.0)
            ys = x + sgn * u ** 3
            jac = 3.0 * u ** 2 * 0.5 * u_hi
            total += float(np.sum(integrand(ys) * gw * jac))
        return total

    val = graded(0.3, 0.9) + graded(-0.9, -0.3)
    assert val == pytest.approx(-2.0 * float(f(np.array([x]))), abs=1e-3)
