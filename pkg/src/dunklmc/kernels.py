"""Closed-form analytic kernels for the axis-product case (or k == 0).

For W = Z2^d the Dunkl kernel factorizes into Kummer functions,

    E_k(x, y) = e^{<x,y>} prod_i M(k_i, 2k_i + 1, -2 x_i y_i),

which makes the heat kernel, its normalization constant and the Green
function computable.  No closed form exists for general root systems;
the simulation and Dirichlet layers never depend on this module.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .errors import CapabilityError, PreconditionError
from .quadrature import adaptive_doubling, jacobi_halfline, tensor_grid
from .rootsys import Family, RootSystem, weight
from .specialfns import KERNEL_ACC, kummer_m_log, log_gamma


@dataclass(frozen=True)
class QuadratureSettings:
    """Knobs for the kernel-side quadratures."""

    rel_tol: float = 1e-9
    max_doublings: int = 18
    nodes_1d: int = 160          # weighted nodes per axis for mass integrals
    gauss_cutoff_sigmas: float = 14.0  # half-width of Gaussian truncation


def _supports_analytic(sys: RootSystem) -> bool:
    return sys.family is Family.Z2_PRODUCT or float(np.max(sys.multiplicity)) == 0.0


def _axis_multiplicities(sys: RootSystem) -> np.ndarray:
    """Per-axis k_i for the factorized formulas (zeros when k == 0)."""
    if sys.family is Family.Z2_PRODUCT:
        ks = np.zeros(sys.dim)
        for ri, a in enumerate(sys.positive_roots):
            ks[int(np.argmax(np.abs(a)))] = sys.multiplicity[ri]
        return ks
    return np.zeros(sys.dim)


def normalization_c_k_closed(sys: RootSystem) -> float:
    """c_k = prod_i 2^(2 k_i + 1/2) Gamma(k_i + 1/2) for Z2^d.

    Derived from c_k = int e^{-|y|^2/2} w_k(y) dy with
    w_k(y) = prod (sqrt(2)|y_i|)^(2 k_i): each axis contributes
    2^(k_i) * 2^(k_i + 1/2) Gamma(k_i + 1/2).
    """
    ks = _axis_multiplicities(sys)
    log_c = sum((2.0 * k + 0.5) * math.log(2.0) + log_gamma(k + 0.5) for k in ks)
    return math.exp(log_c)


def normalization_c_k_numeric(sys: RootSystem, quad: QuadratureSettings) -> float:
    """c_k by a product of weighted 1-D quadratures (independent route)."""
    ks = _axis_multiplicities(sys)
    total = 1.0
    length = quad.gauss_cutoff_sigmas
    for k in ks:
        n = quad.nodes_1d
        prev = None
        while True:
            s, w = jacobi_halfline(2.0 * k, length, n)
            val = 2.0 * (2.0 ** k) * float(np.sum(np.exp(-0.5 * s * s) * w))
            if prev is not None and abs(val - prev) <= quad.rel_tol * abs(val):
                break
            if n > 4096:
                break
            prev, n = val, n * 2
        total *= val
    return total


class KernelContext:
    """Holds the normalization and quadrature settings for one system.

    Construction validates c_k two ways (Gamma closed form against
    numeric quadrature) and self-checks the t = 1 transition mass from
    the origin; a disagreement beyond 1e-8 aborts, since every kernel
    value scales by 1/c_k.
    """

    def __init__(self, sys: RootSystem, quad: QuadratureSettings | None = None):
        if not _supports_analytic(sys):
            raise CapabilityError(
                "analytic kernels need the axis-product family or k == 0 "
                f"(got {sys.family.value} with max k = {np.max(sys.multiplicity):.3g})")
        self.sys = sys
        self.quad = quad or QuadratureSettings()
        self.axis_k = _axis_multiplicities(sys)
        self.c_k = normalization_c_k_closed(sys)
        numeric = normalization_c_k_numeric(sys, self.quad)
        rel = abs(numeric - self.c_k) / self.c_k
        if rel > 1e-8:
            raise PreconditionError(
                f"normalization cross-check failed: closed form {self.c_k!r} "
                f"vs quadrature {numeric!r} (rel {rel:.2e})")
        mass = transition_mass(self, 1.0, np.zeros(sys.dim))
        if abs(mass - 1.0) > 1e-8:
            raise PreconditionError(
                f"unit-mass self-check failed: P_1 1(0) = {mass!r}")

    def __repr__(self):
        return f"KernelContext({self.sys!r}, c_k={self.c_k:.6g})"


def dunkl_kernel_log(ctx: KernelContext, x, y):
    """log E_k(x, y); y may be a batch (n, d)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    ys = y[None, :] if single else y
    out = ys @ x
    for i, k in enumerate(ctx.axis_k):
        if k > 0:
            out = out + kummer_m_log(k, 2.0 * k + 1.0, -2.0 * x[i] * ys[:, i],
                                     KERNEL_ACC)
    return float(out[0]) if single else out


def dunkl_kernel_z2(ctx: KernelContext, x, y):
    """E_k(x, y) = e^{<x,y>} prod_i M(k_i, 2k_i+1, -2 x_i y_i); positive,
    symmetric in (x, y)."""
    return np.exp(dunkl_kernel_log(ctx, x, y))


def heat_kernel_log(ctx: KernelContext, t: float, x, y):
    """log p_t^k(x, y), stable for small t and separated arguments."""
    if t <= 0:
        raise PreconditionError("heat kernel needs t > 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    ys = y[None, :] if single else y
    sys = ctx.sys
    power = sys.gamma + sys.dim / 2.0
    r2 = np.sum((ys - x) ** 2, axis=1)
    out = -math.log(ctx.c_k) - power * math.log(t) - r2 / (2.0 * t)
    for i, k in enumerate(ctx.axis_k):
        if k > 0:
            out = out + kummer_m_log(k, 2.0 * k + 1.0,
                                     -2.0 * x[i] * ys[:, i] / t, KERNEL_ACC)
    return float(out[0]) if single else out


def heat_kernel(ctx: KernelContext, t: float, x, y):
    """Transition density p_t^k(x, y) of the Dunkl semigroup
    (against the measure w_k(y) dy)."""
    return np.exp(heat_kernel_log(ctx, t, x, y))


def transition_mass(ctx: KernelContext, t: float, x, nodes_per_axis=None) -> float:
    """int p_t^k(x, y) w_k(y) dy by tensor Gauss-Jacobi quadrature.

    Equals 1 for every t and x (semigroup normalization); evaluated
    numerically as a validation target.
    """
    x = np.asarray(x, dtype=float)
    sys = ctx.sys
    n = nodes_per_axis or ctx.quad.nodes_1d
    half = ctx.quad.gauss_cutoff_sigmas * math.sqrt(max(t, 1.0)) + float(np.max(np.abs(x)))
    axes = []
    for k in ctx.axis_k:
        s, w = jacobi_halfline(2.0 * k, half, n)
        nodes = np.concatenate([-s[::-1], s])
        wts = np.concatenate([w[::-1], w]) * (2.0 ** k)
        axes.append((nodes, wts))
    pts, wts = tensor_grid(axes)
    vals = np.exp(heat_kernel_log(ctx, t, x, pts))
    return float(np.sum(vals * wts))


def chapman_kolmogorov_residual(ctx: KernelContext, s: float, t: float,
                                x: float, y: float, nodes=400) -> float:
    """| int p_s(x,z) p_t(z,y) w(z) dz - p_{s+t}(x,y) | for d = 1."""
    sys = ctx.sys
    if sys.dim != 1:
        raise PreconditionError("Chapman-Kolmogorov check implemented for d = 1")
    k = float(ctx.axis_k[0])
    half = (ctx.quad.gauss_cutoff_sigmas * math.sqrt(max(s, t, 1.0))
            + max(abs(x), abs(y)))
    zs, w = jacobi_halfline(2.0 * k, half, nodes)
    z_nodes = np.concatenate([-zs[::-1], zs])
    z_wts = np.concatenate([w[::-1], w]) * (2.0 ** k)
    xa = np.array([x])
    ya = np.array([y])
    p1 = np.exp(heat_kernel_log(ctx, s, xa, z_nodes[:, None]))
    p2 = np.exp(heat_kernel_log(ctx, t, ya, z_nodes[:, None]))
    lhs = float(np.sum(p1 * p2 * z_wts))
    rhs = heat_kernel(ctx, s + t, xa, ya[None, :] * np.ones((1, 1)))
    return abs(lhs - float(rhs))


def green_function(ctx: KernelContext, x, y) -> float:
    """G^k(x, y) = int_0^infty p_t^k(x, y) dt (requires lambda > 0).

    Split at t = 1; the tail substitutes u = 1/t and then grades the
    endpoint with u = v^p so the algebraic decay t^-(lambda+1) poses no
    problem for panel-doubled Gauss-Legendre.  Returns +inf at x = y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if float(np.linalg.norm(x - y)) < 1e-12:
        return math.inf
    lam = ctx.sys.lam
    quad = ctx.quad

    # heat_kernel_log broadcasts over y, not t, so loop over the t nodes
    def head_vec(ts):
        return np.array([math.exp(heat_kernel_log(ctx, float(t), x, y))
                         if t > 0 else 0.0 for t in ts])

    head_val = adaptive_doubling(head_vec, 0.0, 1.0, rel_tol=quad.rel_tol,
                                 max_doublings=quad.max_doublings)

    p = max(1, math.ceil(3.0 / lam))

    def tail_vec(vs):
        out = np.zeros_like(vs)
        for i, v in enumerate(vs):
            if v <= 0:
                continue
            u = v ** p
            t = 1.0 / u
            out[i] = math.exp(heat_kernel_log(ctx, t, x, y)) / (u * u) \
                * p * v ** (p - 1)
        return out

    tail_val = adaptive_doubling(tail_vec, 0.0, 1.0, rel_tol=quad.rel_tol,
                                 max_doublings=quad.max_doublings,
                                 abs_floor=head_val)
    return head_val + tail_val


def occupation_time_ball(sys: RootSystem, r: float, x) -> float:
    """Expected total occupation of B(0, r) started at x (|x| <= r):
    r^2 / (2 lambda) - |x|^2 / (2 lambda + 2)."""
    x = np.asarray(x, dtype=float)
    nx = float(np.linalg.norm(x))
    if nx > r + 1e-12:
        raise PreconditionError(
            f"occupation closed form needs |x| <= r (|x| = {nx:.6g}, r = {r:.6g})")
    lam = sys.lam
    return r * r / (2.0 * lam) - nx * nx / (2.0 * lam + 2.0)
