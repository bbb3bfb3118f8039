"""Ready-made smooth fields used by checks and as boundary data.

All fields are vectorized ((n, d) -> (n,)) and, where cheap, carry
analytic gradient and Laplacian so checks can bypass finite differences.
"""

from __future__ import annotations

import numpy as np

from .algebra import ScalarField
from .rootsys import RootSystem


def constant_field(c: float, dim: int) -> ScalarField:
    return ScalarField(
        eval=lambda pts: np.full(len(pts), float(c)),
        gradient=lambda pts: np.zeros((len(pts), dim)),
        laplacian=lambda pts: np.zeros(len(pts)),
        name=f"const({c})")


def coordinate_field(i: int, dim: int) -> ScalarField:
    """x_i with 1-based index (Delta_k-harmonic for the axis product)."""
    if not 1 <= i <= dim:
        raise ValueError("coordinate index out of range")
    e = np.zeros(dim)
    e[i - 1] = 1.0

    return ScalarField(
        eval=lambda pts: np.asarray(pts)[:, i - 1].astype(float),
        gradient=lambda pts: np.tile(e, (len(pts), 1)),
        laplacian=lambda pts: np.zeros(len(pts)),
        name=f"coord({i})")


def product_field(i: int, j: int, dim: int) -> ScalarField:
    """x_i x_j, i != j (1-based)."""
    if i == j:
        raise ValueError("product field needs distinct indices")

    def grad(pts):
        pts = np.asarray(pts, dtype=float)
        g = np.zeros_like(pts)
        g[:, i - 1] = pts[:, j - 1]
        g[:, j - 1] = pts[:, i - 1]
        return g

    return ScalarField(
        eval=lambda pts: np.asarray(pts)[:, i - 1] * np.asarray(pts)[:, j - 1],
        gradient=grad,
        laplacian=lambda pts: np.zeros(len(pts)),
        name=f"product({i},{j})")


def g_lambda_field(sys: RootSystem) -> ScalarField:
    """g(x) = |x|^(-2 lambda), Delta_k-harmonic away from the origin."""
    lam = sys.lam
    d = sys.dim

    def ev(pts):
        r = np.linalg.norm(np.asarray(pts, dtype=float), axis=1)
        return r ** (-2.0 * lam)

    def grad(pts):
        pts = np.asarray(pts, dtype=float)
        r2 = np.sum(pts * pts, axis=1)
        return -2.0 * lam * (r2 ** (-lam - 1.0))[:, None] * pts

    def lap(pts):
        r = np.linalg.norm(np.asarray(pts, dtype=float), axis=1)
        return 2.0 * lam * (2.0 * lam + 2.0 - d) * r ** (-2.0 * lam - 2.0)

    return ScalarField(eval=ev, gradient=grad, laplacian=lap,
                       name=f"g_lambda(lam={lam:.4g})")


def squared_norm_field(dim: int) -> ScalarField:
    return ScalarField(
        eval=lambda pts: np.sum(np.asarray(pts, dtype=float) ** 2, axis=1),
        gradient=lambda pts: 2.0 * np.asarray(pts, dtype=float),
        laplacian=lambda pts: np.full(len(pts), 2.0 * dim),
        name="sq_norm")


def truncated_squared_norm(dim: int, r_flat: float, r_zero: float) -> ScalarField:
    """|x|^2 inside |x| <= r_flat, smoothly cut to 0 by |x| = r_zero.

    The cutoff is the C^2 smootherstep 6u^5 - 15u^4 + 10u^3, so the
    field is compactly supported and C^2 on all of R^d.
    """
    if not 0 < r_flat < r_zero:
        raise ValueError("need 0 < r_flat < r_zero")
    width = r_zero - r_flat

    def pieces(r):
        u = np.clip((r - r_flat) / width, 0.0, 1.0)
        s = ((6.0 * u - 15.0) * u + 10.0) * u ** 3
        ds = (30.0 * u ** 2 * (u - 1.0) ** 2) / width
        d2s = (60.0 * u * (u - 1.0) * (2.0 * u - 1.0)) / width ** 2
        c = 1.0 - s
        return c, -ds, -d2s

    def radial(r):
        c, dc, d2c = pieces(r)
        F = r * r * c
        dF = 2.0 * r * c + r * r * dc
        d2F = 2.0 * c + 4.0 * r * dc + r * r * d2c
        return F, dF, d2F

    def ev(pts):
        r = np.linalg.norm(np.asarray(pts, dtype=float), axis=1)
        return radial(r)[0]

    def grad(pts):
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts, axis=1)
        _, dF, _ = radial(r)
        safe = np.where(r > 0, r, 1.0)
        return (dF / safe)[:, None] * pts

    def lap(pts):
        pts = np.asarray(pts, dtype=float)
        r = np.linalg.norm(pts, axis=1)
        _, dF, d2F = radial(r)
        out = np.where(r > 0, d2F + (dim - 1) * dF / np.where(r > 0, r, 1.0),
                       2.0 * dim)
        return out

    return ScalarField(eval=ev, gradient=grad, laplacian=lap,
                       name=f"trunc_sq_norm({r_flat},{r_zero})")


def poly_bump_1d(a: float, b: float) -> ScalarField:
    """C^2 bump (1 - u^2)^3 supported on (a, b) in one dimension."""
    if not a < b:
        raise ValueError("need a < b")
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)

    def uu(pts):
        return (np.asarray(pts, dtype=float)[:, 0] - mid) / half

    def ev(pts):
        u = uu(pts)
        v = np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 3, 0.0)
        return v

    def grad(pts):
        u = uu(pts)
        g = np.where(np.abs(u) < 1.0,
                     -6.0 * u * (1.0 - u * u) ** 2 / half, 0.0)
        return g[:, None]

    def lap(pts):
        u = uu(pts)
        w = 1.0 - u * u
        val = np.where(np.abs(u) < 1.0,
                       (-6.0 * w * w + 24.0 * u * u * w) / (half * half), 0.0)
        return val

    f = ScalarField(eval=ev, gradient=grad, laplacian=lap,
                    name=f"bump[{a},{b}]")
    return f


def dunkl_laplacian_field_1d(sys: RootSystem, f: ScalarField, xs) -> np.ndarray:
    """Delta_k f on a 1-D batch from the field's analytic derivatives.

    Delta_k f(x) = f''(x) + 2k (f'(x)/x - (f(x) - f(-x)) / (2 x^2)).
    Callers keep nodes away from x = 0 unless the field vanishes there.
    """
    if sys.dim != 1:
        raise ValueError("1-D helper")
    k = float(sys.multiplicity[0]) if len(sys.multiplicity) else 0.0
    xs = np.asarray(xs, dtype=float).reshape(-1, 1)
    fx = np.asarray(f.eval(xs), dtype=float)
    fneg = np.asarray(f.eval(-xs), dtype=float)
    g = np.asarray(f.gradient(xs), dtype=float)[:, 0]
    lap = np.asarray(f.laplacian(xs), dtype=float)
    x = xs[:, 0]
    if k == 0:
        return lap
    return lap + 2.0 * k * (g / x - (fx - fneg) / (2.0 * x * x))
