"""Dunkl operators: exact action on polynomials, numeric action on fields.

The difference-quotient term of T_i is an exact polynomial division:
p - p o sigma_alpha vanishes on the hyperplane <alpha, x> = 0, hence is
divisible by the linear form.  Writing alpha = c * v with a rational
direction v, the scale c cancels inside k(alpha) alpha_i (...)/<alpha, x>,
so the whole term is rational whenever the direction is (true for Z2^d,
A, B and I2(4); other dihedral groups fall back to float coefficients,
flagged by ``exact=False`` on the result).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .domains import Domain
from .errors import SingularityError
from .polynomials import MultivariatePolynomial
from .rootsys import RootSystem


@dataclass
class ScalarField:
    """Black-box scalar field with optional analytic derivatives.

    ``eval`` maps an (n, d) batch to an (n,) array.  ``gradient`` and
    ``laplacian`` (same batching) are optional; when present the Dunkl
    Laplacian uses them instead of finite differences.
    """

    eval: object
    smoothness_region: Domain | None = None
    gradient: object = None
    laplacian: object = None
    name: str = ""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        out = np.asarray(self.eval(x[None, :] if single else x), dtype=float)
        return float(out[0]) if single else out


def _reflection_rows(sys: RootSystem, root_index):
    """Rows of sigma_alpha as exact Fractions (rational direction) or floats."""
    v = sys.rational_directions[root_index]
    d = sys.dim
    if v is not None:
        n2 = sum(c * c for c in v)
        rows = [[(Fraction(1) if i == j else Fraction(0)) - 2 * v[i] * v[j] / n2
                 for j in range(d)] for i in range(d)]
        return rows, v, True
    a = sys.positive_roots[root_index]
    rows = [[(1.0 if i == j else 0.0) - float(a[i] * a[j])
             for j in range(d)] for i in range(d)]
    return rows, tuple(float(c) for c in a), False


def dunkl_t(sys: RootSystem, i: int, p: MultivariatePolynomial) -> MultivariatePolynomial:
    """The Dunkl operator T_i applied to a polynomial (1-based index i).

    T_i p = dp/dx_i + sum_alpha k(alpha) alpha_i (p - p o sigma_alpha) / <alpha, x>.
    """
    if not (1 <= i <= sys.dim):
        raise ValueError(f"coordinate index {i} out of range 1..{sys.dim}")
    if p.dim != sys.dim:
        raise ValueError("polynomial dimension mismatch")
    j = i - 1
    out = p.partial(j)
    for ri in range(len(sys.positive_roots)):
        k = sys.multiplicity[ri]
        if k == 0:
            continue
        rows, v, exact = _reflection_rows(sys, ri)
        reflected = p.compose_linear(rows)
        diff = p - reflected
        if diff.is_zero():
            continue
        quot = diff.divide_by_linear(v)
        coeff = (Fraction(k) * v[j]) if exact else float(k) * v[j]
        out = out + quot * coeff
    return out


def dunkl_laplacian_poly(sys: RootSystem, p: MultivariatePolynomial) -> MultivariatePolynomial:
    """Delta_k p = sum_i T_i (T_i p), exact."""
    out = MultivariatePolynomial(p.dim, {})
    for i in range(1, sys.dim + 1):
        out = out + dunkl_t(sys, i, dunkl_t(sys, i, p))
    return out


def default_step(x) -> float:
    """Finite-difference step h = 1e-4 * max(1, |x|)."""
    return 1e-4 * max(1.0, float(np.linalg.norm(x)))


def dunkl_laplacian_numeric(sys: RootSystem, f, x, h: float | None = None) -> float:
    """Delta_k f(x) for a smooth black-box field via central differences.

    Uses Delta f + 2 sum_alpha k(alpha) [ <grad f, alpha>/<alpha, x>
    - (f(x) - f(sigma_alpha x)) / <alpha, x>^2 ]; the reflection terms
    are exact function evaluations, the local ones are O(h^2) stencils
    (or analytic derivatives when the field provides them).

    Requires x at distance >= 10 h from every hyperplane with k(alpha) > 0.
    """
    x = np.asarray(x, dtype=float)
    d = sys.dim
    if h is None:
        h = default_step(x)
    dists = sys.hyperplane_distances(x)
    for ri, dist in enumerate(dists):
        if sys.multiplicity[ri] > 0 and dist < 10.0 * h:
            raise SingularityError(
                f"point within 10h of hyperplane of root {ri} "
                f"(alpha = {np.round(sys.positive_roots[ri], 6)})",
                root=ri)

    ev = f.eval if isinstance(f, ScalarField) else f
    grad_fn = f.gradient if isinstance(f, ScalarField) else None
    lap_fn = f.laplacian if isinstance(f, ScalarField) else None

    if grad_fn is not None and lap_fn is not None:
        grad = np.asarray(grad_fn(x[None, :]))[0]
        lap = float(np.asarray(lap_fn(x[None, :]))[0])
        fx = float(np.asarray(ev(x[None, :]))[0])
    else:
        stencil = [x]
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            stencil.append(x + e)
            stencil.append(x - e)
        vals = np.asarray(ev(np.array(stencil)), dtype=float)
        fx = vals[0]
        plus, minus = vals[1::2], vals[2::2]
        grad = (plus - minus) / (2.0 * h)
        lap = float(np.sum(plus + minus - 2.0 * fx)) / (h * h)

    refl_pts = np.array([x - (x @ a) * a for a in sys.positive_roots])
    refl_vals = np.asarray(ev(refl_pts), dtype=float)
    proj = sys.projections(x)

    total = lap
    for ri in range(len(sys.positive_roots)):
        k = sys.multiplicity[ri]
        if k == 0:
            continue
        a = sys.positive_roots[ri]
        total += 2.0 * k * (float(grad @ a) / proj[ri]
                            - (fx - refl_vals[ri]) / (proj[ri] ** 2))
    return float(total)


def dunkl_laplacian_numeric_batch(sys: RootSystem, f, pts, h=None):
    """Vectorized finite-difference Delta_k f over a point batch.

    Points within 10h of an active hyperplane are skipped: their value
    is 0 and the returned mask marks them False (callers count them).
    Returns (values (n,), ok_mask (n,)).
    """
    pts = np.asarray(pts, dtype=float)
    n, d = pts.shape
    ev = f.eval if isinstance(f, ScalarField) else f
    if h is None:
        hs = 1e-4 * np.maximum(1.0, np.linalg.norm(pts, axis=1))
    else:
        hs = np.full(n, float(h))

    dists = np.abs(sys.projections(pts)) / np.sqrt(2.0)
    active = sys.multiplicity > 0
    if np.any(active):
        ok = np.all(dists[:, active] >= 10.0 * hs[:, None], axis=1)
    else:
        ok = np.ones(n, dtype=bool)

    stencil = [pts]
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        stencil.append(pts + hs[:, None] * e)
        stencil.append(pts - hs[:, None] * e)
    vals = np.asarray(ev(np.concatenate(stencil, axis=0)), dtype=float)
    vals = vals.reshape(2 * d + 1, n)
    fx = vals[0]
    plus, minus = vals[1::2], vals[2::2]
    grad = (plus - minus) / (2.0 * hs)          # (d, n)
    lap = np.sum(plus + minus - 2.0 * fx, axis=0) / (hs * hs)

    out = lap.copy()
    proj = sys.projections(pts)                 # (n, m)
    for j, a in enumerate(sys.positive_roots):
        k = sys.multiplicity[j]
        if k == 0:
            continue
        refl = pts - np.outer(proj[:, j], a)
        fr = np.asarray(ev(refl), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = 2.0 * k * ((a @ grad) / proj[:, j]
                              - (fx - fr) / proj[:, j] ** 2)
        term = np.where(ok, term, 0.0)
        out += np.nan_to_num(term, nan=0.0, posinf=0.0, neginf=0.0)
    out = np.where(ok, out, 0.0)
    return out, ok


def as_field(fn, smoothness_region=None, name="") -> ScalarField:
    """Wrap a scalar callable f(point) -> float as a vectorized ScalarField."""
    def batched(pts):
        pts = np.asarray(pts, dtype=float)
        return np.array([fn(p) for p in pts], dtype=float)
    return ScalarField(eval=batched, smoothness_region=smoothness_region, name=name)
