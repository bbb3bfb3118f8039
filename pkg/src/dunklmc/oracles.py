"""Catalog of reference solutions with independent certificates.

Entries are either exactly certified (polynomials annihilated by the
exact operator algebra) or self-tested numerically at registration
(|Delta_k field| small relative to the local field scale on a random
grid).  Nothing here touches the simulation or estimation modules, so
every reference stays independent of the code paths it validates.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .algebra import ScalarField, dunkl_laplacian_numeric_batch, dunkl_laplacian_poly
from .domains import Domain
from .errors import InternalInvariantError, PreconditionError
from .fields import coordinate_field, g_lambda_field, product_field
from .polynomials import MultivariatePolynomial
from .rootsys import Family, RootSystem


@dataclass
class ReferenceSolution:
    name: str
    field: ScalarField
    valid_region: Domain
    applicable_families: tuple
    provenance: str
    local_scale: object = None   # callable pts -> scale for tolerance

    def self_test(self, sys: RootSystem, n_points: int = 100, seed: int = 7,
                  rel_tol: float = 1e-4):
        """|Delta_k field| <= rel_tol * local_scale on a random sample of
        the valid region, off the hyperplane arrangement."""
        pts = _sample_region(sys, self.valid_region, n_points, seed)
        vals, ok = dunkl_laplacian_numeric_batch(sys, self.field, pts)
        pts, vals = pts[ok], vals[ok]
        scale = (np.asarray(self.local_scale(pts), dtype=float)
                 if self.local_scale is not None else np.ones(len(pts)))
        worst = float(np.max(np.abs(vals) / scale))
        if worst > rel_tol:
            raise InternalInvariantError(
                f"reference '{self.name}' failed its harmonicity self-test "
                f"(worst residual {worst:.3e} > {rel_tol})")
        return worst


def _sample_region(sys, region: Domain, n, seed):
    gen = np.random.default_rng(seed)
    out = []
    guard = 0
    while len(out) < n:
        guard += 1
        if guard > 200 * n:
            raise PreconditionError("could not sample the valid region")
        p = gen.uniform(-region.bounding_radius, region.bounding_radius,
                        size=region.dim)
        if not region.contains(p):
            continue
        h = 1e-4 * max(1.0, float(np.linalg.norm(p)))
        dists = sys.hyperplane_distances(p)
        if np.any((sys.multiplicity > 0) & (dists < 20.0 * h)):
            continue
        out.append(p)
    return np.array(out)


def reference_g(sys: RootSystem, run_self_test: bool = True) -> ReferenceSolution:
    """g(x) = |x|^(-2 lambda): Delta_k-harmonic away from the origin,
    the barrier behind regularity of centered balls and annuli."""
    if sys.lam <= 0:
        raise PreconditionError("reference g needs lambda > 0")
    lam = sys.lam
    ref = ReferenceSolution(
        name="inverse_power_barrier",
        field=g_lambda_field(sys),
        valid_region=Domain.annulus(0.3, 2.5, dim=sys.dim),
        applicable_families=tuple(f.value for f in Family),
        provenance="radial barrier |x|^(-2 lambda)",
        local_scale=lambda pts: np.linalg.norm(pts, axis=1) ** (-2.0 * lam - 2.0))
    if run_self_test:
        ref.self_test(sys)
    return ref


def barrier_u(sys: RootSystem, R: float) -> ScalarField:
    """u(x) = g(x) - R^(-2 lambda): positive in B(0,R) \\ {0}, zero on |x| = R."""
    g = g_lambda_field(sys)
    shift = R ** (-2.0 * sys.lam)
    return ScalarField(
        eval=lambda pts: np.asarray(g.eval(pts)) - shift,
        gradient=g.gradient, laplacian=g.laplacian,
        name=f"barrier_u(R={R})")


def reference_harmonic_polys(sys: RootSystem):
    """{x_i} and {x_i x_j, i != j} for the axis product, with exact-zero
    certificates from the polynomial operator algebra."""
    if sys.family is not Family.Z2_PRODUCT:
        raise PreconditionError("harmonic polynomial catalog is Z2^d-only")
    d = sys.dim
    out = []
    candidates = []
    for i in range(d):
        candidates.append((f"x{i+1}", MultivariatePolynomial.variable(i, d),
                           coordinate_field(i + 1, d)))
    for i in range(d):
        for j in range(i + 1, d):
            p = (MultivariatePolynomial.variable(i, d)
                 * MultivariatePolynomial.variable(j, d))
            candidates.append((f"x{i+1}x{j+1}", p, product_field(i + 1, j + 1, d)))
    for name, poly, fld in candidates:
        image = dunkl_laplacian_poly(sys, poly)
        if not image.is_zero():
            raise InternalInvariantError(
                f"exact certificate failed: Delta_k {name} = {image!r}")
        out.append(ReferenceSolution(
            name=name, field=fld,
            valid_region=Domain.ball(np.zeros(d), 2.0),
            applicable_families=(Family.Z2_PRODUCT.value,),
            provenance="exact polynomial certificate",
            local_scale=lambda pts: np.ones(len(pts))))
    return out


def certify_not_harmonic(sys: RootSystem, poly: MultivariatePolynomial) -> bool:
    """True when the exact algebra shows Delta_k poly != 0 (used to keep
    wrong candidates out of the catalog)."""
    return not dunkl_laplacian_poly(sys, poly).is_zero()


def brownian_reference(d: int, r: float, x) -> float:
    """Classical expected exit time (r^2 - |x|^2)/d of B(0, r) for the
    (1/2) Laplacian generator (the k == 0 degeneracy check)."""
    nx = float(np.linalg.norm(np.asarray(x, dtype=float)))
    if nx >= r:
        return 0.0
    return (r * r - nx * nx) / float(d)
