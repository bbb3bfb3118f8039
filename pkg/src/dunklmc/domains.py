"""Bounded open domains and the exit-support set Gamma_D.

Built-in shapes (ball, annulus, axis-aligned box) expose exact open-set
membership, distance to the closure and interior distance to the
boundary, all vectorized over point batches.  CUSTOM wraps a membership
predicate plus a bounding radius; its closure handling is approximate
(predicate padded by the tolerance), which is the best an arbitrary
predicate admits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np

from .errors import ConfigError
from .rootsys import RootSystem

# integer codes shared with the numba stepping kernels
DOM_NONE, DOM_BALL, DOM_ANNULUS, DOM_BOX = 0, 1, 2, 3


class DomainKind(Enum):
    BALL = "ball"
    ANNULUS = "annulus"
    AXIS_BOX = "box"
    CUSTOM = "custom"


@dataclass
class Domain:
    kind: DomainKind
    dim: int
    center: np.ndarray | None = None
    radius: float | None = None
    r_inner: float | None = None
    r_outer: float | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    predicate: object = None
    bounding_radius: float = 0.0
    w_invariant_declared: bool | None = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def ball(cls, center, radius):
        center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise ConfigError("ball radius must be positive")
        return cls(DomainKind.BALL, len(center), center=center, radius=float(radius),
                   bounding_radius=float(np.linalg.norm(center)) + float(radius))

    @classmethod
    def annulus(cls, r_inner, r_outer, dim=2):
        if not (0 < r_inner < r_outer):
            raise ConfigError("annulus needs 0 < r_inner < r_outer")
        return cls(DomainKind.ANNULUS, dim, r_inner=float(r_inner),
                   r_outer=float(r_outer), bounding_radius=float(r_outer))

    @classmethod
    def box(cls, lo, hi):
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ConfigError("box needs lo < hi componentwise")
        return cls(DomainKind.AXIS_BOX, len(lo), lo=lo, hi=hi,
                   bounding_radius=float(np.max(np.linalg.norm([lo, hi], axis=1))))

    @classmethod
    def custom(cls, predicate, dim, bounding_radius, w_invariant=False):
        if bounding_radius <= 0:
            raise ConfigError("custom domain needs a positive bounding radius")
        return cls(DomainKind.CUSTOM, dim, predicate=predicate,
                   bounding_radius=float(bounding_radius),
                   w_invariant_declared=bool(w_invariant))

    # -- geometry -----------------------------------------------------------

    def contains(self, x):
        """Open-set membership, vectorized; returns bool or bool array."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if self.kind is DomainKind.BALL:
            out = np.linalg.norm(pts - self.center, axis=1) < self.radius
        elif self.kind is DomainKind.ANNULUS:
            r = np.linalg.norm(pts, axis=1)
            out = (r > self.r_inner) & (r < self.r_outer)
        elif self.kind is DomainKind.AXIS_BOX:
            out = np.all((pts > self.lo) & (pts < self.hi), axis=1)
        else:
            out = np.array([bool(self.predicate(p)) for p in pts])
        return bool(out[0]) if single else out

    def distance_outside(self, x):
        """Distance from x to the closure of the domain (0 inside / on it)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if self.kind is DomainKind.BALL:
            out = np.maximum(
                np.linalg.norm(pts - self.center, axis=1) - self.radius, 0.0)
        elif self.kind is DomainKind.ANNULUS:
            r = np.linalg.norm(pts, axis=1)
            out = np.maximum(np.maximum(self.r_inner - r, r - self.r_outer), 0.0)
        elif self.kind is DomainKind.AXIS_BOX:
            excess = np.maximum(np.maximum(self.lo - pts, pts - self.hi), 0.0)
            out = np.linalg.norm(excess, axis=1)
        else:
            # padded predicate: distance is 0 if the predicate holds at the
            # point or at a small axis probe around it, else "far"
            out = np.empty(pts.shape[0])
            for i, p in enumerate(pts):
                out[i] = 0.0 if self.predicate(p) else np.inf
        return float(out[0]) if single else out

    def boundary_distance_inside(self, x):
        """Distance from an interior point to the boundary (clipped at 0)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if self.kind is DomainKind.BALL:
            out = np.maximum(
                self.radius - np.linalg.norm(pts - self.center, axis=1), 0.0)
        elif self.kind is DomainKind.ANNULUS:
            r = np.linalg.norm(pts, axis=1)
            out = np.maximum(np.minimum(r - self.r_inner, self.r_outer - r), 0.0)
        elif self.kind is DomainKind.AXIS_BOX:
            out = np.maximum(
                np.min(np.minimum(pts - self.lo, self.hi - pts), axis=1), 0.0)
        else:
            out = np.zeros(pts.shape[0])  # no metric information
        return float(out[0]) if single else out

    def boundary_distance_abs(self, x):
        """|distance to the boundary| from either side (built-ins only)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        if self.kind is DomainKind.BALL:
            out = np.abs(np.linalg.norm(pts - self.center, axis=1) - self.radius)
        elif self.kind is DomainKind.ANNULUS:
            r = np.linalg.norm(pts, axis=1)
            out = np.minimum(np.abs(r - self.r_inner), np.abs(r - self.r_outer))
        elif self.kind is DomainKind.AXIS_BOX:
            inside = self.boundary_distance_inside(pts)
            outside = self.distance_outside(pts)
            out = np.where(inside > 0, inside, outside)
        else:
            raise ConfigError("boundary distance unavailable for CUSTOM domains")
        return float(out[0]) if single else out

    def encode(self):
        """(code, params) pair consumed by the numba stepping kernels."""
        if self.kind is DomainKind.BALL:
            return DOM_BALL, np.concatenate([self.center, [self.radius]])
        if self.kind is DomainKind.ANNULUS:
            return DOM_ANNULUS, np.array([self.r_inner, self.r_outer], dtype=float)
        if self.kind is DomainKind.AXIS_BOX:
            return DOM_BOX, np.concatenate([self.lo, self.hi])
        raise ConfigError("CUSTOM domains cannot run on the compiled driver")

    def w_invariant(self, sys: RootSystem) -> bool:
        """Whether the domain coincides with its W-image.

        Exact for balls and annuli (orbit of the center) and for boxes
        under signed-permutation elements; CUSTOM uses the declared flag.
        """
        if self.kind is DomainKind.CUSTOM:
            return bool(self.w_invariant_declared)
        if self.kind is DomainKind.ANNULUS:
            return True  # centered and radial
        if self.kind is DomainKind.BALL:
            return all(np.linalg.norm(g.matrix @ self.center - self.center) < 1e-12
                       for g in sys.group())
        # box: w maps it to a box iff w is a signed permutation; compare
        # the transformed interval product with the original
        for g in sys.group():
            m = g.matrix
            if not np.all(np.isin(np.round(np.abs(m), 12), (0.0, 1.0))):
                return False
            corners = np.stack([self.lo, self.hi])
            lo2 = np.minimum(m @ corners[0], m @ corners[1])
            hi2 = np.maximum(m @ corners[0], m @ corners[1])
            if (np.max(np.abs(lo2 - self.lo)) > 1e-12
                    or np.max(np.abs(hi2 - self.hi)) > 1e-12):
                return False
        return True


@dataclass
class GammaD:
    """closure(W . D) \\ D, the set carrying every exit distribution."""

    sys: RootSystem
    domain: Domain
    tol: float = 1e-9

    def membership(self, y, tol=None) -> bool:
        """True iff some w in W puts w.y within ``tol`` of closure(D)
        while y itself is outside the open set D."""
        tol = self.tol if tol is None else tol
        y = np.asarray(y, dtype=float)
        if self.domain.contains(y):
            return False
        for g in self.sys.group():
            if self.domain.distance_outside(g.matrix @ y) <= tol:
                return True
        return False

    def membership_fraction(self, pts, tol=None) -> float:
        """Fraction of a point batch lying in Gamma_D at tolerance tol."""
        tol = self.tol if tol is None else tol
        pts = np.asarray(pts, dtype=float)
        inside = self.domain.contains(pts)
        ok = np.zeros(len(pts), dtype=bool)
        for g in self.sys.group():
            ok |= self.domain.distance_outside(pts @ g.matrix.T) <= tol
        return float(np.mean(ok & ~inside))
