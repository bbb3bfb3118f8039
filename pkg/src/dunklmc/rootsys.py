"""Root systems, reflections and the finite reflection group.

Every stored root is rescaled so that |alpha|^2 = 2; all downstream
formulas (drift, jump rates, weight function, operator algebra) assume
this normalization.  A root system carries a nonnegative multiplicity
per positive root, constant on W-orbits, and the derived constants

    gamma  = sum of multiplicities over positive roots,
    lambda = gamma + d/2 - 1   (required to be positive).

Supported families: the axis product Z2^d, type A_{d-1} realized in R^d,
type B_d, the dihedral groups I2(m) in the plane, and explicit custom
root lists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import math

import numpy as np

from .errors import ConfigError, PreconditionError

_ROOT_NORM_TOL = 1e-12
_PARALLEL_TOL = 1e-10
_ORBIT_TOL = 1e-10
_GROUP_CAP_DEFAULT = 4096


class Family(Enum):
    Z2_PRODUCT = "z2_product"
    A_TYPE = "a_type"
    B_TYPE = "b_type"
    DIHEDRAL = "dihedral"
    CUSTOM = "custom"


@dataclass(frozen=True)
class GroupElement:
    """One element of W: an orthogonal matrix plus a word in the
    generating reflections (indices into ``positive_roots``)."""

    matrix: np.ndarray
    word: tuple

    def apply(self, x):
        return np.asarray(x, dtype=float) @ self.matrix.T


class RootSystem:
    """Positive roots, multiplicities and derived data for one group W."""

    def __init__(self, family, dim, positive_roots, multiplicities,
                 dihedral_m=None, group_cap=_GROUP_CAP_DEFAULT,
                 require_transience=True):
        roots = np.array(positive_roots, dtype=float)
        if roots.ndim != 2 or roots.shape[1] != dim:
            raise ConfigError(f"roots must be vectors in R^{dim}")
        mults = np.asarray(multiplicities, dtype=float)
        if mults.shape != (roots.shape[0],):
            raise ConfigError("one multiplicity per positive root required")
        if np.any(mults < 0):
            raise ConfigError("multiplicities must be nonnegative")

        # normalize |alpha|^2 = 2
        norms2 = np.sum(roots * roots, axis=1)
        if np.any(norms2 <= 0):
            raise ConfigError("zero root supplied")
        roots = roots * np.sqrt(2.0 / norms2)[:, None]

        self.family = family
        self.dim = int(dim)
        self.positive_roots = roots
        self.positive_roots.setflags(write=False)
        self.multiplicity = mults
        self.multiplicity.setflags(write=False)
        self.dihedral_m = dihedral_m
        self._group_cap = group_cap
        self._group = None
        self._root_orbits = None

        self.gamma = float(np.sum(mults))
        self.lam = self.gamma + self.dim / 2.0 - 1.0
        # lambda > 0 is the standing transience assumption whenever any
        # multiplicity is positive; k == 0 is the plain Brownian
        # degeneracy and is allowed in every dimension (lambda-dependent
        # closed forms still check lambda themselves).
        # require_transience=False exists only for evaluating closed-form
        # kernels at parameters outside the process regime.
        if require_transience and self.gamma > 0 and not self.lam > 0:
            raise PreconditionError(
                f"lambda = gamma + d/2 - 1 = {self.lam:.6g} must be positive "
                f"(gamma = {self.gamma:.6g}, d = {self.dim})")

        self._check_geometry()
        self.rational_directions = [self._rationalize(a) for a in roots]
        self._check_multiplicity_invariance()

    # -- construction-time checks -------------------------------------

    def _check_geometry(self):
        roots = self.positive_roots
        norms2 = np.sum(roots * roots, axis=1)
        if np.any(np.abs(norms2 - 2.0) > _ROOT_NORM_TOL):
            raise ConfigError("root normalization failed")
        m = len(roots)
        for i in range(m):
            for j in range(i + 1, m):
                c = abs(float(roots[i] @ roots[j])) / 2.0
                if c > 1.0 - _PARALLEL_TOL:
                    raise ConfigError(
                        f"positive roots {i} and {j} are parallel")

    def _check_multiplicity_invariance(self):
        for orbit_ids in self.root_orbits():
            ks = self.multiplicity[list(orbit_ids)]
            if np.max(ks) - np.min(ks) > 1e-12:
                raise PreconditionError(
                    "multiplicity is not W-invariant on root orbit "
                    f"{sorted(orbit_ids)}")

    @staticmethod
    def _rationalize(alpha, max_den=64):
        """Rational direction vector v with alpha parallel to v, or None.

        Exactness of the polynomial operator algebra only needs the
        direction (the scale cancels in every Dunkl term).
        """
        idx = int(np.argmax(np.abs(alpha)))
        scaled = alpha / alpha[idx]
        out = []
        for v in scaled:
            fr = Fraction(float(v)).limit_denominator(max_den)
            if abs(float(fr) - v) > 1e-12:
                return None
            out.append(fr)
        return tuple(out)

    # -- group ----------------------------------------------------------

    def reflection_matrix(self, root_index):
        a = self.positive_roots[root_index]
        return np.eye(self.dim) - np.outer(a, a)  # |a|^2 = 2

    def group(self):
        """The full group W, enumerated once and cached."""
        if self._group is None:
            self._group = _enumerate_group(self)
        return self._group

    def root_orbits(self):
        """Partition of positive-root indices into W-orbits (up to sign)."""
        if self._root_orbits is None:
            self._root_orbits = _root_orbits(self)
        return self._root_orbits

    # -- basic geometry --------------------------------------------------

    def projections(self, x):
        """<alpha, x> for every positive root; x may be (d,) or (n, d)."""
        return np.asarray(x, dtype=float) @ self.positive_roots.T

    def hyperplane_distances(self, x):
        """Euclidean distance from x to each reflection hyperplane."""
        return np.abs(self.projections(x)) / math.sqrt(2.0)

    def __repr__(self):
        return (f"RootSystem({self.family.value}, d={self.dim}, "
                f"m={len(self.positive_roots)}, gamma={self.gamma:.4g}, "
                f"lambda={self.lam:.4g})")


def reflect(x, alpha):
    """Reflection of x across the hyperplane orthogonal to alpha.

    Assumes |alpha|^2 = 2, under which sigma_alpha(x) = x - <x, alpha> alpha.
    Broadcasts over leading axes of x.
    """
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    proj = x @ alpha
    return x - np.multiply.outer(proj, alpha)


def weight(sys: RootSystem, x) -> float | np.ndarray:
    """W-invariant weight w_k(x) = prod |<x, alpha>|^(2 k(alpha))."""
    x = np.asarray(x, dtype=float)
    proj = np.abs(sys.projections(x))
    k = sys.multiplicity
    if np.all(k == 0):
        return np.ones(proj.shape[:-1]) if proj.ndim > 1 else 1.0
    with np.errstate(divide="ignore"):
        logs = np.where(proj > 0, np.log(np.where(proj > 0, proj, 1.0)), -np.inf)
        s = logs @ (2.0 * k)
    out = np.exp(s)
    out = np.where(np.isneginf(s), 0.0, out)
    return float(out) if out.ndim == 0 else out


def _enumerate_group(sys: RootSystem):
    gens = [sys.reflection_matrix(i) for i in range(len(sys.positive_roots))]
    d = sys.dim

    def key(mat):
        # + 0.0 collapses -0.0 and +0.0 to one byte pattern
        return (np.round(mat, 9) + 0.0).tobytes()

    ident = np.eye(d)
    seen = {key(ident): GroupElement(_frozen(ident), ())}
    frontier = [seen[key(ident)]]
    while frontier:
        new_frontier = []
        for g in frontier:
            for gi, gen in enumerate(gens):
                mat = gen @ g.matrix
                kk = key(mat)
                if kk not in seen:
                    if len(seen) >= sys._group_cap:
                        raise ConfigError(
                            "reflection group closure exceeded cap "
                            f"{sys._group_cap}; the supplied roots do not "
                            "generate a (small) finite group")
                    el = GroupElement(_frozen(mat), (gi,) + g.word)
                    seen[kk] = el
                    new_frontier.append(el)
        frontier = new_frontier
    elements = list(seen.values())
    for el in elements:
        err = np.max(np.abs(el.matrix @ el.matrix.T - np.eye(d)))
        if err > 1e-12:
            raise ConfigError("group element drifted from orthogonality")
    return elements


def _frozen(mat):
    m = np.array(mat, dtype=float)
    m.setflags(write=False)
    return m


def _root_orbits(sys: RootSystem):
    """Orbits of the positive roots under W, identifying alpha with -alpha."""
    roots = sys.positive_roots
    m = len(roots)
    group = sys.group()
    assigned = [-1] * m
    orbits = []
    for i in range(m):
        if assigned[i] >= 0:
            continue
        orbit = set()
        for g in group:
            img = g.matrix @ roots[i]
            for j in range(m):
                if (np.linalg.norm(img - roots[j]) < 1e-9
                        or np.linalg.norm(img + roots[j]) < 1e-9):
                    orbit.add(j)
                    break
        oid = len(orbits)
        for j in orbit:
            assigned[j] = oid
        orbits.append(frozenset(orbit))
    return orbits


def enumerate_group(sys: RootSystem):
    """All elements of W (closure of the generating reflections)."""
    return sys.group()


def orbit(sys: RootSystem, x):
    """The W-orbit of a point, duplicates merged at tolerance 1e-10."""
    x = np.asarray(x, dtype=float)
    pts = []
    for g in sys.group():
        y = g.matrix @ x
        if not any(np.linalg.norm(y - p) <= _ORBIT_TOL for p in pts):
            pts.append(y)
    return pts


def _orbit_counts(family, dim, dihedral_m):
    if family is Family.Z2_PRODUCT:
        return dim
    if family is Family.A_TYPE:
        return 1
    if family is Family.B_TYPE:
        return 2
    if family is Family.DIHEDRAL:
        return 1 if dihedral_m % 2 == 1 else 2
    raise ConfigError(f"unknown orbit count for family {family}")


def build_root_system(family, dim, multiplicities, dihedral_m=None,
                      custom_roots=None, custom_multiplicities=None,
                      group_cap=_GROUP_CAP_DEFAULT) -> RootSystem:
    """Construct a root system for one of the supported families.

    ``multiplicities`` carries one value per root orbit of the family
    (Z2^d: d values, one per axis; A: one; B: two, short-axis orbit first;
    dihedral: one for odd m, two for even m alternating with the root at
    angle 90 degrees first).  CUSTOM takes explicit roots with one
    multiplicity per root, validated for W-invariance.
    """
    if isinstance(family, str):
        try:
            family = Family(family.lower())
        except ValueError:
            raise ConfigError(f"unknown family '{family}'") from None
    if dim < 1:
        raise ConfigError("dim must be >= 1")
    mults = list(multiplicities) if multiplicities is not None else []

    if family is Family.CUSTOM:
        if custom_roots is None:
            raise ConfigError("CUSTOM family requires explicit roots")
        roots = np.array(custom_roots, dtype=float)
        per_root = (np.asarray(custom_multiplicities, dtype=float)
                    if custom_multiplicities is not None
                    else np.asarray(mults, dtype=float))
        if per_root.shape != (len(roots),):
            raise ConfigError("CUSTOM needs one multiplicity per root")
        return RootSystem(family, dim, roots, per_root, group_cap=group_cap)

    expected = _orbit_counts(family, dim, dihedral_m or 0) \
        if family is not Family.DIHEDRAL else None
    if family is Family.DIHEDRAL:
        if dim != 2:
            raise ConfigError("dihedral systems live in dimension 2")
        if dihedral_m is None or dihedral_m < 2:
            raise ConfigError("dihedral family needs m >= 2")
        expected = _orbit_counts(family, dim, dihedral_m)
    if len(mults) != expected:
        raise ConfigError(
            f"family {family.value} in dimension {dim} has {expected} root "
            f"orbit(s); got {len(mults)} multiplicities")

    if family is Family.Z2_PRODUCT:
        roots = np.eye(dim)
        per_root = np.asarray(mults, dtype=float)
    elif family is Family.A_TYPE:
        if dim < 2:
            raise ConfigError("A-type needs dim >= 2")
        roots = []
        for i in range(dim):
            for j in range(i + 1, dim):
                v = np.zeros(dim)
                v[i], v[j] = 1.0, -1.0
                roots.append(v)
        roots = np.array(roots)
        per_root = np.full(len(roots), mults[0], dtype=float)
    elif family is Family.B_TYPE:
        if dim < 2:
            raise ConfigError("B-type needs dim >= 2")
        short = [np.eye(dim)[i] for i in range(dim)]
        long_roots = []
        for i in range(dim):
            for j in range(i + 1, dim):
                for s in (1.0, -1.0):
                    v = np.zeros(dim)
                    v[i], v[j] = 1.0, s
                    long_roots.append(v)
        roots = np.array(short + long_roots)
        per_root = np.array([mults[0]] * dim + [mults[1]] * len(long_roots))
    elif family is Family.DIHEDRAL:
        m = dihedral_m
        roots = []
        for j in range(m):
            th = j * math.pi / m
            roots.append([math.sin(th), -math.cos(th)])
        roots = np.array(roots)
        if m % 2 == 1:
            per_root = np.full(m, mults[0], dtype=float)
        else:
            per_root = np.array([mults[j % 2] for j in range(m)])
    else:  # pragma: no cover
        raise ConfigError(f"unsupported family {family}")

    return RootSystem(family, dim, roots, per_root,
                      dihedral_m=dihedral_m, group_cap=group_cap)
