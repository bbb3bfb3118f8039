"""Harmonic-measure estimation, the Dirichlet solver and the
probabilistic identity checks (support, tower, Dynkin, mean value,
maximum principle, boundary regularity, duality).

All estimators are plain Monte Carlo over independent exit samples;
standard errors are reported alongside every estimate and acceptance
tolerances are of the form 3 x stderr + declared discretization margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import __version__ as _pkg_version
from . import rng
from ._stepping import ST_EXITED
from .algebra import ScalarField, dunkl_laplacian_numeric_batch
from .domains import Domain, DomainKind, GammaD
from .errors import ConfigError, DataError, PreconditionError
from .fields import dunkl_laplacian_field_1d
from .process import BatchResult, SimConfig, run_paths, run_paths_integrate
from .quadrature import jacobi_halfline
from .rootsys import RootSystem, weight


@dataclass
class HarmonicMeasureEstimate:
    """Empirical exit distribution from n independent paths."""

    base_point: np.ndarray
    exit_points: np.ndarray     # (n, d)
    exit_times: np.ndarray      # (n,)
    exited_by_jump: np.ndarray  # (n,) bool
    seed: int
    stream_id: int

    @property
    def n(self):
        return len(self.exit_times)

    @property
    def samples(self):
        from .process import ExitRecord
        return [ExitRecord(exit_point=self.exit_points[i],
                           exit_time=float(self.exit_times[i]),
                           exited_by_jump=bool(self.exited_by_jump[i]),
                           path_seed_index=i)
                for i in range(self.n)]


@dataclass
class SolveReport:
    """Dirichlet estimates at a batch of interior points."""

    points: np.ndarray
    estimates: np.ndarray
    std_errors: np.ndarray
    n_paths: int
    seed: int
    dt_base: float
    w_invariant_domain: bool
    uniqueness_guaranteed: bool
    f_min: float                 # range of boundary data over used samples
    f_max: float
    jump_exit_fraction: np.ndarray
    version: str = _pkg_version

    def config_echo(self):
        return {"seed": self.seed, "dt_base": self.dt_base,
                "paths": self.n_paths, "version": self.version}


def harmonic_measure(sys: RootSystem, domain: Domain, x, cfg: SimConfig,
                     stream_id: int = 0) -> HarmonicMeasureEstimate:
    """Simulate cfg.paths exits from the domain started at interior x."""
    x = np.asarray(x, dtype=float)
    if not domain.contains(x):
        raise PreconditionError(
            f"harmonic measure needs an interior start point; {x.tolist()} "
            "is not in the open domain")
    res = run_paths(sys, cfg, x, domain=domain, stream_id=stream_id)
    if not np.all(res.status == ST_EXITED):
        raise PreconditionError("some paths failed to exit")
    return HarmonicMeasureEstimate(
        base_point=x, exit_points=res.positions, exit_times=res.clocks,
        exited_by_jump=res.exited_by_jump, seed=cfg.seed, stream_id=stream_id)


def estimate_boundary_functional(est: HarmonicMeasureEstimate, f):
    """(mean, stderr) of f over the exit sample; f maps (n, d) -> (n,)."""
    vals = np.asarray(f(est.exit_points), dtype=float)
    if vals.shape != (est.n,):
        raise DataError("boundary data must return one value per exit point")
    if not np.all(np.isfinite(vals)):
        bad = est.exit_points[int(np.argmax(~np.isfinite(vals)))]
        raise DataError(f"boundary data not evaluable at exit point {bad.tolist()}")
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(est.n)) if est.n > 1 else 0.0
    return mean, se


def solve_dirichlet(sys: RootSystem, domain: Domain, f, points,
                    cfg: SimConfig, stream_base: int = 0) -> SolveReport:
    """h(x) = E^x[f(X_tau)] at each requested interior point.

    For W-invariant regular domains this estimates the unique solution
    of the Dirichlet problem; otherwise the report's
    ``uniqueness_guaranteed`` flag is False (the estimator is still the
    exit average, but the uniqueness theorem does not apply).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ests, ses, jfracs = [], [], []
    f_min, f_max = math.inf, -math.inf
    fn = f.eval if isinstance(f, ScalarField) else f
    for i, x in enumerate(points):
        est = harmonic_measure(sys, domain, x, cfg, stream_id=stream_base + i)
        vals = np.asarray(fn(est.exit_points), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = est.exit_points[int(np.argmax(~np.isfinite(vals)))]
            raise DataError(f"boundary data not evaluable at {bad.tolist()}")
        ests.append(float(np.mean(vals)))
        ses.append(float(np.std(vals, ddof=1) / math.sqrt(est.n))
                   if est.n > 1 else 0.0)
        jfracs.append(float(np.mean(est.exited_by_jump)))
        f_min = min(f_min, float(np.min(vals)))
        f_max = max(f_max, float(np.max(vals)))
    w_inv = domain.w_invariant(sys)
    return SolveReport(points=points, estimates=np.array(ests),
                       std_errors=np.array(ses), n_paths=cfg.paths,
                       seed=cfg.seed, dt_base=cfg.dt_base,
                       w_invariant_domain=w_inv,
                       uniqueness_guaranteed=w_inv,
                       f_min=f_min, f_max=f_max,
                       jump_exit_fraction=np.array(jfracs))


def gamma_d_membership(sys: RootSystem, domain: Domain, y, tol: float = 1e-9) -> bool:
    """True iff y lies in closure(W.D) \\ D, at tolerance tol."""
    return GammaD(sys, domain, tol).membership(y)


def support_check(sys: RootSystem, domain: Domain,
                  est: HarmonicMeasureEstimate, tol: float) -> float:
    """Fraction of exit samples inside Gamma_D at tolerance tol.

    The support theorem predicts fraction 1 up to discretization
    overshoot of diffusive exits (jump exits are exact reflections).
    """
    if est.n == 0:
        raise DataError("support check needs a nonempty sample")
    return GammaD(sys, domain, tol).membership_fraction(est.exit_points, tol)


def calibrated_support_tol(cfg: SimConfig) -> float:
    """Overshoot tolerance for diffusive exit points.

    Without boundary refinement the 99.9 % overshoot quantile sits at
    about 3 sqrt(dt_base) (pilot-calibrated on the shipped ball runs);
    refinement shrinks the typical crossing step but rare crossings from
    the unrefined band still scale with sqrt(dt_base), so the refined
    tolerance is sqrt(dt_base) with comfortable margin.
    """
    if cfg.boundary_refine:
        return math.sqrt(cfg.dt_base)
    return 4.0 * math.sqrt(cfg.dt_base)


def mean_value_check(sys: RootSystem, h: ScalarField, U: Domain, x,
                     cfg: SimConfig, stream_id: int = 0):
    """|MC estimate of H_U h(x) - h(x)| with its standard error."""
    est = harmonic_measure(sys, U, x, cfg, stream_id=stream_id)
    mean, se = estimate_boundary_functional(est, h.eval)
    hx = float(h(np.asarray(x, dtype=float)))
    return abs(mean - hx), se


def tower_check(sys: RootSystem, D: Domain, V: Domain, f, x,
                cfg: SimConfig, stream_base: int = 0):
    """Residual of H_V H_D = H_D at x in V (strong Markov property).

    Two-stage estimate: exit V, restart each path where it landed and
    exit D; compared against the direct one-stage estimate.
    Returns (residual, combined_stderr).
    """
    _require_compactly_inside(V, D)
    x = np.asarray(x, dtype=float)
    if not V.contains(x):
        raise PreconditionError("x must lie in V")
    fn = f.eval if isinstance(f, ScalarField) else f

    one = harmonic_measure(sys, D, x, cfg, stream_id=stream_base)
    m1, se1 = estimate_boundary_functional(one, fn)

    stage1 = harmonic_measure(sys, V, x, cfg, stream_id=stream_base + 1)
    zs = stage1.exit_points
    inside = D.contains(zs)
    vals = np.empty(stage1.n)
    if np.any(~inside):
        vals[~inside] = np.asarray(fn(zs[~inside]), dtype=float)
    if np.any(inside):
        res = run_paths(sys, replace(cfg, paths=int(np.sum(inside))),
                        zs[inside], domain=D, stream_id=stream_base + 2)
        vals[inside] = np.asarray(fn(res.positions), dtype=float)
    m2 = float(np.mean(vals))
    se2 = float(np.std(vals, ddof=1) / math.sqrt(len(vals)))
    return abs(m1 - m2), math.hypot(se1, se2)


def _require_compactly_inside(V: Domain, D: Domain):
    if V.kind is DomainKind.BALL and D.kind is DomainKind.BALL:
        gap = D.radius - (np.linalg.norm(V.center - D.center) + V.radius)
        if gap <= 0:
            raise ConfigError("closure(V) must be contained in D")
        return
    if V.kind is DomainKind.BALL and D.kind is DomainKind.ANNULUS:
        r = np.linalg.norm(V.center)
        if r - V.radius > D.r_inner and r + V.radius < D.r_outer:
            return
        raise ConfigError("closure(V) must be contained in D")
    # generic sampled check on the bounding sphere of V
    rr = V.bounding_radius
    probe = np.random.default_rng(0).standard_normal((256, V.dim))
    probe = rr * probe / np.linalg.norm(probe, axis=1)[:, None]
    if not np.all(D.contains(probe * 0.999)):
        raise ConfigError("closure(V) does not appear to sit inside D")


def dynkin_check(sys: RootSystem, D: Domain, f: ScalarField, x,
                 cfg: SimConfig, stream_id: int = 0, h_step=None,
                 use_analytic: bool = False):
    """Residual of H_D f(x) - f(x) = (1/2) E^x[int_0^tau Delta_k f(X_s) ds].

    Delta_k f along the paths uses the finite-difference applicator
    (points within 10h of a hyperplane are skipped and counted) unless
    ``use_analytic`` is set and the field carries derivatives.
    Returns (residual, stderr, skipped_points).
    """
    x = np.asarray(x, dtype=float)
    if not D.contains(x):
        raise PreconditionError("x must be inside D")
    skipped = [0]

    if use_analytic and f.gradient is not None and f.laplacian is not None:
        def values_fn(pts):
            lap = np.asarray(f.laplacian(pts), dtype=float)
            grads = np.asarray(f.gradient(pts), dtype=float)
            vals = np.asarray(f.eval(pts), dtype=float)
            out = lap.copy()
            proj = sys.projections(pts)
            for j, a in enumerate(sys.positive_roots):
                k = sys.multiplicity[j]
                if k == 0:
                    continue
                refl = pts - np.outer(proj[:, j], a)
                fr = np.asarray(f.eval(refl), dtype=float)
                out += 2.0 * k * ((grads @ a) / proj[:, j]
                                  - (vals - fr) / proj[:, j] ** 2)
            return out
    else:
        def values_fn(pts):
            vals, ok = dunkl_laplacian_numeric_batch(sys, f, pts, h=h_step)
            skipped[0] += int(np.sum(~ok))
            return vals

    res, integrals = run_paths_integrate(sys, cfg, x, domain=D,
                                         values_fn=values_fn,
                                         stream_id=stream_id)
    fx = float(f(x))
    exit_vals = np.asarray(f.eval(res.positions), dtype=float)
    per_path = exit_vals - fx - 0.5 * integrals
    resid = abs(float(np.mean(per_path)))
    se = float(np.std(per_path, ddof=1) / math.sqrt(len(per_path)))
    return resid, se, skipped[0]


def max_principle_check(report: SolveReport, slack_sigmas: float = 3.0):
    """Estimates must lie inside the sampled boundary-data range plus
    slack; returns (ok, witness_point_or_None)."""
    lo = report.f_min
    hi = report.f_max
    for i, (e, s) in enumerate(zip(report.estimates, report.std_errors)):
        if e < lo - slack_sigmas * s - 1e-12 or e > hi + slack_sigmas * s + 1e-12:
            return False, report.points[i]
    return True, None


def regularity_probe(sys: RootSystem, D: Domain, z, t_list,
                     cfg: SimConfig, stream_base: int = 0,
                     substeps: int = 32768, boundary_tol: float | None = None,
                     require_boundary: bool = True):
    """MC estimates of P^z[tau_D <= t] for each t (paths started at z).

    Regular boundary points drive the probability to 1 as t -> 0.  The
    probe needs many substeps per horizon because a discrete walk
    started on the boundary stays inside for ~1/sqrt(pi n) of runs even
    when the continuous process exits instantly.
    Returns a list of (t, probability, stderr).
    """
    z = np.asarray(z, dtype=float)
    if require_boundary:
        tol = boundary_tol if boundary_tol is not None else 1e-9
        if D.kind is DomainKind.CUSTOM:
            raise ConfigError("probe needs a built-in domain shape")
        if D.boundary_distance_abs(z) > tol:
            raise ConfigError(
                f"probe point {z.tolist()} is not within {tol} of the boundary")
    out = []
    for ti, t in enumerate(t_list):
        if t <= 0:
            raise PreconditionError("probe times must be positive")
        dt = t / float(substeps)
        cfg_t = replace(cfg, dt_base=dt, dt_floor=min(cfg.dt_floor, dt / 100.0),
                        boundary_refine=False)
        res = run_paths(sys, cfg_t, z, domain=D, horizon=t,
                        stream_id=stream_base + ti)
        p = float(np.mean(res.status == ST_EXITED))
        se = math.sqrt(max(p * (1.0 - p), 1.0 / res.n) / res.n)
        out.append((float(t), p, se))
    return out


def duality_line_nodes(k: float, half_width: float, breakpoints,
                       nodes_per_panel: int = 24):
    """Quadrature nodes/weights for int_{-L}^{L} g(x) w_k(x) dx in d = 1,
    w_k(x) = 2^k |x|^(2k), panelized at the given breakpoints.

    Panels touching 0 use Gauss-Jacobi (absorbing the |x|^(2k) factor
    exactly); all others use Gauss-Legendre with the analytic weight.
    The test fields are piecewise polynomials whose kinks sit exactly on
    the breakpoints, so every panel integrand is analytic and the
    quadrature error is negligible next to the Monte Carlo error.
    """
    from numpy.polynomial.legendre import leggauss
    pts = {-half_width, 0.0, half_width}
    for b in breakpoints:
        b = float(b)
        for s in (b, -b):
            if -half_width < s < half_width:
                pts.add(s)
    edges = np.array(sorted(pts))
    nodes, wts = [], []
    gl_x, gl_w = leggauss(nodes_per_panel)
    for a, b in zip(edges[:-1], edges[1:]):
        if a == 0.0 or b == 0.0:
            length = abs(b) if a == 0.0 else abs(a)
            s, w = jacobi_halfline(2.0 * k, length, nodes_per_panel)
            w = w * (2.0 ** k)
            if a == 0.0:
                nodes.append(s)
                wts.append(w)
            else:
                nodes.append(-s[::-1])
                wts.append(w[::-1])
        else:
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            x = mid + half * gl_x
            nodes.append(x)
            wts.append(half * gl_w * (2.0 ** k) * np.abs(x) ** (2.0 * k))
    return np.concatenate(nodes), np.concatenate(wts)


def duality_check(sys: RootSystem, D: Domain, psi: ScalarField,
                  phi: ScalarField, cfg: SimConfig, half_width: float,
                  breakpoints=(), nodes_per_panel: int = 24,
                  stream_base: int = 0):
    """Residual of <H_D psi, Delta_k phi>_k = <Delta_k psi, H_D phi>_k
    for d = 1, by weighted panel quadrature with per-node MC estimates
    of H_D at the interior nodes.

    ``breakpoints`` must list the support endpoints of both fields (the
    domain endpoints are added automatically), so that each quadrature
    panel sees an analytic integrand.  Both fields must be C^2 with
    compact support inside (-L, L) and carry analytic derivatives.
    Returns (residual, combined_stderr, pairing_scale).
    """
    if sys.dim != 1:
        raise PreconditionError("duality check is implemented for d = 1")
    if psi.gradient is None or phi.gradient is None:
        raise DataError("duality fields need analytic derivatives")
    k = float(sys.multiplicity[0])
    breaks = set(float(b) for b in breakpoints)
    lo = float(D.center[0]) - float(D.radius) if D.kind is DomainKind.BALL \
        else None
    if lo is None:
        raise ConfigError("duality check expects an interval (1-D ball)")
    breaks.update([lo, float(D.center[0]) + float(D.radius)])
    nodes, wts = duality_line_nodes(k, half_width, sorted(breaks),
                                    nodes_per_panel)

    lhs, se_lhs, scale_l = _pairing(sys, D, psi, phi, nodes, wts, cfg,
                                    stream_base)
    # psi is phi makes both sides the same computation; share the stream
    # so the residual is exactly zero, matching the symmetry
    rhs_stream = stream_base if phi is psi else stream_base + 1
    rhs, se_rhs, scale_r = _pairing(sys, D, phi, psi, nodes, wts, cfg,
                                    rhs_stream)
    scale = max(scale_l, scale_r)
    return abs(lhs - rhs), math.hypot(se_lhs, se_rhs), scale


def _pairing(sys, D, inner, outer, nodes, wts, cfg, stream_id):
    """<H_D inner, Delta_k outer>_k over the node set (d = 1)."""
    from .errors import AccuracyError

    dvals = dunkl_laplacian_field_1d(sys, outer, nodes)
    pts = nodes[:, None]
    hvals = np.zeros(len(nodes))
    se = np.zeros(len(nodes))
    inside = D.contains(pts)
    outside = ~inside
    if np.any(outside):
        hvals[outside] = np.asarray(inner.eval(pts[outside]), dtype=float)
    idx = np.nonzero(inside)[0]
    live = idx[np.abs(dvals[idx]) > 0]
    if len(live):
        starts = np.repeat(pts[live], cfg.paths, axis=0)
        res = run_paths(sys, replace(cfg, paths=len(starts)), starts,
                        domain=D, stream_id=stream_id)
        vals = np.asarray(inner.eval(res.positions), dtype=float)
        vals = vals.reshape(len(live), cfg.paths)
        hvals[live] = np.mean(vals, axis=1)
        se[live] = np.std(vals, axis=1, ddof=1) / math.sqrt(cfg.paths)
    integrand = hvals * dvals
    scale = float(np.max(np.abs(integrand))) if len(integrand) else 0.0
    edge = max(abs(integrand[0]), abs(integrand[-1]))
    if scale > 0 and edge > 1e-6 * scale:
        raise AccuracyError(
            "duality quadrature truncation insufficient: integrand not "
            "negligible at the cutoff")
    value = float(np.sum(wts * integrand))
    se_total = float(math.sqrt(np.sum((wts * dvals * se) ** 2)))
    return value, se_total, scale * float(np.sum(np.abs(wts)))
