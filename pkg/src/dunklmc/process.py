"""Path simulation for the jump diffusion with generator (1/2) Delta_k.

The continuous part is Euler-Maruyama with the singular drift
sum_a k(a) a / <a, x>; reflection jumps x -> sigma_a x are thinned from
their rates k(a)/<a, x>^2 each step.  The time step adapts to both the
hyperplane arrangement (dt <= 0.1 min_a <a,x>^2, where drift and rates
stiffen) and, for exit problems, to the domain boundary
(dt <= 0.1 dist(x, dD)^2), floored at ``dt_floor``.

Paths draw from counter-based streams keyed by (seed, stream id,
path index), so every result is bit-reproducible for any thread count
and any path is reconstructible alone.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import _stepping, rng
from .domains import DOM_BALL, DOM_NONE, Domain, DomainKind
from .errors import (ConfigError, NonTerminationError, PreconditionError,
                     SingularityError)
from .rootsys import RootSystem

WORKERS_ENV = "DUNKLMC_WORKERS"


def _apply_worker_env():
    val = os.environ.get(WORKERS_ENV)
    if val:
        import numba
        try:
            n = max(1, min(int(val), numba.config.NUMBA_NUM_THREADS))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer") from None
        numba.set_num_threads(n)


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters shared by all drivers."""

    dt_base: float = 1e-3
    dt_floor: float = 1e-7
    adaptive: bool = True
    boundary_refine: bool = True
    jump_cap_per_step: int = 1
    seed: int = 0
    paths: int = 1
    max_steps: int = 10 ** 8

    def __post_init__(self):
        if self.dt_base <= 0 or self.dt_floor <= 0:
            raise ConfigError("time steps must be positive")
        if self.dt_floor > self.dt_base:
            raise ConfigError("dt_floor must not exceed dt_base")
        if self.paths < 1:
            raise ConfigError("paths must be >= 1")
        if self.jump_cap_per_step < 1:
            raise ConfigError("jump_cap_per_step must be >= 1")


@dataclass
class PathState:
    """One path's state: position, clock, jump log, occupation times."""

    position: np.ndarray
    clock: float = 0.0
    jump_count_per_root: dict = field(default_factory=dict)
    occupation: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExitRecord:
    exit_point: np.ndarray
    exit_time: float
    exited_by_jump: bool
    path_seed_index: int


@dataclass
class BatchResult:
    """Raw outcome of a batch of independent paths."""

    positions: np.ndarray        # (n, d) final positions
    clocks: np.ndarray           # (n,)
    status: np.ndarray           # (n,) _stepping.ST_* codes
    steps: np.ndarray            # (n,)
    occupation: np.ndarray       # (n,) time spent in the tracked region
    exited_by_jump: np.ndarray   # (n,) bool
    jump_counts: np.ndarray      # (n, m)
    min_hyperplane_gap: float    # smallest distance to any active hyperplane

    @property
    def n(self):
        return len(self.clocks)


def drift(sys: RootSystem, x) -> np.ndarray:
    """Drift b(x) = sum_a k(a) a / <a, x> of the continuous part."""
    x = np.asarray(x, dtype=float)
    proj = sys.projections(x)
    out = np.zeros(sys.dim)
    for j, a in enumerate(sys.positive_roots):
        k = sys.multiplicity[j]
        if k == 0:
            continue
        if proj[j] == 0.0:
            raise SingularityError(
                f"drift undefined on hyperplane of root {j}", root=j)
        out += (k / proj[j]) * a
    return out


def jump_intensities(sys: RootSystem, x) -> dict:
    """Levy-kernel rates {root index: k(a)/<a, x>^2}; destination of
    root j is the reflection sigma_j x."""
    x = np.asarray(x, dtype=float)
    proj = sys.projections(x)
    out = {}
    for j in range(len(sys.positive_roots)):
        k = sys.multiplicity[j]
        if k == 0:
            out[j] = 0.0
            continue
        if proj[j] == 0.0:
            raise SingularityError(
                f"jump rate undefined on hyperplane of root {j}", root=j)
        out[j] = float(k / (proj[j] * proj[j]))
    return out


def draws_per_step(sys: RootSystem) -> int:
    gp = (sys.dim + 1) // 2
    return 2 * gp + len(sys.positive_roots) + 1


def step(sys: RootSystem, state: PathState, dt: float,
         stream: rng.PathStream, jump_cap: int = 1) -> PathState:
    """One step at an externally supplied dt.

    Consumes exactly ``draws_per_step(sys)`` slots of the stream; the
    batch drivers execute the identical arithmetic, so a manual replay
    with the dt sequence a driver chose is bit-identical to it.
    """
    if dt <= 0:
        raise PreconditionError("dt must be positive")
    x = np.array(state.position, dtype=float)
    m = len(sys.positive_roots)
    counts = np.zeros(m, dtype=np.int64)
    _stepping.single_step(
        np.uint64(stream.key), np.uint64(stream.counter), x, float(dt),
        sys.positive_roots, sys.multiplicity, int(jump_cap), counts)
    stream.counter += draws_per_step(sys)
    new_counts = dict(state.jump_count_per_root)
    for j in range(m):
        if counts[j]:
            new_counts[j] = new_counts.get(j, 0) + int(counts[j])
    return PathState(position=x, clock=state.clock + dt,
                     jump_count_per_root=new_counts,
                     occupation=dict(state.occupation))


def _encode_occupation(occupation_ball, dim):
    if occupation_ball is None:
        return DOM_NONE, np.zeros(1)
    center, radius = occupation_ball
    params = np.concatenate([np.asarray(center, dtype=float), [float(radius)]])
    if params.shape != (dim + 1,):
        raise ConfigError("occupation ball center has wrong dimension")
    return DOM_BALL, params


def run_paths(sys: RootSystem, cfg: SimConfig, starts, *, stream_id=0,
              domain: Domain | None = None, horizon=math.inf,
              occupation_ball=None, keys=None, path_offset=0) -> BatchResult:
    """Batch of independent paths; the workhorse behind every estimator.

    ``starts`` is (n, d) (or (d,) broadcast to ``cfg.paths`` rows).
    Paths run until domain exit, the time horizon, or the step budget.
    """
    _apply_worker_env()
    starts = np.array(starts, dtype=float)
    if starts.ndim == 1:
        starts = np.tile(starts, (cfg.paths, 1))
    n, d = starts.shape
    if d != sys.dim:
        raise ConfigError("start points have wrong dimension")
    if keys is None:
        keys = rng.path_keys(cfg.seed, stream_id, n, first_index=path_offset)

    if domain is not None and domain.kind is DomainKind.CUSTOM:
        return _run_paths_python(sys, cfg, keys, starts, domain, horizon,
                                 occupation_ball)

    dom_code, dom_params = (DOM_NONE, np.zeros(1)) if domain is None \
        else domain.encode()
    occ_code, occ_params = _encode_occupation(occupation_ball, d)

    m = len(sys.positive_roots)
    xs = starts.copy()
    clocks = np.zeros(n)
    step0s = np.zeros(n, dtype=np.uint64)
    jump_counts = np.zeros((n, m), dtype=np.int64)
    out_status = np.zeros(n, dtype=np.int64)
    out_steps = np.zeros(n, dtype=np.int64)
    out_occ = np.zeros(n)
    out_jumped = np.zeros(n, dtype=np.bool_)
    out_gap2 = np.full(n, 1e300)
    out_stepidx = np.zeros(n, dtype=np.uint64)

    _stepping.run_batch(
        keys, xs, clocks, step0s, jump_counts,
        sys.positive_roots, sys.multiplicity,
        float(cfg.dt_base), float(cfg.dt_floor),
        bool(cfg.adaptive), bool(cfg.boundary_refine),
        int(cfg.jump_cap_per_step),
        int(dom_code), dom_params, int(occ_code), occ_params,
        float(horizon), int(cfg.max_steps),
        out_status, out_steps, out_occ, out_jumped, out_gap2, out_stepidx)

    if np.any(out_status == _stepping.ST_BUDGET):
        bad = int(np.argmax(out_status == _stepping.ST_BUDGET))
        raise NonTerminationError(
            f"path {bad} exceeded {cfg.max_steps} steps before exiting; "
            "exit times are a.s. finite, so this is a numerical pathology")
    if not np.all(np.isfinite(xs)):
        raise NonTerminationError("non-finite path position encountered")

    gap = float(np.sqrt(np.min(out_gap2)) / math.sqrt(2.0)) \
        if np.min(out_gap2) < 1e290 else math.inf
    return BatchResult(positions=xs, clocks=clocks, status=out_status,
                       steps=out_steps, occupation=out_occ,
                       exited_by_jump=out_jumped, jump_counts=jump_counts,
                       min_hyperplane_gap=gap)


def run_paths_integrate(sys: RootSystem, cfg: SimConfig, starts, *,
                        domain: Domain, values_fn, stream_id=0,
                        horizon=math.inf, chunk=2048, rec_cap=8192):
    """Like :func:`run_paths` but also accumulates
    ``sum_steps values_fn(x_step_start) * dt`` per path (the occupation
    functional used by the Dynkin check).

    ``values_fn`` maps an (M, d) array of positions to (M,) values.
    Returns (BatchResult, integrals).
    """
    _apply_worker_env()
    starts = np.array(starts, dtype=float)
    if starts.ndim == 1:
        starts = np.tile(starts, (cfg.paths, 1))
    n, d = starts.shape
    if domain.kind is DomainKind.CUSTOM:
        raise ConfigError("recorded driver needs a built-in domain shape")
    keys_all = rng.path_keys(cfg.seed, stream_id, n)
    dom_code, dom_params = domain.encode()
    m = len(sys.positive_roots)

    positions = np.empty_like(starts)
    clocks_out = np.zeros(n)
    status_out = np.zeros(n, dtype=np.int64)
    steps_out = np.zeros(n, dtype=np.int64)
    jumped_out = np.zeros(n, dtype=np.bool_)
    counts_out = np.zeros((n, m), dtype=np.int64)
    integrals = np.zeros(n)
    gap2_global = 1e300

    traj_x = np.empty((chunk, rec_cap, d))
    traj_dt = np.empty((chunk, rec_cap))

    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        nn = hi - lo
        keys = keys_all[lo:hi]
        xs = starts[lo:hi].copy()
        clocks = np.zeros(nn)
        step0s = np.zeros(nn, dtype=np.uint64)
        jcounts = np.zeros((nn, m), dtype=np.int64)
        status = np.zeros(nn, dtype=np.int64)
        steps = np.zeros(nn, dtype=np.int64)
        jumped = np.zeros(nn, dtype=np.bool_)
        gap2 = np.full(nn, 1e300)
        live = np.arange(nn)
        while len(live):
            nl = len(live)
            # fancy indexing copies, so gather, run, scatter back
            k_l = np.ascontiguousarray(keys[live])
            x_l = np.ascontiguousarray(xs[live])
            c_l = np.ascontiguousarray(clocks[live])
            s0_l = np.ascontiguousarray(step0s[live])
            jc_l = np.ascontiguousarray(jcounts[live])
            st_l = np.zeros(nl, dtype=np.int64)
            sp_l = np.zeros(nl, dtype=np.int64)
            oc_l = np.zeros(nl)
            jm_l = np.zeros(nl, dtype=np.bool_)
            g2_l = np.full(nl, 1e300)
            si_l = np.zeros(nl, dtype=np.uint64)
            rl_l = np.zeros(nl, dtype=np.int64)
            _stepping.run_batch_recorded(
                k_l, x_l, c_l, s0_l, jc_l,
                sys.positive_roots, sys.multiplicity,
                float(cfg.dt_base), float(cfg.dt_floor),
                bool(cfg.adaptive), bool(cfg.boundary_refine),
                int(cfg.jump_cap_per_step),
                int(dom_code), dom_params, DOM_NONE, np.zeros(1),
                float(horizon), int(cfg.max_steps),
                traj_x[:nl], traj_dt[:nl], rl_l,
                st_l, sp_l, oc_l, jm_l, g2_l, si_l)
            total = int(np.sum(rl_l))
            if total:
                flat = np.concatenate([traj_x[i, :rl_l[i]] for i in range(nl)
                                       if rl_l[i]])
                dts = np.concatenate([traj_dt[i, :rl_l[i]] for i in range(nl)
                                      if rl_l[i]])
                vals = np.asarray(values_fn(flat), dtype=float)
                contrib = vals * dts
                edges = np.concatenate([[0], np.cumsum(rl_l)])
                sums = np.add.reduceat(np.concatenate([contrib, [0.0]]),
                                       np.minimum(edges[:-1], total))
                sums[rl_l == 0] = 0.0
                integrals[lo + live] += sums
            xs[live] = x_l
            clocks[live] = c_l
            step0s[live] = si_l
            jcounts[live] = jc_l
            status[live] = st_l
            steps[live] += sp_l
            jumped[live] = jm_l
            gap2[live] = np.minimum(gap2[live], g2_l)
            live = live[st_l == _stepping.ST_BUFFER]
        positions[lo:hi] = xs
        clocks_out[lo:hi] = clocks
        status_out[lo:hi] = status
        steps_out[lo:hi] = steps
        jumped_out[lo:hi] = jumped
        counts_out[lo:hi] = jcounts
        gap2_global = min(gap2_global, float(np.min(gap2)))

    if np.any(status_out == _stepping.ST_BUDGET):
        raise NonTerminationError("step budget exceeded in recorded driver")
    gap = math.sqrt(gap2_global) / math.sqrt(2.0) if gap2_global < 1e290 else math.inf
    res = BatchResult(positions=positions, clocks=clocks_out, status=status_out,
                      steps=steps_out, occupation=np.zeros(n),
                      exited_by_jump=jumped_out, jump_counts=counts_out,
                      min_hyperplane_gap=gap)
    return res, integrals


def simulate_until_exit(sys: RootSystem, domain: Domain, x0, cfg: SimConfig,
                        path_index: int = 0, stream_id: int = 0) -> ExitRecord:
    """Run one path until it leaves the open domain."""
    x0 = np.asarray(x0, dtype=float)
    if not domain.contains(x0):
        raise PreconditionError(f"start point {x0.tolist()} is not inside the domain")
    keys = rng.path_keys(cfg.seed, stream_id, 1, first_index=path_index)
    res = run_paths(sys, replace(cfg, paths=1), x0[None, :], domain=domain,
                    keys=keys)
    if res.status[0] != _stepping.ST_EXITED:
        raise NonTerminationError("path did not exit within the horizon")
    return ExitRecord(exit_point=res.positions[0], exit_time=float(res.clocks[0]),
                      exited_by_jump=bool(res.exited_by_jump[0]),
                      path_seed_index=path_index)


def simulate_to_time(sys: RootSystem, x0, t_end: float, cfg: SimConfig,
                     path_index: int = 0, stream_id: int = 0,
                     occupation_ball=None, region_name="ball") -> PathState:
    """Run one path to clock == t_end (the last step is scaled)."""
    if t_end < 0:
        raise PreconditionError("t_end must be nonnegative")
    x0 = np.asarray(x0, dtype=float)
    if t_end == 0:
        return PathState(position=x0.copy(), clock=0.0)
    keys = rng.path_keys(cfg.seed, stream_id, 1, first_index=path_index)
    res = run_paths(sys, replace(cfg, paths=1), x0[None, :], horizon=t_end,
                    occupation_ball=occupation_ball, keys=keys)
    counts = {j: int(c) for j, c in enumerate(res.jump_counts[0]) if c}
    occ = {region_name: float(res.occupation[0])} if occupation_ball else {}
    return PathState(position=res.positions[0], clock=float(res.clocks[0]),
                     jump_count_per_root=counts, occupation=occ)


def _run_paths_python(sys, cfg, keys, starts, domain, horizon, occupation_ball):
    """Slow fallback driver for CUSTOM domains (predicate in Python).

    Mirrors the compiled driver except that boundary refinement is
    unavailable (no distance information from a bare predicate).
    """
    n, d = starts.shape
    m = len(sys.positive_roots)
    occ_code, occ_params = _encode_occupation(occupation_ball, d)
    root_mat = sys.positive_roots
    mults = sys.multiplicity
    dps = draws_per_step(sys)

    positions = starts.copy()
    clocks = np.zeros(n)
    status = np.zeros(n, dtype=np.int64)
    steps = np.zeros(n, dtype=np.int64)
    occ_arr = np.zeros(n)
    jumped_arr = np.zeros(n, dtype=np.bool_)
    jcounts = np.zeros((n, m), dtype=np.int64)
    min_gap2 = 1e300

    for p in range(n):
        x = positions[p]
        clock = 0.0
        counts = jcounts[p]
        sd = 0
        occ = 0.0
        jumped_last = False
        while True:
            if sd >= cfg.max_steps:
                status[p] = _stepping.ST_BUDGET
                break
            rem = horizon - clock
            if rem <= 0:
                status[p] = _stepping.ST_HORIZON
                break
            proj = root_mat @ x
            act = mults > 0
            min_p2 = float(np.min(proj[act] ** 2)) if np.any(act) else 1e300
            min_gap2 = min(min_gap2, min_p2)
            dt = cfg.dt_base
            if cfg.adaptive and min_p2 < 1e290:
                dt = min(dt, _stepping.ADAPT_COEFF * min_p2)
            dt = max(dt, cfg.dt_floor)
            partial = rem <= dt
            if partial:
                dt = rem
            if occ_code == DOM_BALL:
                if np.linalg.norm(x - occ_params[:d]) < occ_params[d]:
                    occ += dt
            jumped_last = _stepping.single_step(
                np.uint64(keys[p]), np.uint64(sd * dps), x, float(dt),
                root_mat, mults, int(cfg.jump_cap_per_step), counts)
            clock += dt
            sd += 1
            if not domain.contains(x):
                status[p] = _stepping.ST_EXITED
                break
            if partial:
                status[p] = _stepping.ST_HORIZON
                jumped_last = False
                break
        clocks[p] = clock
        steps[p] = sd
        occ_arr[p] = occ
        jumped_arr[p] = jumped_last

    if np.any(status == _stepping.ST_BUDGET):
        raise NonTerminationError("step budget exceeded (custom-domain driver)")
    gap = math.sqrt(min_gap2) / math.sqrt(2.0) if min_gap2 < 1e290 else math.inf
    return BatchResult(positions=positions, clocks=clocks, status=status,
                       steps=steps, occupation=occ_arr,
                       exited_by_jump=jumped_arr, jump_counts=jcounts,
                       min_hyperplane_gap=gap)


def trace_path(sys: RootSystem, domain: Domain | None, x0, cfg: SimConfig,
               path_index: int = 0, stream_id: int = 0, horizon=math.inf,
               max_rows: int = 100_000):
    """Step-by-step trajectory of one path for CSV dumping.

    Returns a list of rows (t, x_1..x_d, jumped_root_index or None),
    recorded after each step.
    """
    x0 = np.asarray(x0, dtype=float)
    keys = rng.path_keys(cfg.seed, stream_id, 1, first_index=path_index)
    root_mat = sys.positive_roots
    mults = sys.multiplicity
    m = len(root_mat)
    dps = draws_per_step(sys)
    x = x0.copy()
    clock = 0.0
    counts = np.zeros(m, dtype=np.int64)
    rows = []
    for sd in range(max_rows):
        rem = horizon - clock
        if rem <= 0:
            break
        proj = root_mat @ x
        act = mults > 0
        min_p2 = float(np.min(proj[act] ** 2)) if np.any(act) else 1e300
        dt = cfg.dt_base
        if cfg.adaptive and min_p2 < 1e290:
            dt = min(dt, _stepping.ADAPT_COEFF * min_p2)
        if cfg.boundary_refine and domain is not None \
                and domain.kind is not DomainKind.CUSTOM:
            bd = domain.boundary_distance_inside(x)
            dt = min(dt, _stepping.ADAPT_COEFF * bd * bd)
        dt = max(dt, cfg.dt_floor)
        if rem <= dt:
            dt = rem
        before = counts.copy()
        _stepping.single_step(np.uint64(keys[0]), np.uint64(sd * dps), x,
                              float(dt), root_mat, mults,
                              int(cfg.jump_cap_per_step), counts)
        clock += dt
        delta = counts - before
        root = int(np.argmax(delta)) if np.any(delta) else None
        rows.append((clock, x.copy(), root))
        if domain is not None and not domain.contains(x):
            break
    return rows
