"""Compiled path-stepping kernels.

One Euler step of the jump diffusion with generator (1/2) Delta_k:

    x <- x + drift(x) dt + sqrt(dt) G,   drift(x) = sum_a k(a) a / <a, x>,

followed by per-root Bernoulli thinning of the reflection jumps with
rate k(a) / <a, x>^2 (rates frozen at the step start), capped at
``jump_cap`` jumps per step with rate-proportional selection.

Randomness is slot-addressed: draw ``s`` of step ``n`` is a pure function
of (path key, n * DRAWS + s), so skipped slots cost nothing and any path
is reproducible in isolation.  The mixing arithmetic must stay bit-equal
to :mod:`dunklmc.rng`.

Near-hyperplane policy: terms of a root with <a, x> == 0 exactly are
skipped (the jump would be a no-op and the drift limit is symmetric);
when the adaptive step is pinned at the floor, each root's drift
displacement is clipped to the Bessel-consistent scale
sqrt(dt (2 k + 1)) so the Euler drift cannot overshoot.
"""

import math

import numpy as np
from numba import njit, prange

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586
_SQRT2 = 1.4142135623730951

ST_EXITED = 1
ST_HORIZON = 2
ST_BUDGET = 3
ST_BUFFER = 4

DOM_NONE, DOM_BALL, DOM_ANNULUS, DOM_BOX = 0, 1, 2, 3
ADAPT_COEFF = 0.1


@njit(cache=True, inline="always")
def _mix64(x):
    x = (x ^ (x >> np.uint64(30))) * _MIX_A
    x = (x ^ (x >> np.uint64(27))) * _MIX_B
    return x ^ (x >> np.uint64(31))


@njit(cache=True, inline="always")
def _uniform(key, ctr):
    u = _mix64(key + (ctr + np.uint64(1)) * GOLDEN)
    return (float(u >> np.uint64(11)) + 0.5) * _INV_2_53


@njit(cache=True, inline="always")
def _inside(code, params, x):
    d = x.shape[0]
    if code == DOM_BALL:
        s = 0.0
        for j in range(d):
            dd = x[j] - params[j]
            s += dd * dd
        return s < params[d] * params[d]
    if code == DOM_ANNULUS:
        s = 0.0
        for j in range(d):
            s += x[j] * x[j]
        r = math.sqrt(s)
        return params[0] < r and r < params[1]
    if code == DOM_BOX:
        for j in range(d):
            if not (params[j] < x[j] and x[j] < params[d + j]):
                return False
        return True
    return True


@njit(cache=True, inline="always")
def _boundary_gap(code, params, x):
    d = x.shape[0]
    if code == DOM_BALL:
        s = 0.0
        for j in range(d):
            dd = x[j] - params[j]
            s += dd * dd
        g = params[d] - math.sqrt(s)
        return g if g > 0.0 else 0.0
    if code == DOM_ANNULUS:
        s = 0.0
        for j in range(d):
            s += x[j] * x[j]
        r = math.sqrt(s)
        g1 = r - params[0]
        g2 = params[1] - r
        g = g1 if g1 < g2 else g2
        return g if g > 0.0 else 0.0
    if code == DOM_BOX:
        g = 1e300
        for j in range(d):
            a = x[j] - params[j]
            b = params[d + j] - x[j]
            if a < g:
                g = a
            if b < g:
                g = b
        return g if g > 0.0 else 0.0
    return 1e300


@njit(cache=True, inline="always")
def _advance(key, base, gp, x, dt, proj, root_mat, mults,
             jump_cap, jump_counts, disp, gauss):
    """One full step given dt and start-of-step projections.

    ``base`` is the draw counter of this step's first slot.  Mutates
    ``x`` and ``jump_counts``; returns True when the step contained at
    least one reflection jump.
    """
    d = x.shape[0]
    m = mults.shape[0]

    for l in range(d):
        disp[l] = 0.0
    for j in range(m):
        k = mults[j]
        if k <= 0.0:
            continue
        pj = proj[j]
        if pj == 0.0:
            continue
        term = k * dt / pj
        cap = math.sqrt(dt * (2.0 * k + 1.0))
        mag = abs(term) * _SQRT2
        if mag > cap:
            term = term * (cap / mag)
        for l in range(d):
            disp[l] += term * root_mat[j, l]

    slot = np.uint64(0)
    for g in range(gp):
        u1 = _uniform(key, base + slot)
        u2 = _uniform(key, base + slot + np.uint64(1))
        slot += np.uint64(2)
        r = math.sqrt(-2.0 * math.log(u1))
        i0 = 2 * g
        gauss[i0] = r * math.cos(_TWO_PI * u2)
        if i0 + 1 < d:
            gauss[i0 + 1] = r * math.sin(_TWO_PI * u2)
    sqdt = math.sqrt(dt)
    for l in range(d):
        x[l] = x[l] + disp[l] + sqdt * gauss[l]

    # thinning at the start-of-step rates
    nfire = 0
    rate_sum = 0.0
    first_fire = -1
    for j in range(m):
        k = mults[j]
        if k <= 0.0 or proj[j] == 0.0:
            continue
        rate = k / (proj[j] * proj[j])
        pjump = -math.expm1(-rate * dt)
        u = _uniform(key, base + np.uint64(2 * gp + j))
        if u < pjump:
            nfire += 1
            rate_sum += rate
            if first_fire < 0:
                first_fire = j
    if nfire == 0:
        return False
    if nfire == 1 or jump_cap <= 1:
        chosen = first_fire
        if nfire > 1:
            sel = _uniform(key, base + np.uint64(2 * gp + m)) * rate_sum
            acc = 0.0
            for j in range(m):
                k = mults[j]
                if k <= 0.0 or proj[j] == 0.0:
                    continue
                rate = k / (proj[j] * proj[j])
                u = _uniform(key, base + np.uint64(2 * gp + j))
                if u < -math.expm1(-rate * dt):
                    acc += rate
                    if acc >= sel:
                        chosen = j
                        break
        pj = 0.0
        for l in range(d):
            pj += root_mat[chosen, l] * x[l]
        for l in range(d):
            x[l] = x[l] - pj * root_mat[chosen, l]
        jump_counts[chosen] += 1
        return True
    # cap >= 2: apply firing roots in root order up to the cap
    applied = 0
    for j in range(m):
        if applied >= jump_cap:
            break
        k = mults[j]
        if k <= 0.0 or proj[j] == 0.0:
            continue
        rate = k / (proj[j] * proj[j])
        u = _uniform(key, base + np.uint64(2 * gp + j))
        if u < -math.expm1(-rate * dt):
            pj = 0.0
            for l in range(d):
                pj += root_mat[j, l] * x[l]
            for l in range(d):
                x[l] = x[l] - pj * root_mat[j, l]
            jump_counts[j] += 1
            applied += 1
    return applied > 0


@njit(cache=True)
def _run_path(key, x, clock, step0, jump_counts, root_mat, mults,
              dt_base, dt_floor, adaptive, refine, jump_cap,
              dom_code, dom_params, occ_code, occ_params,
              horizon, max_steps,
              traj_x, traj_dt, record, rec_cap):
    """Drive one path until exit / horizon / budget / full buffer.

    Returns (status, clock, steps_done, occupation, exit_by_jump,
    min_gap2, n_recorded, step_index).
    """
    d = x.shape[0]
    m = mults.shape[0]
    gp = (d + 1) // 2
    draws = np.uint64(2 * gp + m + 1)
    proj = np.empty(m)
    disp = np.empty(d)
    gauss = np.empty(2 * gp)
    step_idx = np.uint64(step0)
    steps_done = 0
    occ = 0.0
    min_gap2 = 1e300
    nrec = 0

    while True:
        if steps_done >= max_steps:
            return ST_BUDGET, clock, steps_done, occ, False, min_gap2, nrec, step_idx
        rem = horizon - clock
        if rem <= 0.0:
            return ST_HORIZON, clock, steps_done, occ, False, min_gap2, nrec, step_idx
        if record and nrec >= rec_cap:
            return ST_BUFFER, clock, steps_done, occ, False, min_gap2, nrec, step_idx

        min_p2 = 1e300
        for j in range(m):
            pj = 0.0
            for l in range(d):
                pj += root_mat[j, l] * x[l]
            proj[j] = pj
            if mults[j] > 0.0:
                p2 = pj * pj
                if p2 < min_p2:
                    min_p2 = p2
        if min_p2 < min_gap2:
            min_gap2 = min_p2

        dt = dt_base
        if adaptive and min_p2 < 1e290:
            c = ADAPT_COEFF * min_p2
            if c < dt:
                dt = c
        if refine and dom_code != DOM_NONE:
            bd = _boundary_gap(dom_code, dom_params, x)
            c = ADAPT_COEFF * bd * bd
            if c < dt:
                dt = c
        if dt < dt_floor:
            dt = dt_floor
        partial = False
        if rem <= dt:
            dt = rem
            partial = True

        if occ_code == DOM_BALL:
            s = 0.0
            for j in range(d):
                dd = x[j] - occ_params[j]
                s += dd * dd
            if s < occ_params[d] * occ_params[d]:
                occ += dt

        if record:
            for l in range(d):
                traj_x[nrec, l] = x[l]
            traj_dt[nrec] = dt
            nrec += 1

        jumped = _advance(key, step_idx * draws, gp, x, dt, proj, root_mat,
                          mults, jump_cap, jump_counts, disp, gauss)
        clock += dt
        step_idx += np.uint64(1)
        steps_done += 1

        if dom_code != DOM_NONE and not _inside(dom_code, dom_params, x):
            return ST_EXITED, clock, steps_done, occ, jumped, min_gap2, nrec, step_idx
        if partial:
            return ST_HORIZON, clock, steps_done, occ, False, min_gap2, nrec, step_idx


@njit(cache=True, parallel=True)
def run_batch(keys, xs, clocks, step0s, jump_counts, root_mat, mults,
              dt_base, dt_floor, adaptive, refine, jump_cap,
              dom_code, dom_params, occ_code, occ_params,
              horizon, max_steps,
              out_status, out_steps, out_occ, out_jumped, out_gap2,
              out_stepidx):
    n = keys.shape[0]
    for p in prange(n):
        st, ck, sd, occ, jf, g2, _, sidx = _run_path(
            keys[p], xs[p], clocks[p], step0s[p], jump_counts[p],
            root_mat, mults, dt_base, dt_floor, adaptive, refine, jump_cap,
            dom_code, dom_params, occ_code, occ_params, horizon, max_steps,
            xs[:1], clocks[:1], False, 0)
        clocks[p] = ck
        out_status[p] = st
        out_steps[p] += sd
        out_occ[p] += occ
        out_jumped[p] = jf
        if g2 < out_gap2[p]:
            out_gap2[p] = g2
        out_stepidx[p] = sidx


@njit(cache=True, parallel=True)
def run_batch_recorded(keys, xs, clocks, step0s, jump_counts, root_mat, mults,
                       dt_base, dt_floor, adaptive, refine, jump_cap,
                       dom_code, dom_params, occ_code, occ_params,
                       horizon, max_steps,
                       traj_x, traj_dt, rec_len,
                       out_status, out_steps, out_occ, out_jumped, out_gap2,
                       out_stepidx):
    n = keys.shape[0]
    rec_cap = traj_dt.shape[1]
    for p in prange(n):
        st, ck, sd, occ, jf, g2, nrec, sidx = _run_path(
            keys[p], xs[p], clocks[p], step0s[p], jump_counts[p],
            root_mat, mults, dt_base, dt_floor, adaptive, refine, jump_cap,
            dom_code, dom_params, occ_code, occ_params, horizon, max_steps,
            traj_x[p], traj_dt[p], True, rec_cap)
        clocks[p] = ck
        out_status[p] = st
        out_steps[p] += sd
        out_occ[p] += occ
        out_jumped[p] = jf
        if g2 < out_gap2[p]:
            out_gap2[p] = g2
        rec_len[p] = nrec
        out_stepidx[p] = sidx


@njit(cache=True)
def single_step(key, base_ctr, x, dt, root_mat, mults, jump_cap, jump_counts):
    """One step at an externally chosen dt (the public ``step`` operation).

    ``base_ctr`` is the stream's current draw counter; the step consumes
    exactly ``2 * ceil(d/2) + m + 1`` slots starting there.
    """
    d = x.shape[0]
    m = mults.shape[0]
    gp = (d + 1) // 2
    proj = np.empty(m)
    for j in range(m):
        pj = 0.0
        for l in range(d):
            pj += root_mat[j, l] * x[l]
        proj[j] = pj
    disp = np.empty(d)
    gauss = np.empty(2 * gp)
    return _advance(np.uint64(key), np.uint64(base_ctr), gp, x, dt,
                    proj, root_mat, mults, jump_cap, jump_counts, disp, gauss)
