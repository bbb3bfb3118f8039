"""Canonical CSV/JSON emission for every task's results.

Formatting is deterministic (repr floats, sorted JSON keys, no
timestamps), which is what makes repeated runs with the same seed
byte-identical.  The column schemas here are the documented interface:

    solve:      x1..xd,estimate,std_error,n_paths
    occupation: r,x_norm,mc_estimate,closed_form,std_error
    probe:      t,prob_exit_le_t,std_error
    simulate:   t_end,mean_sq_norm,std_error,reference_sq_norm,n_paths
    validate:   check,passed,value,target,tol
"""

from __future__ import annotations

import json


def _f(x) -> str:
    return repr(float(x))


def solve_csv(resp) -> str:
    d = resp.dim
    header = ",".join(f"x{i+1}" for i in range(d)) + ",estimate,std_error,n_paths"
    lines = [header]
    for pt, est, se in zip(resp.points, resp.estimates, resp.std_errors):
        coords = ",".join(_f(c) for c in pt)
        lines.append(f"{coords},{_f(est)},{_f(se)},{resp.n_paths}")
    return "\n".join(lines) + "\n"


def occupation_csv(resp) -> str:
    lines = ["r,x_norm,mc_estimate,closed_form,std_error"]
    for row in resp.rows:
        lines.append(",".join([_f(row.r), _f(row.x_norm), _f(row.mc_estimate),
                               _f(row.closed_form), _f(row.std_error)]))
    return "\n".join(lines) + "\n"


def probe_csv(resp) -> str:
    lines = ["t,prob_exit_le_t,std_error"]
    for row in resp.rows:
        lines.append(",".join([_f(row.t), _f(row.prob_exit_le_t),
                               _f(row.std_error)]))
    return "\n".join(lines) + "\n"


def simulate_csv(resp) -> str:
    lines = ["t_end,mean_sq_norm,std_error,reference_sq_norm,n_paths"]
    lines.append(",".join([_f(resp.t_end), _f(resp.mean_sq_norm),
                           _f(resp.std_error), _f(resp.reference_sq_norm),
                           str(resp.n_paths)]))
    return "\n".join(lines) + "\n"


def validate_csv(resp) -> str:
    lines = ["check,passed,value,target,tol"]
    for row in resp.checks:
        lines.append(",".join([row.check, str(row.passed).lower(),
                               _f(row.value), _f(row.target), _f(row.tol)]))
    return "\n".join(lines) + "\n"


def to_json(resp) -> str:
    """JSON mirror of any response model (config echo included)."""
    return json.dumps(resp.model_dump(), sort_keys=True, indent=2) + "\n"


def trace_csv(dim: int, rows) -> str:
    header = "path_index,t," + ",".join(f"x{i+1}" for i in range(dim)) \
        + ",jumped_root"
    lines = [header]
    for path_index, t, x, root in rows:
        coords = ",".join(_f(c) for c in x)
        lines.append(f"{path_index},{_f(t)},{coords},"
                     f"{'' if root is None else root}")
    return "\n".join(lines) + "\n"


CSV_EMITTERS = {
    "solve": solve_csv,
    "occupation": occupation_csv,
    "probe": probe_csv,
    "simulate": simulate_csv,
    "validate": validate_csv,
}
