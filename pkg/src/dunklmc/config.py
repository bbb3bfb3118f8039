"""Flat keyed config format for the CLI.

One ``section.key = value`` assignment per line; ``#`` starts a comment.
Values: integers, floats, booleans (true/false), bare strings,
comma-separated number lists, and semicolon-separated point lists in
parentheses.  Lengths are Euclidean units, times are process time.

The serializer emits a canonical form (fixed key order, repr floats),
so parse -> serialize -> parse is the identity on valid configs.

Example::

    roots.family = z2_product
    roots.dim = 2
    roots.multiplicities = 0.7, 0.7
    domain.kind = ball
    domain.center = 0.0, 0.0
    domain.radius = 1.0
    sim.paths = 100000
    sim.seed = 7
    task.kind = solve
    task.points = (0.3, 0.0); (0.0, 0.5)
    task.boundary = coord:1
    output.format = csv
    output.path = solve_out.csv
"""

from __future__ import annotations

import re

from .errors import ConfigError
from .models import (BoundarySpec, DomainSpec, OccupationRequest, OutputSpec,
                     ProbeRequest, RootSpec, SimSpec, SimulateRequest,
                     SolveRequest, ValidateRequest)

_NUM = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_scalar(raw: str):
    raw = raw.strip()
    if raw.lower() in ("true", "false"):
        return raw.lower() == "true"
    if _NUM.match(raw):
        if re.match(r"^[+-]?\d+$", raw):
            return int(raw)
        return float(raw)
    return raw


def _parse_value(raw: str):
    raw = raw.strip()
    if ";" in raw or raw.startswith("("):
        pts = []
        for part in raw.split(";"):
            part = part.strip()
            if not part:
                continue
            if not (part.startswith("(") and part.endswith(")")):
                raise ConfigError(f"point list entry '{part}' needs parentheses")
            pts.append([float(v) for v in part[1:-1].split(",")])
        return pts
    if "," in raw:
        return [_parse_scalar(v) for v in raw.split(",")]
    return _parse_scalar(raw)


def parse_flat(text: str) -> dict:
    """Flat config text -> nested {section: {key: value}} dict."""
    tree: dict = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        key, raw = line.split("=", 1)
        key = key.strip()
        if not re.match(r"^[a-z_]+\.[a-z_0-9]+$", key):
            raise ConfigError(f"line {ln}: bad key '{key}' (use section.key)")
        section, field = key.split(".", 1)
        tree.setdefault(section, {})
        if field in tree[section]:
            raise ConfigError(f"line {ln}: duplicate key '{key}'")
        tree[section][field] = _parse_value(raw)
    return tree


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    if isinstance(v, (list, tuple)):
        if v and isinstance(v[0], (list, tuple)):
            return "; ".join("(" + ", ".join(repr(float(c)) for c in p) + ")"
                             for p in v)
        return ", ".join(_fmt_value(x) for x in v)
    raise ConfigError(f"cannot serialize value {v!r}")


_KEY_ORDER = ["roots", "domain", "sim", "task", "output"]


def serialize_flat(tree: dict) -> str:
    lines = []
    sections = [s for s in _KEY_ORDER if s in tree] \
        + sorted(s for s in tree if s not in _KEY_ORDER)
    for section in sections:
        for field in sorted(tree[section]):
            v = tree[section][field]
            if v is None:
                continue
            lines.append(f"{section}.{field} = {_fmt_value(v)}")
    return "\n".join(lines) + "\n"


def _as_float_list(v, what):
    if isinstance(v, (int, float)):
        return [float(v)]
    if isinstance(v, list) and all(isinstance(x, (int, float)) for x in v):
        return [float(x) for x in v]
    raise ConfigError(f"{what} must be a number list")


def _as_points(v, what):
    if isinstance(v, list) and v and isinstance(v[0], list):
        return [[float(c) for c in p] for p in v]
    if isinstance(v, list) and all(isinstance(x, (int, float)) for x in v):
        return [[float(x) for x in v]]
    raise ConfigError(f"{what} must be a point list like (a, b); (c, d)")


def _boundary_from_value(v) -> BoundarySpec:
    """Boundary selector: const:c | coord:i | product:i,j | g_lambda |
    table:path.csv (CSV rows x1..xd,value; nearest-neighbor lookup)."""
    if not isinstance(v, str):
        raise ConfigError("task.boundary must be a selector string")
    name, _, arg = v.partition(":")
    name = name.strip().lower()
    if name == "const":
        return BoundarySpec(name="const", value=float(arg or 0.0))
    if name == "coord":
        return BoundarySpec(name="coord", i=int(arg or 1))
    if name == "product":
        ij = [int(x) for x in arg.split(",")] if arg else [1, 2]
        if len(ij) != 2:
            raise ConfigError("product boundary takes two indices i,j")
        return BoundarySpec(name="product", i=ij[0], j=ij[1])
    if name == "g_lambda":
        return BoundarySpec(name="g_lambda")
    if name == "table":
        if not arg:
            raise ConfigError("table boundary needs a CSV path")
        pts, vals = _load_table(arg.strip())
        return BoundarySpec(name="table", table_points=pts, table_values=vals)
    raise ConfigError(f"unknown boundary selector '{v}'")


def _load_table(path: str):
    pts, vals = [], []
    try:
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                cells = [float(c) for c in line.split(",")]
                if len(cells) < 2:
                    raise ConfigError("table rows need x1..xd,value")
                pts.append(cells[:-1])
                vals.append(cells[-1])
    except OSError as exc:
        raise ConfigError(f"cannot read boundary table '{path}': {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad number in boundary table '{path}': {exc}") from exc
    if not pts:
        raise ConfigError(f"boundary table '{path}' is empty")
    return pts, vals


def _roots_spec(tree) -> RootSpec:
    sec = dict(tree.get("roots", {}))
    known = {"family", "dim", "multiplicities", "dihedral_m", "custom_roots",
             "custom_multiplicities"}
    _reject_unknown("roots", sec, known)
    spec = RootSpec(
        family=str(sec.get("family", "z2_product")),
        dim=int(sec.get("dim", 2)),
        multiplicities=_as_float_list(sec.get("multiplicities", []),
                                      "roots.multiplicities")
        if "multiplicities" in sec else [],
        dihedral_m=int(sec["dihedral_m"]) if "dihedral_m" in sec else None,
        custom_roots=_as_points(sec["custom_roots"], "roots.custom_roots")
        if "custom_roots" in sec else None,
        custom_multiplicities=_as_float_list(
            sec["custom_multiplicities"], "roots.custom_multiplicities")
        if "custom_multiplicities" in sec else None)
    return spec


def _domain_spec(tree) -> DomainSpec:
    sec = dict(tree.get("domain", {}))
    known = {"kind", "center", "radius", "r_inner", "r_outer", "lo", "hi"}
    _reject_unknown("domain", sec, known)
    return DomainSpec(
        kind=str(sec.get("kind", "ball")),
        center=_as_float_list(sec["center"], "domain.center")
        if "center" in sec else None,
        radius=float(sec["radius"]) if "radius" in sec else None,
        r_inner=float(sec["r_inner"]) if "r_inner" in sec else None,
        r_outer=float(sec["r_outer"]) if "r_outer" in sec else None,
        lo=_as_float_list(sec["lo"], "domain.lo") if "lo" in sec else None,
        hi=_as_float_list(sec["hi"], "domain.hi") if "hi" in sec else None)


def _sim_spec(tree) -> SimSpec:
    sec = dict(tree.get("sim", {}))
    known = {"dt_base", "dt_floor", "adaptive", "boundary_refine",
             "jump_cap_per_step", "seed", "paths"}
    _reject_unknown("sim", sec, known)
    kwargs = {}
    for field in known:
        if field in sec:
            kwargs[field] = sec[field]
    return SimSpec(**kwargs)


def _output_spec(tree) -> OutputSpec:
    sec = dict(tree.get("output", {}))
    _reject_unknown("output", sec, {"format", "path"})
    fmt = str(sec.get("format", "csv")).lower()
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format must be csv or json")
    return OutputSpec(format=fmt, path=sec.get("path"))


def _reject_unknown(section, sec, known):
    unknown = set(sec) - known
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")


def build_request(tree: dict):
    """(task_kind, request_model, OutputSpec) from a parsed config tree."""
    task = dict(tree.get("task", {}))
    kind = str(task.get("kind", "")).lower()
    if not kind:
        raise ConfigError("task.kind is required (solve | simulate | "
                          "occupation | probe | validate)")
    out = _output_spec(tree)
    if kind == "solve":
        _reject_unknown("task", task, {"kind", "points", "boundary"})
        if "points" not in task:
            raise ConfigError("solve needs task.points")
        req = SolveRequest(roots=_roots_spec(tree), domain=_domain_spec(tree),
                           sim=_sim_spec(tree),
                           boundary=_boundary_from_value(
                               task.get("boundary", "const:0")),
                           points=_as_points(task["points"], "task.points"))
    elif kind == "simulate":
        _reject_unknown("task", task, {"kind", "t_end", "x0"})
        req = SimulateRequest(roots=_roots_spec(tree), sim=_sim_spec(tree),
                              t_end=float(task.get("t_end", 1.0)),
                              x0=_as_float_list(task["x0"], "task.x0")
                              if "x0" in task else None)
    elif kind == "occupation":
        _reject_unknown("task", task,
                        {"kind", "region_radius", "base_points", "escape_radius"})
        if "base_points" not in task:
            raise ConfigError("occupation needs task.base_points")
        req = OccupationRequest(
            roots=_roots_spec(tree), sim=_sim_spec(tree),
            region_radius=float(task.get("region_radius", 1.0)),
            base_points=_as_points(task["base_points"], "task.base_points"),
            escape_radius=float(task["escape_radius"])
            if "escape_radius" in task else None)
    elif kind == "probe":
        _reject_unknown("task", task,
                        {"kind", "point", "t_list", "substeps", "require_boundary"})
        if "point" not in task or "t_list" not in task:
            raise ConfigError("probe needs task.point and task.t_list")
        req = ProbeRequest(
            roots=_roots_spec(tree), domain=_domain_spec(tree),
            sim=_sim_spec(tree),
            point=_as_float_list(task["point"], "task.point"),
            t_list=_as_float_list(task["t_list"], "task.t_list"),
            substeps=int(task.get("substeps", 32768)),
            require_boundary=bool(task.get("require_boundary", True)))
    elif kind == "validate":
        _reject_unknown("task", task, {"kind", "suite"})
        seed = int(tree.get("sim", {}).get("seed", 0))
        req = ValidateRequest(suite=str(task.get("suite", "quick")), seed=seed)
    else:
        raise ConfigError(f"unknown task kind '{kind}'")
    return kind, req, out


def tree_from_request(kind: str, req, out: OutputSpec) -> dict:
    """Inverse of :func:`build_request` for canonical echoing."""
    tree: dict = {"task": {"kind": kind},
                  "output": {"format": out.format, "path": out.path}}
    dump = req.model_dump()
    if "roots" in dump:
        tree["roots"] = {k: v for k, v in dump["roots"].items() if v not in
                         (None, [])}
    if "domain" in dump:
        tree["domain"] = {k: v for k, v in dump["domain"].items()
                          if v is not None}
    if "sim" in dump:
        tree["sim"] = dump["sim"]
    if kind == "solve":
        tree["task"]["points"] = dump["points"]
        b = dump["boundary"]
        sel = b["name"]
        if sel == "const":
            sel = f"const:{b['value']}"
        elif sel == "coord":
            sel = f"coord:{b['i']}"
        elif sel == "product":
            sel = f"product:{b['i']},{b['j']}"
        tree["task"]["boundary"] = sel
    elif kind == "simulate":
        tree["task"]["t_end"] = dump["t_end"]
        if dump.get("x0") is not None:
            tree["task"]["x0"] = dump["x0"]
    elif kind == "occupation":
        tree["task"]["region_radius"] = dump["region_radius"]
        tree["task"]["base_points"] = dump["base_points"]
        if dump.get("escape_radius") is not None:
            tree["task"]["escape_radius"] = dump["escape_radius"]
    elif kind == "probe":
        tree["task"]["point"] = dump["point"]
        tree["task"]["t_list"] = dump["t_list"]
        tree["task"]["substeps"] = dump["substeps"]
        tree["task"]["require_boundary"] = dump["require_boundary"]
    elif kind == "validate":
        tree["task"]["suite"] = dump["suite"]
        tree.pop("roots", None)
        tree.pop("domain", None)
        tree["sim"] = {"seed": dump["seed"]}
    return tree


def parse_config(text: str):
    """Config text -> (task kind, request model, OutputSpec); fail-fast."""
    return build_request(parse_flat(text))


def serialize_config(kind: str, req, out: OutputSpec) -> str:
    return serialize_flat(tree_from_request(kind, req, out))
