"""Pydantic request/response models shared by the HTTP service and the CLI.

The CLI parses its flat config format into these models and either runs
them in process or posts them to a running service; both paths execute
the same handlers, so results are identical either way.
"""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field

from . import __version__
from .algebra import ScalarField
from .domains import Domain
from .errors import ConfigError, DataError
from .fields import (constant_field, coordinate_field, g_lambda_field,
                     product_field)
from .process import SimConfig
from .rootsys import RootSystem, build_root_system


class RootSpec(BaseModel):
    family: str = "z2_product"
    dim: int = 2
    multiplicities: list[float] = Field(default_factory=list)
    dihedral_m: int | None = None
    custom_roots: list[list[float]] | None = None
    custom_multiplicities: list[float] | None = None

    def build(self) -> RootSystem:
        return build_root_system(
            self.family, self.dim, self.multiplicities,
            dihedral_m=self.dihedral_m, custom_roots=self.custom_roots,
            custom_multiplicities=self.custom_multiplicities)


class DomainSpec(BaseModel):
    kind: str = "ball"
    center: list[float] | None = None
    radius: float | None = None
    r_inner: float | None = None
    r_outer: float | None = None
    lo: list[float] | None = None
    hi: list[float] | None = None

    def build(self, dim: int) -> Domain:
        kind = self.kind.lower()
        if kind == "ball":
            if self.radius is None:
                raise ConfigError("ball domain needs a radius")
            center = self.center if self.center is not None else [0.0] * dim
            if len(center) != dim:
                raise ConfigError("domain center has the wrong dimension")
            return Domain.ball(center, self.radius)
        if kind == "annulus":
            if self.r_inner is None or self.r_outer is None:
                raise ConfigError("annulus needs r_inner and r_outer")
            return Domain.annulus(self.r_inner, self.r_outer, dim=dim)
        if kind == "box":
            if self.lo is None or self.hi is None:
                raise ConfigError("box needs lo and hi")
            if len(self.lo) != dim or len(self.hi) != dim:
                raise ConfigError("box bounds have the wrong dimension")
            return Domain.box(self.lo, self.hi)
        raise ConfigError(f"unknown domain kind '{self.kind}'")


class SimSpec(BaseModel):
    dt_base: float = 1e-3
    dt_floor: float = 1e-7
    adaptive: bool = True
    boundary_refine: bool = True
    jump_cap_per_step: int = 1
    seed: int = 0
    paths: int = 10000

    def build(self) -> SimConfig:
        try:
            return SimConfig(dt_base=self.dt_base, dt_floor=self.dt_floor,
                             adaptive=self.adaptive,
                             boundary_refine=self.boundary_refine,
                             jump_cap_per_step=self.jump_cap_per_step,
                             seed=self.seed, paths=self.paths)
        except ConfigError:
            raise
        except Exception as exc:  # pragma: no cover
            raise ConfigError(str(exc)) from exc


class BoundarySpec(BaseModel):
    """Named boundary data: const, coord, product, g_lambda or table.

    The table form carries explicit sample points/values and is looked
    up by nearest neighbor (documented as approximate).
    """

    name: str = "const"
    value: float = 0.0
    i: int = 1
    j: int = 2
    table_points: list[list[float]] | None = None
    table_values: list[float] | None = None

    def build(self, sys: RootSystem) -> ScalarField:
        name = self.name.lower()
        if name == "const":
            return constant_field(self.value, sys.dim)
        if name == "coord":
            return coordinate_field(self.i, sys.dim)
        if name == "product":
            return product_field(self.i, self.j, sys.dim)
        if name == "g_lambda":
            return g_lambda_field(sys)
        if name == "table":
            if not self.table_points or self.table_values is None:
                raise ConfigError("table boundary data needs points and values")
            pts = np.asarray(self.table_points, dtype=float)
            vals = np.asarray(self.table_values, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != sys.dim:
                raise ConfigError("table points have the wrong dimension")
            if len(vals) != len(pts):
                raise DataError("table needs one value per point")
            from scipy.spatial import cKDTree
            tree = cKDTree(pts)
            return ScalarField(
                eval=lambda q: vals[tree.query(np.asarray(q, dtype=float))[1]],
                name="table")
        raise ConfigError(f"unknown boundary data '{self.name}'")


class OutputSpec(BaseModel):
    format: str = "csv"
    path: str | None = None


def config_echo(sim: SimSpec) -> dict:
    return {"seed": sim.seed, "dt_base": sim.dt_base, "paths": sim.paths,
            "version": __version__}


class SolveRequest(BaseModel):
    roots: RootSpec
    domain: DomainSpec
    sim: SimSpec = SimSpec()
    boundary: BoundarySpec
    points: list[list[float]]


class SolveResponse(BaseModel):
    dim: int
    points: list[list[float]]
    estimates: list[float]
    std_errors: list[float]
    jump_exit_fraction: list[float]
    n_paths: int
    w_invariant_domain: bool
    uniqueness_guaranteed: bool
    config_echo: dict


class SimulateRequest(BaseModel):
    roots: RootSpec
    sim: SimSpec = SimSpec()
    t_end: float = 1.0
    x0: list[float] | None = None


class SimulateResponse(BaseModel):
    t_end: float
    mean_sq_norm: float
    std_error: float
    reference_sq_norm: float   # (d + 2 gamma) t for a start at the origin
    mean_jumps_per_path: float
    n_paths: int
    config_echo: dict


class OccupationRequest(BaseModel):
    roots: RootSpec
    sim: SimSpec = SimSpec()
    region_radius: float = 1.0
    base_points: list[list[float]]
    escape_radius: float | None = None


class OccupationRow(BaseModel):
    r: float
    x_norm: float
    mc_estimate: float
    closed_form: float
    std_error: float


class OccupationResponse(BaseModel):
    rows: list[OccupationRow]
    escape_radius: float
    n_paths: int
    config_echo: dict


class ProbeRequest(BaseModel):
    roots: RootSpec
    domain: DomainSpec
    sim: SimSpec = SimSpec()
    point: list[float]
    t_list: list[float]
    substeps: int = 32768
    require_boundary: bool = True


class ProbeRow(BaseModel):
    t: float
    prob_exit_le_t: float
    std_error: float


class ProbeResponse(BaseModel):
    rows: list[ProbeRow]
    n_paths: int
    config_echo: dict


class ValidateRequest(BaseModel):
    suite: str = "quick"
    seed: int = 0


class CheckRow(BaseModel):
    check: str
    passed: bool
    value: float
    target: float
    tol: float


class ValidateResponse(BaseModel):
    suite: str
    seed: int
    passed: bool
    failed_checks: list[str]
    checks: list[CheckRow]
    config_echo: dict
