"""Run configuration, polygon generation and the three-stage pipeline.

Seed splitting: the global ``seed`` feeds ``numpy.random.SeedSequence``;
its first three spawned children give, in order, the estimator sample seed,
the initialization jitter seed and the random-polygon seed (used only when
a ``random_convex`` polygon spec has no seed of its own).  Each child
contributes the first 32-bit word of ``generate_state``.
"""
from __future__ import annotations

import contextlib
import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .boundary import LagrangianParams, encircle
from .coverage import AreaEstimator, EstimatorParams
from .dynamics import DynamicsParams, expand_radii
from .errors import (
    DegenerateInput,
    InfeasibleFit,
    InvalidArgument,
    NonConvergence,
    NumericalBlowup,
    PolycoverError,
)
from .geometry import CircleConfiguration, ConvexPolygon, convex_hull, is_convex, rigid_transform
from .initialization import InitParams, initialize
from .metrics import RunReport, compute_metrics


class ConfigError(InvalidArgument):
    """Malformed or unknown configuration entries."""


POLYGON_KINDS = {
    "rectangle": ("w", "h"),
    "regular_ngon": ("k", "circumradius"),
    "random_convex": ("point_count", "seed", "size"),
}


@dataclass(frozen=True)
class PolygonSpec:
    kind: str
    params: dict = field(default_factory=dict)
    rotation: float = 0.0
    translation: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in POLYGON_KINDS:
            raise ConfigError(f"unknown polygon kind {self.kind!r}; expected one of {sorted(POLYGON_KINDS)}")
        extra = set(self.params) - set(POLYGON_KINDS[self.kind])
        if extra:
            raise ConfigError(f"unknown {self.kind} parameters: {sorted(extra)}")

    @classmethod
    def parse(cls, text: str) -> "PolygonSpec":
        """Parse ``kind:key=value,...``, e.g. ``regular_ngon:k=6,circumradius=1``."""
        kind, _, rest = text.partition(":")
        params, rotation, translation = {}, 0.0, (0.0, 0.0)
        for item in filter(None, (s.strip() for s in rest.split(","))):
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"expected key=value in polygon spec, got {item!r}")
            if key == "rotation":
                rotation = float(value)
            elif key in ("tx", "ty"):
                tx, ty = translation
                translation = (float(value), ty) if key == "tx" else (tx, float(value))
            else:
                params[key] = float(value) if "." in value or "e" in value.lower() else int(value)
        return cls(kind.strip(), params, rotation, translation)


def generate_polygon(spec: PolygonSpec, default_seed: int = 0) -> ConvexPolygon:
    p = spec.params
    try:
        if spec.kind == "rectangle":
            w, h = float(p["w"]), float(p["h"])
            if not (w > 0 and h > 0):
                raise InvalidArgument("rectangle sides must be positive")
            verts = np.array([(0, 0), (w, 0), (w, h), (0, h)], dtype=float)
        elif spec.kind == "regular_ngon":
            k, radius = int(p["k"]), float(p["circumradius"])
            if k < 3 or not radius > 0:
                raise InvalidArgument("regular_ngon needs k >= 3 and circumradius > 0")
            ang = 2 * math.pi * np.arange(k) / k
            verts = radius * np.column_stack([np.cos(ang), np.sin(ang)])
        else:
            count = int(p["point_count"])
            rng = np.random.default_rng(int(p.get("seed", default_seed)))
            size = float(p.get("size", 10.0))
            verts = convex_hull(rng.uniform(0.0, size, size=(count, 2))).vertices
    except KeyError as exc:
        raise ConfigError(f"{spec.kind} spec is missing parameter {exc.args[0]!r}") from None
    poly = ConvexPolygon(rigid_transform(verts, spec.rotation, spec.translation))
    assert is_convex(poly.vertices)
    return poly


def strict_params(cls, data, where: str, **fixed):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a mapping")
    names = {f.name for f in dataclasses.fields(cls)} - set(fixed)
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    try:
        return cls(**fixed, **data)
    except ConfigError:
        raise
    except (TypeError, InvalidArgument) as exc:
        raise ConfigError(f"{where}: {exc}") from None


@dataclass
class RunConfig:
    """Everything one run needs.  ``polygon`` is either a vertex list or a
    :class:`PolygonSpec`; parameter groups are plain mappings validated
    against the stage parameter classes."""

    polygon: object
    n: int
    r: float
    seed: int = 0
    init: dict = field(default_factory=dict)
    dynamics: dict = field(default_factory=dict)
    boundary: dict = field(default_factory=dict)
    estimator: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    TOP_KEYS = ("polygon", "n", "r", "seed", "init", "dynamics", "boundary", "estimator", "output")

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ConfigError("n must be an integer >= 1")
        if not isinstance(self.r, (int, float)) or not self.r > 0:
            raise ConfigError("r must be a positive number")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        self.r = float(self.r)
        if isinstance(self.polygon, dict):
            self.polygon = strict_params(PolygonSpec, self.polygon, "polygon")
        elif not isinstance(self.polygon, PolygonSpec):
            try:
                self.polygon = [tuple(map(float, v)) for v in self.polygon]
            except (TypeError, ValueError):
                raise ConfigError("polygon must be a vertex list or a generator mapping") from None
        unknown_out = set(self.output) - {"json", "svg"}
        if unknown_out:
            raise ConfigError(f"unknown keys in output: {sorted(unknown_out)}")
        # validate parameter groups now so errors surface before any computation
        self.stage_params(self.derived_seeds())

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a mapping")
        unknown = set(data) - set(cls.TOP_KEYS)
        if unknown:
            raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
        missing = {"polygon", "n", "r"} - set(data)
        if missing:
            raise ConfigError(f"missing required keys: {sorted(missing)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        text = path.read_text()
        try:
            data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        return cls.from_dict(data)

    def derived_seeds(self) -> dict:
        children = np.random.SeedSequence(int(self.seed)).spawn(3)
        words = [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]
        return {"estimator": words[0], "init": words[1], "polygon": words[2]}

    def build_polygon(self) -> ConvexPolygon:
        if isinstance(self.polygon, PolygonSpec):
            return generate_polygon(self.polygon, self.derived_seeds()["polygon"])
        return ConvexPolygon(self.polygon)

    def stage_params(self, seeds: dict):
        est = dict(self.estimator)
        est.setdefault("seed", seeds["estimator"])
        dyn = strict_params(DynamicsParams, self.dynamics, "dynamics", r_target=self.r)
        init = strict_params(InitParams, {"seed": seeds["init"], **self.init}, "init", n=int(self.n), r=dyn.initial_fraction * self.r)
        lag = strict_params(LagrangianParams, self.boundary, "boundary")
        return init, dyn, lag, strict_params(EstimatorParams, est, "estimator")


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except NonConvergence:
        raise
    except (InvalidArgument, DegenerateInput, InfeasibleFit, NumericalBlowup) as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


@dataclass
class PipelineResult:
    report: RunReport
    polygon: ConvexPolygon
    initial: CircleConfiguration
    final: CircleConfiguration


def run(config: RunConfig, trace_every: int = 10) -> PipelineResult:
    """Initialization, radius expansion, boundary encirclement, metrics."""
    t0 = time.perf_counter()
    seeds = config.derived_seeds()
    with _stage("config"):
        poly = config.build_polygon()
        init_p, dyn_p, lag_p, est_p = config.stage_params(seeds)
    estimator = AreaEstimator(poly, est_p)
    messages = []
    converged = True

    with _stage("initialization"):
        init_cfg = initialize(poly, init_p)
    at_target = init_cfg.with_radius(config.r)
    stages = {"initialization": compute_metrics(poly, at_target, estimator)}

    dyn_trace: list = []
    with _stage("dynamics"):
        try:
            state = expand_radii(poly, int(config.n), dyn_p, init_cfg, estimator, trace=dyn_trace)
        except NonConvergence as exc:
            state = exc.result
            converged = False
            messages.append(f"[dynamics] {exc}")
    stages["dynamics"] = compute_metrics(poly, state.configuration, estimator)
    stages["dynamics"]["equilibrium"] = state.at_equilibrium

    with _stage("boundary"):
        enc = encircle(state, poly, lag_p, trace_every=trace_every)
    if not enc.converged:
        converged = False
        messages.append(f"[boundary] no convergence after {enc.iterations} iterations")
    final = enc.configuration
    metrics = compute_metrics(poly, final, estimator)
    stages["boundary"] = dict(metrics, converged=enc.converged, iterations=enc.iterations, moved=int(enc.overflowing.sum()))

    report = RunReport(
        coverage_rate=metrics["coverage_rate"],
        usage_rate=metrics["usage_rate"],
        boundary_adaptability=metrics["boundary_adaptability"],
        min_gap=metrics["min_gap"],
        distribution_quality=metrics["distribution_quality"],
        uniformity_index=metrics["uniformity_index"],
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
        estimator_meta=est_p.meta(),
        n=int(config.n),
        radius=config.r,
        polygon=poly.vertices.tolist(),
        centers=final.centers.tolist(),
        stages=stages,
        dynamics_trace=dyn_trace,
        boundary_trace=enc.trace,
        converged=converged,
        messages=messages,
    )
    return PipelineResult(report, poly, at_target, final)


def run_pipeline(config: RunConfig) -> RunReport:
    return run(config).report


__all__ = [
    "ConfigError",
    "PipelineResult",
    "PolygonSpec",
    "PolycoverError",
    "RunConfig",
    "generate_polygon",
    "run",
    "run_pipeline",
    "strict_params",
]
