"""Evaluation metrics for a finished configuration and the run report schema."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .coverage import AreaEstimator, EstimatorParams, estimator_for
from .geometry import CircleConfiguration, ConvexPolygon, halfplane_cut_area, voronoi_cell_areas

SCHEMA_VERSION = "1.0"

# Four metrics have no published formula; these are the conventions used here.
METRIC_CONVENTIONS = {
    "coverage_rate": "covered_area / Area(P)",
    "usage_rate": "covered_area / (n * pi * r^2)",
    "min_gap": "artifact convention: min over pairs of |c_i - c_j| - 2r (negative = worst overlap)",
    "uniformity_index": "artifact convention: stddev / mean of clipped Voronoi cell areas (0 = uniform)",
    "boundary_adaptability": "artifact convention: mean over circles of the disc fraction beyond the nearest edge line",
    "distribution_quality": "artifact convention: mean nearest-neighbour distance / 2r (1 = close packed)",
    "wall_time_ms": "wall-clock time of the whole pipeline",
}


def _estimator(poly, estimator) -> AreaEstimator:
    if isinstance(estimator, AreaEstimator):
        return estimator
    return estimator_for(poly, estimator or EstimatorParams())


def coverage_rate(poly: ConvexPolygon, cfg: CircleConfiguration, estimator=None) -> float:
    est = _estimator(poly, estimator)
    return est.covered_area(cfg.centers, cfg.radius) / poly.area


def usage_rate(poly: ConvexPolygon, cfg: CircleConfiguration, estimator=None) -> float:
    est = _estimator(poly, estimator)
    return est.covered_area(cfg.centers, cfg.radius) / (cfg.n * math.pi * cfg.radius**2)


def _pair_distances(cfg: CircleConfiguration) -> np.ndarray:
    c = cfg.centers
    d = np.hypot(*(c[:, None, :] - c[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    return d


def min_gap(cfg: CircleConfiguration) -> float:
    """Smallest ``|c_i - c_j| - 2r``; ``inf`` for a single circle."""
    if cfg.n < 2:
        return math.inf
    return float(_pair_distances(cfg).min() - 2 * cfg.radius)


def distribution_quality(poly: ConvexPolygon, cfg: CircleConfiguration) -> float:
    if cfg.n < 2:
        return math.nan
    return float(_pair_distances(cfg).min(axis=1).mean() / (2 * cfg.radius))


def uniformity_index(poly: ConvexPolygon, cfg: CircleConfiguration) -> float:
    areas = voronoi_cell_areas(cfg.centers, poly)
    mean = areas.mean()
    return float(areas.std() / mean) if mean > 0 else math.nan


def boundary_adaptability(poly: ConvexPolygon, cfg: CircleConfiguration) -> float:
    r = cfg.radius
    d = np.clip(poly.edge_distances(cfg.centers).min(axis=1), 0.0, r)
    return float(np.mean(halfplane_cut_area(d, r)) / (math.pi * r * r))


def compute_metrics(poly: ConvexPolygon, cfg: CircleConfiguration, estimator=None) -> dict:
    """All configuration metrics from one shared sample set."""
    est = _estimator(poly, estimator)
    area = est.covered_area(cfg.centers, cfg.radius)
    return {
        "coverage_rate": area / poly.area,
        "usage_rate": area / (cfg.n * math.pi * cfg.radius**2),
        "boundary_adaptability": boundary_adaptability(poly, cfg),
        "min_gap": min_gap(cfg),
        "distribution_quality": distribution_quality(poly, cfg),
        "uniformity_index": uniformity_index(poly, cfg),
        "covered_area": area,
        "covered_area_error": est.error_bound(cfg.centers, cfg.radius),
    }


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    return value


@dataclass
class RunReport:
    """Outcome of one pipeline run.  ``to_json`` is the stable file format."""

    coverage_rate: float
    usage_rate: float
    boundary_adaptability: float
    min_gap: float
    distribution_quality: float
    uniformity_index: float
    wall_time_ms: float
    estimator_meta: dict
    n: int = 0
    radius: float = 0.0
    polygon: list = field(default_factory=list)
    centers: list = field(default_factory=list)
    stages: dict = field(default_factory=dict)
    dynamics_trace: list = field(default_factory=list)
    boundary_trace: list = field(default_factory=list)
    converged: bool = True
    messages: list = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION
    metric_conventions: dict = field(default_factory=lambda: dict(METRIC_CONVENTIONS))

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        known = {f for f in cls.__dataclass_fields__}
        kwargs = {k: v for k, v in data.items() if k in known}
        for key in ("min_gap", "distribution_quality", "uniformity_index"):
            if kwargs.get(key) is None:
                kwargs[key] = math.nan
        return cls(**kwargs)
