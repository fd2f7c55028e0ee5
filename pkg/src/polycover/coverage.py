"""Sample-based estimates of the polygon area covered by a union of discs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgument
from .geometry import CircleConfiguration, ConvexPolygon

METHODS = ("monte_carlo", "grid")


@dataclass(frozen=True)
class EstimatorParams:
    """How to estimate covered area.

    ``monte_carlo`` draws ``samples`` uniform points inside the polygon by
    rejection from its bounding box; ``grid`` uses the centres of a
    ``resolution x resolution`` grid over the bounding box.
    """

    method: str = "monte_carlo"
    samples: int = 200_000
    resolution: int = 512
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgument(f"unknown estimator method {self.method!r}")
        if int(self.samples) <= 0 or int(self.resolution) <= 0:
            raise InvalidArgument("sample count and resolution must be positive")

    def meta(self) -> dict:
        if self.method == "grid":
            return {"method": "grid", "resolution": int(self.resolution)}
        return {"method": self.method, "samples": int(self.samples), "seed": int(self.seed)}


def _sample_polygon(poly: ConvexPolygon, params: EstimatorParams) -> np.ndarray:
    x0, y0, x1, y1 = poly.bbox
    if params.method == "grid":
        k = int(params.resolution)
        xs = x0 + (np.arange(k) + 0.5) * (x1 - x0) / k
        ys = y0 + (np.arange(k) + 0.5) * (y1 - y0) / k
        gx, gy = np.meshgrid(xs, ys)
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        return pts[poly.contains(pts)]
    rng = np.random.default_rng(int(params.seed))
    want = int(params.samples)
    fill = poly.area / ((x1 - x0) * (y1 - y0))
    chunks, have = [], 0
    while have < want:
        m = int((want - have) / fill * 1.1) + 64
        pts = rng.uniform((x0, y0), (x1, y1), size=(m, 2))
        pts = pts[poly.contains(pts)]
        chunks.append(pts)
        have += len(pts)
    return np.concatenate(chunks)[:want]


class AreaEstimator:
    """A fixed sample set inside one polygon, reusable across configurations.

    Holding the sample set fixed makes estimates monotone in the set of
    discs and lets different stages of a run be compared without sampling
    noise between them.
    """

    def __init__(self, poly: ConvexPolygon, params: EstimatorParams | None = None, points=None):
        self.poly = poly
        self.params = params or EstimatorParams()
        self.points = _sample_polygon(poly, self.params) if points is None else np.asarray(points, float)
        self.points.setflags(write=False)
        if params is not None and params.method == "grid":
            x0, y0, x1, y1 = poly.bbox
            self.cell = math.hypot(x1 - x0, y1 - y0) / params.resolution
        else:
            self.cell = 0.0

    @property
    def n_samples(self) -> int:
        return len(self.points)

    def covered_mask(self, centers, r: float) -> np.ndarray:
        c = np.asarray(centers, dtype=float).reshape(-1, 2)
        if len(c) == 0 or len(self.points) == 0:
            return np.zeros(len(self.points), dtype=bool)
        dist, _ = cKDTree(c).query(self.points, k=1, distance_upper_bound=r * (1 + 1e-12))
        return dist <= r

    def covered_fraction(self, centers, r: float) -> float:
        if len(self.points) == 0:
            return 0.0
        return float(self.covered_mask(centers, r).mean())

    def covered_area(self, centers, r: float) -> float:
        c = np.asarray(centers, dtype=float).reshape(-1, 2)
        est = self.covered_fraction(c, r) * self.poly.area
        return min(est, len(c) * math.pi * r * r)

    def error_bound(self, centers, r: float) -> float:
        """Three binomial standard errors (Monte Carlo) or a boundary-band
        bound (grid: every mis-classified cell straddles a circle or the
        polygon boundary)."""
        c = np.asarray(centers, dtype=float).reshape(-1, 2)
        if self.params.method == "grid":
            band = (2 * math.pi * r * len(c) + self.poly.perimeter) * self.cell
            return band
        p = self.covered_fraction(c, r)
        return 3.0 * math.sqrt(max(p * (1 - p), 1e-12) / max(len(self.points), 1)) * self.poly.area


@lru_cache(maxsize=8)
def _unit_disc_pattern(m: int) -> np.ndarray:
    """``m`` points of a Vogel spiral, evenly spread over the unit disc."""
    k = np.arange(m) + 0.5
    rad = np.sqrt(k / m)
    ang = k * math.pi * (3.0 - math.sqrt(5.0))
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    pts.setflags(write=False)
    return pts


def disc_usage_rate(poly: ConvexPolygon, centers, r: float, samples_per_disc: int = 1024) -> float:
    """Usage rate ``A_cover / (n pi r^2)`` estimated from points inside the discs.

    Each disc carries the same spiral of sample points; a point inside the
    polygon that lies in ``k`` discs contributes ``1/k``, so the mean over
    all points is exactly the covered share of the total disc area in the
    limit.  The relative accuracy does not depend on how small the discs are
    compared with the polygon, unlike polygon-anchored sampling.
    """
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    if len(c) == 0:
        return 0.0
    pts = (c[:, None, :] + r * _unit_disc_pattern(int(samples_per_disc))[None]).reshape(-1, 2)
    inside = poly.contains(pts)
    if not inside.any():
        return 0.0
    mult = cKDTree(c).query_ball_point(pts[inside], r * (1 + 1e-12), return_length=True)
    return float(np.sum(1.0 / np.maximum(mult, 1)) / len(pts))


@lru_cache(maxsize=32)
def estimator_for(poly: ConvexPolygon, params: EstimatorParams) -> AreaEstimator:
    """Cached :class:`AreaEstimator`; identical (polygon, params) share samples."""
    return AreaEstimator(poly, params)


def covered_area(poly: ConvexPolygon, cfg: CircleConfiguration, estimator: EstimatorParams | None = None) -> float:
    """Estimated ``Area(P ∩ ∪ C_i)``, clamped to ``[0, min(Area(P), n π r²)]``."""
    return estimator_for(poly, estimator or EstimatorParams()).covered_area(cfg.centers, cfg.radius)
