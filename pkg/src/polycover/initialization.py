"""Structure-preserving initialization from a hexagonal close-packed lattice.

The lattice is generated ring by ring around the origin, rotated onto the
principal direction of the polygon's minimum bounding rectangle, scaled to
fit and translated onto the vertex centroid.  Circles that end up too close
to the boundary are filtered out and replaced by corner and edge insertions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleFit, InvalidArgument
from .geometry import CircleConfiguration, ConvexPolygon, minimum_bounding_rectangle, signed_distance


@dataclass(frozen=True)
class HexLattice:
    points: np.ndarray
    layers: int
    spacing: float
    bounding_box: tuple[float, float]

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class InitParams:
    n: int
    r: float
    alpha_safety: float = 0.92
    corner_insertion: bool = True
    alpha_inset: float = 0.98
    overlap_eps: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if int(self.n) < 1:
            raise InvalidArgument("n must be >= 1")
        if not self.r > 0:
            raise InvalidArgument("r must be positive")
        if not 0.9 < self.alpha_safety < 0.95:
            raise InvalidArgument("alpha_safety must lie in (0.9, 0.95)")
        if not self.alpha_inset >= 0:
            raise InvalidArgument("alpha_inset must be non-negative")
        if not 0 <= self.overlap_eps < 1:
            raise InvalidArgument("overlap_eps must lie in [0, 1)")


def full_layer_count(layers: int) -> int:
    return 1 + 3 * layers * (layers + 1)


def generate_hex_lattice(n: int, r: float) -> HexLattice:
    """The ``n`` points of a hexagonal lattice of spacing ``2r`` nearest the origin.

    Layer ``l`` holds the points ``2rl e^{ik pi/3} + 2rm e^{i(k+2) pi/3}`` for
    ``k = 0..5`` and ``m = 0..l-1``.  Whole layers are generated until at
    least ``n`` points exist; the surplus of the last layer is dropped in
    order of radius, then angle, then generation index.
    """
    if int(n) < 1:
        raise InvalidArgument("n must be >= 1")
    if not r > 0:
        raise InvalidArgument("r must be positive")
    n = int(n)
    layers = 0
    while full_layer_count(layers) < n:
        layers += 1
    z = [0j]
    for l in range(1, layers + 1):
        for k in range(6):
            for m in range(l):
                z.append(2 * r * l * np.exp(1j * k * math.pi / 3) + 2 * r * m * np.exp(1j * (k + 2) * math.pi / 3))
    pts = np.column_stack([np.real(z), np.imag(z)])

    # ring corners are never emitted twice (m < l), but guard anyway
    keep = []
    for i, p in enumerate(pts):
        if all(np.hypot(*(p - pts[j])) > 1e-9 * r for j in keep):
            keep.append(i)
    pts = pts[keep]

    rad = np.round(np.hypot(pts[:, 0], pts[:, 1]) / (2 * r), 9)
    ang = np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * math.pi)
    ang = np.round(np.where(ang > 2 * math.pi - 1e-12, 0.0, ang), 9)
    order = np.lexsort((np.arange(len(pts)), ang, rad))[:n]
    pts = pts[order]
    span = pts.max(axis=0) - pts.min(axis=0)
    return HexLattice(points=pts, layers=layers, spacing=2.0 * r, bounding_box=(float(span[0]), float(span[1])))


def principal_direction(poly: ConvexPolygon) -> tuple[np.ndarray, float]:
    """Unit direction of the long side of the minimum bounding rectangle, and
    its angle in ``[0, pi)``."""
    rect = minimum_bounding_rectangle(poly)
    return rect.direction, rect.angle


def fit_lattice(lattice: HexLattice, poly: ConvexPolygon, params: InitParams) -> CircleConfiguration:
    """Rotate, scale and translate the lattice into ``poly``.

    The scale is ``beta = alpha * min((w_p - 2r)/w_h, (h_p - 2r)/h_h)`` where
    ``w_p >= h_p`` are the bounding-rectangle sides and ``w_h, h_h`` the
    lattice bounding box; a zero lattice extent drops out of the minimum.
    The lattice's bounding-box centre lands on the vertex centroid.
    """
    r = params.r
    pts = lattice.points
    if len(pts) == 1:
        return CircleConfiguration(poly.centroid[None, :], r)
    rect = minimum_bounding_rectangle(poly)
    w_h, h_h = lattice.bounding_box
    ratios = []
    if w_h > 0:
        ratios.append((rect.width - 2 * r) / w_h)
    if h_h > 0:
        ratios.append((rect.height - 2 * r) / h_h)
    beta = min(ratios) * params.alpha_safety
    if not beta > 0:
        raise InfeasibleFit(f"scaling factor {beta:.4g} is not positive; polygon too small for r={r}")
    center = 0.5 * (pts.max(axis=0) + pts.min(axis=0))
    c, s = math.cos(rect.angle), math.sin(rect.angle)
    rot = np.array([[c, -s], [s, c]])
    placed = beta * (pts - center) @ rot.T + poly.centroid
    return CircleConfiguration(placed, r)


def corner_slots(poly: ConvexPolygon, r: float) -> np.ndarray:
    """Centres tangent to both edges at each vertex, sharpest corner first."""
    v = poly.vertices
    to_prev = np.roll(v, 1, axis=0) - v
    to_next = np.roll(v, -1, axis=0) - v
    a = to_prev / np.hypot(*to_prev.T)[:, None]
    b = to_next / np.hypot(*to_next.T)[:, None]
    cosphi = np.clip((a * b).sum(axis=1), -1.0, 1.0)
    phi = np.arccos(cosphi)
    bis = a + b
    bis /= np.hypot(*bis.T)[:, None]
    slots = v + bis * (r / np.sin(phi / 2))[:, None]
    order = np.lexsort((np.arange(len(v)), np.round(phi, 12)))
    return slots[order]


def edge_slots(poly: ConvexPolygon, r: float, step: float | None = None) -> np.ndarray:
    """Candidate centres at distance ``r`` inside each edge, every ``step``."""
    step = step or r / 4
    out = []
    for j in range(poly.n_edges):
        t = np.arange(0.0, poly.edge_lengths[j] + 1e-12, step)
        out.append(poly.edge_starts[j] + np.outer(t, poly.edge_directions[j]) + r * poly.inward_normals[j])
    return np.concatenate(out)


def filter_and_insert(cfg: CircleConfiguration, poly: ConvexPolygon, params: InitParams) -> CircleConfiguration:
    """Drop centres closer than ``alpha_inset * r`` to the boundary, then
    greedily refill corner slots and edge slots that keep every pair at least
    ``2r(1 - overlap_eps)`` apart.  May return fewer than ``params.n`` circles.
    """
    r = cfg.radius
    inset = params.alpha_inset * r
    sd = signed_distance(cfg.centers, poly)
    kept = [c for c, d in zip(cfg.centers, sd) if d >= inset]
    if params.corner_insertion and len(kept) < params.n:
        min_sep = 2 * r * (1 - params.overlap_eps)
        for cand in np.concatenate([corner_slots(poly, r), edge_slots(poly, r)]):
            if len(kept) >= params.n:
                break
            if signed_distance(cand, poly) < inset - poly.tol:
                continue
            if kept and np.min(np.hypot(*(np.asarray(kept) - cand).T)) < min_sep:
                continue
            kept.append(cand)
    if not kept:
        # a configuration cannot be empty; fall back to the centroid circle
        kept = [poly.centroid]
    return CircleConfiguration(np.asarray(kept), r)


def initialize(poly: ConvexPolygon, params: InitParams) -> CircleConfiguration:
    """Full structure-preserving initialization returning exactly ``n`` circles.

    Circles the filter/insert step could not place start at the centroid
    with a small seeded jitter and are left to the force relaxation.
    """
    lattice = generate_hex_lattice(params.n, params.r)
    try:
        cfg = fit_lattice(lattice, poly, params)
    except InfeasibleFit:
        cfg = CircleConfiguration(poly.centroid[None, :], params.r)
    cfg = filter_and_insert(cfg, poly, params)
    centers = cfg.centers[: params.n]
    deficit = params.n - len(centers)
    if deficit > 0:
        rng = np.random.default_rng(params.seed)
        rad = 0.5 * params.r * np.sqrt(rng.uniform(size=deficit))
        ang = rng.uniform(0, 2 * math.pi, size=deficit)
        extra = poly.centroid + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        centers = np.concatenate([centers, extra])
    return CircleConfiguration(centers, params.r)
