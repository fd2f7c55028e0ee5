"""Planar primitives for convex polygons and congruent circles.

Points are plain ``numpy`` arrays of shape ``(2,)`` (or ``(m, 2)`` for
batches).  Polygons are stored in clockwise order so that the right normal
of every directed edge points into the interior; every distance helper in
this package relies on that convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateInput, InvalidArgument

# Relative tolerance for geometric predicates; multiplied by polygon diameter.
REL_TOL = 1e-9


def _as_points(points, name="points") -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidArgument(f"{name} must have shape (m, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} contains non-finite coordinates")
    return arr


def cross2(a, b):
    """z-component of the cross product of 2-vectors (broadcasts)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _shoelace(v: np.ndarray) -> float:
    """Signed area, positive for counter-clockwise order."""
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _diameter(v: np.ndarray) -> float:
    diff = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


class Segment(NamedTuple):
    """Directed segment from ``p1`` to ``p2``."""

    p1: np.ndarray
    p2: np.ndarray


def right_normal(v) -> np.ndarray:
    """Unnormalized right normal ``(v_y, -v_x)`` of a direction vector."""
    v = np.asarray(v, dtype=float)
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def right_distance(a, seg: Segment) -> float:
    """Signed distance of ``a`` to the line through ``seg``; positive on the right."""
    p1 = np.asarray(seg.p1, dtype=float)
    v = np.asarray(seg.p2, dtype=float) - p1
    length = math.hypot(v[0], v[1])
    if length == 0.0:
        raise InvalidArgument("directed segment has coincident endpoints")
    n = right_normal(v)
    return float(np.dot(np.asarray(a, dtype=float) - p1, n) / length)


def is_convex(vertices: Sequence) -> bool:
    """Consecutive-cross-product convexity test.

    Collinear triples (zero cross products) are skipped.  A polygon whose
    edges wind around more than once (a pentagram, say) has consistently
    signed cross products too, so the total turning is also required to be
    one full turn.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        return False
    e = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(e[:, 0], e[:, 1])
    e = e[lengths > 0]
    if len(e) < 3:
        return False
    scale = _diameter(v)
    nxt = np.roll(e, -1, axis=0)
    cr = cross2(e, nxt)
    dots = (e * nxt).sum(axis=1)
    tol = REL_TOL * scale * np.maximum(np.hypot(*e.T), np.hypot(*nxt.T))
    signs = np.sign(cr[np.abs(cr) > tol])
    if len(signs) == 0:
        return False
    if not (np.all(signs > 0) or np.all(signs < 0)):
        return False
    turning = float(np.arctan2(cr, dots).sum())
    return abs(abs(turning) - 2.0 * math.pi) < 1e-6


def _canonicalize(v: np.ndarray) -> np.ndarray:
    """Drop repeated and collinear vertices, then force clockwise order."""
    scale = _diameter(v)
    if scale == 0.0:
        raise DegenerateInput("all vertices coincide")
    tol = REL_TOL * scale
    pts = list(v)
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        for i in range(len(pts)):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
            ac = c - a
            lac = math.hypot(ac[0], ac[1])
            if math.hypot(*(b - a)) <= tol:
                dev = 0.0
            elif lac <= tol:
                # b is a spike going out and coming straight back
                dev = 0.0
            else:
                dev = abs(float(cross2(ac, b - a))) / lac
            if dev <= tol:
                del pts[i]
                changed = True
                break
    if len(pts) < 3:
        raise DegenerateInput("fewer than 3 non-collinear vertices")
    out = np.array(pts)
    if _shoelace(out) > 0:
        out = np.concatenate([out[:1], out[:0:-1]])
    return out


class ConvexPolygon:
    """A convex polygon with vertices in canonical clockwise order.

    Construction validates convexity, removes collinear vertices and reverses
    counter-clockwise input.  The first input vertex stays first.
    """

    def __init__(self, vertices):
        raw = _as_points(vertices, "vertices")
        if len(raw) < 3:
            raise DegenerateInput("a polygon needs at least 3 vertices")
        v = _canonicalize(raw)
        if not is_convex(v):
            raise InvalidArgument("vertices do not form a convex polygon")
        v.setflags(write=False)
        self.vertices = v
        ends = np.roll(v, -1, axis=0)
        vec = ends - v
        lengths = np.hypot(vec[:, 0], vec[:, 1])
        self.edge_starts = v
        self.edge_ends = ends
        self.edge_vectors = vec
        self.edge_lengths = lengths
        self.edge_directions = vec / lengths[:, None]
        self.inward_normals = right_normal(self.edge_directions)
        self.area = -_shoelace(v)
        self.perimeter = float(lengths.sum())
        self.centroid = v.mean(axis=0)
        self.diameter = _diameter(v)
        self.tol = REL_TOL * self.diameter
        if self.area <= 0:
            raise DegenerateInput("polygon has zero area")
        for arr in (ends, vec, lengths, self.edge_directions, self.inward_normals, self.centroid):
            arr.setflags(write=False)

    @property
    def n_edges(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> list[Segment]:
        return [Segment(a, b) for a, b in zip(self.edge_starts, self.edge_ends)]

    @property
    def area_centroid(self) -> np.ndarray:
        """Centre of mass of the polygon region (differs from ``centroid``,
        which is the vertex average used for lattice placement)."""
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        c = cross2(v, w)
        a = c.sum() / 2.0
        return ((v + w) * c[:, None]).sum(axis=0) / (6.0 * a)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def edge_distances(self, points) -> np.ndarray:
        """Right distances of every point to every edge line, shape ``(m, N)``."""
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        rel = p[:, None, :] - self.edge_starts[None, :, :]
        return (rel * self.inward_normals[None, :, :]).sum(axis=-1)

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        return self.edge_distances(points).min(axis=1) >= -tol

    def transformed(self, rotation: float = 0.0, translation=(0.0, 0.0)) -> "ConvexPolygon":
        """Rotate about the origin by ``rotation`` radians, then translate."""
        return ConvexPolygon(rigid_transform(self.vertices, rotation, translation))

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConvexPolygon) and np.array_equal(self.vertices, other.vertices)

    def __hash__(self) -> int:
        return hash(self.vertices.tobytes())

    def __repr__(self) -> str:
        return f"ConvexPolygon({self.vertices.tolist()!r})"


def rigid_transform(points, rotation: float = 0.0, translation=(0.0, 0.0)) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    c, s = math.cos(rotation), math.sin(rotation)
    rot = np.array([[c, -s], [s, c]])
    return p @ rot.T + np.asarray(translation, dtype=float)


def signed_distance(a, poly: ConvexPolygon):
    """Minimum right distance over all edges.

    Exact inside the polygon.  Outside it is minus the distance to the most
    violated supporting line, which underestimates the true distance near a
    vertex; see :func:`euclidean_boundary_distance` for the exact value.
    Returns a float for a single point and an array for a batch.
    """
    arr = np.asarray(a, dtype=float)
    d = poly.edge_distances(arr).min(axis=1)
    return float(d[0]) if arr.ndim == 1 else d


def _closest_on_boundary(p: np.ndarray, poly: ConvexPolygon) -> tuple[np.ndarray, np.ndarray]:
    rel = p[:, None, :] - poly.edge_starts[None, :, :]
    t = (rel * poly.edge_vectors[None]).sum(-1) / (poly.edge_lengths**2)[None]
    t = np.clip(t, 0.0, 1.0)
    foot = poly.edge_starts[None] + t[..., None] * poly.edge_vectors[None]
    dist = np.hypot(*(p[:, None, :] - foot).transpose(2, 0, 1))
    k = dist.argmin(axis=1)
    rows = np.arange(len(p))
    return foot[rows, k], dist[rows, k]


def euclidean_boundary_distance(a, poly: ConvexPolygon):
    """Exact signed Euclidean distance to the polygon boundary."""
    arr = np.asarray(a, dtype=float)
    p = arr.reshape(-1, 2)
    _, dist = _closest_on_boundary(p, poly)
    sign = np.sign(poly.edge_distances(p).min(axis=1))
    out = sign * dist
    return float(out[0]) if arr.ndim == 1 else out


def project_into(points, poly: ConvexPolygon) -> np.ndarray:
    """Euclidean projection of points onto the (closed) polygon."""
    p = np.array(points, dtype=float).reshape(-1, 2)
    outside = poly.edge_distances(p).min(axis=1) < 0
    if np.any(outside):
        foot, _ = _closest_on_boundary(p[outside], poly)
        p[outside] = foot
    return p


def convex_hull(points) -> ConvexPolygon:
    """Andrew's monotone chain hull, returned in clockwise order."""
    p = _as_points(points)
    p = np.unique(p, axis=0)  # also sorts lexicographically
    if len(p) < 3:
        raise DegenerateInput("fewer than 3 distinct points")

    def half(seq):
        out: list[np.ndarray] = []
        for q in seq:
            while len(out) >= 2 and cross2(out[-1] - out[-2], q - out[-2]) <= 0:
                out.pop()
            out.append(q)
        return out

    lower = half(p)
    upper = half(p[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise DegenerateInput("points are collinear")
    return ConvexPolygon(hull)


@dataclass(frozen=True)
class OrientedRectangle:
    """Rectangle with clockwise ``corners``; ``corners[0] -> corners[1]`` is a
    long side running along ``direction``."""

    corners: np.ndarray
    direction: np.ndarray
    angle: float
    width: float
    height: float

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> np.ndarray:
        return self.corners.mean(axis=0)


def _rect_from_frame(origin, u, nv, umin, umax, h, scale) -> OrientedRectangle:
    c0 = origin + umin * u
    c1 = origin + umax * u
    c2 = c1 + h * nv
    c3 = c0 + h * nv
    corners = np.array([c0, c1, c2, c3])
    w_u = umax - umin
    if abs(w_u - h) <= REL_TOL * scale:
        # square: pick the side with the smaller angle
        along_u = (math.atan2(u[1], u[0]) % math.pi) <= (math.atan2(nv[1], nv[0]) % math.pi)
    else:
        along_u = w_u > h
    if not along_u:
        corners = np.roll(corners, -1, axis=0)
    side = corners[1] - corners[0]
    theta = math.atan2(side[1], side[0]) % math.pi
    if math.isclose(theta, math.pi, abs_tol=1e-15):
        theta = 0.0
    d = np.array([math.cos(theta), math.sin(theta)])
    if np.dot(side, d) < 0:
        corners = np.roll(corners, -2, axis=0)
    width, height = (w_u, h) if along_u else (h, w_u)
    return OrientedRectangle(corners=corners, direction=d, angle=theta, width=width, height=height)


def minimum_bounding_rectangle(poly: ConvexPolygon) -> OrientedRectangle:
    """Minimum-area enclosing rectangle by rotating calipers.

    One side of the optimal rectangle is collinear with a polygon edge, so
    each edge is tried in turn while three antipodal pointers (far along the
    normal, max and min along the edge) advance monotonically around the
    polygon.  Near-ties in area go to the smaller orientation angle.
    """
    v = poly.vertices
    n = len(v)
    u_all, n_all = poly.edge_directions, poly.inward_normals

    def advance(k, direction, sign):
        for _ in range(n):
            step = np.dot(v[(k + 1) % n] - v[k], direction) * sign
            if step <= 0:
                break
            k = (k + 1) % n
        return k

    far = int(np.argmax(v @ n_all[0]))
    hi = int(np.argmax(v @ u_all[0]))
    lo = int(np.argmin(v @ u_all[0]))
    candidates = []
    for i in range(n):
        u, nv = u_all[i], n_all[i]
        far = advance(far, nv, 1.0)
        hi = advance(hi, u, 1.0)
        lo = advance(lo, u, -1.0)
        h = float(np.dot(v[far] - v[i], nv))
        umax = float(np.dot(v[hi] - v[i], u))
        umin = float(np.dot(v[lo] - v[i], u))
        rect = _rect_from_frame(v[i], u, nv, umin, umax, h, poly.diameter)
        candidates.append(rect)
    best_area = min(r.area for r in candidates)
    near = [r for r in candidates if r.area <= best_area * (1 + 1e-12)]
    return min(near, key=lambda r: r.angle)


def _segment_kernel(phi):
    """``phi - sin(phi)`` without cancellation for small angles."""
    phi = np.asarray(phi, dtype=float)
    small = phi < 0.3
    p2 = phi * phi
    series = phi * p2 * (
        1 / 6 - p2 * (1 / 120 - p2 * (1 / 5040 - p2 * (1 / 362880 - p2 * (1 / 39916800 - p2 / 6227020800))))
    )
    return np.where(small, series, phi - np.sin(phi))


def _check_kernel_args(d, r, name):
    if not (np.isscalar(r) or np.ndim(r) == 0) or not float(r) > 0:
        raise InvalidArgument(f"radius must be a positive scalar, got {r!r}")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or not np.all(np.isfinite(d)):
        raise InvalidArgument(f"{name} must be finite and non-negative")
    return d, float(r)


def _half_angle(h, r):
    # atan2 form keeps the angle accurate as h -> r
    return np.arctan2(np.sqrt(np.clip((r - h) * (r + h), 0.0, None)), h)


def lens_area(d_ij, r):
    """Intersection area of two discs of radius ``r`` at centre distance ``d_ij``.

    ``r^2 (theta - sin theta)`` with ``theta = 2 arccos(d_ij / 2r)``; zero for
    ``d_ij >= 2r``.
    """
    d, r = _check_kernel_args(d_ij, r, "d_ij")
    h = np.minimum(d / 2.0, r)
    theta = 2.0 * _half_angle(h, r)
    out = r * r * _segment_kernel(theta)
    return float(out) if out.ndim == 0 else out


def halfplane_cut_area(d_k, r):
    """Area of a disc of radius ``r`` lying beyond a line at distance ``d_k``
    from its centre: ``r^2 alpha / 2 - d_k sqrt(r^2 - d_k^2)``, written as
    ``r^2 (alpha - sin alpha) / 2``."""
    d, r = _check_kernel_args(d_k, r, "d_k")
    h = np.minimum(d, r)
    alpha = 2.0 * _half_angle(h, r)
    out = 0.5 * r * r * _segment_kernel(alpha)
    return float(out) if out.ndim == 0 else out


def boundary_overlap_area(d, r):
    """Disc area beyond an edge line for any signed centre distance ``d``.

    Equals :func:`halfplane_cut_area` for ``d >= 0``; for centres outside
    (``d < 0``) it is the complement ``pi r^2 - cut(-d)``.
    """
    d = np.asarray(d, dtype=float)
    cut = halfplane_cut_area(np.abs(d), r)
    out = np.where(d >= 0, cut, math.pi * r * r - cut)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Circle:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InvalidArgument("radius must be positive")


@dataclass(frozen=True)
class CircleConfiguration:
    """Centres of ``n`` congruent circles sharing one ``radius``."""

    centers: np.ndarray
    radius: float

    def __post_init__(self):
        c = _as_points(self.centers, "centers").copy()
        if len(c) < 1:
            raise InvalidArgument("configuration needs at least one circle")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidArgument("radius must be positive and finite")
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        return len(self.centers)

    @property
    def flat(self) -> np.ndarray:
        """The configuration vector ``[x1, y1, ..., xn, yn]``."""
        return self.centers.reshape(-1).copy()

    def circles(self) -> list[Circle]:
        return [Circle(c, self.radius) for c in self.centers]

    def with_radius(self, radius: float) -> "CircleConfiguration":
        return CircleConfiguration(self.centers, radius)


@dataclass(frozen=True)
class VoronoiCell:
    generator_index: int
    polygon: ConvexPolygon


def clip_halfplane(poly_pts: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex vertex ring to ``x . normal <= offset``."""
    if len(poly_pts) == 0:
        return poly_pts
    s = poly_pts @ normal - offset
    out = []
    m = len(poly_pts)
    for i in range(m):
        a, b = poly_pts[i], poly_pts[(i + 1) % m]
        sa, sb = s[i], s[(i + 1) % m]
        if sa <= 0:
            out.append(a)
        if (sa < 0 < sb) or (sb < 0 < sa):
            t = sa / (sa - sb)
            out.append(a + t * (b - a))
    return np.array(out) if out else np.empty((0, 2))


def _cell(i: int, centers: np.ndarray, ring: np.ndarray, skip: np.ndarray) -> np.ndarray:
    si = centers[i]
    for j in range(len(centers)):
        if j == i or skip[j]:
            continue
        normal = centers[j] - si
        mid = 0.5 * (centers[j] + si)
        ring = clip_halfplane(ring, normal, float(np.dot(mid, normal)))
        if len(ring) == 0:
            break
    return ring


def voronoi_cell_areas(centers, poly: ConvexPolygon) -> np.ndarray:
    """Areas of the clipped Voronoi cells, tolerant of boundary, exterior and
    duplicated generators (a duplicate of a lower-indexed generator gets 0)."""
    c = _as_points(centers, "centers")
    tol = 1e-12 * poly.diameter
    n = len(c)
    areas = np.zeros(n)
    dist = np.hypot(*(c[:, None, :] - c[None, :, :]).transpose(2, 0, 1))
    for i in range(n):
        dup = dist[i] <= tol
        dup[i] = False
        if np.any(dup[:i]):
            continue
        ring = _cell(i, c, poly.vertices, dup)
        areas[i] = abs(_shoelace(ring))
    return areas


def clipped_voronoi(centers, poly: ConvexPolygon) -> list[VoronoiCell]:
    """Voronoi cells of ``centers`` intersected with ``poly``.

    Each cell is the polygon clipped successively by the bisector
    half-planes of every other generator.
    """
    c = _as_points(centers, "centers")
    tol = 1e-12 * poly.diameter
    if len(c) > 1:
        dist = np.hypot(*(c[:, None, :] - c[None, :, :]).transpose(2, 0, 1))
        np.fill_diagonal(dist, np.inf)
        if dist.min() <= tol:
            raise DegenerateInput("duplicate Voronoi generators")
    if np.any(signed_distance(c, poly) <= 0):
        raise DegenerateInput("Voronoi generators must lie strictly inside the polygon")
    no_skip = np.zeros(len(c), dtype=bool)
    return [VoronoiCell(i, ConvexPolygon(_cell(i, c, poly.vertices, no_skip))) for i in range(len(c))]
