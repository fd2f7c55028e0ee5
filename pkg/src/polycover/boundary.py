"""Boundary encirclement: pull overflowing circles back along the boundary.

Overflowing circles descend a quadratic-penalty augmented Lagrangian.  Three
direction fields drive them:

* the normal correction ``rho_b (r - d_j) n_j`` for every edge the disc crosses,
* a tangential pull ``gamma P (b* - c)`` towards the nearest encircling
  point ``b*``, with ``P = I - n n^T`` projecting out the normal of the
  nearest edge,
* the pairwise separation ``rho_c (2r - |c_i - c_j|) (c_i - c_j)/|c_i - c_j|``.

All three are descent directions (minus the gradient of their potentials),
so a step *adds* ``eta`` times their sum.  After each step centres are
projected back onto the polygon.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import ExpansionSystemState, separate_coincident
from .errors import InvalidArgument
from .geometry import CircleConfiguration, ConvexPolygon, project_into


@dataclass(frozen=True)
class LagrangianParams:
    beta: float = 1.0
    rho_b: float = 10.0
    rho_c: float = 10.0
    gamma: float = 1.0
    eta: float = 0.02
    epsilon_conv: float | None = None  # defaults to 1e-4 * r
    alpha_offset: float = 1.0
    alpha_standoff: float = 1.0
    max_iters: int = 5000
    use_multipliers: bool = True
    max_outer: int = 20
    feasibility_tol: float = 0.05

    def __post_init__(self):
        if self.beta < 0:
            raise InvalidArgument("beta must be non-negative")
        for name in ("rho_b", "rho_c", "gamma", "eta"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.epsilon_conv is not None and not self.epsilon_conv > 0:
            raise InvalidArgument("epsilon_conv must be positive")
        if not 0 <= self.alpha_offset <= 1:
            raise InvalidArgument("alpha_offset must lie in [0, 1]")
        if self.alpha_standoff < 1:
            raise InvalidArgument("alpha_standoff must be >= 1")
        if not 0 <= self.feasibility_tol < 1:
            raise InvalidArgument("feasibility_tol must lie in [0, 1)")
        if int(self.max_iters) < 1 or int(self.max_outer) < 1:
            raise InvalidArgument("max_iters and max_outer must be >= 1")


@dataclass(frozen=True)
class BoundaryEncirclingPointSet:
    edge_index: np.ndarray
    slot: np.ndarray
    points: np.ndarray
    offset_alpha: float
    per_edge_counts: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


def generate_encircling_points(poly: ConvexPolygon, n: int, r: float, alpha_offset: float) -> BoundaryEncirclingPointSet:
    """``n_j = max(1, floor(n |e_j| / L))`` evenly spaced points per edge at
    parameters ``(l - 0.5)/n_j``, shifted ``alpha_offset * r`` inward."""
    if int(n) < 1:
        raise InvalidArgument("n must be >= 1")
    counts = np.maximum(1, np.floor(n * poly.edge_lengths / poly.perimeter + 1e-12).astype(int))
    edge_idx, slots, pts = [], [], []
    for j, nj in enumerate(counts):
        l = np.arange(1, nj + 1)
        t = (l - 0.5) / nj
        pts.append(poly.edge_starts[j] + np.outer(t, poly.edge_vectors[j]) + alpha_offset * r * poly.inward_normals[j])
        edge_idx.append(np.full(nj, j))
        slots.append(l)
    return BoundaryEncirclingPointSet(
        edge_index=np.concatenate(edge_idx),
        slot=np.concatenate(slots),
        points=np.concatenate(pts),
        offset_alpha=float(alpha_offset),
        per_edge_counts=counts,
    )


def normal_gradient(c_i, poly: ConvexPolygon, r: float, rho_b: float) -> np.ndarray:
    """Inward correction summed over every edge with ``d_j(c) < r``.

    Accepts one centre ``(2,)`` or a batch ``(m, 2)``.
    """
    c = np.asarray(c_i, dtype=float)
    d = poly.edge_distances(c)
    excess = np.where(d < r, r - d, 0.0)
    out = rho_b * excess @ poly.inward_normals
    return out[0] if c.ndim == 1 else out


def nearest_encircling_point(c_i, eps: BoundaryEncirclingPointSet) -> int:
    d = np.hypot(*(eps.points - np.asarray(c_i, dtype=float)).T)
    return int(np.argmin(d))  # ties resolve to the lowest (edge, slot)


def nearest_edge(c_i, poly: ConvexPolygon) -> int:
    return int(np.argmin(poly.edge_distances(c_i)[0]))


def tangential_projector(normal) -> np.ndarray:
    n = np.asarray(normal, dtype=float)
    n = n / np.hypot(*n)
    return np.eye(2) - np.outer(n, n)


def tangential_gradient(c_i, eps: BoundaryEncirclingPointSet, poly: ConvexPolygon, gamma: float) -> np.ndarray:
    """``gamma P (b* - c)``: the pull towards the nearest encircling point with
    its component along the nearest edge's normal removed."""
    c = np.asarray(c_i, dtype=float)
    b = eps.points[nearest_encircling_point(c, eps)]
    proj = tangential_projector(poly.inward_normals[nearest_edge(c, poly)])
    return gamma * proj @ (b - c)


def _pair_terms(x: np.ndarray, r: float):
    diff = x[:, None, :] - x[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    overlap = np.where(dist < 2 * r, 2 * r - dist, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where((overlap > 0)[..., None], diff / dist[..., None], 0.0)
    return overlap, unit


def repulsive_gradient(cfg: CircleConfiguration, i: int, rho_c: float) -> np.ndarray:
    """Separation direction on circle ``i`` from every circle overlapping it."""
    if not 0 <= i < cfg.n:
        raise InvalidArgument(f"circle index {i} out of range")
    x = separate_coincident(cfg.centers, cfg.radius)
    overlap, unit = _pair_terms(x, cfg.radius)
    return rho_c * (overlap[i, :, None] * unit[i]).sum(axis=0)


def repulsive_gradients(centers: np.ndarray, r: float, rho_c: float) -> np.ndarray:
    overlap, unit = _pair_terms(np.asarray(centers, dtype=float), r)
    return ((rho_c * overlap)[..., None] * unit).sum(axis=1)


def boundary_distance_term(cfg: CircleConfiguration, poly: ConvexPolygon, alpha: float) -> float:
    """Mean squared deviation of each centre's nearest-edge distance from ``alpha r``."""
    f = poly.edge_distances(cfg.centers).min(axis=1)
    return float(np.mean((f - alpha * cfg.radius) ** 2))


def boundary_distance_gradient(cfg: CircleConfiguration, poly: ConvexPolygon, alpha: float) -> np.ndarray:
    """Per-centre gradient ``(2/n)(d_k - alpha r) n_k`` for the nearest edge ``k``."""
    d = poly.edge_distances(cfg.centers)
    k = d.argmin(axis=1)
    dk = d[np.arange(cfg.n), k]
    return (2.0 / cfg.n) * (dk - alpha * cfg.radius)[:, None] * poly.inward_normals[k]


def boundary_penalty(centers, poly: ConvexPolygon, r: float, rho_b: float) -> float:
    """``rho_b/2 * sum max(0, r - d_j(c_i))^2`` over all centres and edges."""
    d = poly.edge_distances(centers)
    return 0.5 * rho_b * float((np.maximum(0.0, r - d) ** 2).sum())


def separation_penalty(centers, r: float, rho_c: float) -> float:
    """``rho_c/2 * sum_{i<j} max(0, 2r - |c_i - c_j|)^2``."""
    overlap, _ = _pair_terms(np.asarray(centers, dtype=float), r)
    return 0.25 * rho_c * float((overlap**2).sum())  # each pair counted twice


@dataclass
class EncircleResult:
    configuration: CircleConfiguration
    converged: bool
    iterations: int
    overflowing: np.ndarray
    trace: list = field(default_factory=list)


def encircle(
    state: ExpansionSystemState | CircleConfiguration,
    poly: ConvexPolygon,
    params: LagrangianParams | None = None,
    trace_every: int = 1,
) -> EncircleResult:
    """Projected descent of the overflowing circles only.

    Circles with ``d_j(c) >= r`` for every edge at entry stay fixed but still
    repel the moving ones.  Updates are simultaneous over all moving circles.
    Each round fixes, per moving circle, its nearest encircling point and
    the normal of its nearest edge from the positions at the round's start.
    An inner descent stops once the largest displacement drops below
    ``epsilon_conv``.  The run counts as converged only if, in addition,
    every moving circle then violates its edges by at most
    ``feasibility_tol * r``.  With ``use_multipliers`` an infeasible stop
    raises the boundary multipliers ``mu <- max(0, mu + rho_b (r - d))`` and
    descends again, up to ``max_outer`` rounds; the boundary force is then
    ``max(0, mu + rho_b (r - d)) n``, which reduces to the plain penalty
    correction when ``mu = 0``.  ``max_iters`` bounds the total iteration count.
    """
    params = params or LagrangianParams()
    if isinstance(state, ExpansionSystemState):
        x, r = np.array(state.positions, dtype=float), state.radius_current
    else:
        x, r = np.array(state.centers, dtype=float), state.radius
    n = len(x)
    eps_conv = params.epsilon_conv if params.epsilon_conv is not None else 1e-4 * r
    moving = poly.edge_distances(x).min(axis=1) < r
    trace: list = []
    if not moving.any():
        return EncircleResult(CircleConfiguration(x, r), True, 0, moving, trace)

    points = generate_encircling_points(poly, n, r, params.alpha_offset)
    mu_b = np.zeros((n, poly.n_edges))
    it = 0
    converged = False
    for outer in range(params.max_outer if params.use_multipliers else 1):
        # targets and tangent frames are held fixed within a round; switching
        # them mid-descent makes the field discontinuous and can cycle forever
        xm = x[moving]
        target = points.points[np.hypot(*(xm[:, None, :] - points.points[None]).transpose(2, 0, 1)).argmin(axis=1)]
        nk = poly.inward_normals[poly.edge_distances(xm).argmin(axis=1)]
        settled = False
        while it < params.max_iters:
            x = separate_coincident(x, r)
            d = poly.edge_distances(x)
            direction = np.maximum(0.0, mu_b + params.rho_b * (r - d)) @ poly.inward_normals
            direction += repulsive_gradients(x, r, params.rho_c)

            to_b = target - x[moving]
            tangential = to_b - (to_b * nk).sum(axis=1, keepdims=True) * nk
            direction[moving] += params.gamma * tangential
            direction[~moving] = 0.0

            x_new = project_into(x + params.eta * direction, poly)
            disp = float(np.hypot(*(x_new - x).T).max())
            x = x_new
            it += 1
            if it % trace_every == 0 or disp < eps_conv:
                trace.append(
                    {
                        "iteration": it,
                        "outer": outer,
                        "max_displacement": disp,
                        "objective": _lagrangian(x, poly, r, params, mu_b),
                    }
                )
            if disp < eps_conv:
                settled = True
                break
        if not settled:
            break
        d = poly.edge_distances(x[moving])
        if float(np.max(r - d)) <= params.feasibility_tol * r:
            converged = True
            break
        if params.use_multipliers:
            mu_b = np.maximum(0.0, mu_b + params.rho_b * (r - poly.edge_distances(x)))
            mu_b[~moving] = 0.0
    return EncircleResult(CircleConfiguration(x, r), converged, it, moving, trace)


def _lagrangian(x, poly, r, params: LagrangianParams, mu_b) -> float:
    """Objective value with the boundary constraints in shifted-penalty form
    ``(max(0, mu + rho g)^2 - mu^2) / 2 rho``; equals ``rho/2 max(0, g)^2`` at ``mu = 0``."""
    cfg = CircleConfiguration(x, r)
    g = r - poly.edge_distances(x)
    h, _ = _pair_terms(x, r)
    value = params.beta * boundary_distance_term(cfg, poly, params.alpha_standoff)
    value += float(((np.maximum(0.0, mu_b + params.rho_b * g) ** 2 - mu_b**2) / (2 * params.rho_b)).sum())
    value += 0.25 * params.rho_c * float((h**2).sum())
    return value


def descent_potential(centers, poly: ConvexPolygon, r: float, points: BoundaryEncirclingPointSet, params: LagrangianParams) -> float:
    """Potential whose negative gradient the update follows for a single
    moving circle: both penalties plus ``gamma/2 |P(b* - c)|^2``."""
    x = np.asarray(centers, dtype=float).reshape(-1, 2)
    value = boundary_penalty(x, poly, r, params.rho_b) + separation_penalty(x, r, params.rho_c)
    for c in x:
        b = points.points[nearest_encircling_point(c, points)]
        proj = tangential_projector(poly.inward_normals[nearest_edge(c, poly)])
        t = proj @ (b - c)
        value += 0.5 * params.gamma * float(t @ t)
    return value


def overflowing(centers, poly: ConvexPolygon, r: float) -> np.ndarray:
    return poly.edge_distances(centers).min(axis=1) < r


__all__ = [
    "BoundaryEncirclingPointSet",
    "EncircleResult",
    "LagrangianParams",
    "boundary_distance_gradient",
    "boundary_distance_term",
    "boundary_penalty",
    "descent_potential",
    "encircle",
    "generate_encircling_points",
    "normal_gradient",
    "overflowing",
    "repulsive_gradient",
    "separation_penalty",
    "tangential_gradient",
]
