"""Quasi-physical relaxation and adaptive radius expansion.

Circles are unit-mass particles.  Overlapping discs push each other apart
with a force equal to their lens area; a disc crossing an edge line is
pushed inward along the edge's right normal with a force equal to the area
beyond the line.  Viscous friction ``-mu v`` damps the motion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .coverage import AreaEstimator, EstimatorParams, disc_usage_rate, estimator_for
from .errors import InvalidArgument, NonConvergence, NumericalBlowup
from .geometry import CircleConfiguration, ConvexPolygon, boundary_overlap_area, lens_area

# Contacts per circle assumed when sizing the default time step.
_STIFFNESS_CONTACTS = 8


@dataclass(frozen=True)
class DynamicsParams:
    """Relaxation and inflation settings.

    Unset values are derived from ``r_target``: the contact stiffness of
    both force kernels is at most ``2r`` per contact, so with ``k = 16r`` the
    time step ``dt = sqrt(0.15 / k)`` keeps explicit Euler stable.  The
    default friction ``mu = 0.8`` is light enough that crowded layouts
    settle within ``max_relax_steps``.
    """

    r_target: float
    mu: float = 0.8
    dt: float | None = None
    max_relax_steps: int = 2000
    velocity_epsilon: float | None = None
    alpha_inflate: float = 0.1
    epsilon_inflate: float | None = None
    U_th: float = 0.90
    C_th: int = 3
    initial_fraction: float = 0.1
    max_rounds: int | None = None
    usage_estimator: str = "disc"
    usage_samples_per_disc: int = 1024

    def __post_init__(self):
        r = self.r_target
        if not r > 0:
            raise InvalidArgument("r_target must be positive")
        k = 2.0 * _STIFFNESS_CONTACTS * r
        dt = self.dt if self.dt is not None else math.sqrt(0.15 / k)
        defaults = {
            "dt": dt,
            "velocity_epsilon": 1e-5 * r,
            "epsilon_inflate": 1e-3 * r,
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        if self.max_rounds is None:
            rounds = math.ceil(10 * math.log2(r / self.epsilon_inflate)) if r > self.epsilon_inflate else 10
            object.__setattr__(self, "max_rounds", max(rounds, 10))
        if self.mu < 0 or self.dt <= 0 or self.velocity_epsilon <= 0 or self.epsilon_inflate <= 0:
            raise InvalidArgument("mu must be >= 0; dt, velocity_epsilon, epsilon_inflate > 0")
        if not 0 < self.U_th <= 1:
            raise InvalidArgument("U_th must lie in (0, 1]")
        if int(self.C_th) < 1 or int(self.max_relax_steps) < 1:
            raise InvalidArgument("C_th and max_relax_steps must be >= 1")
        if not (0 < self.alpha_inflate and 0 < self.initial_fraction <= 1):
            raise InvalidArgument("alpha_inflate must be > 0, initial_fraction in (0, 1]")
        if self.usage_estimator not in ("disc", "polygon") or int(self.usage_samples_per_disc) < 1:
            raise InvalidArgument("usage_estimator must be 'disc' or 'polygon' with a positive sample count")


@dataclass(frozen=True)
class ExpansionSystemState:
    positions: np.ndarray
    velocities: np.ndarray
    forces: np.ndarray
    radius_current: float
    dt: float
    steps: int = 0
    at_equilibrium: bool = False

    def __post_init__(self):
        n = len(self.positions)
        if self.velocities.shape != (n, 2) or self.forces.shape != (n, 2):
            raise InvalidArgument("positions, velocities and forces must share shape (n, 2)")
        if not self.radius_current > 0:
            raise InvalidArgument("radius must be positive")

    @classmethod
    def at_rest(cls, cfg: CircleConfiguration, dt: float) -> "ExpansionSystemState":
        z = np.zeros_like(cfg.centers)
        return cls(np.array(cfg.centers), z, z.copy(), cfg.radius, dt)

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def configuration(self) -> CircleConfiguration:
        return CircleConfiguration(self.positions, self.radius_current)

    def max_speed(self) -> float:
        return float(np.hypot(*self.velocities.T).max()) if self.n else 0.0


def separate_coincident(positions: np.ndarray, r: float) -> np.ndarray:
    """Nudge the higher-indexed member of each coincident pair by ``1e-6 r``
    at angle ``2 pi i / n`` so that the force direction is defined."""
    x = np.array(positions, dtype=float)
    n = len(x)
    if n < 2:
        return x
    tol = 1e-12 * r
    for _ in range(n):
        diff = x[:, None, :] - x[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(dist, np.inf)
        hits = np.argwhere(np.triu(dist < tol))
        if len(hits) == 0:
            break
        for _, j in hits:
            a = 2 * math.pi * j / n
            x[j] += 1e-6 * r * np.array([math.cos(a), math.sin(a)])
    return x


def pair_forces(positions: np.ndarray, r: float) -> np.ndarray:
    """Circle-circle elastic forces, shape ``(n, 2)``; each pair's lens area
    acts along the line of centres, away from the other circle."""
    x = np.asarray(positions, dtype=float)
    diff = x[:, None, :] - x[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    touching = dist < 2 * r
    if not touching.any():
        return np.zeros_like(x)
    mag = np.zeros_like(dist)
    mag[touching] = lens_area(dist[touching], r)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(touching[..., None], diff / dist[..., None], 0.0)
    return (mag[..., None] * unit).sum(axis=1)


def wall_forces(positions: np.ndarray, poly: ConvexPolygon, r: float) -> np.ndarray:
    """Circle-edge elastic forces: every edge line a disc crosses pushes it
    along that edge's inward normal with the area beyond the line."""
    d = poly.edge_distances(positions)
    mag = np.where(d < r, boundary_overlap_area(np.minimum(d, r), r), 0.0)
    return mag @ poly.inward_normals


def elastic_forces(positions: np.ndarray, poly: ConvexPolygon, r: float) -> np.ndarray:
    return pair_forces(positions, r) + wall_forces(positions, poly, r)


def total_force(state: ExpansionSystemState, poly: ConvexPolygon, i: int, mu: float) -> np.ndarray:
    """Elastic plus friction force on circle ``i``."""
    if not 0 <= i < state.n:
        raise InvalidArgument(f"circle index {i} out of range")
    x = separate_coincident(state.positions, state.radius_current)
    return elastic_forces(x, poly, state.radius_current)[i] - mu * state.velocities[i]


def _euler(state: ExpansionSystemState, poly: ConvexPolygon, params: DynamicsParams):
    r = state.radius_current
    x = separate_coincident(state.positions, r)
    v = state.velocities
    elastic = elastic_forces(x, poly, r)
    f = elastic - params.mu * v
    v_new = v + f * params.dt
    # position advances with the pre-update velocity
    x_new = x + v * params.dt
    limit = poly.diameter / params.dt
    if not np.all(np.isfinite(v_new)) or np.hypot(*v_new.T).max() > limit:
        raise NumericalBlowup(f"speed exceeded diameter/dt = {limit:.3g}; reduce dt")
    nxt = replace(state, positions=x_new, velocities=v_new, forces=f, dt=params.dt, steps=state.steps + 1)
    return nxt, elastic


def integrate_step(state: ExpansionSystemState, poly: ConvexPolygon, params: DynamicsParams) -> ExpansionSystemState:
    """One explicit Euler step with unit mass."""
    return _euler(state, poly, params)[0]


def relax(state: ExpansionSystemState, poly: ConvexPolygon, params: DynamicsParams) -> ExpansionSystemState:
    """Integrate until every speed is below ``velocity_epsilon`` and no elastic
    force could sustain a larger terminal speed, or the step budget runs out.
    """
    eps = params.velocity_epsilon
    start = state.steps
    s = replace(state, at_equilibrium=False)
    for _ in range(params.max_relax_steps):
        s, elastic = _euler(s, poly, params)
        if s.max_speed() < eps and np.hypot(*elastic.T).max() < max(params.mu, 1e-12) * eps:
            return replace(s, at_equilibrium=True, steps=s.steps - start)
    return replace(s, steps=s.steps - start)


def usage_rate(state: ExpansionSystemState | CircleConfiguration, poly: ConvexPolygon, estimator) -> float:
    """Covered area divided by total disc area ``n pi r^2``."""
    if isinstance(state, ExpansionSystemState):
        centers, r = state.positions, state.radius_current
    else:
        centers, r = state.centers, state.radius
    est = estimator if isinstance(estimator, AreaEstimator) else estimator_for(poly, estimator or EstimatorParams())
    total = len(centers) * math.pi * r * r
    return min(1.0, max(0.0, est.covered_area(centers, r) / total))


@dataclass
class InflationSchedule:
    """Adaptive radius step: double after ``c_th`` consecutive accepted
    expansions, halve (and reset the counter) on a rejection."""

    step: float
    epsilon: float
    c_th: int
    cap: float
    counter: int = 0

    def active(self) -> bool:
        return self.step > self.epsilon

    def update(self, accepted: bool) -> None:
        if accepted:
            self.counter += 1
            if self.counter >= self.c_th:
                self.step = min(2.0 * self.step, self.cap)
                self.counter = 0
        else:
            self.step /= 2.0
            self.counter = 0


@dataclass
class InflationRecord:
    round: int
    r_test: float
    accepted: bool
    step_after: float
    counter: int
    info: dict = field(default_factory=dict)


def inflate(
    r_start: float,
    r_target: float,
    schedule: InflationSchedule,
    trial: Callable[[float], tuple[bool, object, dict]],
    max_rounds: int,
    payload: object = None,
):
    """Generic expansion loop.

    ``trial(r_test)`` returns ``(accepted, payload, info)``.  The radius only
    moves on acceptance and never passes ``r_target``.  Returns the final
    radius, the last accepted payload and the per-round records; raises
    :class:`NonConvergence` past ``max_rounds`` with that triple attached.
    """
    r = r_start
    records: list[InflationRecord] = []
    while schedule.active() and r < r_target:
        if len(records) >= max_rounds:
            raise NonConvergence(f"radius expansion exceeded {max_rounds} rounds", result=(r, payload, records))
        r_test = min(r + schedule.step, r_target)
        accepted, out, info = trial(r_test)
        if accepted:
            r, payload = r_test, out
        schedule.update(accepted)
        records.append(InflationRecord(len(records), r_test, accepted, schedule.step, schedule.counter, info))
    return r, payload, records


def expand_radii(
    poly: ConvexPolygon,
    n: int,
    params: DynamicsParams,
    init_cfg: CircleConfiguration,
    estimator: AreaEstimator | EstimatorParams | None = None,
    trace: list | None = None,
) -> ExpansionSystemState:
    """Grow the common radius from ``init_cfg.radius`` towards ``r_target``.

    Each trial radius is relaxed and kept when its usage rate exceeds
    ``U_th``.  By default the usage rate of a trial is measured with
    :func:`disc_usage_rate`, whose accuracy does not degrade for the small
    starting radii; ``usage_estimator="polygon"`` uses ``estimator``
    instead.  Whatever radius the loop stops at, the state is finally set to
    ``r_target`` and relaxed once more, so the result always carries the
    target radius.  Records of every round are appended to ``trace``.
    """
    if init_cfg.n != n:
        raise InvalidArgument(f"initial configuration has {init_cfg.n} circles, expected {n}")
    est = estimator if isinstance(estimator, AreaEstimator) else estimator_for(poly, estimator or EstimatorParams())
    state = ExpansionSystemState.at_rest(init_cfg, params.dt)
    schedule = InflationSchedule(
        step=params.r_target * params.alpha_inflate,
        epsilon=params.epsilon_inflate,
        c_th=int(params.C_th),
        cap=params.r_target,
    )

    current = [state]

    def measure(s):
        if params.usage_estimator == "disc":
            return disc_usage_rate(poly, s.positions, s.radius_current, int(params.usage_samples_per_disc))
        return usage_rate(s, poly, est)

    def trial(r_test):
        base = current[0]
        s = relax(replace(base, radius_current=r_test, velocities=np.zeros_like(base.velocities)), poly, params)
        u = measure(s)
        info = {"usage_rate": u, "max_speed": s.max_speed(), "relax_steps": s.steps, "equilibrium": s.at_equilibrium}
        accepted = u > params.U_th
        if accepted:
            current[0] = s
        return accepted, s, info

    failure = None
    try:
        _, _, records = inflate(init_cfg.radius, params.r_target, schedule, trial, int(params.max_rounds), state)
    except NonConvergence as exc:
        failure = exc
        records = exc.result[2]
    final = relax(replace(current[0], radius_current=params.r_target), poly, params)
    if trace is not None:
        for rec in records:
            trace.append({"round": rec.round, "r": rec.r_test, "accepted": rec.accepted, "step": rec.step_after, **rec.info})
        trace.append(
            {
                "round": len(records),
                "r": params.r_target,
                "accepted": True,
                "step": 0.0,
                "usage_rate": measure(final),
                "max_speed": final.max_speed(),
                "relax_steps": final.steps,
                "equilibrium": final.at_equilibrium,
                "final": True,
            }
        )
    if failure is not None:
        raise NonConvergence(str(failure), result=final)
    return final
