"""Penalty-based particle swarm search for max-min SNR antenna placement.

The continuous placement problem is nonconvex (antenna positions couple through
complex-phase sums), so it is attacked with a swarm of candidate layouts. Each
particle encodes the 2N plane coordinates of N antennas; fitness is the worst
user SNR in dB minus a large penalty per spacing violation. The swarm engine
itself (`run_swarm`) is generic over a `SwarmProblem` adapter and is reused by
the benchmark schemes with different encodings.

Determinism: every random draw comes from one `numpy` Generator in a fixed
order (all particle initializations, then velocities, then two scalar draws per
particle per iteration), so a given seed reproduces a run bit for bit no matter
how fitness evaluations are parallelized. Restarts use seeds spawned from the
master seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import channel
from .channel import PaConfiguration, Scenario
from .errors import InfeasibleError, InitializationError, ParameterError

INIT_RESAMPLE_BUDGET = 10_000  # resamples allowed per particle before giving up


@dataclass
class PsoParams:
    """Swarm hyper-parameters. Defaults follow the standard tuning."""

    num_particles: int = 500
    max_iters: int = 200
    accel_cognitive: float = 1.5
    accel_social: float = 1.5
    inertia_max: float = 0.9
    inertia_min: float = 0.4
    penalty_db: float = 30.0       # fitness is dB-scaled; one violation costs this much
    init_radius: float = 2.0       # disk radius of the user-centric initializer, meters
    v_max: Optional[float] = None  # per-component speed cap; None -> 0.1 * side_length
    restarts: int = 4
    rng_seed: int = 0
    stall_tolerance: float = 1e-3  # dB improvement below which a run counts as stalled
    stall_window: int = 25         # iterations over which the improvement is measured

    def __post_init__(self):
        if self.num_particles < 1 or self.max_iters < 1:
            raise ParameterError("num_particles and max_iters must be >= 1")
        if not (self.inertia_max >= self.inertia_min > 0):
            raise ParameterError("need inertia_max >= inertia_min > 0")
        if self.penalty_db <= 0 or self.init_radius <= 0:
            raise ParameterError("penalty_db and init_radius must be positive")
        if self.v_max is not None and self.v_max <= 0:
            raise ParameterError("v_max must be positive when given")
        if self.restarts < 1:
            raise ParameterError("restarts must be >= 1")


@dataclass
class Particle:
    """One candidate layout: position/velocity in R^2N plus its personal best."""

    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_fitness: float


@dataclass
class SwarmState:
    """Full swarm snapshot; arrays are (M, dim) with one row per particle."""

    positions: np.ndarray
    velocities: np.ndarray
    best_positions: np.ndarray
    best_fitness: np.ndarray
    global_best_position: np.ndarray
    global_best_fitness: float
    iteration: int = 0

    def particle(self, i: int) -> Particle:
        return Particle(
            position=self.positions[i].copy(),
            velocity=self.velocities[i].copy(),
            best_position=self.best_positions[i].copy(),
            best_fitness=float(self.best_fitness[i]),
        )


def inertia(t: int, total_iters: int, inertia_max: float, inertia_min: float) -> float:
    """Linearly decreasing inertia weight: inertia_max at t=0, inertia_min at t=total."""
    if not 0 <= t <= total_iters:
        raise ParameterError(f"iteration {t} outside [0, {total_iters}]")
    return inertia_max - (inertia_max - inertia_min) * t / total_iters


def violation_count(xy, min_separation: float):
    """Number of unordered antenna pairs closer than min_separation (planar distance).

    Accepts (..., N, 2) batches; returns an integer per batch entry.
    """
    xy = np.asarray(xy, dtype=float)
    diff = xy[..., :, None, :] - xy[..., None, :, :]
    d2 = (diff * diff).sum(axis=-1)
    n = xy.shape[-2]
    iu, ju = np.triu_indices(n, k=1)
    close = d2[..., iu, ju] < min_separation**2
    count = close.sum(axis=-1)
    return int(count) if count.ndim == 0 else count


def fitness(xy, scenario: Scenario, penalty_db: float):
    """Worst-user SNR in dB minus penalty_db per spacing violation.

    Accepts a single (N, 2) layout or any (..., N, 2) batch.
    """
    snr = channel.snr_all_users(xy, scenario)
    with np.errstate(divide="ignore"):
        worst_db = 10.0 * np.log10(snr.min(axis=-1))
    value = worst_db - penalty_db * violation_count(xy, scenario.min_separation)
    return float(value) if np.ndim(value) == 0 else value


def placement_bounds(scenario: Scenario, pas: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-coordinate clamp box: user bounding box intersected with the region.

    A dimension whose user spread is below the minimum spacing is widened by the
    spacing on both sides so that several antennas can still coexist there.
    """
    ue = scenario.ue_xy()
    half = scenario.side_length / 2.0
    d0 = scenario.min_separation
    lo2, hi2 = np.empty(2), np.empty(2)
    for axis in range(2):
        lo, hi = ue[:, axis].min(), ue[:, axis].max()
        if hi - lo < d0:
            lo, hi = lo - d0, hi + d0
        lo2[axis] = max(lo, -half)
        hi2[axis] = min(hi, half)
    return np.tile(lo2, pas), np.tile(hi2, pas)


@dataclass
class SwarmProblem:
    """Adapter handing the generic engine an encoding-specific search problem.

    `init_positions` must return feasible particles (M, dim); `project` maps
    arbitrary updated positions back into the valid set; `evaluate` is the
    (vectorized, maximized) fitness in dB; `feasible_mask`, when given, marks
    rows whose decoded solution satisfies all hard constraints.
    """

    dim: int
    v_max: float
    init_positions: Callable[[np.random.Generator, int], np.ndarray]
    project: Callable[[np.ndarray], np.ndarray]
    evaluate: Callable[[np.ndarray], np.ndarray]
    feasible_mask: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass
class SwarmRun:
    """Outcome of a single restart."""

    global_best_position: np.ndarray
    global_best_fitness: float
    best_feasible_position: Optional[np.ndarray]
    best_feasible_fitness: float
    trace: np.ndarray  # global best fitness after init and after each iteration
    iterations: int


@dataclass
class PsoResult:
    """Best feasible placement found, its worst-user SNR, and the search trace."""

    config: PaConfiguration
    min_snr: float  # linear
    trace: list[tuple[int, float]]  # (iteration, global best fitness in dB)
    restart_traces: list[np.ndarray] = field(default_factory=list)

    @property
    def min_snr_db(self) -> float:
        return float(10.0 * np.log10(self.min_snr))


def _init_placement_positions(scenario: Scenario, pas: int, params: PsoParams,
                              rng: np.random.Generator, m: int) -> np.ndarray:
    """Round-robin user-centric initialization for M particles, (M, 2N), feasible."""
    ue = scenario.ue_xy()
    k = len(ue)
    half = scenario.side_length / 2.0
    d0 = scenario.min_separation
    out = np.empty((m, 2 * pas))
    for i in range(m):
        pts = np.empty((pas, 2))
        resamples = 0
        for n in range(pas):
            anchor = ue[n % k]
            while True:
                rho = params.init_radius * np.sqrt(rng.uniform())
                theta = rng.uniform(0.0, 2.0 * np.pi)
                cand = anchor + rho * np.array([np.cos(theta), np.sin(theta)])
                np.clip(cand, -half, half, out=cand)
                if n == 0 or (((pts[:n] - cand) ** 2).sum(axis=1) >= d0**2).all():
                    pts[n] = cand
                    break
                resamples += 1
                if resamples > INIT_RESAMPLE_BUDGET:
                    raise InitializationError(
                        f"could not place {pas} antennas with spacing {d0} m within "
                        f"{INIT_RESAMPLE_BUDGET} resamples; instance looks over-constrained"
                    )
        out[i] = pts.ravel()
    return out


def make_placement_problem(scenario: Scenario, pas: int, params: PsoParams) -> SwarmProblem:
    """The 2D placement search: 2N coordinates, clamp box, penalty fitness."""
    if pas < 1:
        raise ParameterError("need at least one antenna")
    lo, hi = placement_bounds(scenario, pas)
    v_max = params.v_max if params.v_max is not None else 0.1 * scenario.side_length

    def project(x):
        return np.clip(x, lo, hi)

    def evaluate(x):
        return fitness(x.reshape(*x.shape[:-1], pas, 2), scenario, params.penalty_db)

    def feasible(x):
        counts = violation_count(x.reshape(*x.shape[:-1], pas, 2), scenario.min_separation)
        return np.asarray(counts) == 0

    return SwarmProblem(
        dim=2 * pas,
        v_max=v_max,
        init_positions=lambda rng, m: _init_placement_positions(scenario, pas, params, rng, m),
        project=project,
        evaluate=evaluate,
        feasible_mask=feasible,
    )


def initialize_swarm(scenario: Scenario, pas: int, params: PsoParams,
                     rng: np.random.Generator) -> SwarmState:
    """Feasible round-robin swarm with uniform velocities and evaluated bests."""
    problem = make_placement_problem(scenario, pas, params)
    x = problem.init_positions(rng, params.num_particles)
    v = rng.uniform(-problem.v_max, problem.v_max, size=x.shape)
    f = np.asarray(problem.evaluate(x), dtype=float)
    g = int(np.argmax(f))
    return SwarmState(
        positions=x,
        velocities=v,
        best_positions=x.copy(),
        best_fitness=f.copy(),
        global_best_position=x[g].copy(),
        global_best_fitness=float(f[g]),
    )


def update_particle(particle: Particle, global_best: np.ndarray, inertia_weight: float,
                    params: PsoParams, rng: np.random.Generator,
                    bounds: tuple[np.ndarray, np.ndarray], v_max: float) -> Particle:
    """One kinematic step for a single particle (fresh scalar draws, clamp, project)."""
    w1 = rng.uniform()
    w2 = rng.uniform()
    v = (inertia_weight * particle.velocity
         + params.accel_cognitive * w1 * (particle.best_position - particle.position)
         + params.accel_social * w2 * (np.asarray(global_best) - particle.position))
    np.clip(v, -v_max, v_max, out=v)
    x = np.clip(particle.position + v, bounds[0], bounds[1])
    return Particle(position=x, velocity=v,
                    best_position=particle.best_position.copy(),
                    best_fitness=particle.best_fitness)


def run_swarm(problem: SwarmProblem, params: PsoParams, rng: np.random.Generator) -> SwarmRun:
    """One restart of the swarm loop; the global best trace is non-decreasing."""
    m = params.num_particles
    x = problem.init_positions(rng, m)
    v = rng.uniform(-problem.v_max, problem.v_max, size=x.shape)
    f = np.asarray(problem.evaluate(x), dtype=float)

    pbest = x.copy()
    pbest_f = f.copy()
    g = int(np.argmax(pbest_f))
    gbest = pbest[g].copy()
    gbest_f = float(pbest_f[g])

    best_feas_f = -np.inf
    best_feas: Optional[np.ndarray] = None

    def track_feasible(xs, fs):
        nonlocal best_feas, best_feas_f
        if problem.feasible_mask is None:
            mask = np.ones(len(fs), dtype=bool)
        else:
            mask = np.asarray(problem.feasible_mask(xs))
        if mask.any():
            j = int(np.flatnonzero(mask)[np.argmax(fs[mask])])
            if fs[j] > best_feas_f:
                best_feas_f = float(fs[j])
                best_feas = xs[j].copy()

    track_feasible(x, f)
    trace = [gbest_f]

    iterations = 0
    for t in range(params.max_iters):
        w = inertia(t, params.max_iters, params.inertia_max, params.inertia_min)
        w1 = rng.uniform(size=(m, 1))
        w2 = rng.uniform(size=(m, 1))
        v = (w * v
             + params.accel_cognitive * w1 * (pbest - x)
             + params.accel_social * w2 * (gbest - x))
        np.clip(v, -problem.v_max, problem.v_max, out=v)
        x = problem.project(x + v)
        f = np.asarray(problem.evaluate(x), dtype=float)

        improved = f > pbest_f
        pbest[improved] = x[improved]
        pbest_f[improved] = f[improved]
        g = int(np.argmax(pbest_f))
        if pbest_f[g] > gbest_f:
            gbest_f = float(pbest_f[g])
            gbest = pbest[g].copy()

        track_feasible(x, f)
        trace.append(gbest_f)
        iterations = t + 1
        if (len(trace) > params.stall_window
                and trace[-1] - trace[-1 - params.stall_window] < params.stall_tolerance):
            break

    return SwarmRun(
        global_best_position=gbest,
        global_best_fitness=gbest_f,
        best_feasible_position=best_feas,
        best_feasible_fitness=best_feas_f,
        trace=np.asarray(trace),
        iterations=iterations,
    )


def optimize(scenario: Scenario, pas: int, params: PsoParams) -> PsoResult:
    """Best-of-restarts swarm search for the max-min SNR placement.

    Returns the best spacing-feasible layout found across `params.restarts`
    independent swarms. Raises InfeasibleError when no restart produced any
    feasible candidate (the best infeasible layout is attached for diagnosis).
    """
    problem = make_placement_problem(scenario, pas, params)
    seeds = np.random.SeedSequence(params.rng_seed).spawn(params.restarts)
    runs = [run_swarm(problem, params, np.random.default_rng(s)) for s in seeds]

    best = max(runs, key=lambda r: r.best_feasible_fitness)
    if best.best_feasible_position is None:
        worst = max(runs, key=lambda r: r.global_best_fitness)
        raise InfeasibleError(
            "no spacing-feasible layout found in any restart",
            best_candidate=worst.global_best_position.reshape(pas, 2),
            best_fitness_db=worst.global_best_fitness,
        )
    config = PaConfiguration.from_xy(best.best_feasible_position.reshape(pas, 2), scenario.height)
    return PsoResult(
        config=config,
        min_snr=channel.min_snr(config, scenario),
        trace=[(i, float(fv)) for i, fv in enumerate(best.trace)],
        restart_traces=[r.trace for r in runs],
    )
