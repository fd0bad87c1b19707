"""Reference schemes the planar system is compared against.

* ``con-pass``  — antennas constrained to the line y = 0 (a single straight
  waveguide), positioned by the same swarm engine over N x-coordinates.
* ``fpa``       — a fixed uniform linear array at the region center with a
  digital max-min beamforming weight vector (total power P), optimized by the
  swarm engine over the 2N real weight components.
* ``above-ues`` — antennas dropped straight onto the users (round-robin),
  spacing-repaired, with no phase optimization at all.

Every scheme, including the planar continuous/discrete designs, registers
under a stable string id used by the experiment runner and CLI.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import channel, discrete, pso
from .channel import PaConfiguration, Scenario
from .errors import ParameterError


@dataclass
class BenchmarkResult:
    config: PaConfiguration
    min_snr: float
    trace: list[tuple[int, float]]


@dataclass
class FpaResult:
    weights: np.ndarray  # (N,) complex, ||w||^2 = tx power
    min_snr: float
    trace: list[tuple[int, float]]


def _line_init(scenario: Scenario, pas: int, params: pso.PsoParams,
               rng: np.random.Generator, m: int) -> np.ndarray:
    """Round-robin initializer on the line y=0: anchor at the user's x, disk offset
    projected onto the line, spacing-feasible by resampling."""
    ue_x = scenario.ue_xy()[:, 0]
    k = len(ue_x)
    half = scenario.side_length / 2.0
    d0 = scenario.min_separation
    out = np.empty((m, pas))
    for i in range(m):
        xs = np.empty(pas)
        resamples = 0
        for n in range(pas):
            anchor = ue_x[n % k]
            while True:
                rho = params.init_radius * np.sqrt(rng.uniform())
                theta = rng.uniform(0.0, 2.0 * np.pi)
                x = float(np.clip(anchor + rho * np.cos(theta), -half, half))
                if n == 0 or (np.abs(xs[:n] - x) >= d0).all():
                    xs[n] = x
                    break
                resamples += 1
                if resamples > pso.INIT_RESAMPLE_BUDGET:
                    raise pso.InitializationError(
                        f"could not place {pas} antennas on the line with spacing {d0}"
                    )
        out[i] = xs
    return out


def _with_zero_y(x: np.ndarray, pas: int) -> np.ndarray:
    """Expand (..., N) x-coordinates into (..., N, 2) line placements."""
    xy = np.zeros(x.shape + (2,))
    xy[..., 0] = x
    return xy


def make_line_problem(scenario: Scenario, pas: int, params: pso.PsoParams) -> pso.SwarmProblem:
    """Placement search restricted to the line y = 0."""
    lo2, hi2 = pso.placement_bounds(scenario, 1)
    lo = np.full(pas, lo2[0])
    hi = np.full(pas, hi2[0])
    v_max = params.v_max if params.v_max is not None else 0.1 * scenario.side_length

    def evaluate(x):
        return pso.fitness(_with_zero_y(x, pas), scenario, params.penalty_db)

    def feasible(x):
        counts = pso.violation_count(_with_zero_y(x, pas), scenario.min_separation)
        return np.asarray(counts) == 0

    return pso.SwarmProblem(
        dim=pas,
        v_max=v_max,
        init_positions=lambda rng, m: _line_init(scenario, pas, params, rng, m),
        project=lambda x: np.clip(x, lo, hi),
        evaluate=evaluate,
        feasible_mask=feasible,
    )


def optimize_con_pass(scenario: Scenario, pas: int, params: pso.PsoParams) -> BenchmarkResult:
    """Line-constrained placement via the shared swarm engine; outputs have y = 0."""
    problem = make_line_problem(scenario, pas, params)
    seeds = np.random.SeedSequence(params.rng_seed).spawn(params.restarts)
    runs = [pso.run_swarm(problem, params, np.random.default_rng(s)) for s in seeds]
    best = max(runs, key=lambda r: r.best_feasible_fitness)
    if best.best_feasible_position is None:
        raise pso.InfeasibleError("no feasible line placement found")
    xy = _with_zero_y(best.best_feasible_position, pas)
    config = PaConfiguration.from_xy(xy, scenario.height)
    return BenchmarkResult(
        config=config,
        min_snr=channel.min_snr(config, scenario),
        trace=[(i, float(f)) for i, f in enumerate(best.trace)],
    )


def ula_positions(scenario: Scenario, count: int) -> np.ndarray:
    """Fixed array: elements on the x-axis at height h, centered, spaced min_separation."""
    n = np.arange(1, count + 1)
    x = (n - (count + 1) / 2.0) * scenario.min_separation
    pts = np.zeros((count, 3))
    pts[:, 0] = x
    pts[:, 2] = scenario.height
    return pts


def fpa_channel_matrix(scenario: Scenario, count: int) -> np.ndarray:
    """(K, N) free-space channel of the fixed array (no waveguide phase term)."""
    r = scenario.radio
    pts = ula_positions(scenario, count)
    ue = scenario.ue_xy()
    d = np.sqrt((pts[None, :, 0] - ue[:, 0, None]) ** 2
                + (pts[None, :, 1] - ue[:, 1, None]) ** 2
                + scenario.height**2)
    return (math.sqrt(r.eta) / d) * np.exp(-2j * math.pi * d / r.lambda_c)


def _canonical_phase(w: np.ndarray) -> np.ndarray:
    """Remove the global phase: rotate so the largest-magnitude entry is real >= 0."""
    i = int(np.argmax(np.abs(w)))
    mag = abs(w[i])
    if mag == 0.0:
        return w
    return w * (np.conj(w[i]) / mag)


def matched_filter(h: np.ndarray, power: float) -> np.ndarray:
    """Equal-gain combination of the per-user matched filters, scaled to ||w||^2 = P."""
    norms = np.linalg.norm(h, axis=1, keepdims=True)
    combined = (h / norms).sum(axis=0)
    nc = np.linalg.norm(combined)
    if nc == 0.0:
        combined = np.ones(h.shape[1], dtype=complex)
        nc = np.linalg.norm(combined)
    return _canonical_phase(np.sqrt(power) * combined / nc)


def make_beamforming_problem(scenario: Scenario, count: int, params: pso.PsoParams,
                             initial_weights: Optional[np.ndarray] = None) -> pso.SwarmProblem:
    """Max-min beamforming over w in C^N under ||w||^2 = P, encoded as 2N reals."""
    h = fpa_channel_matrix(scenario, count)
    power = scenario.radio.tx_power_w
    sigma2 = scenario.radio.noise_power_w
    w0 = matched_filter(h, power) if initial_weights is None else _canonical_phase(
        np.asarray(initial_weights, dtype=complex))
    if w0.shape != (count,):
        raise ParameterError(f"initial weights must have shape ({count},)")
    scale = math.sqrt(power)

    def pack(w):
        return np.concatenate([w.real, w.imag], axis=-1)

    def unpack(x):
        return x[..., :count] + 1j * x[..., count:]

    def project(x):
        w = unpack(x)
        norms = np.linalg.norm(w, axis=-1, keepdims=True)
        degenerate = norms[..., 0] == 0.0
        if np.any(degenerate):
            w = np.where(degenerate[..., None], w0, w)
            norms = np.linalg.norm(w, axis=-1, keepdims=True)
        return pack(w * (scale / norms))

    def evaluate(x):
        w = unpack(x)
        received = np.abs(w @ h.conj().T) ** 2 / sigma2  # (..., K)
        with np.errstate(divide="ignore"):
            return 10.0 * np.log10(received.min(axis=-1))

    def init_positions(rng, m):
        # half perturbed warm starts, half random directions, all power-projected
        w = np.empty((m, count), dtype=complex)
        w[0] = w0
        for i in range(1, m):
            if i % 2 == 1:
                noise = (rng.normal(size=count) + 1j * rng.normal(size=count))
                w[i] = w0 + 0.5 * scale / math.sqrt(count) * noise
            else:
                w[i] = rng.normal(size=count) + 1j * rng.normal(size=count)
        return project(pack(w))

    return pso.SwarmProblem(
        dim=2 * count,
        v_max=0.2 * scale,
        init_positions=init_positions,
        project=project,
        evaluate=evaluate,
        feasible_mask=None,
    )


def optimize_fpa(scenario: Scenario, count: int, params: pso.PsoParams,
                 initial_weights: Optional[np.ndarray] = None) -> FpaResult:
    """Digital max-min beamforming for the fixed array via the swarm engine."""
    if count < 1:
        raise ParameterError("need at least one array element")
    problem = make_beamforming_problem(scenario, count, params, initial_weights)
    seeds = np.random.SeedSequence(params.rng_seed).spawn(params.restarts)
    runs = [pso.run_swarm(problem, params, np.random.default_rng(s)) for s in seeds]
    best = max(runs, key=lambda r: r.best_feasible_fitness)
    x = best.best_feasible_position
    w = x[:count] + 1j * x[count:]
    h = fpa_channel_matrix(scenario, count)
    mu = float((np.abs(h.conj() @ w) ** 2).min() / scenario.radio.noise_power_w)
    return FpaResult(
        weights=w,
        min_snr=mu,
        trace=[(i, float(f)) for i, f in enumerate(best.trace)],
    )


def pa_above_ues(scenario: Scenario, pas: int) -> tuple[PaConfiguration, float]:
    """Drop antennas straight onto the users (round-robin), repair spacing, evaluate.

    No phase optimization happens; this isolates the value of path-loss-only
    placement. Repair pushes an offending antenna radially away from the
    earliest prior antenna it crowds until the spacing holds.
    """
    ue = scenario.ue_xy()
    k = len(ue)
    d0 = scenario.min_separation
    half = scenario.side_length / 2.0
    pts: list[np.ndarray] = []
    for n in range(pas):
        p = ue[n % k].copy()
        if n >= k:
            p[0] += d0 * (n // k)  # stagger repeat visits before repair
        for _ in range(1000):
            clash = next((q for q in pts if float(np.hypot(*(p - q))) < d0), None)
            if clash is None:
                break
            delta = p - clash
            norm = float(np.hypot(*delta))
            direction = delta / norm if norm > 0 else np.array([1.0, 0.0])
            p = clash + direction * d0 * (1.0 + 1e-9)
            np.clip(p, -half, half, out=p)
        else:
            raise ParameterError("could not repair antenna spacing above the users")
        pts.append(p)
    config = PaConfiguration.from_xy(np.array(pts), scenario.height)
    return config, channel.min_snr(config, scenario)


# --- scheme registry -------------------------------------------------------

@dataclass
class SchemeOptions:
    """Knobs shared by all schemes when driven from the experiment runner."""

    pso: pso.PsoParams = field(default_factory=pso.PsoParams)
    grid_spacing: float = 1.0        # candidate spacing of the discrete design
    milp_time_budget: float = 60.0   # per-instance solver budget, seconds


@dataclass
class SchemeOutcome:
    mu_linear: float
    status: str           # "ok", "optimal", "timeout"
    detail: dict = field(default_factory=dict)


def _run_pass2d_cont(scenario, pas, options, seed):
    params = dataclasses.replace(options.pso, rng_seed=seed)
    res = pso.optimize(scenario, pas, params)
    return SchemeOutcome(mu_linear=res.min_snr, status="ok",
                         detail={"config": res.config, "trace": res.trace})


def _run_pass2d_disc(scenario, pas, options, seed):
    grid = discrete.grid_for_spacing(scenario.side_length, options.grid_spacing,
                                     scenario.height)
    table = discrete.discrete_channel_table(grid, scenario)
    conflicts = discrete.conflict_set(grid, scenario.min_separation)
    model = discrete.build_milp(table, conflicts, pas, scenario)
    res = discrete.solve_milp(model, time_budget=options.milp_time_budget)
    if res.selection is None:
        raise ParameterError(f"discrete solve failed with status {res.status}")
    return SchemeOutcome(mu_linear=res.mu, status=res.status,
                         detail={"selection": res.selection, "gap": res.gap,
                                 "nodes": res.nodes})


def _run_con_pass(scenario, pas, options, seed):
    params = dataclasses.replace(options.pso, rng_seed=seed)
    res = optimize_con_pass(scenario, pas, params)
    return SchemeOutcome(mu_linear=res.min_snr, status="ok",
                         detail={"config": res.config, "trace": res.trace})


def _run_fpa(scenario, pas, options, seed):
    params = dataclasses.replace(options.pso, rng_seed=seed)
    res = optimize_fpa(scenario, pas, params)
    return SchemeOutcome(mu_linear=res.min_snr, status="ok",
                         detail={"weights": res.weights, "trace": res.trace})


def _run_above_ues(scenario, pas, options, seed):
    config, mu = pa_above_ues(scenario, pas)
    return SchemeOutcome(mu_linear=mu, status="ok", detail={"config": config})


SCHEMES = {
    "pass2d-cont": _run_pass2d_cont,
    "pass2d-disc": _run_pass2d_disc,
    "con-pass": _run_con_pass,
    "fpa": _run_fpa,
    "above-ues": _run_above_ues,
}


def run_scheme(scheme_id: str, scenario: Scenario, pas: int,
               options: SchemeOptions, seed: int) -> SchemeOutcome:
    """Dispatch one scheme by its registered id."""
    try:
        runner = SCHEMES[scheme_id]
    except KeyError:
        raise ParameterError(
            f"unknown scheme {scheme_id!r}; registered: {sorted(SCHEMES)}") from None
    return runner(scenario, pas, options, seed)
