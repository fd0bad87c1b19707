"""Config-driven Monte Carlo sweeps over the registered schemes.

A sweep varies one quantity (transmit power, antenna count, user count, region
size, grid spacing, or iteration budget) while users are redrawn uniformly in
the square for every realization. Within one realization every scheme sees the
exact same user set (paired comparison); all randomness derives from the master
seed, so a config reproduces its raw records exactly (wall-clock columns
excepted).

CSV schemas (column order is stable):
  raw:        scheme,sweep_name,sweep_value,realization,mu_linear,mu_db,wall_ms,status
  aggregates: scheme,sweep_name,sweep_value,n,mean_db,stderr_db,mean_linear
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import benchmarks, channel
from .channel import Point3, Scenario
from .errors import ParameterError
from .pso import PsoParams

SWEEP_NAMES = ("power_dbm", "num_pas", "num_ues", "side_length", "delta", "iterations")


@dataclass
class ExperimentConfig:
    """One sweep: the variable, its values, the schemes, and all fixed parameters."""

    sweep_name: str
    sweep_values: list[float]
    schemes: list[str]
    realizations: int = 500
    master_seed: int = 0
    jobs: int = 1
    # fixed system parameters (defaults follow the standard simulation setup)
    num_pas: int = 4
    num_ues: int = 4
    power_dbm: float = 20.0
    noise_dbm: float = -80.0
    side_length: float = 20.0
    height: float = 3.0
    carrier_freq_hz: float = 28e9
    n_eff: float = 1.4
    min_separation: float | None = None  # None -> half the carrier wavelength
    feed_z: float | None = None          # None -> waveguide height
    pso: PsoParams = field(default_factory=PsoParams)
    grid_spacing: float = 1.0
    milp_time_budget: float = 60.0

    def __post_init__(self):
        if self.sweep_name not in SWEEP_NAMES:
            raise ParameterError(f"unknown sweep {self.sweep_name!r}; one of {SWEEP_NAMES}")
        if len(self.sweep_values) == 0:
            raise ParameterError("sweep_values must be non-empty")
        if not all(b > a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
            raise ParameterError("sweep_values must be strictly increasing")
        if self.realizations < 1:
            raise ParameterError("realizations must be >= 1")
        unknown = [s for s in self.schemes if s not in benchmarks.SCHEMES]
        if unknown:
            raise ParameterError(f"unregistered schemes: {unknown}")
        if not self.schemes:
            raise ParameterError("need at least one scheme")


@dataclass
class ResultRecord:
    scheme: str
    sweep_name: str
    sweep_value: float
    realization: int
    mu_linear: float
    mu_db: float
    wall_ms: float
    status: str


def sample_ues(num_ues: int, side_length: float, rng: np.random.Generator) -> list[Point3]:
    """num_ues i.i.d. floor points, coordinates uniform on [-D/2, D/2]."""
    if num_ues < 1:
        raise ParameterError("need at least one UE")
    half = side_length / 2.0
    xy = rng.uniform(-half, half, size=(num_ues, 2))
    return [Point3(float(x), float(y), 0.0) for x, y in xy]


def _sweep_settings(config: ExperimentConfig, sweep_value):
    """Per-sweep-point effective settings (num_pas, num_ues, power, D, spacing, pso)."""
    s = {
        "num_pas": config.num_pas,
        "num_ues": config.num_ues,
        "power_dbm": config.power_dbm,
        "side_length": config.side_length,
        "grid_spacing": config.grid_spacing,
        "pso": config.pso,
    }
    name = config.sweep_name
    if name == "power_dbm":
        s["power_dbm"] = float(sweep_value)
    elif name == "num_pas":
        s["num_pas"] = int(sweep_value)
    elif name == "num_ues":
        s["num_ues"] = int(sweep_value)
    elif name == "side_length":
        s["side_length"] = float(sweep_value)
    elif name == "delta":
        s["grid_spacing"] = float(sweep_value)
    elif name == "iterations":
        s["pso"] = dataclasses.replace(config.pso, max_iters=int(sweep_value))
    return s


def _scenario_for(config: ExperimentConfig, settings, ues) -> Scenario:
    radio = channel.derive_radio_params(
        config.carrier_freq_hz,
        config.n_eff,
        float(channel.dbm_to_watts(settings["power_dbm"])),
        float(channel.dbm_to_watts(config.noise_dbm)),
    )
    return channel.make_scenario(
        [(u.x, u.y) for u in ues],
        side_length=settings["side_length"],
        height=config.height,
        radio=radio,
        min_separation=config.min_separation,
        feed_z=config.feed_z,
    )


def _scheme_seed(master_seed: int, realization: int, scheme_idx: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed,
                                spawn_key=(realization, scheme_idx))
    return int(ss.generate_state(2, np.uint64)[0])


def _run_realization(config: ExperimentConfig, sweep_idx: int, realization: int):
    """All schemes for one (sweep value, realization) cell; the parallel work unit.

    Seeds depend on the realization (and scheme), not the sweep index, so sweep
    points that share user statistics see byte-identical user draws: sweeping
    power over a fixed realization moves every curve in lockstep.
    """
    sweep_value = config.sweep_values[sweep_idx]
    settings = _sweep_settings(config, sweep_value)
    ue_rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.master_seed, spawn_key=(realization,)))
    ues = sample_ues(settings["num_ues"], settings["side_length"], ue_rng)
    scenario = _scenario_for(config, settings, ues)
    options = benchmarks.SchemeOptions(
        pso=settings["pso"],
        grid_spacing=settings["grid_spacing"],
        milp_time_budget=config.milp_time_budget,
    )
    records = []
    for scheme_idx, scheme in enumerate(config.schemes):
        seed = _scheme_seed(config.master_seed, realization, scheme_idx)
        t0 = time.perf_counter()
        try:
            outcome = benchmarks.run_scheme(scheme, scenario, settings["num_pas"],
                                            options, seed)
            mu, status = float(outcome.mu_linear), outcome.status
        except Exception as exc:  # scheme failures are data, not crashes
            mu, status = float("nan"), f"error: {exc}"
        wall_ms = (time.perf_counter() - t0) * 1e3
        mu_db = 10.0 * math.log10(mu) if mu > 0 else float("nan")
        records.append(ResultRecord(
            scheme=scheme,
            sweep_name=config.sweep_name,
            sweep_value=sweep_value,
            realization=realization,
            mu_linear=mu,
            mu_db=mu_db,
            wall_ms=wall_ms,
            status=status,
        ))
    return records


def run_experiment(config: ExperimentConfig, jobs: int | None = None) -> list[ResultRecord]:
    """Run the full sweep; deterministic given master_seed regardless of `jobs`."""
    jobs = config.jobs if jobs is None else jobs
    cells = [(si, r) for si in range(len(config.sweep_values))
             for r in range(config.realizations)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_realization,
                                   [config] * len(cells),
                                   [c[0] for c in cells],
                                   [c[1] for c in cells],
                                   chunksize=1))
    else:
        chunks = [_run_realization(config, si, r) for si, r in cells]
    records: list[ResultRecord] = []
    for chunk in chunks:
        records.extend(chunk)
    return records


@dataclass
class AggregateRow:
    scheme: str
    sweep_name: str
    sweep_value: float
    n: int
    mean_db: float
    stderr_db: float
    mean_linear: float


def aggregate(records: list[ResultRecord]) -> list[AggregateRow]:
    """Mean dB (and linear) per (scheme, sweep value); errors are dropped with a warning.

    The reported mean is the mean of the per-realization dB values; the linear
    mean is carried alongside so either convention can be plotted.
    """
    groups: dict[tuple[str, float], list[ResultRecord]] = {}
    for rec in records:
        groups.setdefault((rec.scheme, rec.sweep_value), []).append(rec)
    rows: list[AggregateRow] = []
    for (scheme, value), group in groups.items():
        usable = [r for r in group if not r.status.startswith("error")
                  and math.isfinite(r.mu_db)]
        if not usable:
            warnings.warn(f"no usable records for scheme={scheme} value={value}; omitted")
            continue
        db = np.array([r.mu_db for r in usable])
        lin = np.array([r.mu_linear for r in usable])
        stderr = float(db.std(ddof=1) / math.sqrt(len(db))) if len(db) > 1 else 0.0
        rows.append(AggregateRow(
            scheme=scheme,
            sweep_name=group[0].sweep_name,
            sweep_value=value,
            n=len(usable),
            mean_db=float(db.mean()),
            stderr_db=stderr,
            mean_linear=float(lin.mean()),
        ))
    return rows


RAW_COLUMNS = ["scheme", "sweep_name", "sweep_value", "realization",
               "mu_linear", "mu_db", "wall_ms", "status"]
AGG_COLUMNS = ["scheme", "sweep_name", "sweep_value", "n",
               "mean_db", "stderr_db", "mean_linear"]


def emit_csv(records: list[ResultRecord], aggregates: list[AggregateRow], out_dir):
    """Write records.csv and aggregates.csv under out_dir; returns both paths."""
    import os

    try:
        os.makedirs(out_dir, exist_ok=True)
        raw_path = os.path.join(out_dir, "records.csv")
        agg_path = os.path.join(out_dir, "aggregates.csv")
        with open(raw_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(RAW_COLUMNS)
            for r in records:
                w.writerow([r.scheme, r.sweep_name, repr(float(r.sweep_value)),
                            r.realization, repr(float(r.mu_linear)), repr(float(r.mu_db)),
                            repr(float(r.wall_ms)), r.status])
        with open(agg_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(AGG_COLUMNS)
            for a in aggregates:
                w.writerow([a.scheme, a.sweep_name, repr(float(a.sweep_value)), a.n,
                            repr(float(a.mean_db)), repr(float(a.stderr_db)),
                            repr(float(a.mean_linear))])
    except OSError as exc:
        raise OSError(f"cannot write experiment CSVs under {out_dir!r}: {exc}") from exc
    return raw_path, agg_path


def read_records_csv(path) -> list[ResultRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RAW_COLUMNS:
            raise ParameterError(f"{path}: unexpected raw CSV header {reader.fieldnames}")
        return [ResultRecord(
            scheme=row["scheme"],
            sweep_name=row["sweep_name"],
            sweep_value=float(row["sweep_value"]),
            realization=int(row["realization"]),
            mu_linear=float(row["mu_linear"]),
            mu_db=float(row["mu_db"]),
            wall_ms=float(row["wall_ms"]),
            status=row["status"],
        ) for row in reader]


def read_aggregates_csv(path) -> list[AggregateRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != AGG_COLUMNS:
            raise ParameterError(f"{path}: unexpected aggregate CSV header {reader.fieldnames}")
        return [AggregateRow(
            scheme=row["scheme"],
            sweep_name=row["sweep_name"],
            sweep_value=float(row["sweep_value"]),
            n=int(row["n"]),
            mean_db=float(row["mean_db"]),
            stderr_db=float(row["stderr_db"]),
            mean_linear=float(row["mean_linear"]),
        ) for row in reader]


def build_figure(aggregates: list[AggregateRow], figure_id: str):
    """Line plot, one series per scheme: mean min-SNR (dB) against the swept value."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not aggregates:
        raise ParameterError("nothing to plot: no aggregate rows")
    fig, ax = plt.subplots(figsize=(7, 5))
    schemes = []
    for a in aggregates:
        if a.scheme not in schemes:
            schemes.append(a.scheme)
    for scheme in schemes:
        rows = sorted((a for a in aggregates if a.scheme == scheme),
                      key=lambda a: a.sweep_value)
        ax.plot([a.sweep_value for a in rows], [a.mean_db for a in rows],
                marker="o", label=scheme)
    ax.set_xlabel(aggregates[0].sweep_name)
    ax.set_ylabel("mean min-SNR (dB)")
    ax.set_title(figure_id)
    ax.grid(alpha=0.3)
    ax.legend()
    return fig


def emit_plot(aggregates: list[AggregateRow], figure_id: str, path):
    """Render the sweep plot to an image file; returns the path."""
    fig = build_figure(aggregates, figure_id)
    try:
        fig.savefig(path, dpi=150, bbox_inches="tight")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path!r}: {exc}") from exc
    finally:
        import matplotlib.pyplot as plt

        plt.close(fig)
    return path


# --- config files -----------------------------------------------------------

_CONFIG_SCHEMA = {
    "system": {
        "num_pas": int,
        "num_ues": int,
        "power_dbm": float,
        "noise_dbm": float,
        "side_length": float,
        "height": float,
        "carrier_freq_hz": float,
        "n_eff": float,
        "min_separation": "auto_float",
        "feed_z": "auto_float",
    },
    "pso": {
        "num_particles": int,
        "max_iters": int,
        "accel_cognitive": float,
        "accel_social": float,
        "inertia_max": float,
        "inertia_min": float,
        "penalty_db": float,
        "init_radius": float,
        "v_max": "auto_float",
        "restarts": int,
        "stall_tolerance": float,
        "stall_window": int,
    },
    "grid": {
        "spacing": float,
        "milp_time_budget": float,
    },
    "experiment": {
        "sweep": str,
        "values": "float_list",
        "schemes": "str_list",
        "realizations": int,
        "master_seed": int,
        "jobs": int,
    },
}


def default_config_text() -> str:
    """An INI config carrying every default; edit and feed to `pass2d run`."""
    return """\
[system]
num_pas = 4
num_ues = 4
power_dbm = 20
noise_dbm = -80
side_length = 20
height = 3
carrier_freq_hz = 28e9
n_eff = 1.4
min_separation = auto
feed_z = auto

[pso]
num_particles = 500
max_iters = 200
accel_cognitive = 1.5
accel_social = 1.5
inertia_max = 0.9
inertia_min = 0.4
penalty_db = 30
init_radius = 2
v_max = auto
restarts = 4
stall_tolerance = 1e-3
stall_window = 25

[grid]
spacing = 1.0
milp_time_budget = 60

[experiment]
sweep = power_dbm
values = 10, 15, 20, 25, 30
schemes = pass2d-cont, con-pass, fpa
realizations = 100
master_seed = 1
jobs = 1
"""


def _parse_value(kind, raw: str):
    raw = raw.strip()
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is str:
        return raw
    if kind == "auto_float":
        return None if raw.lower() == "auto" else float(raw)
    if kind == "float_list":
        return [float(v) for v in raw.split(",") if v.strip()]
    if kind == "str_list":
        return [v.strip() for v in raw.split(",") if v.strip()]
    raise AssertionError(kind)


def load_config(path) -> ExperimentConfig:
    """Parse an INI experiment config; unknown sections or keys are errors."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.read_string(default_config_text())  # defaults
    user = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path, encoding="utf-8") as fh:
        user.read_file(fh)
    for section in user.sections():
        if section not in _CONFIG_SCHEMA:
            raise ParameterError(f"{path}: unknown config section [{section}]")
        for key in user[section]:
            if key not in _CONFIG_SCHEMA[section]:
                raise ParameterError(f"{path}: unknown key {key!r} in [{section}]")
            parser[section][key] = user[section][key]

    def get(section, key):
        return _parse_value(_CONFIG_SCHEMA[section][key], parser[section][key])

    pso_params = PsoParams(
        num_particles=get("pso", "num_particles"),
        max_iters=get("pso", "max_iters"),
        accel_cognitive=get("pso", "accel_cognitive"),
        accel_social=get("pso", "accel_social"),
        inertia_max=get("pso", "inertia_max"),
        inertia_min=get("pso", "inertia_min"),
        penalty_db=get("pso", "penalty_db"),
        init_radius=get("pso", "init_radius"),
        v_max=get("pso", "v_max"),
        restarts=get("pso", "restarts"),
        stall_tolerance=get("pso", "stall_tolerance"),
        stall_window=get("pso", "stall_window"),
    )
    return ExperimentConfig(
        sweep_name=get("experiment", "sweep"),
        sweep_values=get("experiment", "values"),
        schemes=get("experiment", "schemes"),
        realizations=get("experiment", "realizations"),
        master_seed=get("experiment", "master_seed"),
        jobs=get("experiment", "jobs"),
        num_pas=get("system", "num_pas"),
        num_ues=get("system", "num_ues"),
        power_dbm=get("system", "power_dbm"),
        noise_dbm=get("system", "noise_dbm"),
        side_length=get("system", "side_length"),
        height=get("system", "height"),
        carrier_freq_hz=get("system", "carrier_freq_hz"),
        n_eff=get("system", "n_eff"),
        min_separation=get("system", "min_separation"),
        feed_z=get("system", "feed_z"),
        pso=pso_params,
        grid_spacing=get("grid", "spacing"),
        milp_time_budget=get("grid", "milp_time_budget"),
    )
