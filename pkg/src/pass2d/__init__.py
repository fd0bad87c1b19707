"""Planar pinching-antenna placement optimization.

Models a downlink where N repositionable radiating points on a waveguide plane
serve K users, and maximizes the worst user's SNR: a penalty-driven particle
swarm handles the continuous placement problem, and an exact branch-and-bound
over a McCormick-linearized selection model handles the discrete grid variant.
Benchmark schemes and a seeded Monte Carlo experiment harness round things out.
"""

from . import benchmarks, channel, discrete, experiments, pso
from .channel import (
    PaConfiguration,
    Point3,
    RadioParams,
    Scenario,
    default_radio,
    derive_radio_params,
    make_scenario,
    min_snr,
    snr_per_user,
)
from .errors import (
    BudgetExceededError,
    InfeasibleError,
    InitializationError,
    ParameterError,
    SingularityError,
)
from .pso import PsoParams, PsoResult, optimize

__version__ = "0.1.0"

__all__ = [
    "benchmarks",
    "channel",
    "discrete",
    "experiments",
    "pso",
    "PaConfiguration",
    "Point3",
    "RadioParams",
    "Scenario",
    "default_radio",
    "derive_radio_params",
    "make_scenario",
    "min_snr",
    "snr_per_user",
    "PsoParams",
    "PsoResult",
    "optimize",
    "ParameterError",
    "SingularityError",
    "InitializationError",
    "InfeasibleError",
    "BudgetExceededError",
]
