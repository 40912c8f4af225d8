"""Event-by-event simulation of single-neutron interferometry experiments.

Neutrons are messengers carrying a two-component complex vector; beam
splitters are deterministic learning machines; a closed-form quantum oracle
provides reference predictions for every experiment.
"""

from .analysis import (
    CorrelationGrid,
    UncertaintyPoint,
    chsh_max,
    chsh_S,
    correlation_E,
    epsilon_eta,
    expectation_from_counts,
    fringe_stats,
)
from .beamsplitter import BeamSplitterState, compute_amplitudes, init_state, process_event, route
from .config import ConfigError, RunManifest, load_config, parse_config
from .message import MagneticMoment, Message, field_precession, free_flight, make_message, moment_of
from .networks import (
    BellConfig,
    CountTable,
    InterferometerConfig,
    OzawaConfig,
    run_bell,
    run_interferometer,
    run_ozawa,
)
from .rng import RngStream, fork, next_uniform
from .sweep import bell_grid, interferometer_sweep, ozawa_sweep

__version__ = "0.1.0"

__all__ = [
    "BeamSplitterState", "BellConfig", "ConfigError", "CorrelationGrid", "CountTable",
    "InterferometerConfig", "MagneticMoment", "Message", "OzawaConfig", "RngStream", "RunManifest",
    "UncertaintyPoint", "bell_grid", "chsh_S", "chsh_max", "compute_amplitudes", "correlation_E",
    "epsilon_eta", "expectation_from_counts", "field_precession", "fork", "free_flight",
    "fringe_stats", "init_state", "interferometer_sweep", "load_config", "make_message",
    "moment_of", "next_uniform", "ozawa_sweep", "parse_config", "process_event", "route",
    "run_bell", "run_interferometer", "run_ozawa",
]
