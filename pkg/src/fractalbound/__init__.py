"""Atom-photon bound states on self-similar photonic lattices.

Builds fractal lattice graphs, assembles the single-excitation coupled
Hamiltonian, extracts the bound-state cloud, and fits the far-field
localization-length scaling xi ~ delta^(-1/d_w) and the near-field exponent
beta = d_w - d_f.
"""

from .boundstate import BoundState, Profile, ProfileKind, compute_bound_state
from .config import ConfigError, ExperimentConfig, load_config
from .experiments import run_farfield, run_nearfield, run_verify
from .graphs import (Family, FamilySpec, FractalDimensions, Graph, build_graph,
                     table_dimensions)
from .operators import EmitterConfig, bath_operator, coupled_hamiltonian, default_coupling
from .scaling import (ScalingFit, fit_beta, fit_walk_dimension, near_field_curve,
                      saddle_point, window_sweep)

__all__ = [
    "BoundState", "Profile", "ProfileKind", "compute_bound_state",
    "ConfigError", "ExperimentConfig", "load_config",
    "run_farfield", "run_nearfield", "run_verify",
    "Family", "FamilySpec", "FractalDimensions", "Graph", "build_graph",
    "table_dimensions",
    "EmitterConfig", "bath_operator", "coupled_hamiltonian", "default_coupling",
    "ScalingFit", "fit_beta", "fit_walk_dimension", "near_field_curve",
    "saddle_point", "window_sweep",
]

__version__ = "0.1.0"
