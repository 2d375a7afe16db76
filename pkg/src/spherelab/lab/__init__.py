"""Experiments, region geometry and the ``lab`` command line."""
from ..fitting import FitResult, exponent_fit
from .experiments import RUNNERS, SCHEMAS, ExperimentResult, parse_config_text, run
from .region import (RegionVertices, in_delta, in_omega, region_vertices,
                     restricted_weak_type, sharpness_E_exponent, strong_type)

run_experiment = run
