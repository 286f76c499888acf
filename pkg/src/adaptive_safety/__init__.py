"""Adaptive safety-critical control with high-order tuners."""

from .core import ConfigurationError, GainSet, weighted_quadratic, min_eigen_diag
from .controllers import ControllerKind
from .scenario import ScenarioConfig, SimConfig, build, load_scenario, parse_scenario, format_scenario
from .sim import run, Trace, SimulationError, DivergenceError
from .certify import check_conditions, monitor_affine, monitor_robot, effort_metrics

__version__ = "0.1.0"
