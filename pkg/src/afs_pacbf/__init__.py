"""Adaptive high-order control-barrier-function safety filter for
articulated-frame-steering vehicles with first-order actuator lag."""

from ._backend import BACKEND
from .barrier import BarrierEvaluation, BarrierParams, Obstacle, PacbfState, barrier_chain, h_values
from .config import ScenarioConfig, default_config, load_config
from .nominal import NominalParams, nominal_input
from .qp import QpProblem, QpSolution, regularize, solve
from .safety_filter import FilterWeights, InputBounds, assemble_qp, filter_step
from .scenario import run_scenario
from .vehicle import ActuatorParams, ActuatorState, AugmentedState, VehicleGeometry, VehicleState

__version__ = "0.1.0"
