"""Weighted explicit-rate congestion control: switch algorithm, cell-level
simulator, centralized allocation solver, and an experiment harness."""

from .config import dump_config, parse_config
from .errors import (ConfigError, EmptyProblemError, EmptyTraceError, GwFairError,
                     InfeasibleError, ParseError, PolicyMismatchError, SemanticError)
from .experiments import (BUILTIN_NAMES, ComparisonReport, ExperimentSpec, SessionSetup,
                          SwitchConfig, VerdictRule, builtin, run_experiment, to_network,
                          write_outputs)
from .fairness import (LinkShareProblem, SessionParams, WeightPolicy, gw_share,
                       resolve_weights, validate_feasible, weight_from_pricing)
from .network import Link, NetworkSpec, Session
from .oracle import Allocation, bottleneck_order, solve, verify_allocation
from .sim import (Engine, SourceModel, Trace, build, convergence_time, steady_state_acr,
                  steady_state_rates, utilization)
from .switchalg import (CELL_BITS, PortState, RmCell, SwitchParams, activity_level,
                        fraction)

__all__ = [
    "Allocation", "BUILTIN_NAMES", "CELL_BITS", "ComparisonReport", "ConfigError",
    "EmptyProblemError", "EmptyTraceError", "Engine", "ExperimentSpec", "GwFairError",
    "InfeasibleError", "Link", "LinkShareProblem", "NetworkSpec", "ParseError",
    "PolicyMismatchError", "PortState", "RmCell", "SemanticError", "Session",
    "SessionParams", "SessionSetup", "SourceModel", "SwitchConfig", "SwitchParams",
    "Trace", "VerdictRule", "WeightPolicy", "bottleneck_order", "build", "builtin",
    "convergence_time", "dump_config", "fraction", "activity_level", "gw_share",
    "parse_config", "resolve_weights", "run_experiment", "solve", "steady_state_acr",
    "steady_state_rates", "to_network", "utilization", "validate_feasible",
    "verify_allocation", "weight_from_pricing", "write_outputs",
]

__version__ = "1.0.0"
