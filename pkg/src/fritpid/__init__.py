"""Data-driven PID tuning from closed-loop data.

Offline tuning (fictitious-reference batch least squares) and online
adaptive tuning by recursive least squares with exponential, directional,
or resetting forgetting, plus simulated plants and a scenario harness for
closed-loop experiments.
"""

from .adaptive import (
    DenominatorUnderflowError,
    DirectionalForgettingRls,
    ExponentialResettingRls,
    NumericalBreakdownError,
    RegressorGenerator,
    RlsEstimator,
    SingularInformationError,
    make_estimator,
    symmetric_eigen_bounds,
)
from .controller import PidBasis, PidController, as_gains, pid_filter
from .frit import (
    ClosedLoopDataset,
    InverseNotProperError,
    RankDeficientError,
    UnstableInverseWarning,
    batch_tune,
    fictitious_reference,
    frit_cost,
    polish,
)
from .harness import (
    ConfigError,
    RunTrace,
    ScenarioConfig,
    compare_methods,
    method_variants,
    mu_sweep,
    run_scenario,
)
from .lti import RationalFilter, ReferenceModel, one_minus
from .plant import BoucWenParams, BoucWenPlant, LtiPlant, quasi_static_sweep

__version__ = "0.1.0"

__all__ = [
    "BoucWenParams",
    "BoucWenPlant",
    "ClosedLoopDataset",
    "ConfigError",
    "DenominatorUnderflowError",
    "DirectionalForgettingRls",
    "ExponentialResettingRls",
    "InverseNotProperError",
    "LtiPlant",
    "NumericalBreakdownError",
    "PidBasis",
    "PidController",
    "RankDeficientError",
    "RationalFilter",
    "ReferenceModel",
    "RegressorGenerator",
    "RlsEstimator",
    "RunTrace",
    "ScenarioConfig",
    "SingularInformationError",
    "UnstableInverseWarning",
    "as_gains",
    "batch_tune",
    "compare_methods",
    "fictitious_reference",
    "frit_cost",
    "make_estimator",
    "method_variants",
    "mu_sweep",
    "one_minus",
    "pid_filter",
    "polish",
    "quasi_static_sweep",
    "run_scenario",
    "symmetric_eigen_bounds",
]
