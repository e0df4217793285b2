"""Risk-averse stochastic multi-armed bandits with mean-variance risk measures."""

from .bounds import (
    BoundReport,
    hoelder_bound,
    lipschitz_bound,
    non_hoelder_bound,
    pull_count_bound,
    theorem1_bound,
    theorem2_bound,
    threshold_corollary_bound,
)
from .environment import BanditInstance, Bernoulli, Discrete, ScaledBeta, TwoPoint, arm_from_dict, ground_truth
from .estimators import UNSAMPLED, RunningStats, mean_radius, risk_radius, variance_radius
from .harness import ExperimentConfig, RegretTrace, regret_ratio_diagnostic, run_experiment, simulate
from .policies import FORCE, Greedy, Oracle, PhiLCB, PhiLCB2, PolicyState, Uniform, lcb_index, phase1_stop_check
from .risk_measures import (
    IDENTITY,
    ConfigError,
    DomainError,
    Modulus,
    RiskMeasure,
    catalog,
    construct_modulus,
    disc_distance,
    hoelder,
    lipschitz,
    modulus_inverse,
    restricted_modulus,
)

__version__ = "0.1.0"
