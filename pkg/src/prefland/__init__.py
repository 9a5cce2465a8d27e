"""Preference-based reward learning for vertical-landing trajectory models."""

from .config import ExperimentConfig, load_config
from .iteration import (
    QueryBundle,
    SessionEngine,
    SessionState,
    SimulatedExpert,
    cosine_similarity,
    final_stochastic_model,
    generate_query,
    reward_iteration,
    sample_initial_states,
    simulated_response,
)
from .landing import (
    FeatureVector,
    FixedRewardParams,
    GridConfig,
    JointAction,
    LandingModel,
    LandingState,
    RewardWeights,
    TrajectorySet,
    build_landing_mdp,
    transition,
)
from .mdp import (
    FiniteMDP,
    QTable,
    Trajectory,
    greedy_action,
    rollout,
    softmax_probabilities,
    value_iteration,
)
from .preferences import (
    PosteriorSamples,
    PreferenceRecord,
    adaptive_metropolis,
    estimate_weights,
    likelihood,
    log_posterior,
)
from .queries import (
    QueryPair,
    kde_density,
    multiobjective_select,
    probabilistic_qeval_select,
)

__version__ = "0.1.0"

__all__ = [
    "ExperimentConfig",
    "FeatureVector",
    "FiniteMDP",
    "FixedRewardParams",
    "GridConfig",
    "JointAction",
    "LandingModel",
    "LandingState",
    "PosteriorSamples",
    "PreferenceRecord",
    "QTable",
    "QueryBundle",
    "QueryPair",
    "RewardWeights",
    "SessionEngine",
    "SessionState",
    "SimulatedExpert",
    "Trajectory",
    "TrajectorySet",
    "adaptive_metropolis",
    "build_landing_mdp",
    "cosine_similarity",
    "estimate_weights",
    "final_stochastic_model",
    "generate_query",
    "greedy_action",
    "kde_density",
    "likelihood",
    "load_config",
    "log_posterior",
    "multiobjective_select",
    "probabilistic_qeval_select",
    "reward_iteration",
    "rollout",
    "sample_initial_states",
    "simulated_response",
    "softmax_probabilities",
    "transition",
    "value_iteration",
]
