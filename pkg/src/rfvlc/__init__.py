"""Indoor hybrid RF/VLC downlink simulator with learning power allocation.

Each access point (one RF, several optical) is an independent agent that
picks discrete per-user transmit powers to keep every user's achieved rate
inside a tolerance band around its target rate. Two agent families are
provided: tabular Q-learning over a coarse rate-status code, and a small
from-scratch Q-network over the raw (rate, target) vector.
"""

from rfvlc.channel import (
    LinkGeometry,
    RfPhyParams,
    VlcPhyParams,
    concentrator_gain,
    dbm_per_mhz_to_w_per_hz,
    lambertian_order,
    rf_channel_gain,
    rf_path_loss,
    rf_rate,
    total_rate,
    vlc_channel_gain,
    vlc_rate,
    w_per_hz_to_dbm_per_mhz,
)
from rfvlc.config import ConfigError, ExperimentConfig, dump_config, load_config
from rfvlc.dqn import (
    AdamState,
    DqnAgent,
    MlpParams,
    ReplayBuffer,
    Transition,
    adam_step,
    build_state_vector,
    dqn_select_action,
    dqn_train_step,
    mlp_forward,
    mse_grad,
    sample_minibatch,
    td_targets,
)
from rfvlc.environment import (
    HybridNetworkEnv,
    NetworkState,
    PowerConstraintError,
    RoomLayout,
    allocate_bandwidth,
    associate_users,
    place_users,
    target_band,
    utility,
)
from rfvlc.harness import (
    EpisodeRecord,
    MonteCarloSummary,
    detect_convergence,
    run_episode,
    run_monte_carlo,
    steady_state_error,
    write_episode_csv,
    write_summary_csv,
)
from rfvlc.tabular import (
    ActionSpace,
    QlAgent,
    QTable,
    discretize_state,
    enumerate_actions,
    epsilon,
    joint_state_index,
    num_joint_states,
    q_update,
    select_action,
)

__all__ = [
    "ActionSpace",
    "AdamState",
    "ConfigError",
    "DqnAgent",
    "EpisodeRecord",
    "ExperimentConfig",
    "HybridNetworkEnv",
    "LinkGeometry",
    "MlpParams",
    "MonteCarloSummary",
    "NetworkState",
    "PowerConstraintError",
    "QTable",
    "QlAgent",
    "ReplayBuffer",
    "RfPhyParams",
    "RoomLayout",
    "Transition",
    "VlcPhyParams",
    "adam_step",
    "allocate_bandwidth",
    "associate_users",
    "build_state_vector",
    "concentrator_gain",
    "dbm_per_mhz_to_w_per_hz",
    "detect_convergence",
    "discretize_state",
    "dqn_select_action",
    "dqn_train_step",
    "dump_config",
    "enumerate_actions",
    "epsilon",
    "joint_state_index",
    "lambertian_order",
    "load_config",
    "mlp_forward",
    "mse_grad",
    "num_joint_states",
    "place_users",
    "q_update",
    "rf_channel_gain",
    "rf_path_loss",
    "rf_rate",
    "run_episode",
    "run_monte_carlo",
    "steady_state_error",
    "sample_minibatch",
    "select_action",
    "target_band",
    "td_targets",
    "total_rate",
    "utility",
    "vlc_channel_gain",
    "vlc_rate",
    "w_per_hz_to_dbm_per_mhz",
    "write_episode_csv",
    "write_summary_csv",
]

__version__ = "0.1.0"
