"""Episode runner, convergence detection, Monte Carlo batches, CSV export.

An episode drops users, builds one learner per access point, and iterates
allocate -> observe -> learn until every user's mean rate over a trailing
window sits inside its per-user tolerance band, or an iteration cap is hit.
Batches pair runs by seed so the two learner families see identical networks.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from rfvlc.config import ExperimentConfig
from rfvlc.dqn import DqnAgent, build_state_vector
from rfvlc.environment import HybridNetworkEnv
from rfvlc.tabular import (
    QlAgent,
    discretize_state,
    enumerate_actions,
    epsilon,
    joint_state_index,
    num_joint_states,
)

ALGORITHMS = ("ql", "dqn")


@dataclass
class EpisodeRecord:
    """Everything observable about one training run; rates are in Mbps."""

    algorithm: str
    seed: int
    targets_mbps: np.ndarray
    bands_mbps: np.ndarray
    rates_mbps: np.ndarray  # shape (n_iterations, n_users)
    rewards: np.ndarray
    epsilons: np.ndarray
    convergence_iteration: int | None
    wall_time_s: float

    @property
    def converged(self) -> bool:
        return self.convergence_iteration is not None


def detect_convergence(
    rates_mbps: np.ndarray,
    targets_mbps: np.ndarray,
    bands_mbps: np.ndarray,
    window: int,
) -> int | None:
    """First 1-based iteration starting a full window of in-band mean rates.

    A window starting at ``t`` qualifies when, for every user, the mean rate
    over iterations ``t .. t+window-1`` lies in [target, target + band].
    Returns None when no such window fits in the trace.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    n_iter = rates_mbps.shape[0]
    if n_iter < window:
        return None
    cumsum = np.vstack([np.zeros(rates_mbps.shape[1]), np.cumsum(rates_mbps, axis=0)])
    means = (cumsum[window:] - cumsum[:-window]) / window
    in_band = (means >= targets_mbps) & (means <= targets_mbps + bands_mbps)
    ok = np.all(in_band, axis=1)
    hits = np.nonzero(ok)[0]
    return int(hits[0]) + 1 if hits.size else None


def _build_agents(cfg: ExperimentConfig, env: HybridNetworkEnv, algorithm: str, agent_rngs):
    """Per-AP action spaces and learners.

    Every AP allocates a power level to every user (size-N vectors under the
    AP's sum cap); power aimed at a user an AP does not cover is simply spent
    without effect, and the agents have to learn that.
    """
    spaces = []
    for a in range(env.n_agents):
        cap = cfg.rf_max_power_w if a == env.rf_agent_index else cfg.vlc_max_power_w
        spaces.append(enumerate_actions(cfg.power_levels(cap), cfg.n_users, cap))
    agents = []
    for a, space in enumerate(spaces):
        if algorithm == "ql":
            agents.append(
                QlAgent(
                    n_states=num_joint_states(cfg.n_users),
                    action_space=space,
                    learning_rate=cfg.ql_learning_rate,
                    discount=cfg.discount,
                    rng=agent_rngs[a],
                )
            )
        else:
            agents.append(
                DqnAgent(
                    state_dim=2 * cfg.n_users,
                    n_actions=space.n_actions,
                    discount=cfg.discount,
                    rng=agent_rngs[a],
                    hidden=cfg.dqn_hidden,
                    learning_rate=cfg.dqn_learning_rate,
                    replay_capacity=cfg.replay_capacity,
                    batch_size=cfg.batch_size,
                )
            )
    return spaces, agents


def run_episode(
    cfg: ExperimentConfig,
    algorithm: str,
    seed: int,
    frozen_channel: bool = False,
) -> EpisodeRecord:
    """Train one network drop to convergence or the iteration cap."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"algorithm must be one of {ALGORITHMS}")
    start = time.perf_counter()

    streams = np.random.SeedSequence(seed).spawn(7)
    placement_rng = np.random.default_rng(streams[0])
    channel_rng = np.random.default_rng(streams[1])
    env = HybridNetworkEnv(cfg, placement_rng, channel_rng, frozen_channel=frozen_channel)
    agent_rngs = [np.random.default_rng(s) for s in streams[2 : 2 + env.n_agents]]
    spaces, agents = _build_agents(cfg, env, algorithm, agent_rngs)

    n_users = cfg.n_users
    window = cfg.convergence_window
    targets = env.targets_mbps
    bands = env.bands_mbps

    rates_log = np.empty((cfg.max_iterations, n_users))
    rewards = np.empty(cfg.max_iterations)
    epsilons = np.empty(cfg.max_iterations)
    window_sum = np.zeros(n_users)
    prev_rates = np.zeros(n_users)
    convergence_iteration = None
    n_done = 0

    for t in range(1, cfg.max_iterations + 1):
        if algorithm == "ql":
            state = joint_state_index(discretize_state(prev_rates, targets, bands))
        else:
            state = build_state_vector(prev_rates, targets, cfg.state_norm_mbps)
        choices = [agent.act(state, t) for agent in agents]
        powers = np.stack([spaces[a].actions[choices[a]] for a in range(env.n_agents)])
        net_state, reward = env.step(powers)
        rates = net_state.actual_rates / 1e6

        if algorithm == "ql":
            next_state = joint_state_index(discretize_state(rates, targets, bands))
            for agent, choice in zip(agents, choices):
                agent.update(state, choice, reward, next_state)
        else:
            next_state = build_state_vector(rates, targets, cfg.state_norm_mbps)
            for agent, choice in zip(agents, choices):
                agent.observe(state, choice, reward, next_state)

        i = t - 1
        rates_log[i] = rates
        rewards[i] = reward
        epsilons[i] = epsilon(t)
        n_done = t
        prev_rates = rates

        window_sum += rates
        if t > window:
            window_sum -= rates_log[i - window]
        if t >= window:
            mean = window_sum / window
            if np.all((mean >= targets) & (mean <= targets + bands)):
                convergence_iteration = t - window + 1
                break

    return EpisodeRecord(
        algorithm=algorithm,
        seed=seed,
        targets_mbps=targets.copy(),
        bands_mbps=bands.copy(),
        rates_mbps=rates_log[:n_done].copy(),
        rewards=rewards[:n_done].copy(),
        epsilons=epsilons[:n_done].copy(),
        convergence_iteration=convergence_iteration,
        wall_time_s=time.perf_counter() - start,
    )


@dataclass
class MonteCarloSummary:
    """Convergence statistics over a batch of same-config runs."""

    algorithm: str
    seeds: list[int]
    converged: list[bool]
    convergence_iterations: list[int | None]
    median_iterations: float | None = field(init=False)
    convergence_rate: float = field(init=False)

    def __post_init__(self):
        done = [it for it in self.convergence_iterations if it is not None]
        self.median_iterations = float(np.median(done)) if done else None
        self.convergence_rate = len(done) / len(self.seeds) if self.seeds else 0.0

    def cdf_points(self) -> list[tuple[int, float]]:
        """Empirical CDF over converged runs: (iterations, cumulative fraction)."""
        done = sorted(it for it in self.convergence_iterations if it is not None)
        return [(it, (i + 1) / len(done)) for i, it in enumerate(done)]


def _episode_task(args) -> tuple[int, bool, int | None]:
    cfg, algorithm, seed, frozen = args
    rec = run_episode(cfg, algorithm, seed, frozen_channel=frozen)
    return rec.seed, rec.converged, rec.convergence_iteration


def run_monte_carlo(
    cfg: ExperimentConfig,
    algorithm: str,
    n_runs: int,
    master_seed: int,
    frozen_channel: bool = False,
    workers: int = 1,
) -> MonteCarloSummary:
    """Run ``n_runs`` episodes seeded master_seed + run index.

    Results depend only on the per-run seeds, so worker count never changes
    the summary.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    tasks = [(cfg, algorithm, master_seed + i, frozen_channel) for i in range(n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_episode_task, tasks))
    else:
        results = [_episode_task(t) for t in tasks]
    return MonteCarloSummary(
        algorithm=algorithm,
        seeds=[r[0] for r in results],
        converged=[r[1] for r in results],
        convergence_iterations=[r[2] for r in results],
    )


def steady_state_error(record: EpisodeRecord) -> float | None:
    """Mean absolute gap between final-window mean rates and the targets, Mbps.

    The final ``convergence_window`` iterations of the trace form the steady
    state; returns None for runs that never converged.
    """
    if not record.converged:
        return None
    window = len(record.rates_mbps) - record.convergence_iteration + 1
    means = record.rates_mbps[-window:].mean(axis=0)
    return float(np.mean(np.abs(means - record.targets_mbps)))


def _fmt(value: float) -> str:
    return repr(float(value))


def write_episode_csv(record: EpisodeRecord, path: str) -> None:
    """Per-iteration trace: iteration, one rate column per user, reward, eps."""
    n_users = record.rates_mbps.shape[1] if record.rates_mbps.size else len(record.targets_mbps)
    header = ["iteration"] + [f"rate_user_{u + 1}" for u in range(n_users)]
    header += ["reward", "epsilon"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(record.rates_mbps.shape[0]):
            row = [str(i + 1)]
            row += [_fmt(v) for v in record.rates_mbps[i]]
            row += [_fmt(record.rewards[i]), _fmt(record.epsilons[i])]
            fh.write(",".join(row) + "\n")


def write_summary_csv(summary: MonteCarloSummary, path: str) -> None:
    """One row per run; the iteration field is empty for non-converged runs."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run_index,seed,converged,convergence_iteration\n")
        for i, seed in enumerate(summary.seeds):
            it = summary.convergence_iterations[i]
            fh.write(
                f"{i},{seed},{int(summary.converged[i])},{'' if it is None else it}\n"
            )
