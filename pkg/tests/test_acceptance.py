"""End-to-end acceptance checks, one per numbered criterion.

Each test prints a single PASS/FAIL line (visible under ``pytest -s``) and
asserts the same condition, so the suite doubles as a report:

  1  Optical and radio channel unit exactness (1e-12 relative)
  2  Backprop gradients vs central finite differences (< 1e-4, < 10 s)
  3  Overfit one transition at zero discount (< 1e-3 within 500 steps)
  4  Action enumeration vs brute-force filtering
  5  Convergence detector vs brute-force scan on random traces
  6  Fixed-target sample case: fast learner beats the tabular one 2x
  7  Monte Carlo ordering at defaults over >= 200 paired runs
  8  Byte-identical repeat of a seeded Monte Carlo CLI invocation
  9  Utility peak/equality properties and shared per-step reward

Criteria 6 and 7 are stochastic orderings measured over many seeds; they are
the slow part of the suite (minutes and tens of minutes respectively).
"""

from __future__ import annotations

import itertools
import math
import time

import numpy as np
import pytest

from rfvlc.channel import (
    concentrator_gain,
    lambertian_order,
    rf_path_loss,
)
from rfvlc.config import ExperimentConfig
from rfvlc.dqn import DqnAgent, MlpParams, Transition, dqn_train_step, mlp_forward, mse_grad
from rfvlc.environment import HybridNetworkEnv, target_band, utility
from rfvlc.harness import (
    detect_convergence,
    run_episode,
    run_monte_carlo,
    steady_state_error,
)
from rfvlc.tabular import QlAgent, enumerate_actions


def report(number: int, name: str, ok: bool, detail: str) -> None:
    verdict = "PASS" if ok else "FAIL"
    print(f"criterion {number} ({name}): {verdict} — {detail}")
    assert ok, f"criterion {number} ({name}): {detail}"


# ---------------------------------------------------------------------
# 1  Channel unit exactness
# ---------------------------------------------------------------------
def test_criterion_1_channel_units():
    cfg = ExperimentConfig()
    phy = cfg.vlc_phy()
    order = lambertian_order(phy.semi_angle_half_power)
    gain = concentrator_gain(0.0, phy)
    loss = rf_path_loss(1.0, 0.0, cfg.rf_phy())
    checks = [
        (order, 1.0),
        (gain, 4.5),
        (loss, 47.9),
    ]
    worst = max(abs(got - want) / abs(want) for got, want in checks)
    report(
        1,
        "channel unit exactness",
        worst < 1e-12,
        f"order={order}, concentrator gain={gain}, reference loss={loss} dB, "
        f"max relative error {worst:.2e} (tolerance 1e-12)",
    )


# ---------------------------------------------------------------------
# 2  Gradients vs central finite differences
# ---------------------------------------------------------------------
def _loss_only(params, states, actions, targets):
    q = mlp_forward(params, states)[np.arange(len(actions)), actions]
    return 0.5 * float(np.mean((targets - q) ** 2))


def _min_preactivation_gap(params, states):
    gap, a = np.inf, states
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        z = a @ w + b
        gap = min(gap, float(np.min(np.abs(z))))
        a = np.maximum(z, 0.0)
    return gap


def test_criterion_2_gradient_check():
    t0 = time.perf_counter()
    step, checked, seed, worst = 1e-3, 0, 600, 0.0
    while checked < 10:
        assert seed < 600 + 200_000, "instance draw did not terminate"
        rng = np.random.default_rng(seed)
        seed += 1
        n_actions = int(rng.integers(2, 16))
        params = MlpParams.init_random([4, 32, 32, 32, n_actions], rng)
        states = rng.uniform(-1.5, 1.5, size=(4, 4))
        # a finite-difference step moves any pre-activation by at most
        # step * |activation|; stay clear of ReLU kinks by 5e-3
        if _min_preactivation_gap(params, states) < 5e-3:
            continue
        actions = rng.integers(n_actions, size=4)
        targets = rng.normal(size=4)
        analytic, _ = mse_grad(params, states, actions, targets)
        for t_i, tensor in enumerate(params.weights + params.biases):
            g = analytic[t_i]
            it = np.nditer(tensor, flags=["multi_index"])
            while not it.finished:
                idx = it.multi_index
                orig = tensor[idx]
                tensor[idx] = orig + step
                hi = _loss_only(params, states, actions, targets)
                tensor[idx] = orig - step
                lo = _loss_only(params, states, actions, targets)
                tensor[idx] = orig
                numeric = (hi - lo) / (2.0 * step)
                if abs(numeric) >= 1e-8:
                    worst = max(worst, abs(g[idx] - numeric) / abs(numeric))
                it.iternext()
        checked += 1
    elapsed = time.perf_counter() - t0
    report(
        2,
        "gradient check",
        worst < 1e-4 and elapsed < 10.0,
        f"{checked} networks, max relative error {worst:.2e} "
        f"(tolerance 1e-4), {elapsed:.1f} s (budget 10 s)",
    )


# ---------------------------------------------------------------------
# 3  Overfit one transition
# ---------------------------------------------------------------------
def test_criterion_3_overfit_one_transition():
    t0 = time.perf_counter()
    agent = DqnAgent(
        state_dim=4,
        n_actions=5,
        discount=0.0,
        rng=np.random.default_rng(601),
    )
    transition = Transition(np.array([0.4, 0.4, 0.24, 0.24]), 2, -3.5, np.zeros(4))
    steps_needed = None
    for step_i in range(1, 501):
        loss = dqn_train_step(agent, [transition])
        if loss < 1e-3:
            steps_needed = step_i
            break
    elapsed = time.perf_counter() - t0
    report(
        3,
        "overfit one transition",
        steps_needed is not None and elapsed < 5.0,
        f"squared TD error below 1e-3 after {steps_needed} steps "
        f"(budget 500), {elapsed:.2f} s (budget 5 s)",
    )


# ---------------------------------------------------------------------
# 4  Action-space oracle
# ---------------------------------------------------------------------
def _brute_force_actions(levels, n_users, max_sum):
    rows = [
        combo
        for combo in itertools.product(sorted(levels), repeat=n_users)
        if sum(combo) <= max_sum + 1e-12
    ]
    return np.array(sorted(rows)) if rows else np.empty((0, n_users))


def test_criterion_4_action_space_oracle():
    t0 = time.perf_counter()
    level_sets = [
        (0.0, 1.0),
        (0.0, 0.5, 1.0),
        (0.0, 0.5, 1.0, 1.5),
        (0.0, 0.5, 1.0, 1.5, 2.0),
        (0.0, 0.25, 0.5, 0.75, 1.0),
    ]
    max_sums = (0.0, 0.75, 2.0, 10.0)
    cases = 0
    for levels in level_sets:
        for n_users in (1, 2, 3):
            for max_sum in max_sums:
                space = enumerate_actions(levels, n_users, max_sum)
                want = _brute_force_actions(levels, n_users, max_sum)
                assert space.actions.shape == want.shape, (levels, n_users, max_sum)
                assert np.array_equal(space.actions, want), (levels, n_users, max_sum)
                cases += 1
    elapsed = time.perf_counter() - t0
    report(
        4,
        "action-space oracle",
        cases == 60 and elapsed < 1.0,
        f"{cases} (levels, users, cap) combinations identical to brute force, "
        f"{elapsed:.2f} s (budget 1 s)",
    )


# ---------------------------------------------------------------------
# 5  Convergence-detector oracle
# ---------------------------------------------------------------------
def _brute_force_first_window(rates, targets, bands, window):
    for t in range(rates.shape[0] - window + 1):
        seg = rates[t : t + window].mean(axis=0)
        if np.all((seg >= targets) & (seg <= targets + bands)):
            return t + 1
    return None


def test_criterion_5_convergence_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(602)
    agree = 0
    for _ in range(100):
        n_users = int(rng.integers(1, 4))
        length = int(rng.integers(1, 200))
        window = int(rng.integers(1, 50))
        targets = rng.uniform(5.0, 25.0, size=n_users)
        bands = np.array([target_band(t) for t in targets])
        rates = targets + rng.normal(0.5, 1.0, size=(length, n_users)) * bands
        got = detect_convergence(rates, targets, bands, window)
        want = _brute_force_first_window(rates, targets, bands, window)
        assert got == want, f"got {got}, oracle {want}"
        agree += 1
    elapsed = time.perf_counter() - t0
    report(
        5,
        "convergence-detector oracle",
        agree == 100 and elapsed < 1.0,
        f"{agree}/100 random traces agree with the brute-force scan, "
        f"{elapsed:.2f} s (budget 1 s)",
    )


# ---------------------------------------------------------------------
# 6  Fixed-target sample case
# ---------------------------------------------------------------------
@pytest.mark.slow
def test_criterion_6_sample_case():
    cfg = ExperimentConfig(user_xy=(2.0, 2.0, -2.0, -2.0), targets_mbps=(20.0, 12.0))
    n_seeds = 11
    dq = run_monte_carlo(cfg, "dqn", n_runs=n_seeds, master_seed=300)
    ql = run_monte_carlo(cfg, "ql", n_runs=n_seeds, master_seed=300)
    dq_med = dq.median_iterations
    ql_med = ql.median_iterations
    ok = (
        dq_med is not None
        and ql_med is not None
        and dq_med < 800.0
        and ql_med > 2.0 * dq_med
    )
    report(
        6,
        "fixed-target sample case",
        ok,
        f"{n_seeds} seeds: deep learner median {dq_med} iterations "
        f"(bound 800), tabular median {ql_med} (must exceed 2x deep)",
    )


# ---------------------------------------------------------------------
# 7  Monte Carlo ordering at defaults
# ---------------------------------------------------------------------
@pytest.mark.slow
def test_criterion_7_monte_carlo_ordering():
    cfg = ExperimentConfig()
    n_runs = 200
    stats: dict[str, dict] = {}
    for algorithm in ("dqn", "ql"):
        iterations, errors = [], []
        converged = 0
        for i in range(n_runs):
            rec = run_episode(cfg, algorithm, seed=1000 + i)
            if rec.converged:
                converged += 1
                iterations.append(rec.convergence_iteration)
                errors.append(steady_state_error(rec))
        stats[algorithm] = {
            "rate": converged / n_runs,
            "median": float(np.median(iterations)) if iterations else math.inf,
            "error": float(np.mean(errors)) if errors else math.inf,
        }
    dq, ql = stats["dqn"], stats["ql"]
    ok_median = dq["median"] <= 0.5 * ql["median"]
    ok_rate = dq["rate"] >= ql["rate"] + 0.10
    ok_error = dq["error"] <= ql["error"]
    report(
        7,
        "Monte Carlo ordering",
        ok_median and ok_rate and ok_error,
        f"{n_runs} paired runs: medians {dq['median']:.0f} vs {ql['median']:.0f} "
        f"(need <= 0.5x), rates {dq['rate']:.1%} vs {ql['rate']:.1%} "
        f"(need >= +10pp), steady-state errors {dq['error']:.3f} vs "
        f"{ql['error']:.3f} Mbps (need <=)",
    )


# ---------------------------------------------------------------------
# 8  Byte-identical seeded CLI repeat
# ---------------------------------------------------------------------
@pytest.mark.slow
def test_criterion_8_cli_determinism(tmp_path):
    from rfvlc.cli import main

    digests = []
    for name in ("first.csv", "second.csv"):
        out = tmp_path / name
        code = main(["montecarlo", "--runs", "20", "--seed", "7", "--out", str(out)])
        assert code == 0
        digests.append(out.read_bytes())
    report(
        8,
        "CLI determinism",
        digests[0] == digests[1],
        f"two 'montecarlo --runs 20 --seed 7' invocations wrote "
        f"{len(digests[0])} identical bytes",
    )


# ---------------------------------------------------------------------
# 9  Utility properties and shared reward
# ---------------------------------------------------------------------
def test_criterion_9_utility_and_shared_reward(monkeypatch):
    rng = np.random.default_rng(603)
    peak_violations = equality_violations = 0
    for _ in range(10_000):
        n = int(rng.integers(1, 4))
        targets = rng.uniform(5.0, 25.0, size=n)
        bands = np.array([target_band(t) for t in targets])
        if rng.random() < 0.2:
            actual = targets.copy()
        else:
            actual = targets + rng.normal(0.0, 2.0, size=n)
        value = utility(actual, targets, bands)
        cap = float(np.sum(bands))
        if value > cap + 1e-12:
            peak_violations += 1
        at_peak = value == cap
        if at_peak != bool(np.array_equal(actual, targets)):
            equality_violations += 1

    # the same scalar reward must reach every learner each iteration
    seen: list[tuple[int, float]] = []
    original = QlAgent.update

    def recording(self, state_index, action_index, reward, next_state_index):
        seen.append((id(self), reward))
        return original(self, state_index, action_index, reward, next_state_index)

    monkeypatch.setattr(QlAgent, "update", recording)
    cfg = ExperimentConfig(
        user_xy=(2.0, 2.0, -2.0, -2.0),
        targets_mbps=(20.0, 12.0),
        max_iterations=30,
        convergence_window=10,
    )
    run_episode(cfg, "ql", seed=1)
    # updates arrive agent 0..4 within each iteration, so consecutive
    # chunks of n_agents belong to one environment step
    rewards_by_round = [r for _, r in seen]
    n_agents = len({agent_id for agent_id, _ in seen})
    rounds = len(seen) // n_agents
    shared = all(
        len({rewards_by_round[k * n_agents + j] for j in range(n_agents)}) == 1
        for k in range(rounds)
    )
    report(
        9,
        "utility and shared reward",
        peak_violations == 0 and equality_violations == 0 and shared and n_agents == 5,
        f"10000 random rate/target draws: 0 peak violations "
        f"({peak_violations}), 0 equality violations ({equality_violations}); "
        f"{n_agents} learners saw identical rewards for {rounds} iterations",
    )
