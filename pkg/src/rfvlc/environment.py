"""Indoor hybrid-network simulator: geometry, association, rates, shared reward.

One radio AP at the room center and four ceiling LED luminaires serve the same
users. Each access point assigns a transmit power to every user, capped in
total by its budget; a user's rate is the sum of its radio rate and, when it
sits inside some luminaire's field of view, its optical rate. The reward every
agent sees is the one shared satisfaction score of the whole network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from rfvlc.channel import (
    LinkGeometry,
    rf_channel_gain,
    rf_path_loss,
    rf_rate,
    vlc_channel_gain,
    vlc_rate,
)
from rfvlc.config import ExperimentConfig
from rfvlc.tabular import SUM_POWER_TOL


class PowerConstraintError(ValueError):
    """An access point was asked to transmit outside its feasible power set."""


@dataclass(frozen=True)
class RoomLayout:
    """Access-point placement in a square room, radio AP at the center."""

    side: float
    ceiling_height: float
    rf_ap_xy: tuple[float, float]
    vlc_ap_xy: np.ndarray  # shape (n_vlc_aps, 2)

    @classmethod
    def from_config(cls, cfg: ExperimentConfig) -> "RoomLayout":
        off = cfg.vlc_ap_offset_m
        corners = np.array([(-off, -off), (-off, off), (off, -off), (off, off)])
        return cls(
            side=cfg.room_side_m,
            ceiling_height=cfg.ceiling_height_m,
            rf_ap_xy=(0.0, 0.0),
            vlc_ap_xy=corners,
        )

    @property
    def n_vlc_aps(self) -> int:
        return self.vlc_ap_xy.shape[0]


def place_users(layout: RoomLayout, n_users: int, rng: np.random.Generator) -> np.ndarray:
    """Independent uniform drops over the room footprint; shape (n_users, 2)."""
    half = layout.side / 2.0
    return rng.uniform(-half, half, size=(n_users, 2))


def associate_users(
    layout: RoomLayout, positions: np.ndarray, fov_half: float
) -> np.ndarray:
    """Luminaire index per user by smallest incidence angle, or -1 if none covers.

    Ties go to the lowest AP index. A user exactly on the field-of-view edge
    counts as covered.
    """
    diffs = positions[:, None, :] - layout.vlc_ap_xy[None, :, :]
    horizontal = np.hypot(diffs[..., 0], diffs[..., 1])
    incidence = np.arctan2(horizontal, layout.ceiling_height)
    best = np.argmin(incidence, axis=1)
    covered = incidence[np.arange(len(positions)), best] <= fov_half
    return np.where(covered, best, -1)


def allocate_bandwidth(
    assignments: np.ndarray, vlc_bandwidth: float, rf_bandwidth: float
) -> tuple[np.ndarray, np.ndarray]:
    """Per-user shares: each AP splits its band equally over the users it serves.

    The radio AP serves everyone; a luminaire serves its assigned users. Users
    outside every field of view get a zero optical share.
    """
    n_users = len(assignments)
    vlc_share = np.zeros(n_users)
    for ap in np.unique(assignments):
        if ap < 0:
            continue
        mask = assignments == ap
        vlc_share[mask] = vlc_bandwidth / mask.sum()
    rf_share = np.full(n_users, rf_bandwidth / n_users)
    return vlc_share, rf_share


def target_band(target_mbps: float) -> float:
    """Tolerated overshoot above the target: 5 percent, floored at 0.5 Mbps."""
    return max(0.05 * target_mbps, 0.5)


def utility(actual_mbps, targets_mbps, bands_mbps) -> float:
    """Network satisfaction: sum over users of band minus target miss.

    Maximal (sum of bands) exactly when every user's rate equals its target.
    """
    actual = np.asarray(actual_mbps, dtype=float)
    targets = np.asarray(targets_mbps, dtype=float)
    bands = np.asarray(bands_mbps, dtype=float)
    return float(np.sum(bands - np.abs(actual - targets)))


@dataclass
class NetworkState:
    """Per-user downlink rates (bit/s) after one allocation round."""

    actual_rates: np.ndarray
    rf_rates: np.ndarray
    vlc_rates: np.ndarray


class HybridNetworkEnv:
    """Stateless-channel simulator stepped by the joint power allocation.

    The geometry (user drops, association, bandwidth shares, optical gains)
    is fixed per episode; radio shadowing and fading are redrawn every step
    unless the channel is frozen at its mean for debugging.
    """

    def __init__(
        self,
        cfg: ExperimentConfig,
        placement_rng: np.random.Generator,
        channel_rng: np.random.Generator,
        frozen_channel: bool = False,
    ):
        self.cfg = cfg
        self.layout = RoomLayout.from_config(cfg)
        self.frozen_channel = frozen_channel
        self._channel_rng = channel_rng
        self._vlc_phy = cfg.vlc_phy()
        self._rf_phy = cfg.rf_phy()
        self._fading_mean = cfg.fading_mean_linear()

        if cfg.user_xy is not None:
            self.positions = np.asarray(cfg.user_xy, dtype=float).reshape(cfg.n_users, 2)
        else:
            self.positions = place_users(self.layout, cfg.n_users, placement_rng)
        if cfg.targets_mbps is not None:
            self.targets_mbps = np.asarray(cfg.targets_mbps, dtype=float)
        else:
            lo, hi = cfg.target_range_mbps
            self.targets_mbps = placement_rng.uniform(lo, hi, size=cfg.n_users)
        self.bands_mbps = np.array([target_band(t) for t in self.targets_mbps])

        self.assignments = associate_users(self.layout, self.positions, self._vlc_phy.fov_half)
        self.vlc_share, self.rf_share = allocate_bandwidth(
            self.assignments, cfg.vlc_bandwidth_hz, cfg.rf_bandwidth_hz
        )
        self.vlc_gains = self._static_vlc_gains()
        rf_diff = self.positions - np.asarray(self.layout.rf_ap_xy)
        self.rf_distances = np.sqrt(
            rf_diff[:, 0] ** 2 + rf_diff[:, 1] ** 2 + self.layout.ceiling_height**2
        )

    def _static_vlc_gains(self) -> np.ndarray:
        gains = np.zeros(self.cfg.n_users)
        for u, ap in enumerate(self.assignments):
            if ap < 0:
                continue
            diff = self.positions[u] - self.layout.vlc_ap_xy[ap]
            geom = LinkGeometry.from_offsets(
                math.hypot(diff[0], diff[1]), self.layout.ceiling_height
            )
            gains[u] = vlc_channel_gain(geom, self._vlc_phy)
        return gains

    @property
    def n_agents(self) -> int:
        """One learner per luminaire plus one for the radio AP (last index)."""
        return self.layout.n_vlc_aps + 1

    @property
    def rf_agent_index(self) -> int:
        return self.layout.n_vlc_aps

    def _validate(self, powers: np.ndarray) -> None:
        expected = (self.n_agents, self.cfg.n_users)
        if powers.shape != expected:
            raise PowerConstraintError(f"power matrix must have shape {expected}")
        if np.any(powers < 0.0):
            raise PowerConstraintError("negative transmit power")
        caps = np.full(self.n_agents, self.cfg.vlc_max_power_w)
        caps[self.rf_agent_index] = self.cfg.rf_max_power_w
        sums = powers.sum(axis=1)
        over = sums > caps + SUM_POWER_TOL
        if np.any(over):
            ap = int(np.argmax(over))
            raise PowerConstraintError(
                f"AP {ap} total power {sums[ap]} exceeds budget {caps[ap]}"
            )

    def step(self, powers: np.ndarray) -> tuple[NetworkState, float]:
        """Apply one joint allocation; returns the new rates and shared reward.

        ``powers[a, u]`` is the power AP ``a`` assigns to user ``u``. Power a
        luminaire assigns to a user it does not serve is spent but carries no
        rate. The reward, in Mbps, is identical for every agent.
        """
        powers = np.asarray(powers, dtype=float)
        self._validate(powers)
        n = self.cfg.n_users

        vlc = np.zeros(n)
        for u, ap in enumerate(self.assignments):
            if ap < 0 or self.vlc_share[u] <= 0.0:
                continue
            vlc[u] = vlc_rate(
                powers[ap, u], self.vlc_gains[u], self.vlc_share[u], self._vlc_phy
            )

        if self.frozen_channel:
            shadowing = np.zeros(n)
            fading = np.full(n, self._fading_mean)
        else:
            shadowing = self._channel_rng.normal(0.0, self._rf_phy.shadowing_stddev, size=n)
            fading = self._channel_rng.exponential(self._fading_mean, size=n)

        rf = np.zeros(n)
        for u in range(n):
            loss_db = rf_path_loss(self.rf_distances[u], shadowing[u], self._rf_phy)
            gain = rf_channel_gain(loss_db, fading[u])
            rf[u] = rf_rate(
                powers[self.rf_agent_index, u], gain, self.rf_share[u], self._rf_phy
            )

        state = NetworkState(actual_rates=rf + vlc, rf_rates=rf, vlc_rates=vlc)
        reward = utility(state.actual_rates / 1e6, self.targets_mbps, self.bands_mbps)
        return state, reward
