"""Experiment configuration: defaults, flat-file parsing, unit conversion.

Config files are plain ``key = value`` lines ('#' starts a comment, lists are
comma separated). Values are kept in the units people write them in (degrees,
dBm/MHz, Mbps, W); the accessors that hand parameters to the channel layer
convert to SI once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from rfvlc.channel import RfPhyParams, VlcPhyParams, dbm_per_mhz_to_w_per_hz


class ConfigError(ValueError):
    """Raised for unknown keys or values that do not parse."""


@dataclass
class ExperimentConfig:
    """All tunables of the hybrid-network power-allocation experiment."""

    # room and access points
    room_side_m: float = 12.0
    ceiling_height_m: float = 3.0
    vlc_ap_offset_m: float = 3.0
    n_users: int = 2
    user_xy: tuple[float, ...] | None = None  # flat (x1, y1, x2, y2, ...) override

    # optical downlink
    vlc_max_power_w: float = 2.0
    vlc_bandwidth_hz: float = 20e6
    vlc_noise_dbm_per_mhz: float = -100.0
    fov_half_deg: float = 45.0
    semi_angle_deg: float = 60.0
    pd_area_m2: float = 1e-4
    responsivity_a_per_w: float = 0.4
    filter_gain: float = 1.0
    concentrator_index: float = 1.5
    conversion_eff: float = 1.0
    modulation_depth: float = 1.0

    # radio downlink
    rf_max_power_w: float = 0.01
    rf_bandwidth_hz: float = 5e6
    rf_noise_dbm_per_mhz: float = -57.0
    pathloss_exponent: float = 1.6
    reference_distance_m: float = 1.0
    shadowing_stddev_db: float = 1.8
    fading_mean_db: float = 2.46
    fading_interpretation: str = "linear"  # mean of |h|^2: linear 10^(x/10), or db

    # learning
    n_power_levels: int = 17
    ql_learning_rate: float = 0.5
    discount: float = 0.5
    dqn_learning_rate: float = 0.003
    dqn_hidden: tuple[int, ...] = (32, 32, 32)
    replay_capacity: int = 1000
    batch_size: int = 32
    state_norm_mbps: float = 50.0

    # episode control
    max_iterations: int = 5000
    convergence_window: int = 100
    target_range_mbps: tuple[float, float] = (10.0, 25.0)
    targets_mbps: tuple[float, ...] | None = None  # fixed per-user targets

    def __post_init__(self):
        if self.n_users < 1:
            raise ConfigError("n_users must be >= 1")
        if self.n_power_levels < 2:
            raise ConfigError("n_power_levels must be >= 2")
        if self.fading_interpretation not in ("linear", "db"):
            raise ConfigError("fading_interpretation must be 'linear' or 'db'")
        if self.targets_mbps is not None and len(self.targets_mbps) != self.n_users:
            raise ConfigError("targets_mbps must list one target per user")
        if self.user_xy is not None and len(self.user_xy) != 2 * self.n_users:
            raise ConfigError("user_xy must list x,y per user")
        lo, hi = self.target_range_mbps
        if not lo <= hi:
            raise ConfigError("target_range_mbps must be (low, high) with low <= high")

    def vlc_phy(self) -> VlcPhyParams:
        return VlcPhyParams(
            pd_area=self.pd_area_m2,
            responsivity=self.responsivity_a_per_w,
            filter_gain=self.filter_gain,
            concentrator_index=self.concentrator_index,
            fov_half=math.radians(self.fov_half_deg),
            semi_angle_half_power=math.radians(self.semi_angle_deg),
            conversion_eff=self.conversion_eff,
            modulation_depth=self.modulation_depth,
            noise_psd=dbm_per_mhz_to_w_per_hz(self.vlc_noise_dbm_per_mhz),
        )

    def rf_phy(self) -> RfPhyParams:
        return RfPhyParams(
            pathloss_exponent=self.pathloss_exponent,
            reference_distance=self.reference_distance_m,
            shadowing_stddev=self.shadowing_stddev_db,
            fading_mean_db=self.fading_mean_db,
            noise_psd=dbm_per_mhz_to_w_per_hz(self.rf_noise_dbm_per_mhz),
            bandwidth=self.rf_bandwidth_hz,
        )

    def fading_mean_linear(self) -> float:
        """Mean of the squared fading envelope, honoring the interpretation switch."""
        if self.fading_interpretation == "linear":
            return 10.0 ** (self.fading_mean_db / 10.0)
        return self.fading_mean_db

    def power_levels(self, max_power: float) -> tuple[float, ...]:
        """Evenly spaced transmit levels from zero to the cap."""
        step = max_power / (self.n_power_levels - 1)
        return tuple(i * step for i in range(self.n_power_levels))


_LIST_FIELDS = {"user_xy", "dqn_hidden", "target_range_mbps", "targets_mbps"}
_INT_FIELDS = {"n_users", "n_power_levels", "replay_capacity", "batch_size",
               "max_iterations", "convergence_window"}
_STR_FIELDS = {"fading_interpretation"}


def _parse_value(key: str, raw: str):
    try:
        if key in _STR_FIELDS:
            return raw
        if key in _LIST_FIELDS:
            parts = tuple(p.strip() for p in raw.split(",") if p.strip())
            if key == "dqn_hidden":
                return tuple(int(p) for p in parts)
            return tuple(float(p) for p in parts)
        if key in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a flat key=value file (optional) and apply overrides on top."""
    values: dict = {}
    known = {f.name for f in fields(ExperimentConfig)}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, raw = (part.strip() for part in stripped.split("=", 1))
                if key not in known:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _parse_value(key, raw)
    if overrides:
        for key, val in overrides.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = val
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical key = value text for the given config (round-trips via load)."""
    lines = []
    for f in fields(cfg):
        val = getattr(cfg, f.name)
        if val is None:
            continue
        if isinstance(val, tuple):
            rendered = ",".join(repr(v) if isinstance(v, float) else str(v) for v in val)
        elif isinstance(val, float):
            rendered = repr(val)
        else:
            rendered = str(val)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"
