"""Propagation and achievable-rate formulas for the two link types.

Optical links use a Lambertian LED emission pattern received by a photodiode
behind an ideal non-imaging concentrator; the electrical SNR goes with the
square of the received optical power. RF links use a log-distance path loss
with log-normal shadowing and exponential small-scale fading.

All functions here are pure and operate in SI units: metres, radians, watts,
hertz, bit/s. Noise densities are W/Hz (helpers convert from the dBm/MHz
convention used in link budgets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Fixed reference loss of the indoor RF path-loss model at the reference
# distance, in dB.
RF_REFERENCE_LOSS_DB = 47.9


def dbm_per_mhz_to_w_per_hz(psd_dbm_per_mhz: float) -> float:
    """Convert a noise power spectral density from dBm/MHz to W/Hz."""
    return 10.0 ** ((psd_dbm_per_mhz - 30.0) / 10.0) / 1e6


def w_per_hz_to_dbm_per_mhz(psd_w_per_hz: float) -> float:
    """Inverse of :func:`dbm_per_mhz_to_w_per_hz`."""
    if psd_w_per_hz <= 0.0:
        raise ValueError("PSD must be positive")
    return 10.0 * math.log10(psd_w_per_hz * 1e6) + 30.0


@dataclass(frozen=True)
class VlcPhyParams:
    """Physical constants of an optical AP/receiver pair.

    pd_area: photodiode effective detection area, m^2
    responsivity: photodiode responsivity, A/W
    filter_gain: optical filter gain, unitless
    concentrator_index: refractive index of the concentrator, unitless
    fov_half: half field-of-view of the receiver, radians
    semi_angle_half_power: LED semi-angle at half power, radians
    conversion_eff: optical-to-electrical conversion efficiency, unitless
    modulation_depth: modulation depth, unitless
    noise_psd: noise PSD at the receiver, W/Hz
    """

    pd_area: float
    responsivity: float
    filter_gain: float
    concentrator_index: float
    fov_half: float
    semi_angle_half_power: float
    conversion_eff: float
    modulation_depth: float
    noise_psd: float

    def __post_init__(self) -> None:
        if self.pd_area <= 0.0 or self.responsivity <= 0.0:
            raise ValueError("pd_area and responsivity must be positive")
        if not 0.0 < self.fov_half < math.pi / 2:
            raise ValueError("fov_half must lie in (0, pi/2)")
        if not 0.0 < self.semi_angle_half_power < math.pi / 2:
            raise ValueError("semi_angle_half_power must lie in (0, pi/2)")
        if self.noise_psd <= 0.0:
            raise ValueError("noise_psd must be positive (W/Hz)")


@dataclass(frozen=True)
class RfPhyParams:
    """Physical constants of the RF downlink.

    pathloss_exponent: log-distance exponent, unitless
    reference_distance: path-loss reference distance, m
    shadowing_stddev: shadowing standard deviation, dB
    fading_mean_db: mean of the small-scale fading term, dB
    noise_psd: noise PSD, W/Hz
    bandwidth: total bandwidth of the access point, Hz
    """

    pathloss_exponent: float
    reference_distance: float
    shadowing_stddev: float
    fading_mean_db: float
    noise_psd: float
    bandwidth: float

    def __post_init__(self) -> None:
        if self.pathloss_exponent <= 0.0:
            raise ValueError("pathloss_exponent must be positive")
        if self.reference_distance <= 0.0:
            raise ValueError("reference_distance must be positive")
        if self.bandwidth <= 0.0:
            raise ValueError("bandwidth must be positive")


@dataclass(frozen=True)
class LinkGeometry:
    """Relative geometry of one user/optical-AP link.

    The receiver faces straight up, so the irradiance and incidence angles
    coincide and equal atan(horizontal/vertical).
    """

    horizontal_dist: float
    vertical_dist: float
    irradiance_angle: float
    incidence_angle: float

    def __post_init__(self) -> None:
        if self.horizontal_dist < 0.0:
            raise ValueError("horizontal_dist must be >= 0")
        if self.vertical_dist <= 0.0:
            raise ValueError("vertical_dist must be > 0")
        expected = math.atan2(self.horizontal_dist, self.vertical_dist)
        if abs(self.incidence_angle - expected) > 1e-9:
            raise ValueError("incidence_angle inconsistent with distances")
        if self.incidence_angle != self.irradiance_angle:
            raise ValueError("receiver is assumed upward-facing: angles must match")

    @classmethod
    def from_offsets(cls, horizontal_dist: float, vertical_dist: float) -> "LinkGeometry":
        """Build the geometry for an upward-facing receiver below a ceiling AP."""
        angle = math.atan2(horizontal_dist, vertical_dist)
        return cls(horizontal_dist, vertical_dist, angle, angle)


def lambertian_order(semi_angle_half_power: float) -> float:
    """Lambertian emission order of an LED from its half-power semi-angle (rad)."""
    if not 0.0 < semi_angle_half_power < math.pi / 2:
        raise ValueError("semi_angle_half_power must lie strictly in (0, pi/2)")
    return -1.0 / math.log2(math.cos(semi_angle_half_power))


def concentrator_gain(incidence_angle: float, phy: VlcPhyParams) -> float:
    """Gain of the optical concentrator; zero outside the field of view.

    The field-of-view edge is inclusive: a ray at exactly fov_half still
    collects the full gain.
    """
    if 0.0 <= incidence_angle <= phy.fov_half:
        return phy.concentrator_index**2 / math.sin(phy.fov_half) ** 2
    return 0.0


def vlc_channel_gain(geom: LinkGeometry, phy: VlcPhyParams) -> float:
    """DC channel gain of a line-of-sight optical link (unitless).

    Combines the Lambertian emission lobe, the inverse-square spreading over
    the 3-D link distance, the filter and concentrator gains, and the cosine
    of the incidence angle. Zero exactly when the receiver is outside the
    concentrator's field of view.
    """
    h_c = concentrator_gain(geom.incidence_angle, phy)
    if h_c == 0.0:
        return 0.0
    m = lambertian_order(phy.semi_angle_half_power)
    d_sq = geom.horizontal_dist**2 + geom.vertical_dist**2
    lobe = (m + 1.0) * phy.pd_area * phy.responsivity * math.cos(geom.irradiance_angle) ** m
    return lobe / (2.0 * math.pi * d_sq) * phy.filter_gain * h_c * math.cos(geom.incidence_angle)


def vlc_rate(power: float, gain: float, bandwidth: float, phy: VlcPhyParams) -> float:
    """Achievable rate of an optical link, bit/s.

    power: optical transmit power allocated to this user, W
    gain: DC channel gain from :func:`vlc_channel_gain`
    bandwidth: bandwidth share delivered to this user, Hz

    The electrical SNR is the squared received optical power over the noise
    power in the allocated bandwidth; the 1/2 prefactor reflects the
    intensity-modulation constraint.
    """
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be positive")
    received = phy.conversion_eff * phy.modulation_depth * power * gain
    snr = received**2 / (bandwidth * phy.noise_psd)
    return bandwidth / 2.0 * math.log2(1.0 + snr)


def rf_path_loss(distance: float, shadowing_db: float, phy: RfPhyParams) -> float:
    """Log-distance path loss with additive shadowing, dB.

    Distances below the reference distance are clamped to it, so the log term
    never goes negative.
    """
    d = max(distance, phy.reference_distance)
    return (
        RF_REFERENCE_LOSS_DB
        + 10.0 * phy.pathloss_exponent * math.log10(d / phy.reference_distance)
        + shadowing_db
    )


def rf_channel_gain(pathloss_db: float, fading_power: float) -> float:
    """Linear RF channel gain from a path loss in dB and a fading power |h|^2."""
    if fading_power < 0.0:
        raise ValueError("fading_power must be >= 0")
    return 10.0 ** (-pathloss_db / 10.0) * fading_power


def rf_rate(power: float, gain: float, bandwidth: float, phy: RfPhyParams) -> float:
    """Achievable rate of an RF link, bit/s (Shannon capacity of the link).

    power: transmit power allocated to this user, W
    gain: linear channel gain from :func:`rf_channel_gain`
    bandwidth: bandwidth share delivered to this user, Hz
    """
    if bandwidth <= 0.0:
        raise ValueError("bandwidth must be positive")
    snr = power * gain / (bandwidth * phy.noise_psd)
    return bandwidth * math.log2(1.0 + snr)


def total_rate(rf: float, vlc: float) -> float:
    """Total rate of a multihoming user: the two links simply add, bit/s."""
    if rf < 0.0 or vlc < 0.0:
        raise ValueError("rates must be >= 0")
    return rf + vlc
