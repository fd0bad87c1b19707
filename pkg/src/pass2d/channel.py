"""Geometry, propagation, and SNR evaluation for the planar pinching-antenna downlink.

A single feed drives a waveguide plane at height ``z = h`` carrying N radiating
points ("pinching antennas", PAs). Each PA-to-user link combines

* free-space amplitude  ``g = sqrt(eta) / d``  with ``eta = lambda_c**2 / (16 pi**2)``,
* free-space phase      ``exp(-j 2 pi d / lambda_c)``,
* in-waveguide phase    ``exp(-j 2 pi d_feed / lambda_g)`` with ``lambda_g = lambda_c / n_eff``,

where ``d`` is the PA-user distance and ``d_feed`` the feed-PA distance. All N
PAs transmit the same symbol with power ``P / N``, so user k sees

    SNR_k = P * |sum_n g_n * h_n|**2 / (N * sigma**2).

Everything here is computed in SI linear units (meters, watts); dB/dBm helpers
exist only for I/O boundaries. All functions are pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SingularityError

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def to_db(linear):
    """10*log10, elementwise."""
    return 10.0 * np.log10(linear)


def from_db(db):
    return 10.0 ** (np.asarray(db) / 10.0)


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm) - 30.0) / 10.0)


def watts_to_dbm(watts):
    return 10.0 * np.log10(watts) + 30.0


@dataclass(frozen=True)
class Point3:
    """A point in 3-space, coordinates in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ParameterError(f"non-finite coordinate in {(self.x, self.y, self.z)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def distance_to(self, other: "Point3") -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))


@dataclass(frozen=True)
class RadioParams:
    """Carrier/power parameters plus the wavelengths and gain constant they imply.

    ``lambda_c = c / f_c``, ``lambda_g = lambda_c / n_eff``,
    ``eta = lambda_c**2 / (16 pi**2)`` (square of the free-space amplitude at 1 m).
    """

    carrier_freq_hz: float
    n_eff: float
    tx_power_w: float
    noise_power_w: float
    lambda_c: float
    lambda_g: float
    eta: float


def derive_radio_params(carrier_freq_hz, n_eff, tx_power_w, noise_power_w) -> RadioParams:
    """Build RadioParams, deriving wavelengths and eta from the carrier and n_eff."""
    for name, value in (
        ("carrier_freq_hz", carrier_freq_hz),
        ("n_eff", n_eff),
        ("tx_power_w", tx_power_w),
        ("noise_power_w", noise_power_w),
    ):
        if not (math.isfinite(value) and value > 0):
            raise ParameterError(f"{name} must be positive and finite, got {value!r}")
    if n_eff < 1.0:
        raise ParameterError(f"n_eff must be >= 1, got {n_eff!r}")
    lambda_c = SPEED_OF_LIGHT / carrier_freq_hz
    return RadioParams(
        carrier_freq_hz=float(carrier_freq_hz),
        n_eff=float(n_eff),
        tx_power_w=float(tx_power_w),
        noise_power_w=float(noise_power_w),
        lambda_c=lambda_c,
        lambda_g=lambda_c / n_eff,
        eta=lambda_c**2 / (16.0 * math.pi**2),
    )


def default_radio(tx_power_dbm=20.0, noise_dbm=-80.0, carrier_freq_hz=28e9, n_eff=1.4) -> RadioParams:
    """Radio parameters at the standard operating point (28 GHz, n_eff 1.4)."""
    return derive_radio_params(
        carrier_freq_hz, n_eff, float(dbm_to_watts(tx_power_dbm)), float(dbm_to_watts(noise_dbm))
    )


@dataclass(frozen=True)
class Scenario:
    """Immutable problem instance: users on the floor, a waveguide plane above them.

    Users live at ``z = 0`` inside the square ``[-D/2, D/2]^2`` (``D = side_length``);
    PAs live on the plane ``z = height`` over the same square and must keep a
    pairwise spacing of at least ``min_separation``.
    """

    ues: tuple[Point3, ...]
    side_length: float
    height: float
    min_separation: float
    feed_point: Point3
    radio: RadioParams

    def __post_init__(self):
        if len(self.ues) == 0:
            raise ParameterError("scenario needs at least one UE")
        if not self.side_length > 0:
            raise ParameterError(f"side_length must be positive, got {self.side_length!r}")
        if not self.height > 0:
            raise ParameterError(f"height must be positive, got {self.height!r}")
        if not self.min_separation > 0:
            raise ParameterError(f"min_separation must be positive, got {self.min_separation!r}")
        half = self.side_length / 2.0
        for ue in self.ues:
            if ue.z != 0.0:
                raise ParameterError(f"UE {ue} must lie on the floor z=0")
            if abs(ue.x) > half or abs(ue.y) > half:
                raise ParameterError(f"UE {ue} outside the deployment square (D={self.side_length})")

    @property
    def num_ues(self) -> int:
        return len(self.ues)

    def ue_xy(self) -> np.ndarray:
        """(K, 2) array of user floor coordinates."""
        return np.array([[u.x, u.y] for u in self.ues], dtype=float)


def make_scenario(
    ue_xy,
    side_length=20.0,
    height=3.0,
    radio: RadioParams | None = None,
    min_separation: float | None = None,
    feed_z: float | None = None,
) -> Scenario:
    """Assemble a Scenario from user floor coordinates and defaults.

    ``min_separation`` defaults to half the carrier wavelength; the feed sits at
    ``(-D/2, 0, feed_z)`` with ``feed_z`` defaulting to the waveguide height.
    """
    radio = radio if radio is not None else default_radio()
    ue_xy = np.atleast_2d(np.asarray(ue_xy, dtype=float))
    ues = tuple(Point3(float(x), float(y), 0.0) for x, y in ue_xy)
    d0 = min_separation if min_separation is not None else radio.lambda_c / 2.0
    fz = feed_z if feed_z is not None else height
    feed = Point3(-side_length / 2.0, 0.0, float(fz))
    return Scenario(
        ues=ues,
        side_length=float(side_length),
        height=float(height),
        min_separation=float(d0),
        feed_point=feed,
        radio=radio,
    )


@dataclass(frozen=True)
class PaConfiguration:
    """Ordered PA placement on the waveguide plane; the decision variable."""

    positions: tuple[Point3, ...]

    @classmethod
    def from_xy(cls, xy, height: float) -> "PaConfiguration":
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        return cls(tuple(Point3(float(x), float(y), float(height)) for x, y in xy))

    def xy(self) -> np.ndarray:
        """(N, 2) array of plane coordinates."""
        return np.array([[p.x, p.y] for p in self.positions], dtype=float)

    def __len__(self) -> int:
        return len(self.positions)


def path_gain(ue: Point3, pa: Point3, eta: float) -> float:
    """Free-space amplitude gain sqrt(eta)/distance; strictly decreasing in distance."""
    d = ue.distance_to(pa)
    if d == 0.0:
        raise SingularityError("UE coincides with PA: path gain undefined at zero distance")
    return math.sqrt(eta) / d

def phase_factor(ue: Point3, pa: Point3, feed: Point3, lambda_c: float, lambda_g: float) -> complex:
    """Unit-modulus composite phase: free-space leg at lambda_c, feed-to-PA leg at lambda_g."""
    d_free = ue.distance_to(pa)
    d_guide = feed.distance_to(pa)
    return complex(np.exp(-2j * math.pi * d_free / lambda_c)
                   * np.exp(-2j * math.pi * d_guide / lambda_g))


def channel_coefficient(ue: Point3, pa: Point3, feed: Point3, radio: RadioParams) -> complex:
    """Complex channel coefficient: path_gain * phase_factor. |value| = path_gain."""
    return path_gain(ue, pa, radio.eta) * phase_factor(ue, pa, feed, radio.lambda_c, radio.lambda_g)


def snr_per_user(config: PaConfiguration, ue: Point3, scenario: Scenario) -> float:
    """Received linear SNR for one user under equal per-PA power split.

    P * |sum_n g_n h_n|^2 / (N sigma^2) over the N configured PAs.
    """
    n = len(config)
    if n < 1:
        raise ParameterError("configuration must contain at least one PA")
    r = scenario.radio
    total = 0.0 + 0.0j
    for pa in config.positions:
        total += channel_coefficient(ue, pa, scenario.feed_point, r)
    return float(r.tx_power_w * abs(total) ** 2 / (n * r.noise_power_w))


def min_snr(config: PaConfiguration, scenario: Scenario) -> float:
    """Worst-case linear SNR across all users; the max-min objective value."""
    return min(snr_per_user(config, ue, scenario) for ue in scenario.ues)


def snr_all_users(xy, scenario: Scenario) -> np.ndarray:
    """Vectorized per-user SNR for batches of placements.

    Parameters
    ----------
    xy : array, shape (..., N, 2)
        Plane coordinates of N PAs (z = scenario.height implied). Leading axes
        batch independent placements.

    Returns
    -------
    array, shape (..., K)
        Linear SNR of every user for every placement in the batch.
    """
    xy = np.asarray(xy, dtype=float)
    r = scenario.radio
    ue = scenario.ue_xy()  # (K, 2)
    h = scenario.height
    feed = scenario.feed_point

    # (..., K, N) free-space distances
    dx = xy[..., None, :, 0] - ue[:, 0, None]
    dy = xy[..., None, :, 1] - ue[:, 1, None]
    d_free = np.sqrt(dx * dx + dy * dy + h * h)

    # (..., N) feed-to-PA distances (waveguide leg)
    gx = xy[..., 0] - feed.x
    gy = xy[..., 1] - feed.y
    d_guide = np.sqrt(gx * gx + gy * gy + (h - feed.z) ** 2)

    coeff = (math.sqrt(r.eta) / d_free) * np.exp(-2j * math.pi * d_free / r.lambda_c)
    coeff = coeff * np.exp(-2j * math.pi * d_guide / r.lambda_g)[..., None, :]
    s = coeff.sum(axis=-1)  # (..., K)
    n = xy.shape[-2]
    return r.tx_power_w * np.abs(s) ** 2 / (n * r.noise_power_w)
