"""Deterministic line-of-sight channel synthesis with a directional element
pattern, and received-power evaluation for constant-modulus precoders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import AntennaLayout, Deployment

SPEED_OF_LIGHT = 299_792_458.0


def wavelength_from_freq(freq_hz: float) -> float:
    return SPEED_OF_LIGHT / freq_hz


@dataclass(frozen=True)
class ChannelParams:
    wavelength_lambda: float
    boresight_kappa: float = 2.0

    def __post_init__(self):
        if self.wavelength_lambda <= 0:
            raise ValueError("wavelength must be positive")
        if self.boresight_kappa < 2:
            raise ValueError("boresight gain exponent must be >= 2")


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex N x K channel coefficients; column k is the channel of
    device k."""

    coefficients: np.ndarray  # (N, K) complex

    def __post_init__(self):
        co = np.asarray(self.coefficients, dtype=complex)
        if co.ndim != 2:
            raise ValueError("coefficients must be a 2-D N x K array")
        if not np.isfinite(co).all():
            raise ValueError("channel coefficients must be finite")
        object.__setattr__(self, "coefficients", co)

    @property
    def n_antennas(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_devices(self) -> int:
        return self.coefficients.shape[1]


@dataclass(frozen=True)
class Precoder:
    """Analog precoder: per-antenna phases, weights e^{j theta} / sqrt(N)."""

    phases_theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.phases_theta, dtype=float).reshape(-1)
        if th.size < 1:
            raise ValueError("at least one phase required")
        object.__setattr__(self, "phases_theta", th)

    @property
    def weights(self) -> np.ndarray:
        n = self.phases_theta.size
        return np.exp(1j * self.phases_theta) / np.sqrt(n)


def radiation_profile(theta, kappa: float):
    """Element gain 2(kappa+1) cos^kappa(theta) on [0, pi/2], zero behind."""
    if kappa < 2:
        raise ValueError("kappa must be >= 2")
    theta = np.asarray(theta, dtype=float)
    front = (theta >= 0) & (theta <= np.pi / 2)
    gain = np.where(front, 2.0 * (kappa + 1.0) * np.cos(np.where(front, theta, 0.0)) ** kappa, 0.0)
    if gain.ndim == 0:
        return float(gain)
    return gain


def _coefficients(antenna_xy: np.ndarray, device_xyz: np.ndarray,
                  params: ChannelParams) -> np.ndarray:
    """Vectorized channel coefficients for antennas (..., N, 2) against
    devices (K, 3); boresight along +z."""
    ant3 = np.concatenate(
        [antenna_xy, np.zeros(antenna_xy.shape[:-1] + (1,))], axis=-1)
    diff = ant3[..., :, None, :] - device_xyz[None, :, :]   # (..., N, K, 3)
    d = np.sqrt((diff ** 2).sum(axis=-1))
    if (d == 0).any():
        raise ValueError("device coincides with an antenna (zero distance)")
    cos_t = device_xyz[None, :, 2] / d
    kappa = params.boresight_kappa
    gain = np.where(cos_t > 0, 2.0 * (kappa + 1.0) * np.maximum(cos_t, 0.0) ** kappa, 0.0)
    lam = params.wavelength_lambda
    amp = np.sqrt(gain) * lam / (4.0 * np.pi * d)
    return amp * np.exp(-2j * np.pi * d / lam)


def channel_coefficient(antenna_pos, device_pos,
                        params: ChannelParams) -> complex:
    """Single coefficient: amplitude sqrt(F) * lambda / (4 pi d), phase
    -2 pi d / lambda."""
    ant = np.asarray(antenna_pos, dtype=float).reshape(1, 2)
    dev = np.asarray(device_pos, dtype=float).reshape(1, 3)
    return complex(_coefficients(ant, dev, params)[0, 0])


def channel_matrix(layout: AntennaLayout, deployment: Deployment,
                   params: ChannelParams) -> ChannelMatrix:
    return ChannelMatrix(
        _coefficients(layout.positions, deployment.device_positions, params))


def channel_matrix_batch(positions: np.ndarray, deployment: Deployment,
                         params: ChannelParams) -> np.ndarray:
    """Channels for a batch of layouts, (B, N, 2) -> (B, N, K)."""
    return _coefficients(positions, deployment.device_positions, params)


def received_power(h_k: np.ndarray, precoder: Precoder, p_t: float) -> float:
    """p_T |h_k^H w|^2."""
    if p_t < 0:
        raise ValueError("transmit power must be non-negative")
    inner = np.vdot(h_k, precoder.weights)
    return float(p_t * np.abs(inner) ** 2)
