"""Antenna placement geometry: the movable region, spacing checks, uniform
grid arrays (movable and fixed), aperture and near-field tests, and random
device deployments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class InfeasibleLayoutError(ValueError):
    """Raised when a parameterized array does not fit inside the region."""


@dataclass(frozen=True)
class Region:
    """Square region in the x-y plane, centered at the origin, that the
    movable antennas may occupy."""

    side_length_l: float
    min_spacing_delta: float

    def __post_init__(self):
        if self.side_length_l <= 0:
            raise ValueError("side_length_l must be positive")
        if self.min_spacing_delta <= 0:
            raise ValueError("min_spacing_delta must be positive")
        if self.min_spacing_delta > self.side_length_l * math.sqrt(2.0):
            raise ValueError("min_spacing_delta exceeds the region diagonal; "
                             "two antennas cannot fit")


@dataclass(frozen=True)
class AntennaLayout:
    """N antenna positions (x, y) in meters."""

    positions: np.ndarray  # (N, 2)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError("positions must be an (N, 2) array with N >= 1")
        object.__setattr__(self, "positions", pos)

    @property
    def n_antennas(self) -> int:
        return self.positions.shape[0]

    def centroid(self) -> np.ndarray:
        return self.positions.mean(axis=0)


@dataclass(frozen=True)
class UmaParams:
    """Rigid uniformly-spaced grid: reference corner, rotation, spacing."""

    ref_position_r0: np.ndarray  # (2,)
    rotation_beta: float
    spacing_delta_u: float

    def __post_init__(self):
        r0 = np.asarray(self.ref_position_r0, dtype=float).reshape(2)
        object.__setattr__(self, "ref_position_r0", r0)
        if self.spacing_delta_u <= 0:
            raise ValueError("spacing_delta_u must be positive")


@dataclass(frozen=True)
class Deployment:
    """K device positions (all at height standoff_a_z) and their power
    requirements."""

    device_positions: np.ndarray      # (K, 3)
    power_requirements: np.ndarray    # (K,) watts
    plane_dims: tuple[float, float]   # (a_x, a_y)
    standoff_a_z: float

    def __post_init__(self):
        pos = np.asarray(self.device_positions, dtype=float)
        req = np.asarray(self.power_requirements, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError("device_positions must be (K, 3) with K >= 1")
        if req.shape != (pos.shape[0],):
            raise ValueError("one power requirement per device required")
        if not (req > 0).all():
            raise ValueError("power requirements must be positive")
        if self.standoff_a_z <= 0:
            raise ValueError("standoff_a_z must be positive")
        if not np.allclose(pos[:, 2], self.standoff_a_z):
            raise ValueError("device z-coordinates must equal standoff_a_z")
        object.__setattr__(self, "device_positions", pos)
        object.__setattr__(self, "power_requirements", req)

    @property
    def n_devices(self) -> int:
        return self.device_positions.shape[0]


def grid_shape(n_antennas: int) -> tuple[int, int]:
    """Grid sizing rule shared by the movable and fixed rectangular arrays:
    ceil(sqrt(N)) columns, enough rows to hold N elements."""
    nx = math.isqrt(n_antennas)
    if nx * nx < n_antennas:
        nx += 1
    ny = -(-n_antennas // nx)
    return nx, ny


def rotation_matrix(beta: float) -> np.ndarray:
    c, s = math.cos(beta), math.sin(beta)
    return np.array([[c, -s], [s, c]])


def project_to_region(coord, side_l: float):
    """Clamp coordinates onto [-l/2, l/2], componentwise."""
    if side_l <= 0:
        raise ValueError("side_l must be positive")
    half = 0.5 * side_l
    return np.clip(coord, -half, half)


def spacing_violations(layout: AntennaLayout, delta: float) -> set[tuple[int, int]]:
    """All index pairs (n, n') with n < n' closer than delta (strictly)."""
    pos = layout.positions
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    iu, ju = np.triu_indices(len(pos), k=1)
    mask = dist[iu, ju] < delta
    return {(int(i), int(j)) for i, j in zip(iu[mask], ju[mask])}


def count_spacing_violations(positions: np.ndarray, delta: float) -> np.ndarray:
    """Violation-pair counts for a batch of layouts, shape (B, N, 2) -> (B,)."""
    diff = positions[:, :, None, :] - positions[:, None, :, :]
    dist2 = (diff ** 2).sum(axis=-1)
    n = positions.shape[1]
    iu, ju = np.triu_indices(n, k=1)
    return (dist2[:, iu, ju] < delta * delta).sum(axis=1)


def _uma_offsets(n_antennas: int, delta_u: float) -> np.ndarray:
    """Local grid offsets before rotation: column index along local x,
    row index along local y, row-major fill."""
    nx, _ = grid_shape(n_antennas)
    n = np.arange(n_antennas)
    return np.column_stack([(n % nx) * delta_u, (n // nx) * delta_u])


def uma_positions(params: UmaParams, n_antennas: int,
                  region: Region | None = None) -> AntennaLayout:
    """Positions of the rotated, translated grid array.

    When a region is given, raises InfeasibleLayoutError if any element
    lands outside it (infeasible particle signal).
    """
    offsets = _uma_offsets(n_antennas, params.spacing_delta_u)
    rot = rotation_matrix(params.rotation_beta)
    pos = params.ref_position_r0[None, :] + offsets @ rot.T
    if region is not None:
        half = 0.5 * region.side_length_l
        if (np.abs(pos) > half + 1e-12).any():
            raise InfeasibleLayoutError(
                "grid array extends outside the movable region")
    return AntennaLayout(pos)


def uma_delta_max(beta: float, n_antennas: int, side_l: float) -> float:
    """Largest inter-element spacing keeping both projections of the grid
    within side_l."""
    if n_antennas < 2:
        return math.inf
    nx, ny = grid_shape(n_antennas)
    c, s = abs(math.cos(beta)), abs(math.sin(beta))
    extent = np.array([[c, s], [s, c]]) @ np.array([nx - 1, ny - 1], dtype=float)
    return side_l / np.max(extent)


def uma_ref_interval(beta: float, delta_u: float, n_antennas: int,
                     side_l: float) -> tuple[tuple[float, float], tuple[float, float]]:
    """Admissible interval for each coordinate of the reference position,
    from the extreme axis projections of the rotated grid corners."""
    nx, ny = grid_shape(n_antennas)
    w_u = (nx - 1) * delta_u
    h_u = (ny - 1) * delta_u
    corners = np.array([[0.0, 0.0], [w_u, 0.0], [0.0, h_u], [w_u, h_u]])
    rot = rotation_matrix(beta)
    proj = corners @ rot.T  # rows: rotated corners
    half = 0.5 * side_l
    x_lo, x_hi = -half - proj[:, 0].min(), half - proj[:, 0].max()
    y_lo, y_hi = -half - proj[:, 1].min(), half - proj[:, 1].max()
    return (x_lo, x_hi), (y_lo, y_hi)


def fixed_ula_positions(n_antennas: int, delta: float) -> AntennaLayout:
    """N elements on the x-axis with adjacent spacing delta, centroid at
    the origin."""
    x = (np.arange(n_antennas) - 0.5 * (n_antennas - 1)) * delta
    return AntennaLayout(np.column_stack([x, np.zeros(n_antennas)]))


def fixed_ura_positions(n_antennas: int, delta: float) -> AntennaLayout:
    """Rectangular grid (same sizing rule as the movable grid), spacing
    delta, centroid at the origin, first N slots row-major."""
    pos = _uma_offsets(n_antennas, delta)
    return AntennaLayout(pos - pos.mean(axis=0))


def aperture_diameter(layout: AntennaLayout) -> float:
    """Maximum pairwise distance among the antennas (the diameter of their
    convex hull); 0 for a single antenna."""
    pos = layout.positions
    if len(pos) == 1:
        return 0.0
    diff = pos[:, None, :] - pos[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=-1)).max())


def rayleigh_distance(layout: AntennaLayout, wavelength: float) -> float:
    d = aperture_diameter(layout)
    return 2.0 * d * d / wavelength


def is_near_field(layout: AntennaLayout, device: np.ndarray,
                  wavelength: float) -> bool:
    """True iff the device lies within the Rayleigh distance 2 D^2 / lambda
    of the array centroid."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    center = np.append(layout.centroid(), 0.0)
    dist = float(np.linalg.norm(center - np.asarray(device, dtype=float)))
    return dist <= rayleigh_distance(layout, wavelength)


def sample_deployment(rng: np.random.Generator, k_devices: int,
                      a_x: float, a_y: float, a_z: float,
                      p_th: float) -> Deployment:
    """Devices uniform on the a_x-by-a_y plane centered above the origin at
    height a_z; deterministic given the generator state."""
    if a_x < 0 or a_y < 0:
        raise ValueError("plane dimensions must be non-negative")
    xy = rng.uniform(-1.0, 1.0, size=(k_devices, 2)) * np.array([a_x / 2, a_y / 2])
    pos = np.column_stack([xy, np.full(k_devices, a_z)])
    return Deployment(pos, np.full(k_devices, p_th), (a_x, a_y), a_z)
