"""Relaxation-guided particle swarm over antenna placements.

Each particle encodes a candidate placement (either N free antenna
coordinates or the pose of a rigid uniform grid), fitness is the transmit
power obtained from the max-min relaxation plus a penalty per spacing
violation, and the swarm follows standard inertia/attraction dynamics with
a projection onto the movable region after every move.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, Precoder, channel_matrix_batch
from .geometry import (AntennaLayout, Deployment, InfeasibleLayoutError,
                       Region, count_spacing_violations, grid_shape,
                       uma_delta_max)
from .precoder import randomized_power_batch
from .sdp import solve_maxmin_batch

__all__ = [
    "PsoParams",
    "FitnessConfig",
    "SwarmState",
    "ImaCodec",
    "UmaCodec",
    "make_codec",
    "inertia_weight",
    "update_velocity",
    "update_position",
    "evaluate_fitness",
    "update_bests",
    "run_sgpso",
]


@dataclass(frozen=True)
class PsoParams:
    n_particles_m: int = 30
    n_iterations_i: int = 100
    inertia_range: tuple[float, float] = (0.1, 1.0)
    learning_c1: float = 1.49
    learning_c2: float = 1.49
    penalty_tau: float = 1e4
    master_seed: int = 0

    def __post_init__(self):
        w_min, w_max = self.inertia_range
        if not (0 < w_min <= w_max):
            raise ValueError("inertia_range must satisfy 0 < min <= max")
        if self.learning_c1 <= 0 or self.learning_c2 <= 0:
            raise ValueError("learning factors must be positive")
        if self.penalty_tau <= 0:
            raise ValueError("penalty_tau must be positive")
        if self.n_particles_m < 1 or self.n_iterations_i < 0:
            raise ValueError("need at least one particle and I >= 0")


@dataclass(frozen=True)
class FitnessConfig:
    """Precoder-side settings for fitness evaluation and final recovery."""

    sdp_tolerance: float = 1e-6
    fitness_candidates: int = 256
    final_candidates: int = 10_000
    skip_sdp_on_violation: bool = False


@dataclass
class SwarmState:
    positions: np.ndarray        # (M, D)
    velocities: np.ndarray       # (M, D)
    pbest_positions: np.ndarray  # (M, D)
    pbest_fitness: np.ndarray    # (M,)
    gbest_position: np.ndarray   # (D,)
    gbest_fitness: float
    iteration: int
    fitness_trace: list[float] = field(default_factory=list)


class ImaCodec:
    """Individually movable antennas: the particle is the flattened list of
    N coordinate pairs; projection clamps each coordinate onto the region."""

    def __init__(self, region: Region, n_antennas: int):
        self.region = region
        self.n = n_antennas
        self.dim = 2 * n_antennas

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        half = 0.5 * self.region.side_length_l
        return rng.uniform(-half, half, size=(m, self.dim))

    def project(self, positions: np.ndarray) -> np.ndarray:
        half = 0.5 * self.region.side_length_l
        return np.clip(positions, -half, half)

    def decode(self, positions: np.ndarray) -> np.ndarray:
        return positions.reshape(positions.shape[0], self.n, 2)

    def violations(self, positions: np.ndarray) -> np.ndarray:
        return count_spacing_violations(self.decode(positions),
                                        self.region.min_spacing_delta)


class UmaCodec:
    """Uniformly movable array: the particle is [x0, y0, beta, delta_u],
    the pose of a rigid rectangular grid.

    Projection wraps the rotation, clamps the spacing to
    [spacing floor, delta_max(beta)], and clamps the reference corner so
    the whole grid stays inside the region.  In-bounds particles decode to
    layouts with zero spacing violations by construction.
    """

    def __init__(self, region: Region, n_antennas: int):
        self.region = region
        self.n = n_antennas
        self.dim = 4
        self.nx, self.ny = grid_shape(n_antennas)
        self.delta_floor = region.min_spacing_delta
        if uma_delta_max(0.0, n_antennas, region.side_length_l) < self.delta_floor:
            raise InfeasibleLayoutError(
                "grid of {} antennas at the minimum spacing cannot fit the "
                "region at any rotation".format(n_antennas))
        n = np.arange(n_antennas)
        self._unit_offsets = np.column_stack([n % self.nx, n // self.nx])

    def _delta_max(self, beta: np.ndarray) -> np.ndarray:
        c, s = np.abs(np.cos(beta)), np.abs(np.sin(beta))
        ex = c * (self.nx - 1) + s * (self.ny - 1)
        ey = s * (self.nx - 1) + c * (self.ny - 1)
        with np.errstate(divide="ignore"):
            return np.where(np.maximum(ex, ey) > 0,
                            self.region.side_length_l / np.maximum(
                                np.maximum(ex, ey), 1e-300),
                            np.inf)

    def _ref_bounds(self, beta: np.ndarray, delta_u: np.ndarray):
        """Reference-corner interval per particle from the extreme axis
        projections of the rotated grid corners."""
        w = (self.nx - 1) * delta_u
        h = (self.ny - 1) * delta_u
        c, s = np.cos(beta), np.sin(beta)
        px = np.stack([np.zeros_like(w), w * c, -h * s, w * c - h * s])
        py = np.stack([np.zeros_like(w), w * s, h * c, w * s + h * c])
        half = 0.5 * self.region.side_length_l
        return ((-half - px.min(axis=0), half - px.max(axis=0)),
                (-half - py.min(axis=0), half - py.max(axis=0)))

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        beta = rng.uniform(0.0, 2.0 * np.pi, size=m)
        dmax = np.maximum(self._delta_max(beta), self.delta_floor)
        delta_u = rng.uniform(self.delta_floor, dmax)
        (x_lo, x_hi), (y_lo, y_hi) = self._ref_bounds(beta, delta_u)
        x0 = rng.uniform(np.minimum(x_lo, x_hi), np.maximum(x_lo, x_hi))
        y0 = rng.uniform(np.minimum(y_lo, y_hi), np.maximum(y_lo, y_hi))
        return np.column_stack([x0, y0, beta, delta_u])

    def project(self, positions: np.ndarray) -> np.ndarray:
        out = positions.copy()
        beta = np.mod(out[:, 2], 2.0 * np.pi)
        dmax = np.maximum(self._delta_max(beta), self.delta_floor)
        delta_u = np.clip(out[:, 3], self.delta_floor, dmax)
        (x_lo, x_hi), (y_lo, y_hi) = self._ref_bounds(beta, delta_u)
        # a collapsed interval (rotation where the grid barely fits)
        # degenerates to its midpoint
        out[:, 0] = np.clip(out[:, 0], np.minimum(x_lo, x_hi),
                            np.maximum(x_lo, x_hi))
        out[:, 1] = np.clip(out[:, 1], np.minimum(y_lo, y_hi),
                            np.maximum(y_lo, y_hi))
        out[:, 2] = beta
        out[:, 3] = delta_u
        return out

    def decode(self, positions: np.ndarray) -> np.ndarray:
        x0, y0, beta, delta_u = positions.T
        off = self._unit_offsets[None] * delta_u[:, None, None]
        c, s = np.cos(beta), np.sin(beta)
        x = x0[:, None] + off[:, :, 0] * c[:, None] - off[:, :, 1] * s[:, None]
        y = y0[:, None] + off[:, :, 0] * s[:, None] + off[:, :, 1] * c[:, None]
        return np.stack([x, y], axis=-1)

    def violations(self, positions: np.ndarray) -> np.ndarray:
        """Spacing violations are impossible by construction; antennas that
        a degenerate pose pushes out of the region are penalized instead."""
        half = 0.5 * self.region.side_length_l
        outside = (np.abs(self.decode(positions)) > half + 1e-9).any(axis=2)
        return outside.sum(axis=1)


def make_codec(name: str, region: Region, n_antennas: int):
    if name == "ima":
        return ImaCodec(region, n_antennas)
    if name == "uma":
        return UmaCodec(region, n_antennas)
    raise ValueError("unknown codec {!r}; expected 'ima' or 'uma'".format(name))


def inertia_weight(iteration: int, params: PsoParams) -> float:
    w_min, w_max = params.inertia_range
    total = max(params.n_iterations_i, 1)
    return w_max - (w_max - w_min) * iteration / total


def update_velocity(velocities: np.ndarray, positions: np.ndarray,
                    pbest: np.ndarray, gbest: np.ndarray, omega: float,
                    params: PsoParams, rng: np.random.Generator) -> np.ndarray:
    e1 = rng.uniform(size=positions.shape)
    e2 = rng.uniform(size=positions.shape)
    return (omega * velocities
            + params.learning_c1 * e1 * (pbest - positions)
            + params.learning_c2 * e2 * (gbest[None] - positions))


def update_position(positions: np.ndarray, velocities: np.ndarray,
                    codec) -> np.ndarray:
    return codec.project(positions + velocities)


def evaluate_fitness(positions: np.ndarray, codec, deployment: Deployment,
                     chparams: ChannelParams, params: PsoParams,
                     fit: FitnessConfig,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Fitness p_tx + tau * violations for a batch of particles.

    Returns (fitness, p_tx) arrays of shape (M,).  Particles whose
    relaxation fails get infinite fitness and never become bests.
    """
    layouts = codec.decode(positions)
    viol = codec.violations(positions).astype(float)
    h = channel_matrix_batch(layouts, deployment, chparams)
    req = deployment.power_requirements

    if deployment.n_devices == 1:
        # single device: phase alignment is optimal, no relaxation needed
        l1sq = np.abs(h[:, :, 0]).sum(axis=1) ** 2
        n = h.shape[1]
        with np.errstate(divide="ignore"):
            p_tx = np.where(l1sq > 0, n * req[0] / np.maximum(l1sq, 1e-300),
                            np.inf)
        return p_tx + params.penalty_tau * viol, p_tx

    solve_mask = np.ones(len(positions), dtype=bool)
    if fit.skip_sdp_on_violation:
        solve_mask = viol == 0
    p_tx = np.full(len(positions), np.inf)
    if solve_mask.any():
        out = solve_maxmin_batch(h[solve_mask], tol=fit.sdp_tolerance)
        powers = randomized_power_batch(out["W"], h[solve_mask], req,
                                        fit.fitness_candidates, rng)
        powers[~out["ok"]] = np.inf
        p_tx[solve_mask] = powers
    fitness = params.penalty_tau * viol \
        + np.where(np.isfinite(p_tx), p_tx, 0.0)
    fitness[solve_mask & ~np.isfinite(p_tx)] = np.inf
    return fitness, p_tx


def update_bests(state: SwarmState, fitnesses: np.ndarray) -> None:
    """Strictly-improving personal and global best updates; ties keep the
    incumbent, and among equal new minima the lowest index wins."""
    improved = fitnesses < state.pbest_fitness
    state.pbest_fitness = np.where(improved, fitnesses, state.pbest_fitness)
    state.pbest_positions[improved] = state.positions[improved]
    best = int(np.argmin(fitnesses))
    if fitnesses[best] < state.gbest_fitness:
        state.gbest_fitness = float(fitnesses[best])
        state.gbest_position = state.positions[best].copy()


def _stream(master_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=key))


def run_sgpso(deployment: Deployment, codec, params: PsoParams,
              chparams: ChannelParams,
              fit: FitnessConfig | None = None
              ) -> tuple[AntennaLayout, Precoder, float, np.ndarray]:
    """Run the full swarm optimization for one deployment.

    Returns (best layout, its precoder, allocated power p_T, gbest fitness
    trace).  The final power comes from re-running the recovery on the best
    particle with the full candidate budget.
    """
    fit = fit or FitnessConfig()
    m = params.n_particles_m

    positions = codec.sample(_stream(params.master_seed, 0), m)
    velocities = np.zeros_like(positions)
    fitness, _ = evaluate_fitness(positions, codec, deployment, chparams,
                                  params, fit, _stream(params.master_seed, 2, 0))
    best = int(np.argmin(fitness))
    state = SwarmState(
        positions=positions, velocities=velocities,
        pbest_positions=positions.copy(), pbest_fitness=fitness.copy(),
        gbest_position=positions[best].copy(),
        gbest_fitness=float(fitness[best]), iteration=0,
        fitness_trace=[float(fitness[best])])

    for i in range(1, params.n_iterations_i + 1):
        omega = inertia_weight(i, params)
        state.velocities = update_velocity(
            state.velocities, state.positions, state.pbest_positions,
            state.gbest_position, omega, params,
            _stream(params.master_seed, 1, i))
        state.positions = update_position(state.positions, state.velocities,
                                          codec)
        fitness, _ = evaluate_fitness(
            state.positions, codec, deployment, chparams, params, fit,
            _stream(params.master_seed, 2, i))
        update_bests(state, fitness)
        state.iteration = i
        state.fitness_trace.append(state.gbest_fitness)

    if not np.isfinite(state.gbest_fitness):
        raise RuntimeError("no particle produced a finite fitness")

    from .channel import ChannelMatrix
    from .precoder import gaussian_randomization, single_device_power, \
        solve_maxmin_sdp

    layout = AntennaLayout(codec.decode(state.gbest_position[None])[0])
    h = channel_matrix_batch(layout.positions[None], deployment, chparams)[0]
    if deployment.n_devices == 1:
        alloc = single_device_power(h[:, 0], deployment.power_requirements[0])
    else:
        sol = solve_maxmin_sdp(ChannelMatrix(h), fit.sdp_tolerance)
        alloc = gaussian_randomization(
            sol, ChannelMatrix(h), deployment.power_requirements,
            fit.final_candidates, _stream(params.master_seed, 3))
    return layout, alloc.precoder, alloc.p_tx, np.asarray(state.fitness_trace)
