"""Experiment harness: seeded Monte-Carlo sweeps over antenna counts,
device counts, and deployment areas for the movable and fixed
architectures, near-field statistics, and CSV/JSON persistence."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, fields

import numpy as np

from .channel import ChannelParams, channel_matrix, wavelength_from_freq
from .geometry import (AntennaLayout, Deployment, Region,
                       fixed_ula_positions, fixed_ura_positions,
                       is_near_field, sample_deployment)
from .precoder import (gaussian_randomization, single_device_power,
                       solve_maxmin_sdp)
from .sgpso import FitnessConfig, PsoParams, make_codec, run_sgpso

ARCHITECTURES = ("ima", "uma", "ula", "ura")

CSV_HEADER = "arch,N,K,ax,ay,az,deployment,seed,p_T_watts,nf_fraction,wall_s"


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    architecture: tuple[str, ...] = ("ima",)
    n_antennas: tuple[int, ...] = (9,)
    n_devices: tuple[int, ...] = (3,)
    freq_hz: float = 1e9
    kappa: float = 2.0
    side_l: float = 1.0
    delta: float | None = None          # None -> half wavelength
    a_x: float = 8.0
    a_y: float = 8.0
    a_z: float = 3.0
    p_th: float = 1e-3
    pso_particles: int | None = None    # None -> min(30, 10 S)
    pso_iterations: int | None = None   # None -> 50 S
    pso_inertia_min: float = 0.1
    pso_inertia_max: float = 1.0
    pso_c1: float = 1.49
    pso_c2: float = 1.49
    pso_tau: float = 1e4
    sdp_tolerance: float = 1e-6
    randomization_count: int = 10_000
    fitness_candidates: int = 256
    skip_sdp_on_violation: bool = False
    n_deployments: int = 10

    def __post_init__(self):
        object.__setattr__(self, "architecture",
                           _as_tuple(self.architecture, str))
        object.__setattr__(self, "n_antennas",
                           _as_tuple(self.n_antennas, int))
        object.__setattr__(self, "n_devices",
                           _as_tuple(self.n_devices, int))
        for arch in self.architecture:
            if arch not in ARCHITECTURES:
                raise ValueError("unknown architecture {!r}".format(arch))
        for name in ("freq_hz", "kappa", "side_l", "a_x", "a_y", "a_z",
                     "p_th", "sdp_tolerance", "pso_tau"):
            if getattr(self, name) <= 0:
                raise ValueError("{} must be positive".format(name))
        if not self.architecture or not self.n_antennas or not self.n_devices:
            raise ValueError("sweep lists must be non-empty")
        if min(self.n_antennas) < 1 or min(self.n_devices) < 1:
            raise ValueError("antenna and device counts must be >= 1")
        if self.n_deployments < 1 or self.randomization_count < 1:
            raise ValueError("counts must be >= 1")

    @property
    def wavelength(self) -> float:
        return wavelength_from_freq(self.freq_hz)

    @property
    def spacing(self) -> float:
        return self.delta if self.delta is not None else 0.5 * self.wavelength

    def resolved(self) -> dict:
        doc = {f.name: getattr(self, f.name) for f in fields(self)}
        doc["delta"] = self.spacing
        doc["wavelength"] = self.wavelength
        return doc

    def config_hash(self) -> str:
        payload = json.dumps(self.resolved(), sort_keys=True, default=list)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _as_tuple(value, kind) -> tuple:
    if isinstance(value, (list, tuple, np.ndarray)):
        return tuple(kind(v) for v in value)
    return (kind(value),)


@dataclass
class ExperimentRecord:
    config_hash: str
    architecture: str
    n_antennas: int
    n_devices: int
    deployment_index: int
    seed: int
    a_x: float
    a_y: float
    a_z: float
    p_T: float
    near_field_flags: np.ndarray
    wall_time: float
    fitness_trace: np.ndarray | None = None
    layout: AntennaLayout | None = None
    error: str | None = None

    @property
    def nf_fraction(self) -> float:
        flags = np.asarray(self.near_field_flags, dtype=bool)
        return float(flags.mean()) if flags.size else 0.0

    @property
    def succeeded(self) -> bool:
        return self.error is None and np.isfinite(self.p_T)


def _swarm_size(architecture: str, n_antennas: int) -> int:
    return 2 * n_antennas if architecture == "ima" else 4


def pso_params_for(config: ExperimentConfig, architecture: str,
                   n_antennas: int, master_seed: int) -> PsoParams:
    s = _swarm_size(architecture, n_antennas)
    m = config.pso_particles if config.pso_particles is not None \
        else min(30, 10 * s)
    i = config.pso_iterations if config.pso_iterations is not None \
        else 50 * s
    return PsoParams(
        n_particles_m=m, n_iterations_i=i,
        inertia_range=(config.pso_inertia_min, config.pso_inertia_max),
        learning_c1=config.pso_c1, learning_c2=config.pso_c2,
        penalty_tau=config.pso_tau, master_seed=master_seed)


def make_deployment(config: ExperimentConfig, k: int,
                    deployment_index: int) -> Deployment:
    """Device draw shared by every architecture at a given index; smaller
    K values are prefixes of larger ones under the same seed."""
    rng = np.random.default_rng(np.random.SeedSequence(
        entropy=config.seed, spawn_key=(0, deployment_index)))
    return sample_deployment(rng, k, config.a_x, config.a_y, config.a_z,
                             config.p_th)


def _instance_seed(config: ExperimentConfig, deployment_index: int) -> int:
    return int(np.random.SeedSequence(
        entropy=config.seed,
        spawn_key=(1, deployment_index)).generate_state(1)[0])


def run_instance(config: ExperimentConfig, architecture: str,
                 n_antennas: int, deployment: Deployment,
                 deployment_index: int) -> ExperimentRecord:
    """One architecture on one deployment: swarm search for the movable
    architectures, direct power allocation for the fixed ones."""
    lam = config.wavelength
    region = Region(config.side_l, config.spacing)
    chp = ChannelParams(lam, config.kappa)
    fit = FitnessConfig(sdp_tolerance=config.sdp_tolerance,
                        fitness_candidates=config.fitness_candidates,
                        final_candidates=config.randomization_count,
                        skip_sdp_on_violation=config.skip_sdp_on_violation)
    seed = _instance_seed(config, deployment_index)
    start = time.perf_counter()
    trace = None
    try:
        if architecture in ("ima", "uma"):
            codec = make_codec(architecture, region, n_antennas)
            params = pso_params_for(config, architecture, n_antennas, seed)
            layout, _, p_t, trace = run_sgpso(deployment, codec, params,
                                              chp, fit)
        else:
            layout = (fixed_ula_positions(n_antennas, config.spacing)
                      if architecture == "ula"
                      else fixed_ura_positions(n_antennas, config.spacing))
            h = channel_matrix(layout, deployment, chp)
            if deployment.n_devices == 1:
                p_t = single_device_power(
                    h.coefficients[:, 0],
                    deployment.power_requirements[0]).p_tx
            else:
                sol = solve_maxmin_sdp(h, config.sdp_tolerance)
                p_t = gaussian_randomization(
                    sol, h, deployment.power_requirements,
                    config.randomization_count,
                    np.random.default_rng(np.random.SeedSequence(
                        entropy=seed, spawn_key=(2,)))).p_tx
        flags = np.array([is_near_field(layout, dev, lam)
                          for dev in deployment.device_positions])
        error = None
    except Exception as exc:  # noqa: BLE001 - failure becomes a record
        p_t = float("nan")
        flags = np.zeros(deployment.n_devices, dtype=bool)
        layout = None
        error = "{}: {}".format(type(exc).__name__, exc)
    wall = time.perf_counter() - start
    return ExperimentRecord(
        config_hash=config.config_hash(), architecture=architecture,
        n_antennas=n_antennas, n_devices=deployment.n_devices,
        deployment_index=deployment_index, seed=config.seed,
        a_x=config.a_x, a_y=config.a_y, a_z=config.a_z, p_T=p_t,
        near_field_flags=flags, wall_time=wall, fitness_trace=trace,
        layout=layout, error=error)


def sweep(config: ExperimentConfig) -> list[ExperimentRecord]:
    """Cartesian product of architectures, antenna counts, device counts,
    and shared deployments, in canonical (sorted) order."""
    records = []
    for arch in config.architecture:
        for n in config.n_antennas:
            for k in config.n_devices:
                for d in range(config.n_deployments):
                    dep = make_deployment(config, k, d)
                    records.append(run_instance(config, arch, n, dep, d))
    records.sort(key=lambda r: (r.architecture, r.n_antennas, r.n_devices,
                                r.deployment_index))
    return records


def mean_power(records, **filters) -> float:
    """Mean p_T over successful records matching attribute filters."""
    vals = [r.p_T for r in records if r.succeeded
            and all(getattr(r, k) == v for k, v in filters.items())]
    if not vals:
        return float("nan")
    return float(np.mean(vals))


def nearfield_probability(records) -> list[dict]:
    """Per-(architecture, N, a_x) fraction of (device, deployment) pairs in
    the near field."""
    groups: dict[tuple, list[np.ndarray]] = {}
    for r in records:
        groups.setdefault((r.architecture, r.n_antennas, r.a_x), []).append(
            np.asarray(r.near_field_flags, dtype=bool))
    table = []
    for (arch, n, ax), flag_sets in sorted(groups.items()):
        flags = np.concatenate(flag_sets)
        any_dev = [fs.any() for fs in flag_sets]
        table.append({"architecture": arch, "n_antennas": n, "a_x": ax,
                      "probability": float(flags.mean()),
                      "probability_any_device": float(np.mean(any_dev))})
    return table


def _fmt(x: float) -> str:
    return "{:.17g}".format(float(x))


def write_results(records, path, config: ExperimentConfig | None = None):
    """CSV of records plus a JSON sidecar with the fully resolved config."""
    path = str(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(CSV_HEADER + "\n")
            for r in records:
                f.write(",".join([
                    r.architecture, str(r.n_antennas), str(r.n_devices),
                    _fmt(r.a_x), _fmt(r.a_y), _fmt(r.a_z),
                    str(r.deployment_index), str(r.seed), _fmt(r.p_T),
                    _fmt(r.nf_fraction), _fmt(r.wall_time)]) + "\n")
        if config is not None:
            sidecar = _sidecar_path(path)
            with open(sidecar, "w", encoding="utf-8") as f:
                json.dump(config.resolved(), f, indent=2, sort_keys=True,
                          default=list)
                f.write("\n")
    except OSError as exc:
        raise OSError("failed writing results to {}: {}".format(path, exc)) \
            from exc


def _sidecar_path(path: str) -> str:
    stem = path[:-4] if path.endswith(".csv") else path
    return stem + ".config.json"


def read_results(path) -> list[dict]:
    """Parse a results CSV back into row dictionaries (floats at full
    precision)."""
    rows = []
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if header != CSV_HEADER:
            raise ValueError("unexpected CSV header in {}: {!r}".format(
                path, header))
        for line in f:
            parts = line.rstrip("\n").split(",")
            rows.append({
                "arch": parts[0], "N": int(parts[1]), "K": int(parts[2]),
                "ax": float(parts[3]), "ay": float(parts[4]),
                "az": float(parts[5]), "deployment": int(parts[6]),
                "seed": int(parts[7]), "p_T_watts": float(parts[8]),
                "nf_fraction": float(parts[9]), "wall_s": float(parts[10])})
    return rows
