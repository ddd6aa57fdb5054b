"""Power allocation for a fixed antenna layout: the max-min SDP, Gaussian
randomization recovery of a constant-modulus precoder, the single-device
closed form, and an exhaustive quantized-phase oracle for testing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix, Precoder
from .sdp import SdpSolverError, _hermitize, solve_maxmin_batch

__all__ = [
    "SdpSolution",
    "PowerAllocation",
    "SdpSolverError",
    "solve_maxmin_sdp",
    "gaussian_randomization",
    "randomized_power_batch",
    "single_device_power",
    "grid_oracle",
]


@dataclass(frozen=True)
class SdpSolution:
    """Relaxed max-min solution: Hermitian covariance W with diag(W)=1/N,
    objective xi = min_k tr(H_k W)."""

    W: np.ndarray
    xi: float
    feasibility_gap: float
    duality_gap: float
    iterations: int


@dataclass(frozen=True)
class PowerAllocation:
    """A constant-modulus precoder and the transmit power that makes every
    device meet its requirement."""

    precoder: Precoder
    p_tx: float
    candidates_evaluated: int

    def __post_init__(self):
        if not (self.p_tx > 0):
            raise ValueError("p_tx must be positive")


def solve_maxmin_sdp(channels: ChannelMatrix,
                     tolerance: float = 1e-8) -> SdpSolution:
    """Maximize the worst-device received power over relaxed precoder
    covariances.

    Solves max xi s.t. tr(h_k h_k^H W) >= xi for all devices, W Hermitian
    PSD, diag(W) = 1/N.  Raises SdpSolverError when the requested relative
    duality gap is not certified.
    """
    h = channels.coefficients
    out = solve_maxmin_batch(h[None], tol=tolerance)
    if not out["ok"][0]:
        raise SdpSolverError(
            "duality gap {:.3e} above requested tolerance {:.3e}".format(
                out["relgap"][0], tolerance),
            diagnostics={"relgap": float(out["relgap"][0]),
                         "steps": int(out["steps"]),
                         "xi": float(out["xi"][0]),
                         "dual": float(out["dual"][0])})
    W = out["W"][0]
    n = W.shape[0]
    lam_min = float(np.linalg.eigvalsh(W)[0])
    feas = max(float(np.abs(np.einsum("nn->n", W).real - 1.0 / n).max()),
               max(0.0, -lam_min))
    return SdpSolution(W=W, xi=float(out["xi"][0]), feasibility_gap=feas,
                       duality_gap=float(out["relgap"][0]),
                       iterations=int(out["steps"]))


def _power_requirements(p_th, k: int) -> np.ndarray:
    req = np.broadcast_to(np.asarray(p_th, dtype=float), (k,))
    if not (req > 0).all():
        raise ValueError("power requirements must be positive")
    return req


def _best_candidate(h: np.ndarray, req: np.ndarray,
                    phases: np.ndarray) -> tuple[float, int]:
    """Cost max_k p_k / |h_k^H w|^2 minimized over candidate phase rows;
    returns (best cost, row index).  Zero inner products cost infinity."""
    n = h.shape[0]
    cand = np.exp(1j * phases) / np.sqrt(n)
    gains = np.abs(cand @ h.conj()) ** 2          # (C, K)
    with np.errstate(divide="ignore"):
        cost = np.max(np.where(gains > 0, req / np.maximum(gains, 1e-300),
                               np.inf), axis=1)
    idx = int(np.argmin(cost))
    return float(cost[idx]), idx


def gaussian_randomization(sdp: SdpSolution, channels: ChannelMatrix, p_th,
                           n_candidates: int,
                           rng: np.random.Generator) -> PowerAllocation:
    """Recover a constant-modulus precoder from the relaxed covariance.

    Draws complex Gaussian vectors with covariance W, keeps only their
    phases, and returns the candidate minimizing the transmit power needed
    to satisfy every device, max_k p_k_th / |h_k^H w|^2.

    Candidate i is generated from a fixed position in the random stream,
    so prefixes agree across different n_candidates.
    """
    if n_candidates < 1:
        raise ValueError("n_candidates must be >= 1")
    h = channels.coefficients
    n, k = h.shape
    req = _power_requirements(p_th, k)

    lam, E = np.linalg.eigh(_hermitize(sdp.W))
    A = E * np.sqrt(np.maximum(lam, 0.0))

    best_cost = np.inf
    best_phases = None
    chunk = 1 << 15
    for start in range(0, n_candidates, chunk):
        c = min(chunk, n_candidates - start)
        # candidate i consumes draws [2Ni, 2N(i+1)), so prefixes of the
        # stream agree across different n_candidates
        gri = rng.standard_normal((c, n, 2))
        g = gri[..., 0] + 1j * gri[..., 1]
        phases = np.angle(g @ A.T / np.sqrt(2.0))
        cost, idx = _best_candidate(h, req, phases)
        if cost < best_cost:
            best_cost = cost
            best_phases = phases[idx]
    if not np.isfinite(best_cost):
        raise SdpSolverError("every randomization candidate left some "
                             "device with zero received power")
    return PowerAllocation(precoder=Precoder(best_phases), p_tx=best_cost,
                           candidates_evaluated=n_candidates)


def randomized_power_batch(W: np.ndarray, h: np.ndarray, p_th,
                           n_candidates: int,
                           rng: np.random.Generator) -> np.ndarray:
    """Transmit powers from Gaussian randomization for a batch of solved
    instances, (B, N, N) covariances against (B, N, K) channels -> (B,).

    Infinite where no candidate serves every device.
    """
    b, n, k = h.shape
    req = _power_requirements(p_th, k)
    lam, E = np.linalg.eigh(_hermitize(W))
    A = E * np.sqrt(np.maximum(lam, 0.0))[:, None, :]

    best = np.full(b, np.inf)
    chunk = max(1, (1 << 20) // max(b * n, 1))
    for start in range(0, n_candidates, chunk):
        c = min(chunk, n_candidates - start)
        g = (rng.standard_normal((b, c, n))
             + 1j * rng.standard_normal((b, c, n)))
        cand = np.exp(1j * np.angle(
            np.einsum("bcn,bmn->bcm", g, A))) / np.sqrt(n)
        gains = np.abs(np.einsum("bcn,bnk->bck", cand, h.conj())) ** 2
        with np.errstate(divide="ignore"):
            cost = np.max(np.where(gains > 0,
                                   req / np.maximum(gains, 1e-300), np.inf),
                          axis=2)
        best = np.minimum(best, cost.min(axis=1))
    return best


def single_device_power(h: np.ndarray, p_th: float) -> PowerAllocation:
    """Optimal allocation for one device: phase-aligned (maximum ratio)
    precoding, p_tx = N * p_th / ||h||_1^2."""
    h = np.asarray(h, dtype=complex).reshape(-1)
    if p_th <= 0:
        raise ValueError("p_th must be positive")
    l1 = float(np.abs(h).sum())
    if l1 == 0.0:
        raise ValueError("zero channel: no finite power serves the device")
    n = h.size
    return PowerAllocation(precoder=Precoder(np.angle(h)),
                           p_tx=n * p_th / l1 ** 2, candidates_evaluated=1)


def grid_oracle(channels: ChannelMatrix, p_th,
                phase_levels: int) -> PowerAllocation:
    """Exhaustive search over quantized constant-modulus precoders.

    The first phase is fixed to zero (global-phase invariance); the rest
    range over phase_levels uniform steps, so phase_levels**(N-1)
    candidates are evaluated.  Intended for small N.
    """
    if phase_levels < 1:
        raise ValueError("phase_levels must be >= 1")
    h = channels.coefficients
    n, k = h.shape
    req = _power_requirements(p_th, k)
    total = phase_levels ** (n - 1)

    step = 2.0 * np.pi / phase_levels
    place = phase_levels ** np.arange(n - 1)
    best_cost = np.inf
    best_phases = None
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = (idx[:, None] // place) % phase_levels
        phases = np.concatenate(
            [np.zeros((len(idx), 1)), digits * step], axis=1)
        cost, j = _best_candidate(h, req, phases)
        if cost < best_cost:
            best_cost = cost
            best_phases = phases[j]
    return PowerAllocation(precoder=Precoder(best_phases), p_tx=best_cost,
                           candidates_evaluated=total)
