import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mawet.channel import ChannelMatrix
from mawet.precoder import (SdpSolverError, gaussian_randomization,
                            grid_oracle, randomized_power_batch,
                            single_device_power, solve_maxmin_sdp)


def random_channels(seed, n, k, scale=1.0):
    rng = np.random.default_rng(seed)
    h = (rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))) * scale
    return ChannelMatrix(h)


class TestSolveMaxminSdp:
    def test_two_real_ones(self):
        sol = solve_maxmin_sdp(ChannelMatrix(np.array([[1.0], [1.0]])))
        assert sol.xi == pytest.approx(2.0, rel=1e-7)

    def test_phase_alignment(self):
        sol = solve_maxmin_sdp(ChannelMatrix(np.array([[1.0], [1j]])))
        assert sol.xi == pytest.approx(2.0, rel=1e-7)

    def test_single_antenna(self):
        sol = solve_maxmin_sdp(ChannelMatrix(np.array([[0.5, 2.0, 1.5]])))
        assert np.allclose(sol.W, [[1.0]])
        assert sol.xi == pytest.approx(0.25)

    def test_solution_structure(self):
        sol = solve_maxmin_sdp(random_channels(3, 6, 3))
        n = 6
        assert np.allclose(np.diag(sol.W).real, 1 / n, atol=1e-9)
        assert np.allclose(sol.W, sol.W.conj().T)
        assert np.linalg.eigvalsh(sol.W)[0] >= -1e-9
        assert sol.duality_gap <= 1e-8
        assert sol.feasibility_gap <= 1e-9
        h = random_channels(3, 6, 3).coefficients
        powers = np.einsum("nk,nm,mk->k", h.conj(), sol.W, h).real
        assert sol.xi == pytest.approx(powers.min(), rel=1e-9)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_k1_matches_analytic_optimum(self, seed):
        cm = random_channels(seed, 5, 1)
        sol = solve_maxmin_sdp(cm)
        bound = np.abs(cm.coefficients[:, 0]).sum() ** 2 / 5
        assert sol.xi == pytest.approx(bound, rel=1e-6)

    @given(st.integers(0, 10_000))
    @settings(max_examples=15, deadline=None)
    def test_appending_device_never_raises_objective(self, seed):
        rng = np.random.default_rng(seed)
        h = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
        xi2 = solve_maxmin_sdp(ChannelMatrix(h[:, :2])).xi
        xi3 = solve_maxmin_sdp(ChannelMatrix(h)).xi
        assert xi3 <= xi2 * (1 + 1e-7)

    @given(st.integers(0, 10_000),
           st.floats(1e-3, 1e3))
    @settings(max_examples=15, deadline=None)
    def test_scale_covariance(self, seed, c):
        cm = random_channels(seed, 4, 2)
        scaled = ChannelMatrix(cm.coefficients * c)
        xi = solve_maxmin_sdp(cm).xi
        xi_scaled = solve_maxmin_sdp(scaled).xi
        assert xi_scaled == pytest.approx(xi * c ** 2, rel=1e-6)

    @given(st.integers(0, 10_000))
    @settings(max_examples=15, deadline=None)
    def test_relaxation_dominates_any_precoder(self, seed):
        cm = random_channels(seed, 4, 3)
        sol = solve_maxmin_sdp(cm)
        rng = np.random.default_rng(seed + 1)
        h = cm.coefficients
        for _ in range(20):
            w = np.exp(1j * rng.uniform(0, 2 * np.pi, 4)) / 2.0
            value = np.min(np.abs(h.conj().T @ w) ** 2)
            assert value <= sol.xi * (1 + 1e-7)


class TestGaussianRandomization:
    def test_rank_one_recovers_exactly(self):
        rng = np.random.default_rng(5)
        w = np.exp(1j * rng.uniform(0, 2 * np.pi, 4)) / 2.0
        h = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
        from mawet.precoder import SdpSolution
        sdp = SdpSolution(np.outer(w, w.conj()), 0.0, 0.0, 0.0, 0)
        alloc = gaussian_randomization(sdp, ChannelMatrix(h), 1e-3, 50,
                                       np.random.default_rng(0))
        want = max(1e-3 / np.abs(np.vdot(h[:, k], w)) ** 2 for k in range(2))
        assert alloc.p_tx == pytest.approx(want, rel=1e-5)

    def test_k1_recovers_closed_form(self):
        cm = random_channels(11, 6, 1)
        sol = solve_maxmin_sdp(cm)
        alloc = gaussian_randomization(sol, cm, 1e-3, 10_000,
                                       np.random.default_rng(1))
        want = 6 * 1e-3 / np.abs(cm.coefficients[:, 0]).sum() ** 2
        assert alloc.p_tx == pytest.approx(want, rel=1e-2)

    def test_deterministic_given_stream(self):
        cm = random_channels(12, 5, 2)
        sol = solve_maxmin_sdp(cm)
        a = gaussian_randomization(sol, cm, 1e-3, 1, np.random.default_rng(9))
        b = gaussian_randomization(sol, cm, 1e-3, 1, np.random.default_rng(9))
        assert a.p_tx == b.p_tx
        assert np.array_equal(a.precoder.phases_theta, b.precoder.phases_theta)

    def test_nonincreasing_in_candidates(self):
        cm = random_channels(13, 5, 3)
        sol = solve_maxmin_sdp(cm)
        powers = [gaussian_randomization(sol, cm, 1e-3, c,
                                         np.random.default_rng(3)).p_tx
                  for c in (10, 100, 1000)]
        assert powers[0] >= powers[1] >= powers[2]

    def test_meets_requirements_by_construction(self):
        cm = random_channels(14, 6, 3)
        sol = solve_maxmin_sdp(cm)
        req = np.array([1e-3, 2e-3, 5e-4])
        alloc = gaussian_randomization(sol, cm, req, 500,
                                       np.random.default_rng(4))
        received = alloc.p_tx * np.abs(
            cm.coefficients.conj().T @ alloc.precoder.weights) ** 2
        assert (received >= req * (1 - 1e-12)).all()

    def test_batch_agrees_with_single(self):
        # different stream layouts, so equality is statistical: both must
        # respect the relaxation lower bound and land near each other
        cm = random_channels(15, 5, 2)
        sol = solve_maxmin_sdp(cm)
        single = gaussian_randomization(sol, cm, 1e-3, 2000,
                                        np.random.default_rng(6))
        batch = randomized_power_batch(sol.W[None], cm.coefficients[None],
                                       1e-3, 2000, np.random.default_rng(6))
        lower = 1e-3 / sol.xi
        assert batch[0] >= lower * (1 - 1e-9)
        assert single.p_tx >= lower * (1 - 1e-9)
        assert batch[0] == pytest.approx(single.p_tx, rel=0.1)

    def test_batch_deterministic(self):
        cm = random_channels(16, 4, 3)
        sol = solve_maxmin_sdp(cm)
        a = randomized_power_batch(sol.W[None], cm.coefficients[None],
                                   1e-3, 300, np.random.default_rng(8))
        b = randomized_power_batch(sol.W[None], cm.coefficients[None],
                                   1e-3, 300, np.random.default_rng(8))
        assert np.array_equal(a, b)


class TestSingleDevicePower:
    def test_one_antenna(self):
        assert single_device_power(np.array([0.02]), 1e-3).p_tx \
            == pytest.approx(2.5)

    def test_two_antennas(self):
        alloc = single_device_power(np.array([0.01, 0.01]), 1e-3)
        assert alloc.p_tx == pytest.approx(5.0)

    def test_global_phase_invariance(self):
        h = np.array([0.01 + 0.02j, -0.03, 0.005j])
        a = single_device_power(h, 1e-3)
        b = single_device_power(h * np.exp(1.1j), 1e-3)
        assert a.p_tx == pytest.approx(b.p_tx)

    def test_zero_channel_rejected(self):
        with pytest.raises(ValueError):
            single_device_power(np.zeros(3), 1e-3)

    def test_mrt_phases(self):
        h = np.array([0.01 + 0.02j, -0.03, 0.005j])
        alloc = single_device_power(h, 1e-3)
        received = alloc.p_tx * np.abs(
            np.vdot(h, alloc.precoder.weights)) ** 2
        assert received == pytest.approx(1e-3)


class TestGridOracle:
    def test_single_antenna(self):
        cm = ChannelMatrix(np.array([[0.01, 0.02]]))
        alloc = grid_oracle(cm, 1e-3, 8)
        assert alloc.p_tx == pytest.approx(1e-3 / 0.01 ** 2)

    def test_k1_converges_to_mrt(self):
        cm = random_channels(21, 3, 1)
        exact = single_device_power(cm.coefficients[:, 0], 1e-3).p_tx
        coarse = grid_oracle(cm, 1e-3, 16).p_tx
        fine = grid_oracle(cm, 1e-3, 256).p_tx
        assert fine <= coarse * (1 + 1e-12)
        assert fine == pytest.approx(exact, rel=1e-3)

    def test_bracketed_by_sdp_and_randomization(self):
        cm = random_channels(22, 2, 2)
        sol = solve_maxmin_sdp(cm)
        alloc = gaussian_randomization(sol, cm, 1e-3, 5000,
                                       np.random.default_rng(7))
        grid = grid_oracle(cm, 1e-3, 64)
        assert grid.p_tx >= alloc.p_tx * (1 - 0.05)
        min_gain = np.min(np.abs(
            cm.coefficients.conj().T @ grid.precoder.weights) ** 2)
        assert min_gain <= sol.xi * (1 + 1e-6)


class TestSolverFailurePath:
    def test_impossible_tolerance_raises(self):
        cm = random_channels(30, 4, 2)
        with pytest.raises(SdpSolverError) as err:
            solve_maxmin_sdp(cm, tolerance=1e-15)
        assert "relgap" in err.value.diagnostics
