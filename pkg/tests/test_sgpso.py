import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mawet.channel import ChannelParams, wavelength_from_freq
from mawet.geometry import (InfeasibleLayoutError, Region,
                            sample_deployment, spacing_violations)
from mawet.sgpso import (FitnessConfig, ImaCodec, PsoParams, SwarmState,
                         UmaCodec, evaluate_fitness, inertia_weight,
                         make_codec, run_sgpso, update_bests,
                         update_position, update_velocity)

LAM = wavelength_from_freq(1e9)
REGION = Region(1.0, LAM / 2)
CHP = ChannelParams(LAM, 2.0)
FAST_FIT = FitnessConfig(sdp_tolerance=1e-6, fitness_candidates=64,
                         final_candidates=500)


def small_deployment(seed=3, k=3):
    return sample_deployment(np.random.default_rng(seed), k, 8.0, 8.0, 3.0,
                             1e-3)


class TestPsoParams:
    def test_defaults_valid(self):
        PsoParams()

    def test_bad_inertia(self):
        with pytest.raises(ValueError):
            PsoParams(inertia_range=(0.0, 1.0))

    def test_bad_learning(self):
        with pytest.raises(ValueError):
            PsoParams(learning_c1=0.0)


class TestInertiaWeight:
    def test_start(self):
        p = PsoParams(n_iterations_i=100)
        assert inertia_weight(0, p) == 1.0

    def test_end(self):
        p = PsoParams(n_iterations_i=100)
        assert inertia_weight(100, p) == pytest.approx(0.1)

    def test_midpoint(self):
        p = PsoParams(n_iterations_i=100)
        assert inertia_weight(50, p) == pytest.approx(0.55)


class TestVelocityUpdate:
    def test_zero_attraction_at_consensus(self):
        pos = np.ones((4, 6))
        vel = np.zeros((4, 6))
        out = update_velocity(vel, pos, pos.copy(), pos[0], 0.5,
                              PsoParams(), np.random.default_rng(0))
        assert np.allclose(out, 0.0)

    def test_pure_inertia(self):
        params = PsoParams(learning_c1=1e-300, learning_c2=1e-300)
        vel = np.full((2, 4), 0.3)
        pos = np.zeros((2, 4))
        out = update_velocity(vel, pos, pos + 1, pos[0] + 1, 0.5, params,
                              np.random.default_rng(0))
        assert np.allclose(out, 0.15, atol=1e-12)

    def test_reproducible(self):
        vel = np.zeros((3, 4))
        pos = np.arange(12.0).reshape(3, 4)
        args = (vel, pos, pos + 1, pos[0], 0.7, PsoParams())
        a = update_velocity(*args, np.random.default_rng(5))
        b = update_velocity(*args, np.random.default_rng(5))
        assert np.array_equal(a, b)


class TestImaCodec:
    def test_clamp(self):
        codec = ImaCodec(REGION, 1)
        out = update_position(np.array([[0.4, 0.4]]),
                              np.array([[0.3, 0.0]]), codec)
        assert np.allclose(out, [[0.5, 0.4]])

    def test_zero_velocity_fixed_point(self):
        codec = ImaCodec(REGION, 3)
        pos = codec.sample(np.random.default_rng(0), 5)
        assert np.array_equal(update_position(pos, np.zeros_like(pos), codec),
                              pos)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_projection_lands_in_region(self, seed):
        codec = ImaCodec(REGION, 4)
        rng = np.random.default_rng(seed)
        pos = codec.project(rng.uniform(-3, 3, size=(6, 8)))
        assert np.abs(pos).max() <= 0.5

    def test_violation_count(self):
        codec = ImaCodec(REGION, 3)
        tight = np.array([[0.0, 0.0, 0.01, 0.0, 0.3, 0.3]])
        assert codec.violations(tight)[0] == 1
        spread = np.array([[-0.4, -0.4, 0.0, 0.0, 0.4, 0.4]])
        assert codec.violations(spread)[0] == 0


class TestUmaCodec:
    def test_spacing_clamped_to_delta_max(self):
        codec = UmaCodec(REGION, 9)
        raw = np.array([[0.0, 0.0, 0.0, 5.0]])
        out = codec.project(raw)
        assert out[0, 3] == pytest.approx(0.5)  # delta_max at beta=0

    def test_beta_wraps(self):
        codec = UmaCodec(REGION, 4)
        out = codec.project(np.array([[0.0, 0.0, 2 * np.pi + 0.3, 0.2]]))
        assert out[0, 2] == pytest.approx(0.3)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_projected_particles_decode_cleanly(self, seed):
        codec = UmaCodec(REGION, 9)
        rng = np.random.default_rng(seed)
        raw = rng.uniform(-2, 2, size=(8, 4)) * np.array([1, 1, 4, 1])
        pos = codec.project(raw)
        layouts = codec.decode(pos)
        assert np.abs(layouts).max() <= 0.5 + 1e-9
        assert (codec.violations(pos) == 0).all()
        for lay in layouts:
            from mawet.geometry import AntennaLayout
            assert spacing_violations(AntennaLayout(lay), LAM / 2 - 1e-9) \
                == set()

    def test_oversized_grid_rejected(self):
        with pytest.raises(InfeasibleLayoutError):
            UmaCodec(Region(0.2, LAM / 2), 16)

    def test_make_codec_dispatch(self):
        assert isinstance(make_codec("ima", REGION, 4), ImaCodec)
        assert isinstance(make_codec("uma", REGION, 4), UmaCodec)
        with pytest.raises(ValueError):
            make_codec("ura", REGION, 4)


class TestFitness:
    def test_penalty_added_per_violation(self):
        codec = ImaCodec(REGION, 3)
        params = PsoParams(penalty_tau=1e4)
        dep = small_deployment()
        clean = np.array([[-0.4, -0.4, 0.0, 0.0, 0.4, 0.4]])
        tight = np.array([[0.0, 0.0, 0.01, 0.0, 0.02, 0.0]])  # 3 pairs
        f_clean, p_clean = evaluate_fitness(clean, codec, dep, CHP, params,
                                            FAST_FIT,
                                            np.random.default_rng(0))
        f_tight, p_tight = evaluate_fitness(tight, codec, dep, CHP, params,
                                            FAST_FIT,
                                            np.random.default_rng(0))
        assert f_clean[0] == pytest.approx(p_clean[0])
        assert f_tight[0] == pytest.approx(p_tight[0] + 3e4)

    def test_k1_closed_form_consistent_with_sdp_path(self):
        codec = ImaCodec(REGION, 4)
        dep1 = small_deployment(seed=9, k=1)
        pos = codec.sample(np.random.default_rng(2), 3)
        fit, p_tx = evaluate_fitness(pos, codec, dep1, CHP, PsoParams(),
                                     FAST_FIT, np.random.default_rng(0))
        from mawet.channel import channel_matrix_batch
        h = channel_matrix_batch(codec.decode(pos), dep1, CHP)
        want = 4 * 1e-3 / np.abs(h[:, :, 0]).sum(axis=1) ** 2
        assert np.allclose(p_tx, want, rtol=1e-12)

    def test_skip_flag_spares_violating_particles(self):
        codec = ImaCodec(REGION, 3)
        dep = small_deployment()
        tight = np.array([[0.0, 0.0, 0.01, 0.0, 0.02, 0.0]])
        cfg = FitnessConfig(sdp_tolerance=1e-6, fitness_candidates=64,
                            final_candidates=100, skip_sdp_on_violation=True)
        fit, p_tx = evaluate_fitness(tight, codec, dep, CHP,
                                     PsoParams(penalty_tau=1e4), cfg,
                                     np.random.default_rng(0))
        assert fit[0] == pytest.approx(3e4)
        assert np.isinf(p_tx[0])


class TestUpdateBests:
    def make_state(self, fits):
        m, d = len(fits), 2
        pos = np.arange(m * d, dtype=float).reshape(m, d)
        return SwarmState(positions=pos, velocities=np.zeros((m, d)),
                          pbest_positions=pos.copy(),
                          pbest_fitness=np.array(fits, dtype=float),
                          gbest_position=pos[int(np.argmin(fits))].copy(),
                          gbest_fitness=float(np.min(fits)), iteration=0)

    def test_no_update_when_worse(self):
        state = self.make_state([1.0, 2.0])
        update_bests(state, np.array([5.0, 5.0]))
        assert state.gbest_fitness == 1.0
        assert np.array_equal(state.pbest_fitness, [1.0, 2.0])

    def test_single_improver_becomes_gbest(self):
        state = self.make_state([1.0, 2.0])
        state.positions = state.positions + 10
        update_bests(state, np.array([3.0, 0.5]))
        assert state.gbest_fitness == 0.5
        assert np.array_equal(state.gbest_position, state.positions[1])

    def test_tie_prefers_lowest_index(self):
        state = self.make_state([5.0, 5.0, 5.0])
        state.positions = state.positions + 10
        update_bests(state, np.array([2.0, 2.0, 3.0]))
        assert np.array_equal(state.gbest_position, state.positions[0])

    def test_tie_with_incumbent_keeps_incumbent(self):
        state = self.make_state([1.0, 2.0])
        old = state.gbest_position.copy()
        state.positions = state.positions + 10
        update_bests(state, np.array([1.0, 1.0]))
        assert np.array_equal(state.gbest_position, old)


class TestRunSgpso:
    PARAMS = PsoParams(n_particles_m=8, n_iterations_i=10, master_seed=42)

    def test_trace_monotone_and_layout_clean(self):
        dep = small_deployment()
        layout, precoder, p_t, trace = run_sgpso(
            dep, ImaCodec(REGION, 4), self.PARAMS, CHP, FAST_FIT)
        assert len(trace) == 11
        assert np.all(np.diff(trace) <= 0)
        assert spacing_violations(layout, LAM / 2) == set()
        assert np.abs(layout.positions).max() <= 0.5
        assert p_t > 0

    def test_bitwise_reproducible(self):
        dep = small_deployment()
        a = run_sgpso(dep, ImaCodec(REGION, 4), self.PARAMS, CHP, FAST_FIT)
        b = run_sgpso(dep, ImaCodec(REGION, 4), self.PARAMS, CHP, FAST_FIT)
        assert np.array_equal(a[0].positions, b[0].positions)
        assert a[2] == b[2]
        assert np.array_equal(a[3], b[3])

    def test_zero_iterations_returns_initial_best(self):
        dep = small_deployment()
        params = PsoParams(n_particles_m=5, n_iterations_i=0, master_seed=1)
        _, _, _, trace = run_sgpso(dep, ImaCodec(REGION, 4), params, CHP,
                                   FAST_FIT)
        assert len(trace) == 1

    def test_single_stationary_particle(self):
        dep = small_deployment()
        params = PsoParams(n_particles_m=1, n_iterations_i=4, master_seed=3)
        codec = ImaCodec(REGION, 3)
        _, _, _, trace = run_sgpso(dep, codec, params, CHP, FAST_FIT)
        # lone particle sits at its own pbest = gbest: zero attraction,
        # zero initial velocity, so the trace is flat
        assert np.all(trace == trace[0])

    def test_uma_run(self):
        dep = small_deployment()
        layout, _, p_t, trace = run_sgpso(
            dep, UmaCodec(REGION, 9), self.PARAMS, CHP, FAST_FIT)
        assert np.all(np.diff(trace) <= 0)
        assert spacing_violations(layout, LAM / 2 - 1e-9) == set()
        assert p_t > 0

    def test_k1_run_uses_closed_form(self):
        dep = small_deployment(seed=5, k=1)
        layout, precoder, p_t, _ = run_sgpso(
            dep, ImaCodec(REGION, 2), self.PARAMS, CHP, FAST_FIT)
        from mawet.channel import channel_matrix
        h = channel_matrix(layout, dep, CHP).coefficients[:, 0]
        assert p_t == pytest.approx(2 * 1e-3 / np.abs(h).sum() ** 2)
