import math

import numpy as np
import pytest
from scipy.integrate import quad

from groupinfer import (
    FlowState, MixtureSpec, ValidationError,
    default_four_mode_mixture, denoise_batch, denoise_step,
    init_candidates, init_latents, make_timesteps, posterior_mean,
)


class TestMixtureSpec:
    def test_validates_weights(self):
        with pytest.raises(ValidationError):
            MixtureSpec(weights=[0.5, 0.6], means=[[0.0], [1.0]], sigma=1.0)
        with pytest.raises(ValidationError):
            MixtureSpec(weights=[1.0, 0.0], means=[[0.0], [1.0]], sigma=1.0)
        with pytest.raises(ValidationError):
            MixtureSpec(weights=[1.0], means=[[0.0]], sigma=0.0)

    def test_log_density_matches_direct_summation(self):
        # The oracle is the naive density sum, evaluated without logsumexp.
        rng = np.random.default_rng(0)
        cond = MixtureSpec(weights=[0.2, 0.5, 0.3],
                           means=[[0.0, 0.0], [3.0, -1.0], [-2.0, 2.0]], sigma=0.7)
        pts = rng.normal(0.0, 2.0, (40, 2))
        direct = np.zeros(40)
        for w, mu in zip(cond.weights, cond.means):
            sq = np.sum((pts - mu) ** 2, axis=1)
            direct += w * np.exp(-sq / (2 * 0.7 ** 2)) / (2 * math.pi * 0.7 ** 2)
        assert np.allclose(cond.log_density(pts), np.log(direct), rtol=1e-9, atol=1e-12)

    def test_log_density_at_mean_single_component(self):
        cond = MixtureSpec(weights=[1.0], means=[[1.5, -2.0]], sigma=1.0)
        # density at the mean of an isotropic 2-d unit Gaussian: 1 / (2 pi)
        val = cond.log_density(np.array([[1.5, -2.0]]))[0]
        assert val == pytest.approx(-math.log(2 * math.pi), abs=1e-12)

    def test_hand_computed_point(self):
        # Two 1-d components: w = (0.4, 0.6), mu = (-1, 2), sigma = 0.5, x = 0.
        # p = 0.4 * N(0; -1, 0.25) + 0.6 * N(0; 2, 0.25)
        cond = MixtureSpec(weights=[0.4, 0.6], means=[[-1.0], [2.0]], sigma=0.5)
        comp1 = 0.4 * math.exp(-1.0 / 0.5) / math.sqrt(2 * math.pi * 0.25)
        comp2 = 0.6 * math.exp(-4.0 / 0.5) / math.sqrt(2 * math.pi * 0.25)
        assert cond.log_density(np.array([[0.0]]))[0] == pytest.approx(
            math.log(comp1 + comp2), rel=1e-12)

    def test_loglik_peaks_at_modes_for_separated_components(self):
        cond = default_four_mode_mixture()
        at_mode = cond.log_density(cond.means)
        midpoint = 0.5 * (cond.means[0] + cond.means[1])
        at_mid = cond.log_density(midpoint[None, :])
        assert np.all(at_mode > at_mid)

    def test_nearest_mode_ties_to_lowest_index(self):
        cond = MixtureSpec(weights=[0.5, 0.5], means=[[-1.0], [1.0]], sigma=1.0)
        assert cond.nearest_mode(np.array([[0.0]]))[0] == 0


class TestInitCandidates:
    def test_deterministic_per_seed_and_index(self):
        a = init_latents(123, 8, 3)
        b = init_latents(123, 8, 3)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, init_latents(124, 8, 3))

    def test_prefix_stability(self):
        small = init_latents(5, 4, 2)
        large = init_latents(5, 8, 2)
        assert np.array_equal(small, large[:4])

    def test_states_wrap_latents(self):
        states = init_candidates(9, 5, 2)
        latents = init_latents(9, 5, 2)
        for i, st in enumerate(states):
            assert st.t == 1.0
            assert st.candidate_id == i
            assert np.array_equal(st.x, latents[i])

    def test_sample_moments(self):
        lat = init_latents(0, 100_000, 2)
        assert np.all(np.abs(lat.mean(axis=0)) < 0.02)
        assert np.all(np.abs(lat.std(axis=0) - 1.0) < 0.02)
        assert abs(np.corrcoef(lat.T)[0, 1]) < 0.02

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValidationError):
            init_latents(0, 0, 2)
        with pytest.raises(ValidationError):
            init_latents(0, 4, 0)


class TestPosteriorMean:
    def test_frozen_one_dimensional_value(self):
        # mu=2, sigma=1, t=0.5, x=1: ((0.5)(1)(1) + (0.25)(2)) / (0.25 + 0.25) = 2.0
        cond = MixtureSpec(weights=[1.0], means=[[2.0]], sigma=1.0)
        assert posterior_mean(np.array([1.0]), 0.5, cond)[0] == 2.0

    def test_quadrature_oracle_single_component(self):
        cond = MixtureSpec(weights=[1.0], means=[[1.2]], sigma=0.8)
        for t, x in [(0.3, 0.5), (0.7, -1.0), (0.95, 2.0)]:
            def integrand(x0, moment):
                prior = math.exp(-((x0 - 1.2) ** 2) / (2 * 0.8 ** 2))
                lik = math.exp(-((x - (1 - t) * x0) ** 2) / (2 * t ** 2))
                return x0 ** moment * prior * lik
            num = quad(lambda v: integrand(v, 1), -20, 20, limit=200)[0]
            den = quad(lambda v: integrand(v, 0), -20, 20, limit=200)[0]
            got = posterior_mean(np.array([x]), t, cond)[0]
            assert got == pytest.approx(num / den, rel=1e-7)

    def test_quadrature_oracle_two_component_mixture(self):
        w = [0.35, 0.65]
        mus = [-2.0, 3.0]
        sigma = 0.5
        cond = MixtureSpec(weights=w, means=[[mus[0]], [mus[1]]], sigma=sigma)
        for t, x in [(0.4, 0.3), (0.8, -0.7), (0.99, 1.5)]:
            def integrand(x0, moment):
                prior = sum(
                    wi * math.exp(-((x0 - mi) ** 2) / (2 * sigma ** 2)) for wi, mi in zip(w, mus)
                )
                lik = math.exp(-((x - (1 - t) * x0) ** 2) / (2 * t ** 2))
                return x0 ** moment * prior * lik
            num = quad(lambda v: integrand(v, 1), -25, 25, limit=200)[0]
            den = quad(lambda v: integrand(v, 0), -25, 25, limit=200)[0]
            got = posterior_mean(np.array([x]), t, cond)[0]
            assert got == pytest.approx(num / den, rel=1e-7)

    def test_pure_noise_time_symmetric_mixture(self):
        cond = MixtureSpec(weights=[0.5, 0.5], means=[[3.0, 0.0], [-3.0, 0.0]], sigma=1.0)
        out = posterior_mean(np.zeros(2), 1.0, cond)
        assert np.array_equal(out, np.zeros(2))

    def test_small_time_limit_returns_state(self):
        cond = MixtureSpec(weights=[1.0], means=[[4.0, 4.0]], sigma=1.0)
        x = np.array([3.7, 4.2])
        out = posterior_mean(x, 1e-9, cond)
        assert np.allclose(out, x, rtol=1e-6)

    def test_rejects_nonpositive_time(self):
        cond = MixtureSpec(weights=[1.0], means=[[0.0]], sigma=1.0)
        with pytest.raises(ValidationError):
            posterior_mean(np.array([0.0]), 0.0, cond)
        with pytest.raises(ValidationError):
            posterior_mean(np.array([0.0]), -0.5, cond)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(1)
        cond = default_four_mode_mixture()
        pts = rng.normal(0, 3, (16, 2))
        batch = posterior_mean(pts, 0.6, cond)
        for i in range(16):
            assert np.array_equal(batch[i], posterior_mean(pts[i], 0.6, cond))


class TestDenoiseStep:
    def test_final_step_lands_exactly_on_preview(self):
        cond = default_four_mode_mixture()
        state = FlowState(x=np.array([0.3, -0.8]), t=0.05, candidate_id=0)
        out = denoise_step(state, 0.0, cond)
        assert np.array_equal(out.next.x, out.preview)
        assert out.next.t == 0.0

    def test_zero_velocity_keeps_state(self):
        cond = MixtureSpec(weights=[1.0], means=[[0.0, 0.0]], sigma=1.0)
        state = FlowState(x=np.zeros(2), t=0.5, candidate_id=1)
        out = denoise_step(state, 0.25, cond)
        assert np.array_equal(out.next.x, state.x)

    def test_time_strictly_decreases_and_validates(self):
        cond = default_four_mode_mixture()
        state = FlowState(x=np.array([1.0, 1.0]), t=0.5, candidate_id=0)
        out = denoise_step(state, 0.4, cond)
        assert out.next.t < state.t
        with pytest.raises(ValidationError):
            denoise_step(state, 0.5, cond)
        with pytest.raises(ValidationError):
            denoise_step(state, -0.1, cond)

    def test_single_gaussian_amplitude_matches_exact_linear_map(self):
        # The flow is linear for a single Gaussian, so Euler's output is the
        # initial latent times a closed-form product of per-step factors.
        cond = MixtureSpec(weights=[1.0], means=[[0.0, 0.0]], sigma=1.0)
        T = 64
        ts = make_timesteps(T)
        factor = 1.0
        for j in range(T):
            t, tn = float(ts[j]), float(ts[j + 1])
            coef = (1 - t) / ((1 - t) ** 2 + t ** 2)
            factor = factor * coef if tn == 0.0 else factor * (1 + (tn - t) * (1 - coef) / t)
        x = init_latents(123, 10_000, 2)
        start = x.copy()
        for j in range(T):
            _, x = denoise_batch(x, float(ts[j]), float(ts[j + 1]), cond)
        assert np.allclose(x, factor * start, rtol=1e-9, atol=1e-12)
        # Discretization is the only gap to the target law: measured
        # covariance sits on the predicted factor^2 scaling of the identity.
        cov = np.cov(x.T)
        assert np.all(np.abs(np.diag(cov) / factor ** 2 - 1.0) < 0.05)
        assert abs(cov[0, 1]) < 0.05
        assert np.all(np.abs(np.sqrt(np.diag(cov)) - 1.0) < 0.05)

    def test_fine_grid_converges_to_target_covariance(self):
        cond = MixtureSpec(weights=[1.0], means=[[0.0, 0.0]], sigma=1.0)
        T = 512
        ts = make_timesteps(T)
        x = init_latents(7, 10_000, 2)
        for j in range(T):
            _, x = denoise_batch(x, float(ts[j]), float(ts[j + 1]), cond)
        cov = np.cov(x.T)
        assert np.all(np.abs(np.diag(cov) - 1.0) < 0.05)
        assert abs(cov[0, 1]) < 0.05

    def test_mode_occupancy_matches_weights(self):
        cond = default_four_mode_mixture()
        ts = make_timesteps(20)
        x = init_latents(7, 10_000, 2)
        for j in range(20):
            _, x = denoise_batch(x, float(ts[j]), float(ts[j + 1]), cond)
        counts = np.bincount(cond.nearest_mode(x), minlength=4)
        bound = 3 * math.sqrt(0.25 * 0.75 * 10_000)
        assert np.all(np.abs(counts - 2500) < bound)

    def test_mode_occupancy_asymmetric_weights(self):
        cond = MixtureSpec(weights=[0.3, 0.7], means=[[-8.0], [8.0]], sigma=1.0)
        ts = make_timesteps(64)
        x = init_latents(11, 10_000, 1)
        for j in range(64):
            _, x = denoise_batch(x, float(ts[j]), float(ts[j + 1]), cond)
        counts = np.bincount(cond.nearest_mode(x), minlength=2)
        bound = 3 * math.sqrt(0.3 * 0.7 * 10_000)
        assert abs(counts[0] - 3000) < bound
        assert abs(counts[1] - 7000) < bound


class TestTimesteps:
    def test_single_step(self):
        assert np.array_equal(make_timesteps(1), [1.0, 0.0])

    def test_four_steps_exact(self):
        assert np.array_equal(make_timesteps(4), [1.0, 0.75, 0.5, 0.25, 0.0])

    def test_strictly_decreasing_with_exact_endpoints(self):
        for t_total in (1, 3, 20, 97):
            ts = make_timesteps(t_total)
            assert ts[0] == 1.0 and ts[-1] == 0.0
            assert len(ts) == t_total + 1
            assert np.all(np.diff(ts) < 0)

    def test_validates(self):
        with pytest.raises(ValidationError):
            make_timesteps(0)


class TestPreviewConvergence:
    def test_last_preview_equals_final_sample(self):
        cond = default_four_mode_mixture()
        ts = make_timesteps(12)
        x = init_latents(3, 32, 2)
        previews = None
        for j in range(12):
            previews, x = denoise_batch(x, float(ts[j]), float(ts[j + 1]), cond)
        assert np.array_equal(previews, x)

    def test_preview_final_rank_correlation_grows(self):
        from groupinfer import ScoreSpec, spearman, unary_scores
        cond = default_four_mode_mixture()
        spec = ScoreSpec()
        ts = make_timesteps(20)
        x = init_latents(0, 256, 2)
        per_step = []
        for j in range(20):
            previews, x = denoise_batch(x, float(ts[j]), float(ts[j + 1]), cond)
            per_step.append(unary_scores(previews, cond, spec))
        finals = per_step[-1]
        corr = [spearman(per_step[j], finals) for j in range(20)]
        assert corr[0] is None  # pure-noise previews are all identical
        defined = [c for c in corr if c is not None]
        assert all(c > 0.9 for c in defined[-5:])
        assert defined[-1] > defined[0]
        # non-decreasing up to noise
        assert all(b >= a - 0.05 for a, b in zip(defined, defined[1:]))
