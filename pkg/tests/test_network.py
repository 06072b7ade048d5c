import numpy as np
import pytest

from porbnet.intensity import (
    GridIntensity,
    HomogeneousIntensity,
    PiecewiseLinearFn,
    scales_from_intensity,
)
from porbnet.network import (
    Hyperparams,
    NetworkState,
    forward,
    grad_log_posterior,
    log_full_conditional,
    log_likelihood,
)

HYPER = Hyperparams(region=(-5.0, 5.0), noise_var=0.01)


def make_state(bias, weights, centers, scales):
    return NetworkState(
        bias=bias,
        weights=np.asarray(weights, dtype=float),
        centers=np.asarray(centers, dtype=float),
        scales=np.asarray(scales, dtype=float),
    )


class TestForward:
    def test_empty_network_returns_bias(self):
        st = make_state(0.5, [], [], [])
        assert forward(st, 3.0) == 0.5

    def test_unit_at_its_center(self):
        st = make_state(0.0, [1.0], [0.0], [1.0])
        assert forward(st, 0.0) == pytest.approx(1.0)

    def test_single_unit_off_center(self):
        # hand evaluation: w * exp(-0.5 * s2 * (x-c)^2) = 2 * exp(-0.5)
        st = make_state(0.0, [2.0], [0.0], [1.0])
        assert forward(st, 1.0) == pytest.approx(2.0 * np.exp(-0.5), rel=1e-12)

    def test_translation_covariance(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            k = rng.integers(1, 6)
            st = make_state(rng.normal(), rng.normal(size=k), rng.uniform(-3, 3, k), rng.uniform(0.2, 3, k))
            x = rng.uniform(-3, 3)
            delta = rng.normal()
            shifted = make_state(st.bias, st.weights, st.centers + delta, st.scales)
            assert forward(shifted, x + delta) == pytest.approx(forward(st, x), rel=1e-12)

    def test_weight_scaling_scales_output_minus_bias(self):
        rng = np.random.default_rng(1)
        st = make_state(0.7, rng.normal(size=4), rng.uniform(-2, 2, 4), rng.uniform(0.5, 2, 4))
        alpha = 3.5
        scaled = make_state(st.bias, alpha * st.weights, st.centers, st.scales)
        for x in [-1.0, 0.3, 2.2]:
            assert forward(scaled, x) - st.bias == pytest.approx(alpha * (forward(st, x) - st.bias), rel=1e-12)

    def test_vectorized_matches_scalar(self):
        st = make_state(0.1, [1.0, -0.5], [0.0, 1.0], [1.0, 4.0])
        xs = np.linspace(-2, 2, 11)
        vec = forward(st, xs)
        assert np.allclose(vec, [forward(st, float(x)) for x in xs])


class TestLogLikelihood:
    def test_empty_dataset(self):
        st = make_state(0.0, [], [], [])
        assert log_likelihood(st, [], [], 1.0) == 0.0

    def test_density_one_at_mode(self):
        st = make_state(0.5, [], [], [])
        # variance 1/(2pi) makes the normal density at its mode equal 1
        assert log_likelihood(st, [3.0], [0.5], 1.0 / (2 * np.pi)) == pytest.approx(0.0, abs=1e-12)

    def test_unit_residual(self):
        st = make_state(0.0, [], [], [])
        expected = -0.5 * np.log(2 * np.pi) - 0.5  # = -1.4189385332046727
        assert log_likelihood(st, [0.0], [1.0], 1.0) == pytest.approx(expected, rel=1e-12)

    def test_maximized_at_zero_residual(self):
        st = make_state(0.0, [1.0], [0.0], [1.0])
        x = np.array([0.3])
        at_mode = log_likelihood(st, x, forward(st, x), 0.5)
        for r in [-0.5, -0.1, 0.2, 1.0]:
            assert log_likelihood(st, x, forward(st, x) + r, 0.5) < at_mode

    def test_rejects_bad_noise(self):
        st = make_state(0.0, [], [], [])
        with pytest.raises(ValueError):
            log_likelihood(st, [0.0], [0.0], 0.0)


def fd_gradient(state, x, y, hyper, intensity, eps=1e-5):
    k = state.width

    def target(q):
        centers = q[1 + k :]
        st = NetworkState(
            bias=q[0],
            weights=q[1 : 1 + k],
            centers=centers,
            scales=scales_from_intensity(centers, hyper, intensity),
        )
        return log_full_conditional(st, x, y, hyper, intensity)

    q0 = np.concatenate([[state.bias], state.weights, state.centers])
    out = np.zeros_like(q0)
    for i in range(q0.size):
        up, dn = q0.copy(), q0.copy()
        up[i] += eps
        dn[i] -= eps
        out[i] = (target(up) - target(dn)) / (2 * eps)
    return out


def random_state(rng, hyper, intensity, k=None):
    if k is None:
        k = int(rng.integers(0, 9))
    centers = rng.uniform(hyper.region[0] + 0.3, hyper.region[1] - 0.3, size=k)
    return NetworkState(
        bias=rng.normal(),
        weights=rng.normal(size=k),
        centers=centers,
        scales=scales_from_intensity(centers, hyper, intensity),
    )


class TestGradLogPosterior:
    def test_prior_only_gradient_for_empty_network(self):
        st = make_state(0.8, [], [], [])
        intensity = HomogeneousIntensity(1.0, HYPER.region)
        db, dw, dc = grad_log_posterior(st, [], [], HYPER, intensity)
        assert db == pytest.approx(-0.8 / HYPER.sigma_b_sq)
        assert dw.size == 0 and dc.size == 0

    def test_constant_intensity_has_no_center_prior_force(self):
        intensity = HomogeneousIntensity(2.0, HYPER.region)
        st = make_state(0.0, [1.0], [0.5], scales_from_intensity([0.5], HYPER, intensity))
        _, _, dc = grad_log_posterior(st, [], [], HYPER, intensity)
        assert dc[0] == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_finite_differences_homogeneous(self, seed):
        rng = np.random.default_rng(seed)
        intensity = HomogeneousIntensity(1.0, HYPER.region)
        st = random_state(rng, HYPER, intensity)
        x = rng.uniform(-4, 4, size=7)
        y = rng.normal(size=7)
        db, dw, dc = grad_log_posterior(st, x, y, HYPER, intensity)
        got = np.concatenate([[db], dw, dc])
        want = fd_gradient(st, x, y, HYPER, intensity)
        assert np.allclose(got, want, rtol=1e-4, atol=1e-7)

    @pytest.mark.parametrize("seed", range(12, 24))
    def test_matches_finite_differences_varying_intensity(self, seed):
        rng = np.random.default_rng(seed)
        knots = np.linspace(-5, 5, 101)
        fn = PiecewiseLinearFn(knots, 1.5 + 0.7 * np.sin(knots))
        intensity = GridIntensity(fn, HYPER.region)
        st = random_state(rng, HYPER, intensity)
        x = rng.uniform(-4, 4, size=6)
        y = rng.normal(size=6)
        db, dw, dc = grad_log_posterior(st, x, y, HYPER, intensity)
        got = np.concatenate([[db], dw, dc])
        want = fd_gradient(st, x, y, HYPER, intensity)
        assert np.allclose(got, want, rtol=1e-4, atol=1e-7)

    def test_boundary_center_uses_one_sided_interpolation(self):
        knots = np.linspace(-5, 5, 11)
        fn = PiecewiseLinearFn(knots, np.linspace(1.0, 2.0, 11))
        intensity = GridIntensity(fn, HYPER.region)
        st = make_state(0.0, [1.0], [-5.0], scales_from_intensity([-5.0], HYPER, intensity))
        db, dw, dc = grad_log_posterior(st, [0.0], [0.5], HYPER, intensity)
        assert np.all(np.isfinite([db, dw[0], dc[0]]))
        # the log-intensity slope at the left edge is the first segment's
        assert intensity.dlog_value(-5.0) == pytest.approx(fn.derivative(-5.0) / fn(-5.0))


class TestTypes:
    def test_state_requires_matching_lengths(self):
        with pytest.raises(ValueError):
            make_state(0.0, [1.0], [0.0, 1.0], [1.0])

    def test_validate_flags_bad_scales_and_centers(self):
        st = make_state(0.0, [1.0], [0.0], [-1.0])
        with pytest.raises(ValueError):
            st.validate((-5.0, 5.0))
        st2 = make_state(0.0, [1.0], [9.0], [1.0])
        with pytest.raises(ValueError):
            st2.validate((-5.0, 5.0))

    def test_hyper_weight_prior_var_identity(self):
        h = Hyperparams(s0_sq=4.0, sigma_w_sq=3.0)
        assert h.weight_prior_var == pytest.approx(np.sqrt(4.0 / np.pi) * 3.0, rel=1e-15)

    def test_hyper_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Hyperparams(s0_sq=0.0)
        with pytest.raises(ValueError):
            Hyperparams(region=(2.0, 2.0))
