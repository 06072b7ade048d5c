import numpy as np
import pytest
from scipy.integrate import quad

from porbnet.intensity import GridIntensity, HomogeneousIntensity, PiecewiseLinearFn
from porbnet.kernels import (
    cov_asymptotic,
    cov_homogeneous,
    cov_williams,
    empirical_cov,
    sample_prior_functions,
    variogram,
)
from porbnet.network import Hyperparams

HYPER = Hyperparams(region=(-5.0, 5.0))


def quad_cov(x1, x2, hyper, lam):
    """Independent quadrature oracle: bias variance plus the weight-variance
    times the intensity-weighted basis-product integral."""
    s2 = hyper.s0_sq * lam**2

    def integrand(c):
        return lam * np.exp(-0.5 * s2 * ((x1 - c) ** 2 + (x2 - c) ** 2))

    val, _ = quad(integrand, hyper.region[0], hyper.region[1], limit=400)
    return hyper.sigma_b_sq + hyper.weight_prior_var * val


class TestCovHomogeneous:
    def test_diagonal_value_large_region(self):
        # bracket term is 1 - 2*Phi(-5*sqrt(2)) ~ 1 - 1.5e-12
        val = cov_homogeneous(0.0, 0.0, HYPER, 1.0)
        assert val == pytest.approx(2.0, abs=1e-9)

    def test_matches_quadrature_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            x1, x2 = rng.uniform(-4.5, 4.5, size=2)
            lam = rng.uniform(0.5, 3.0)
            assert cov_homogeneous(x1, x2, HYPER, lam) == pytest.approx(
                quad_cov(x1, x2, HYPER, lam), rel=1e-9
            )

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x1, x2 = rng.uniform(-4, 4, size=2)
            assert cov_homogeneous(x1, x2, HYPER, 1.0) == cov_homogeneous(x2, x1, HYPER, 1.0)

    def test_large_separation_leaves_bias_variance(self):
        wide = Hyperparams(region=(-500.0, 500.0))
        assert cov_homogeneous(-200.0, 200.0, wide, 1.0) == pytest.approx(wide.sigma_b_sq, abs=1e-12)


class TestCovAsymptotic:
    def test_diagonal_is_amplitude_variance(self):
        h = Hyperparams(sigma_w_sq=2.5, sigma_b_sq=0.7)
        assert cov_asymptotic(1.3, 1.3, h, 2.0) == pytest.approx(3.2)

    def test_agrees_with_exact_away_from_boundaries(self):
        # midpoint at least 5/(s0 lam sqrt(2)) from both edges -> |bracket - 1| < 1e-6
        rng = np.random.default_rng(2)
        for _ in range(20):
            lam = rng.uniform(1.0, 2.0)
            margin = 5.0 / (np.sqrt(HYPER.s0_sq) * lam * np.sqrt(2.0))
            xm = rng.uniform(HYPER.region[0] + margin, HYPER.region[1] - margin)
            d = rng.uniform(0.0, 1.0)
            a = cov_homogeneous(xm - d / 2, xm + d / 2, HYPER, lam)
            b = cov_asymptotic(xm - d / 2, xm + d / 2, HYPER, lam)
            assert abs(a - b) < 1e-6

    def test_diagonal_invariant_to_level(self):
        for x in [-3.0, 0.0, 2.5]:
            assert cov_asymptotic(x, x, HYPER, 1.0) == cov_asymptotic(x, x, HYPER, 2.0)
            assert cov_asymptotic(x, x, HYPER, 1.0) == cov_asymptotic(x, x, HYPER, 4.0)

    def test_stationary_under_translation(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x1, x2, delta = rng.uniform(-3, 3, size=3)
            assert cov_asymptotic(x1 + delta, x2 + delta, HYPER, 1.5) == pytest.approx(
                cov_asymptotic(x1, x2, HYPER, 1.5), rel=1e-12
            )

    def test_exact_converges_as_region_grows(self):
        pairs = [(0.0, 0.0), (0.0, 1.0), (-2.0, 1.5), (2.5, 3.0)]
        errs = []
        for hw in [5.0, 10.0, 20.0, 40.0]:
            h = Hyperparams(region=(-hw, hw))
            errs.append(
                max(abs(cov_homogeneous(a, b, h, 1.0) - cov_asymptotic(a, b, h, 1.0)) for a, b in pairs)
            )
        assert all(e2 <= e1 for e1, e2 in zip(errs, errs[1:]))
        assert errs[-1] < 1e-12


class TestCovWilliams:
    def test_at_origin_returns_amplitude(self):
        assert cov_williams(0.0, 0.0, 1.0, 0.5, amplitude=2.3) == pytest.approx(2.3)

    def test_diagonal_decays_away_from_origin(self):
        vals = [cov_williams(t, t, 1.0, 0.5) for t in [0.0, 1.0, 2.0]]
        assert vals[0] > vals[1] > vals[2]
        # diagonal decay rate is exp(-t^2/(2 sigma_c^2 + sigma_s^2))
        assert vals[1] == pytest.approx(np.exp(-1.0 / 2.5), rel=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            x1, x2 = rng.uniform(-3, 3, size=2)
            assert cov_williams(x1, x2, 1.2, 0.4) == cov_williams(x2, x1, 1.2, 0.4)

    def test_rejects_bad_variances(self):
        with pytest.raises(ValueError):
            cov_williams(0.0, 1.0, 0.0, 1.0)


class TestEmpiricalCov:
    def test_matches_closed_form_within_four_se(self):
        intens = HomogeneousIntensity(1.0, HYPER.region)
        rng = np.random.default_rng(5)
        for x1, x2 in [(0.0, 0.5), (-1.0, 1.0), (2.0, 2.0)]:
            est = empirical_cov(HYPER, intens, x1, x2, 10_000, rng)
            assert abs(est.estimate - cov_homogeneous(x1, x2, HYPER, 1.0)) < 4 * est.std_error

    def test_degenerate_weight_variance_leaves_bias_variance(self):
        h = Hyperparams(sigma_w_sq=1e-12, region=(-5.0, 5.0))
        intens = HomogeneousIntensity(1.0, h.region)
        est = empirical_cov(h, intens, 0.0, 0.0, 5000, np.random.default_rng(6))
        assert abs(est.estimate - h.sigma_b_sq) < 4 * est.std_error

    def test_far_outside_region_only_bias_survives(self):
        intens = HomogeneousIntensity(1.0, HYPER.region)
        est = empirical_cov(HYPER, intens, 80.0, 90.0, 5000, np.random.default_rng(7))
        assert abs(est.estimate - HYPER.sigma_b_sq) < 4 * est.std_error

    def test_rejects_tiny_sample_count(self):
        intens = HomogeneousIntensity(1.0, HYPER.region)
        with pytest.raises(ValueError):
            empirical_cov(HYPER, intens, 0.0, 0.0, 1, np.random.default_rng(0))


class TestVariogram:
    def test_zero_gap_row_is_variance_curve(self):
        intens = HomogeneousIntensity(1.0, HYPER.region)
        grid = np.linspace(-4, 4, 9)
        rows = variogram(HYPER, intens, [0.0], grid)
        for r in rows:
            assert r["cov"] == pytest.approx(cov_homogeneous(r["x"], r["x"], HYPER, 1.0), rel=1e-12)

    def test_interior_rows_nearly_flat(self):
        # exact closed-form evaluation: coefficient of variation over
        # x in [-4, 4] is 1.016% at gap 0, 0.889% at gap 1, 0.545% at gap 2
        intens = HomogeneousIntensity(1.0, HYPER.region)
        grid = np.linspace(-4, 4, 33)
        for gap, bound in [(0.0, 0.0105), (1.0, 0.01), (2.0, 0.01)]:
            vals = np.array([r["cov"] for r in variogram(HYPER, intens, [gap], grid)])
            assert vals.std() / vals.mean() < bound
        # deep interior is flat an order of magnitude tighter
        inner = np.linspace(-3, 3, 25)
        vals = np.array([r["cov"] for r in variogram(HYPER, intens, [0.0], inner)])
        assert (vals.max() - vals.min()) / vals.mean() < 0.0015

    def test_cov_decreases_with_gap(self):
        intens = HomogeneousIntensity(1.0, HYPER.region)
        grid = np.linspace(-3, 3, 7)
        by_gap = {
            gap: [r["cov"] for r in variogram(HYPER, intens, [gap], grid)] for gap in [0.0, 0.5, 1.5, 3.0]
        }
        for x_idx in range(len(grid)):
            seq = [by_gap[g][x_idx] for g in [0.0, 0.5, 1.5, 3.0]]
            assert all(a > b for a, b in zip(seq, seq[1:]))

    def test_nonconstant_intensity_uses_monte_carlo(self):
        knots = np.linspace(-5, 5, 51)
        intens = GridIntensity(PiecewiseLinearFn(knots, 1.0 + 0.5 * np.abs(np.sin(knots))), HYPER.region)
        rows = variogram(HYPER, intens, [0.0], [0.0, 1.0], n_samples=500, rng=np.random.default_rng(8))
        assert all(r["source"] == "mc" and r["std_error"] > 0 for r in rows)


class TestPositiveSemidefinite:
    @pytest.mark.parametrize("seed", range(5))
    def test_gram_matrices_psd_on_random_grids(self, seed):
        rng = np.random.default_rng(seed)
        xs = np.sort(rng.uniform(-4, 4, size=8))
        for cov_fn in (
            lambda a, b: cov_homogeneous(a, b, HYPER, 1.3),
            lambda a, b: cov_asymptotic(a, b, HYPER, 0.8),
            lambda a, b: cov_williams(a, b, 1.0, 0.5),
        ):
            gram = np.array([[cov_fn(a, b) for b in xs] for a in xs])
            assert np.min(np.linalg.eigvalsh(gram)) >= -1e-8


class TestNonhomogeneousHeuristic:
    def test_variance_nearly_stationary_under_scale_tie(self):
        # quadrature oracle puts the interior variance within 3.1% of
        # sigma_b^2 + sigma_w^2 for this smooth intensity; Monte Carlo agrees
        knots = np.linspace(-5, 5, 201)
        fn = PiecewiseLinearFn(knots, 1.5 + 0.5 * np.sin(np.pi * knots / 5.0))
        intens = GridIntensity(fn, HYPER.region)
        xs = np.linspace(-3.5, 3.5, 8)

        def var_quad(x):
            integrand = lambda c: fn(c) * np.exp(-HYPER.s0_sq * fn(c) ** 2 * (x - c) ** 2)
            val, _ = quad(integrand, -5, 5, limit=400)
            return HYPER.sigma_b_sq + HYPER.weight_prior_var * val

        target = HYPER.sigma_b_sq + HYPER.sigma_w_sq
        vq = np.array([var_quad(x) for x in xs])
        assert np.all(np.abs(vq - target) / target < 0.10)

        f = sample_prior_functions(HYPER, intens, xs, 20_000, np.random.default_rng(9))
        ve = f.var(axis=0, ddof=1)
        assert np.all(np.abs(ve - target) / target < 0.10)


class TestSamplePriorFunctions:
    def test_matches_per_network_sampling(self):
        # dual route: the vectorized sampler and one-at-a-time prior draws
        # must produce statistically identical pointwise variance
        from porbnet.intensity import sample_prior_network
        from porbnet.network import forward

        intens = HomogeneousIntensity(1.0, HYPER.region)
        grid = np.array([-1.0, 0.0, 2.0])
        f_fast = sample_prior_functions(HYPER, intens, grid, 4000, np.random.default_rng(10))
        rng = np.random.default_rng(11)
        f_slow = np.stack([forward(sample_prior_network(HYPER, intens, rng), grid) for _ in range(4000)])
        v1, v2 = f_fast.var(axis=0), f_slow.var(axis=0)
        se = np.sqrt(2.0 / 4000) * (v1 + v2) / 2 * np.sqrt(2)
        assert np.all(np.abs(v1 - v2) < 5 * se)
