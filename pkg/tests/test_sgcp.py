import numpy as np
import pytest
from scipy import stats

from porbnet import sgcp
from porbnet.gp import GPHyper, chol_with_jitter, sample_prior, se_kernel
from porbnet.intensity import sigmoid

GPH = GPHyper(kernel_variance=1.0, kernel_lengthscale=1.0)
REGION = (0.0, 4.0)


def fresh_state(lambda_star=3.0, centers=(), seed=0, gph=GPH):
    rng = np.random.default_rng(seed)
    return sgcp.initial_sgcp_state(lambda_star, REGION, gph, np.asarray(centers, dtype=float), rng)


class TestThinnedEvents:
    def test_flat_h_gives_poisson_half_mass(self):
        # with h pinned near zero (tiny kernel variance) every sigmoid factor
        # is 1/2, so the thinned count is Poisson(lambda* |C| / 2)
        gph = GPHyper(kernel_variance=1e-12, kernel_lengthscale=1.0)
        lam_star = 3.0
        st = sgcp.SGCPState(lam_star, REGION, np.array([1.0]), np.zeros(1), np.zeros(0), np.zeros(0), gph)
        rng = np.random.default_rng(1)
        ms = []
        for i in range(3000):
            st = sgcp.update_thinned_events(st, np.zeros(0), rng, n_birth_death=5, pert_scale=0.5)
            if i >= 300 and i % 3 == 0:
                ms.append(st.n_thinned)
        ms = np.array(ms)
        mean_target = lam_star * (REGION[1] - REGION[0]) / 2.0
        observed = np.bincount(ms).astype(float)
        expected = stats.poisson.pmf(np.arange(observed.size), mean_target) * ms.size
        expected[-1] += (1 - stats.poisson.cdf(observed.size - 1, mean_target)) * ms.size
        while expected.size > 2 and expected[-1] < 5:
            expected[-2] += expected[-1]
            observed[-2] += observed[-1]
            expected, observed = expected[:-1], observed[:-1]
        while expected.size > 2 and expected[0] < 5:
            expected[1] += expected[0]
            observed[1] += observed[0]
            expected, observed = expected[1:], observed[1:]
        assert stats.chisquare(observed, expected).pvalue > 0.01

    def test_tiny_bound_empties_thinned_set(self):
        st = fresh_state(lambda_star=3.0, seed=2)
        st = sgcp.SGCPState(1e-6, REGION, st.thinned, st.h_thinned, st.center_locations, st.h_centers, GPH)
        rng = np.random.default_rng(3)
        for _ in range(60):
            st = sgcp.update_thinned_events(st, st.center_locations, rng, n_birth_death=5)
        assert st.n_thinned == 0

    def test_locations_stay_inside_region(self):
        st = fresh_state(seed=4)
        rng = np.random.default_rng(5)
        for _ in range(30):
            st = sgcp.update_thinned_events(st, st.center_locations, rng, pert_scale=50.0)
            if st.n_thinned:
                assert st.thinned.min() >= REGION[0]
                assert st.thinned.max() <= REGION[1]


class TestUpdateH:
    def test_data_free_reproduces_gp_prior_variance(self):
        st = sgcp.SGCPState(3.0, REGION, np.array([1.0, 2.0, 3.0]), np.zeros(3), np.zeros(0), np.zeros(0), GPH)
        rng = np.random.default_rng(6)
        vals = []
        for i in range(12_000):
            st = sgcp.update_h(st, np.zeros(0), True, rng, step_size=0.4, n_leapfrog=8)
            if i >= 1000:
                vals.append(st.h_thinned[0])
        var = np.array(vals).var()
        assert abs(var - GPH.kernel_variance) < 0.08

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        support = np.sort(rng.uniform(*REGION, size=6))
        chol = chol_with_jitter(se_kernel(support, support, GPH), GPH.kernel_variance)
        nu0 = rng.standard_normal(6)
        for n_thin in (0, 3, 6):
            _, grad = sgcp.h_target_and_grad(nu0, chol, n_thin)
            fd = np.zeros(6)
            for i in range(6):
                up, dn = nu0.copy(), nu0.copy()
                up[i] += 1e-5
                dn[i] -= 1e-5
                fd[i] = (
                    sgcp.h_target_and_grad(up, chol, n_thin)[0]
                    - sgcp.h_target_and_grad(dn, chol, n_thin)[0]
                ) / 2e-5
            assert np.allclose(grad, fd, rtol=1e-4, atol=1e-8)

    def test_clustered_centers_push_h_positive(self):
        centers = np.full(8, 2.0)
        st = fresh_state(centers=centers, seed=8)
        st = sgcp.SGCPState(3.0, REGION, np.zeros(0), np.zeros(0), centers, np.zeros(8), GPH)
        rng = np.random.default_rng(9)
        means = []
        for i in range(600):
            st = sgcp.update_h(st, centers, False, rng, step_size=0.3, n_leapfrog=10)
            if i >= 100:
                means.append(st.h_centers.mean())
        assert np.mean(means) > 0.5

    def test_empty_support_is_noop(self):
        st = sgcp.SGCPState(3.0, REGION, np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0), GPH)
        out = sgcp.update_h(st, np.zeros(0), False, np.random.default_rng(0))
        assert out.n_thinned == 0 and out.h_centers.size == 0


class TestBookkeeping:
    def test_support_length_tracks_m_plus_k(self):
        st = fresh_state(centers=[1.0, 2.5], seed=10)
        rng = np.random.default_rng(11)
        centers = st.center_locations
        for _ in range(20):
            st = sgcp.update_thinned_events(st, centers, rng, n_birth_death=3)
            st = sgcp.update_h(st, centers, False, rng)
            assert st.h_support.size == st.n_thinned + centers.size
        st2, _ = sgcp.birth_center(st, 3.3, rng)
        assert st2.h_support.size == st.h_support.size + 1
        st3 = sgcp.death_center(st2, 0)
        assert st3.h_support.size == st.h_support.size

    def test_state_validation(self):
        with pytest.raises(ValueError):
            sgcp.SGCPState(0.0, REGION, np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0), GPH)
        with pytest.raises(ValueError):
            sgcp.SGCPState(1.0, REGION, np.array([1.0]), np.zeros(2), np.zeros(0), np.zeros(0), GPH)
        with pytest.raises(ValueError):
            sgcp.SGCPState(1.0, REGION, np.array([9.0]), np.zeros(1), np.zeros(0), np.zeros(0), GPH)


class TestIntensityPointEstimate:
    def test_flat_zero_h_gives_half_bound(self):
        snaps = [sgcp.HSnapshot(np.array([1.0, 2.0, 3.0]), np.zeros(3))]
        fn = sgcp.intensity_point_estimate(snaps, 4.0, np.linspace(*REGION, 11), GPH)
        assert np.allclose(fn.values, 2.0, atol=1e-12)

    def test_saturated_h_approaches_bound_near_support(self):
        locs = np.linspace(0.2, 3.8, 15)
        snaps = [sgcp.HSnapshot(locs, np.full(15, 30.0))]
        fn = sgcp.intensity_point_estimate(snaps, 4.0, locs, GPH)
        assert np.all(fn.values > 0.999 * 4.0)
        assert np.all(fn.values < 4.0)

    def test_symmetric_mixture_averages_to_half(self):
        locs = np.array([1.0, 2.0, 3.0])
        snaps = [sgcp.HSnapshot(locs, np.full(3, 1.7)), sgcp.HSnapshot(locs, np.full(3, -1.7))]
        fn = sgcp.intensity_point_estimate(snaps, 4.0, np.linspace(*REGION, 21), GPH)
        assert np.allclose(fn.values, 2.0, atol=1e-9)

    def test_bounded_strictly_inside_zero_and_bound(self):
        rng = np.random.default_rng(12)
        locs = np.sort(rng.uniform(*REGION, 10))
        snaps = [sgcp.HSnapshot(locs, rng.normal(size=10) * 3) for _ in range(5)]
        fn = sgcp.intensity_point_estimate(snaps, 4.0, np.linspace(*REGION, 100), GPH)
        assert np.all(fn.values > 0.0)
        assert np.all(fn.values < 4.0)

    def test_empty_snapshot_list_rejected(self):
        with pytest.raises(ValueError):
            sgcp.intensity_point_estimate([], 4.0, np.linspace(*REGION, 5), GPH)


class TestPriorReproduction:
    def test_geweke_marginal_of_thinned_count(self):
        # successive-conditional sweep (thinned moves, h update, center
        # resampling) must reproduce the marginal the direct thinning
        # sampler draws
        lam_star = 3.0
        rng = np.random.default_rng(13)
        st = fresh_state(lambda_star=lam_star, centers=[1.0, 2.5], seed=13)
        centers = st.center_locations
        ms = []
        for i in range(1400):
            st = sgcp.update_thinned_events(st, centers, rng, n_birth_death=10)
            st = sgcp.update_h(st, centers, False, rng)
            centers, st = sgcp.resample_centers_from_sgcp(st, rng)
            if i >= 200 and i % 4 == 0:
                ms.append(st.n_thinned)

        def direct_thinned_count(rng):
            n = rng.poisson(lam_star * (REGION[1] - REGION[0]))
            cand = rng.uniform(*REGION, size=n)
            h = sample_prior(cand, GPH, rng)
            return int(np.sum(rng.uniform(size=n) >= sigmoid(h)))

        direct = np.array([direct_thinned_count(rng) for _ in range(2000)])
        p = stats.ks_2samp(np.array(ms), direct).pvalue
        assert p > 0.01
