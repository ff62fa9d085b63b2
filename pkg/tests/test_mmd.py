import math

import numpy as np
import pytest

from mommd.errors import HyperparameterError, ShapeError
from mommd.kernels import aggregated_gram, kernel_eval, polynomial, rbf
from mommd.linalg import weighted_norm
from mommd.mmd import (
    BoundDiagnostics,
    CoefExpansion,
    Estimator,
    analytic_mmd_gaussian,
    block_objectives,
    combine_diagnostics,
    cov_diagnostics,
    empirical_embedding,
    mmd_ustat,
    mmd_vstat,
    monk_bcd,
    monk_bcd_fast,
    monk_bcd_fast_from_gram,
    monk_mean_embedding,
    rkhs_distance,
    theorem_bound,
)
from mommd.mon import make_partition

QUAD = polynomial(2, 1.0)


def separated_samples(rng, n, kern=None):
    return rng.normal(0.0, 1.0, n), rng.normal(2.0, 1.0, n)


class TestVStat:
    def test_identical_samples_give_zero(self, rng):
        xs = rng.normal(size=8)
        assert mmd_vstat(aggregated_gram(rbf(1.0), xs, xs.copy())).value == 0.0

    def test_single_pair_formula(self):
        expected = math.sqrt(2.0 - 2.0 * math.exp(-0.5))
        got = mmd_vstat(aggregated_gram(rbf(1.0), [0.0], [1.0])).value
        assert got == pytest.approx(expected, abs=1e-12)

    def test_single_pair_polynomial(self):
        got = mmd_vstat(aggregated_gram(QUAD, [0.0], [1.0])).value
        assert got == pytest.approx(math.sqrt(3.0), abs=1e-12)

    def test_symmetry_in_the_two_samples(self, rng):
        xs, ys = separated_samples(rng, 12)
        a = mmd_vstat(aggregated_gram(QUAD, xs, ys)).value
        b = mmd_vstat(aggregated_gram(QUAD, ys, xs)).value
        assert a == pytest.approx(b, rel=1e-12)

    def test_invariance_under_within_sample_permutation(self, rng):
        xs, ys = separated_samples(rng, 10)
        base = mmd_vstat(aggregated_gram(QUAD, xs, ys)).value
        perm = rng.permutation(10)
        shuffled = mmd_vstat(aggregated_gram(QUAD, xs[perm], ys[perm])).value
        assert shuffled == pytest.approx(base, rel=1e-12)


class TestUStat:
    def test_identical_constant_samples_give_zero(self):
        g = aggregated_gram(QUAD, [0.0, 0.0], [0.0, 0.0])
        assert mmd_ustat(g).u_squared == 0.0

    def test_hand_example(self):
        # all pairwise kernel values evaluated one by one
        xs, ys = [0.0, 1.0], [2.0, 3.0]
        off_xx = 2 * kernel_eval(QUAD, xs[0], xs[1])
        off_yy = 2 * kernel_eval(QUAD, ys[0], ys[1])
        cross = sum(kernel_eval(QUAD, a, b) for a in xs for b in ys)
        expected = (off_xx + off_yy) / 2.0 - 2.0 * cross / 4.0
        est = mmd_ustat(aggregated_gram(QUAD, xs, ys))
        assert expected == 36.5
        assert est.u_squared == pytest.approx(expected, abs=1e-12)
        assert est.value == pytest.approx(math.sqrt(36.5), abs=1e-12)

    def test_signed_root_for_negative_u(self, rng):
        xs = rng.normal(size=6)
        est = mmd_ustat(aggregated_gram(rbf(1.0), xs, xs.copy()))
        assert est.u_squared < 0  # removing the diagonal overshoots at MMD = 0
        assert est.value == pytest.approx(-math.sqrt(-est.u_squared), abs=1e-15)

    def test_single_point_rejected(self):
        with pytest.raises(ShapeError):
            mmd_ustat(aggregated_gram(QUAD, [0.0], [1.0]))

    @pytest.mark.parametrize("kern", [QUAD, rbf(1.0)], ids=["quad", "rbf"])
    def test_exhaustive_unbiasedness_on_two_point_distributions(self, kern):
        # Enumerate every size-2 sample drawn with replacement from two-point
        # distributions; the weighted average of u must equal MMD^2 exactly.
        points = [0.0, 1.0]
        p = {0.0: 0.3, 1.0: 0.7}
        q = {0.0: 0.8, 1.0: 0.2}
        mean_u = 0.0
        for x1 in points:
            for x2 in points:
                for y1 in points:
                    for y2 in points:
                        w = p[x1] * p[x2] * q[y1] * q[y2]
                        u = mmd_ustat(aggregated_gram(kern, [x1, x2], [y1, y2])).u_squared
                        mean_u += w * u
        mmd2 = sum(
            (p[a] - q[a]) * (p[b] - q[b]) * kernel_eval(kern, a, b)
            for a in points
            for b in points
        )
        assert mean_u == pytest.approx(mmd2, abs=1e-12)


class TestBlockObjectives:
    def test_zero_coefficients_give_zeros(self, rng):
        xs, ys = separated_samples(rng, 6)
        g = aggregated_gram(QUAD, xs, ys)
        part = make_partition(6, 3, rng=rng)
        assert np.array_equal(block_objectives(g, np.zeros(12), part), np.zeros(3))

    def test_one_point_hand_product(self):
        g = aggregated_gram(QUAD, [0.0], [1.0])
        part = make_partition(1, 1)
        # K = [[1, 1], [1, 4]], c = [1, 0] -> K c = [1, 1], objective = 1 - 1 = 0
        out = block_objectives(g, np.array([1.0, 0.0]), part)
        assert out == pytest.approx([0.0], abs=1e-15)

    def test_single_block_analytic_step_recovers_vstat(self, rng):
        xs, ys = separated_samples(rng, 8)
        g = aggregated_gram(QUAD, xs, ys)
        v = np.concatenate([np.ones(8), -np.ones(8)])
        c = v / weighted_norm(g.chol(), v)
        part = make_partition(8, 1, rng=rng)
        out = block_objectives(g, c, part)
        assert out[0] == pytest.approx(mmd_vstat(g).value, abs=1e-9)

    def test_coef_expansion_wrapper_accepted(self, rng):
        xs, ys = separated_samples(rng, 4)
        g = aggregated_gram(QUAD, xs, ys)
        coef = CoefExpansion(base_x=np.asarray(xs), base_y=np.asarray(ys), c=np.zeros(8))
        part = make_partition(4, 2, rng=rng)
        assert np.array_equal(block_objectives(g, coef, part), np.zeros(2))

    def test_dimension_mismatch_rejected(self, rng):
        xs, ys = separated_samples(rng, 6)
        g = aggregated_gram(QUAD, xs, ys)
        with pytest.raises(ShapeError):
            block_objectives(g, np.zeros(10), make_partition(6, 3))
        with pytest.raises(ShapeError):
            block_objectives(g, np.zeros(12), make_partition(4, 2))


class TestMonkBcd:
    def test_single_block_equals_vstat(self, rng):
        for kern in (rbf(1.0), QUAD):
            for n in (4, 10, 50):
                xs, ys = separated_samples(rng, n)
                g = aggregated_gram(kern, xs, ys)
                est = monk_bcd(g, 1, 50, seed=int(rng.integers(2**31)))
                assert abs(est.value - mmd_vstat(g).value) <= 1e-10

    def test_identical_samples_give_zero_for_every_q(self, rng):
        xs = rng.normal(size=12)
        g = aggregated_gram(rbf(1.0), xs, xs.copy())
        for q in (1, 2, 3, 6):
            assert monk_bcd(g, q, 30, seed=q).value == pytest.approx(0.0, abs=1e-12)

    def test_reported_value_is_attained_by_a_block(self, rng):
        xs, ys = separated_samples(rng, 20)
        est = monk_bcd(aggregated_gram(QUAD, xs, ys), 5, 40, seed=7)
        assert est.value in est.block_values

    def test_deterministic_given_seed(self, rng):
        xs, ys = separated_samples(rng, 12)
        g = aggregated_gram(QUAD, xs, ys)
        a = monk_bcd(g, 3, 25, seed=99)
        b = monk_bcd(g, 3, 25, seed=99)
        assert a == b

    def test_indivisible_block_count_rejected(self, rng):
        xs, ys = separated_samples(rng, 10)
        g = aggregated_gram(QUAD, xs, ys)
        from mommd.errors import PartitionError

        with pytest.raises(PartitionError):
            monk_bcd(g, 3, 10, seed=0)
        est = monk_bcd(g, 3, 10, seed=0, drop_remainder=True)
        assert est.blocks and len(est.blocks) == 3

    def test_unit_ball_constraint_of_the_analytic_step(self, rng):
        # On well-conditioned data the factor needs no jitter and the step
        # lands exactly on the unit sphere of the Gram norm.
        xs = np.linspace(0.0, 9.0, 10)
        ys = xs + 30.0
        g = aggregated_gram(rbf(0.25), xs, ys)
        factor = g.chol()
        assert factor.jitter == 0.0
        for _ in range(20):
            part = make_partition(10, 5, rng=rng)
            for idx in part.blocks:
                v = np.zeros(20)
                v[idx] = 1.0
                v[10 + idx] = -1.0
                c = v / weighted_norm(factor, v)
                assert c @ g.entries @ c == pytest.approx(1.0, abs=1e-10)

    def test_value_ratio_under_papers_contamination_is_bounded(self):
        # Estimator-level robustness at n=500: five pairs pushed to 2000/4000
        # leave the block-median estimate within 3x its clean value, while the
        # unbiased statistic's signed root explodes by more than 10x.
        monk_vals = {False: [], True: []}
        ustat_vals = {False: [], True: []}
        for rep, child in enumerate(np.random.SeedSequence(77).spawn(10)):
            r = np.random.default_rng(child)
            xs = r.normal(0.2, 0.7, 500)
            ys = r.normal(0.9, 0.4, 500)
            for corrupted in (False, True):
                if corrupted:
                    xs_run, ys_run = xs.copy(), ys.copy()
                    xs_run[-5:] = 2000.0
                    ys_run[-5:] = 4000.0
                else:
                    xs_run, ys_run = xs, ys
                g = aggregated_gram(QUAD, xs_run, ys_run)
                monk_vals[corrupted].append(
                    monk_bcd(g, 11, 30, seed=rep, drop_remainder=True).value
                )
                ustat_vals[corrupted].append(abs(mmd_ustat(g).value))
        monk_ratio = np.median(monk_vals[True]) / np.median(monk_vals[False])
        ustat_ratio = np.median(ustat_vals[True]) / np.median(ustat_vals[False])
        assert monk_ratio <= 3.0
        assert ustat_ratio >= 10.0

    def test_value_stays_in_clean_block_range_under_corruption(self, rng):
        # Two corrupted indices can poison at most two of five blocks, so the
        # lower median must stay inside the range of the clean block values.
        for trial in range(25):
            xs = rng.normal(0.0, 1.0, 20)
            ys = rng.normal(2.0, 1.0, 20)
            xs[-2:] = 2000.0
            ys[-2:] = 4000.0
            est = monk_bcd(aggregated_gram(QUAD, xs, ys), 5, 30, seed=trial)
            corrupt = {18, 19}
            clean_vals = [
                v
                for v, blk in zip(est.block_values, est.blocks)
                if not corrupt & set(blk)
            ]
            assert len(clean_vals) >= 3
            assert min(clean_vals) <= est.value <= max(clean_vals)


class TestMonkBcdFast:
    def test_single_block_equals_vstat(self, rng):
        xs, ys = separated_samples(rng, 12)
        est = monk_bcd_fast(QUAD, xs, ys, 1, 5, rebuild_at={1}, seed=3)
        expected = mmd_vstat(aggregated_gram(QUAD, xs, ys)).value
        assert abs(est.value - expected) <= 1e-10

    def test_identical_samples_give_zero(self, rng):
        xs = rng.normal(size=12)
        est = monk_bcd_fast(rbf(1.0), xs, xs.copy(), 3, 20, seed=5)
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_gram_and_direct_paths_agree_exactly(self, rng):
        xs, ys = separated_samples(rng, 24)
        g = aggregated_gram(QUAD, xs, ys)
        direct = monk_bcd_fast(QUAD, xs, ys, 4, 30, seed=11)
        sliced = monk_bcd_fast_from_gram(g, 4, 30, seed=11)
        assert direct.value == pytest.approx(sliced.value, rel=1e-12, abs=1e-12)
        assert direct.blocks == sliced.blocks

    def test_aggregate_agreement_with_full_bcd(self, rng):
        # Individual runs are noisy; the two estimators must agree at the
        # aggregate level on clean data.
        slow, fast = [], []
        for seed in range(10):
            r = np.random.default_rng(seed)
            xs = r.normal(0.2, 0.7, 200)
            ys = r.normal(0.9, 0.4, 200)
            slow.append(monk_bcd(aggregated_gram(QUAD, xs, ys), 10, 100, seed=seed).value)
            fast.append(monk_bcd_fast(QUAD, xs, ys, 10, 100, seed=seed).value)
        med_slow, med_fast = np.median(slow), np.median(fast)
        assert abs(med_slow - med_fast) / abs(med_slow) <= 0.10

    def test_deterministic_given_seed(self, rng):
        xs, ys = separated_samples(rng, 20)
        a = monk_bcd_fast(QUAD, xs, ys, 4, 25, seed=42)
        b = monk_bcd_fast(QUAD, xs, ys, 4, 25, seed=42)
        assert a == b

    def test_reported_value_is_attained_by_a_block(self, rng):
        xs, ys = separated_samples(rng, 20)
        est = monk_bcd_fast(QUAD, xs, ys, 5, 25, seed=8)
        assert est.value in est.block_values


class TestMeanEmbedding:
    def test_single_block_is_empirical_embedding(self, rng):
        xs = rng.normal(size=9)
        coef = monk_mean_embedding(rbf(1.0), xs, 1, 5, seed=0)
        assert np.allclose(coef.c, np.full(9, 1.0 / 9.0))

    def test_identical_points_collapse_to_single_feature(self):
        xs = np.zeros(6)
        coef = monk_mean_embedding(QUAD, xs, 3, 10, seed=1)
        target = CoefExpansion(base_x=np.zeros(1), base_y=np.zeros(0), c=np.ones(1))
        assert rkhs_distance(coef, target, QUAD) == pytest.approx(0.0, abs=1e-9)

    def test_block_median_beats_plain_mean_under_outliers(self):
        rng = np.random.default_rng(5)
        clean = rng.normal(0.0, 1.0, 70)
        target = empirical_embedding(clean)
        poisoned = clean.copy()
        poisoned[-3:] = 500.0
        robust = monk_mean_embedding(QUAD, poisoned, 7, 30, seed=2)
        plain = monk_mean_embedding(QUAD, poisoned, 1, 30, seed=2)
        d_robust = rkhs_distance(robust, target, QUAD)
        d_plain = rkhs_distance(plain, target, QUAD)
        assert d_robust < d_plain


class TestRkhsDistance:
    def test_equal_expansions_give_zero(self, rng):
        xs = rng.normal(size=5)
        f = empirical_embedding(xs)
        assert rkhs_distance(f, f, rbf(1.0)) == 0.0

    def test_two_feature_points(self):
        f = CoefExpansion(np.array([0.0]), np.zeros(0), np.array([1.0]))
        g = CoefExpansion(np.array([1.0]), np.zeros(0), np.array([1.0]))
        expected = math.sqrt(2.0 - 2.0 * math.exp(-0.5))
        assert rkhs_distance(f, g, rbf(1.0)) == pytest.approx(expected, abs=1e-12)

    def test_scaled_feature_point(self):
        f = CoefExpansion(np.array([0.0]), np.zeros(0), np.array([2.0]))
        g = CoefExpansion(np.array([0.0]), np.zeros(0), np.array([1.0]))
        assert rkhs_distance(f, g, QUAD) == pytest.approx(1.0, abs=1e-12)


class TestAnalyticMmd:
    def test_equal_distributions_give_zero(self):
        assert analytic_mmd_gaussian(rbf(1.0), 0.3, 0.9, 0.3, 0.9) == 0.0
        assert analytic_mmd_gaussian(QUAD, 0.3, 0.9, 0.3, 0.9) == 0.0

    def test_quadratic_standard_normals(self):
        assert analytic_mmd_gaussian(QUAD, 0.0, 1.0, 1.0, 1.0) == pytest.approx(
            math.sqrt(3.0), abs=1e-12
        )

    def test_unsupported_kernel_rejected(self):
        with pytest.raises(HyperparameterError):
            analytic_mmd_gaussian(polynomial(3, 1.0), 0, 1, 1, 1)
        with pytest.raises(HyperparameterError):
            analytic_mmd_gaussian(rbf(1.0), 0, 0.0, 1, 1)

    def test_monte_carlo_agreement_smoke(self, rng):
        # The full 1e6-draw gate lives in the acceptance suite.
        checks = [(rbf(1.3), 0.1, 0.8, 0.7, 0.5), (QUAD, 0.2, 0.7, 0.9, 0.4)]
        n = 200_000
        for kern, m1, s1, m2, s2 in checks:
            if kern.family == "rbf":
                sig = kern.params["sigma"]
                kf = lambda a, b: np.exp(-((a - b) ** 2) / (2 * sig * sig))
            else:
                c, d = kern.params["offset"], kern.params["degree"]
                kf = lambda a, b: (a * b + c) ** d
            xx = kf(rng.normal(m1, s1, n), rng.normal(m1, s1, n))
            yy = kf(rng.normal(m2, s2, n), rng.normal(m2, s2, n))
            xy = kf(rng.normal(m1, s1, n), rng.normal(m2, s2, n))
            mc = xx.mean() + yy.mean() - 2 * xy.mean()
            se = math.sqrt((xx.var() + yy.var() + 4 * xy.var()) / n)
            exact = analytic_mmd_gaussian(kern, m1, s1, m2, s2) ** 2
            assert abs(exact - mc) <= 4 * se


class TestDiagnosticsAndBounds:
    def test_identical_points_have_zero_covariance(self):
        d = cov_diagnostics(rbf(1.0), np.zeros(5))
        assert d.trace_hat == 0.0
        assert d.opnorm_hat == 0.0

    def test_linear_kernel_trace_is_variance(self):
        from mommd.kernels import linear

        d = cov_diagnostics(linear(), np.array([0.0, 1.0]))
        assert d.trace_hat == pytest.approx(0.25, abs=1e-12)

    def test_opnorm_never_exceeds_trace(self, rng):
        for _ in range(100):
            xs = rng.normal(size=int(rng.integers(2, 25)))
            d = cov_diagnostics(rbf(1.0), xs)
            assert d.opnorm_hat <= d.trace_hat + 1e-15

    def test_single_point_rejected(self):
        with pytest.raises(ShapeError):
            cov_diagnostics(rbf(1.0), [1.0])

    def test_zero_covariance_gives_zero_bound(self):
        d = BoundDiagnostics(trace_hat=0.0, opnorm_hat=0.0, delta=0.5, eta=0.1)
        assert theorem_bound(d, 1000, "mean_embedding") == 0.0
        assert theorem_bound(d, 1000, "mmd") == 0.0

    def test_mean_embedding_bound_closed_form(self):
        d = BoundDiagnostics(trace_hat=1.0, opnorm_hat=1.0, delta=0.5, eta=0.1)
        expected = (12 * (1 + math.sqrt(2)) / 0.5) * max(
            math.sqrt(6 * 1.0 * math.log(10.0) / (0.5 * 1000)),
            2 * math.sqrt(1.0 / 1000),
        )
        got = theorem_bound(d, 1000, "mean_embedding")
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(9.6313, abs=5e-4)

    def test_two_sample_bound_closed_form(self):
        d = BoundDiagnostics(trace_hat=2.0, opnorm_hat=1.5, delta=0.25, eta=0.05)
        expected = (12 / 0.25) * max(
            math.sqrt(1.5 * math.log(20.0) / (0.25 * 500)),
            2 * math.sqrt(2.0 / 500),
        )
        assert theorem_bound(d, 500, "mmd") == pytest.approx(expected, rel=1e-12)

    def test_required_block_count_inversion(self):
        eta = math.exp(-10 * 0.25 / 72.0)
        d = BoundDiagnostics(trace_hat=1.0, opnorm_hat=1.0, delta=0.5, eta=eta)
        assert d.q_required == pytest.approx(10.0, rel=1e-12)

    def test_contamination_admissibility(self):
        d = BoundDiagnostics(trace_hat=1.0, opnorm_hat=0.5, delta=0.25, eta=0.1, n_corrupt=2)
        assert d.admissible(8)  # 2 <= 8 * 0.25
        assert not d.admissible(7)

    def test_combine_sums_covariances(self):
        a = BoundDiagnostics(trace_hat=1.0, opnorm_hat=0.5, delta=0.25, eta=0.1)
        b = BoundDiagnostics(trace_hat=2.0, opnorm_hat=0.25, delta=0.25, eta=0.1)
        c = combine_diagnostics(a, b)
        assert (c.trace_hat, c.opnorm_hat) == (3.0, 0.75)
        with pytest.raises(HyperparameterError):
            combine_diagnostics(a, BoundDiagnostics(1.0, 0.5, delta=0.5, eta=0.1))

    def test_parameter_ranges_enforced(self):
        with pytest.raises(HyperparameterError):
            BoundDiagnostics(trace_hat=1.0, opnorm_hat=1.0, delta=0.6)
        with pytest.raises(HyperparameterError):
            BoundDiagnostics(trace_hat=1.0, opnorm_hat=1.0, eta=1.0)
        d = BoundDiagnostics(trace_hat=1.0, opnorm_hat=1.0)
        with pytest.raises(HyperparameterError):
            theorem_bound(d, 0, "mmd")
        with pytest.raises(HyperparameterError):
            theorem_bound(d, 10, "median")


class TestEstimatorFrontend:
    def test_unknown_method_rejected(self):
        with pytest.raises(HyperparameterError):
            Estimator("median_stat")

    @pytest.mark.parametrize("method", ["vstat", "ustat", "monk_bcd", "monk_bcd_fast"])
    def test_estimate_matches_from_gram(self, method, rng):
        xs, ys = separated_samples(rng, 12)
        est = Estimator(method, q_count=3, iterations=20)
        a = est.estimate(QUAD, xs, ys, seed=5).value
        b = est.from_gram(aggregated_gram(QUAD, xs, ys), seed=5).value
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
