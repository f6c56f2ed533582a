import numpy as np
import pytest

from ensest.functionals import FunctionalSpec
from ensest.harness import (EstimatorOptions, SweepSpec, TestSpec, auc_vs_delta,
                            deflection, ensemble_weights_for, panel_estimates,
                            roc_auc, run_distribution_test, run_mse_sweep)
from ensest.mixtures import (MissingTruthError, MixtureParams, TruthCache, sample,
                             true_functional)
from ensest.plugin import SplitConfig, optimal_k, plugin_estimate, split
from ensest.weights import EnsembleConfig, ensemble_estimate, solve_relaxed


class TestDeflection:
    def test_zero_variance_errors(self):
        with pytest.raises(ValueError):
            deflection([0, 0, 0, 0], [1, 1, 1, 1])

    def test_hand_value(self):
        # s^2 = 2 for both pairs: |4 - 1| / sqrt(4) = 1.5
        assert deflection([0, 2], [3, 5]) == pytest.approx(1.5)

    def test_symmetry(self):
        rng = np.random.default_rng(51)
        a, b = rng.normal(size=30), rng.normal(loc=1.0, size=30)
        assert deflection(a, b) == pytest.approx(deflection(b, a))

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            deflection([1.0], [2.0, 3.0])


class TestRocAuc:
    def test_perfect_separation(self):
        _, auc = roc_auc([1, 2, 3], [5, 6, 7])
        assert auc == 1.0

    def test_identical_multisets(self):
        _, auc = roc_auc([1, 2, 3], [1, 2, 3])
        assert auc == 0.5

    def test_pair_enumeration(self):
        # concordant pairs: (1,1.5), (1,3), (2,3) of 4 total
        _, auc = roc_auc([1, 2], [1.5, 3])
        assert auc == 0.75

    def test_direction_flip(self):
        _, hi = roc_auc([1, 2], [3, 4], "higher-is-alt")
        _, lo = roc_auc([1, 2], [3, 4], "lower-is-alt")
        assert hi == 1.0 and lo == 0.0

    def test_curve_endpoints_and_trapezoid_identity(self):
        rng = np.random.default_rng(52)
        null = rng.normal(size=40)
        alt = rng.normal(loc=0.8, size=40)
        curve, auc = roc_auc(null, alt)
        assert tuple(curve[0]) == (0.0, 0.0)
        assert tuple(curve[-1]) == (1.0, 1.0)
        assert np.trapezoid(curve[:, 1], curve[:, 0]) == pytest.approx(auc, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            roc_auc([], [1.0])


class TestPanelEstimates:
    def test_matches_standalone_calls_bitwise(self):
        params = MixtureParams(6, 6, 0.8, 3)
        g = FunctionalSpec.shannon()
        pts = sample(params, 400, seed=60)
        opts = EstimatorOptions(ensemble_size=12)
        weights = ensemble_weights_for(3, 400, opts)
        vals = panel_estimates(g, pts, ("standard", "truncated", "weighted"),
                               opts, 60, weights)

        split_cfg = SplitConfig(0.5, 60)
        ev, de = split(pts, split_cfg)
        k = optimal_k(de.shape[0], 3)
        assert vals["standard"] == plugin_estimate(g, ev, de, k, "standard").value
        assert vals["truncated"] == plugin_estimate(g, ev, de, k, "truncated").value
        cfg = EnsembleConfig(lbar=tuple(opts.effective_lbar()), d=3, t=400)
        assert vals["weighted"] == ensemble_estimate(g, pts, cfg, weights, split_cfg).value

    def test_weighted_requires_weights(self):
        pts = sample(MixtureParams(6, 6, 0.8, 2), 100, seed=61)
        with pytest.raises(ValueError):
            panel_estimates(FunctionalSpec.shannon(), pts, ("weighted",),
                            EstimatorOptions(), 61)

    def test_unknown_estimator(self):
        pts = sample(MixtureParams(6, 6, 0.8, 2), 100, seed=62)
        with pytest.raises(ValueError):
            panel_estimates(FunctionalSpec.shannon(), pts, ("parzen",),
                            EstimatorOptions(), 62)

    def test_default_eta_is_scaled(self):
        opts = EstimatorOptions()
        assert opts.effective_eta(6) == pytest.approx(18.0 / 50)
        assert EstimatorOptions(eta=7.5).effective_eta(6) == 7.5


def small_sweep_spec(**overrides):
    base = dict(
        functional=FunctionalSpec.shannon(),
        params=MixtureParams(6, 6, 0.8, 1),
        estimators=("standard", "truncated", "histogram", "knn"),
        axis="T",
        values=(80, 160),
        trials=4,
        base_seed=70,
        truth_n_mc=20_000,
        truth_seed=3,
    )
    base.update(overrides)
    return SweepSpec(**base)


def cache_for(spec):
    cache = TruthCache()
    for x in spec.values:
        params, g, _ = spec.point(x)
        cache.ensure(params, g, spec.truth_n_mc, spec.truth_seed)
    return cache


class TestMseSweep:
    def test_decomposition_identity(self):
        spec = small_sweep_spec()
        rows = run_mse_sweep(spec, cache_for(spec))
        assert len(rows) == len(spec.values) * len(spec.estimators)
        for row in rows:
            assert row.mse == pytest.approx(row.bias_sq + row.variance, abs=1e-12)

    def test_deterministic(self):
        spec = small_sweep_spec()
        cache = cache_for(spec)
        assert run_mse_sweep(spec, cache) == run_mse_sweep(spec, cache)

    def test_missing_truth_instructs_oracle(self):
        spec = small_sweep_spec()
        with pytest.raises(MissingTruthError, match="oracle"):
            run_mse_sweep(spec, TruthCache())

    def test_d_axis_adapts_quantizer_dimension(self):
        spec = small_sweep_spec(
            functional=FunctionalSpec.panter_dite(16, 2),
            params=MixtureParams(6, 6, 0.8, 2),
            estimators=("truncated",),
            axis="d", values=(2, 3), t_fixed=120,
        )
        points = [spec.point(x) for x in spec.values]
        assert [p[0].d for p in points] == [2, 3]
        assert [p[1].q for p in points] == [2, 3]
        rows = run_mse_sweep(spec, cache_for(spec))
        assert [r.x for r in rows] == [2, 3]

    def test_d_axis_fixed_q_when_disabled(self):
        spec = small_sweep_spec(
            functional=FunctionalSpec.panter_dite(16, 2),
            params=MixtureParams(6, 6, 0.8, 2),
            estimators=("truncated",),
            axis="d", values=(2, 3), t_fixed=120, adapt_q=False,
        )
        assert [spec.point(x)[1].q for x in spec.values] == [2, 2]

    def test_validation(self):
        with pytest.raises(ValueError):
            small_sweep_spec(trials=1)
        with pytest.raises(ValueError):
            small_sweep_spec(axis="d")  # missing t_fixed
        with pytest.raises(ValueError):
            small_sweep_spec(estimators=("bogus",))


def small_test_spec(**overrides):
    base = dict(null_a=6.0, null_b=6.0, alt_a=5.0, alt_b=5.0, p=0.75, d=2,
                experiments=12, samples_per_experiment=60,
                estimators=("standard", "truncated"), base_seed=80)
    base.update(overrides)
    return TestSpec(**base)


class TestDistributionTest:
    def test_identical_hypotheses_auc_near_half(self):
        spec = small_test_spec(alt_a=6.0, alt_b=6.0, experiments=60)
        result = run_distribution_test(spec)
        stderr = np.sqrt((2 * 60 + 1) / (12 * 60 * 60))
        for est in spec.estimators:
            assert abs(result.aucs[est] - 0.5) < 4 * stderr

    def test_shapes_and_determinism(self):
        spec = small_test_spec()
        r1 = run_distribution_test(spec)
        r2 = run_distribution_test(spec)
        for est in spec.estimators:
            assert r1.estimates[est]["null"].shape == (12,)
            np.testing.assert_array_equal(r1.estimates[est]["null"],
                                          r2.estimates[est]["null"])
            assert r1.aucs[est] == r2.aucs[est]

    def test_separated_hypotheses_detectable(self):
        spec = small_test_spec(alt_a=2.0, alt_b=2.0, experiments=40,
                               samples_per_experiment=300)
        result = run_distribution_test(spec)
        for est in spec.estimators:
            assert result.aucs[est] > 0.9

    def test_validation(self):
        with pytest.raises(ValueError):
            small_test_spec(experiments=1)
        with pytest.raises(ValueError):
            small_test_spec(direction="sideways")


class TestAucVsDelta:
    def test_zero_delta_near_half_and_trend(self):
        base = small_test_spec(null_a=10.0, null_b=10.0, alt_a=10.0, alt_b=10.0,
                               experiments=30, samples_per_experiment=150,
                               estimators=("truncated",))
        rows, trends = auc_vs_delta(base, [0.0, 2.0, 4.0])
        by_delta = {r.delta: r.auc for r in rows}
        stderr = np.sqrt((2 * 30 + 1) / (12 * 30 * 30))
        assert abs(by_delta[0.0] - 0.5) < 4 * stderr
        assert by_delta[4.0] > by_delta[0.0]
        assert trends["truncated"] > 0.9

    def test_delta_bounds(self):
        base = small_test_spec(null_a=2.0, null_b=2.0)
        with pytest.raises(ValueError):
            auc_vs_delta(base, [2.5])


class TestTruthOracleIntegration:
    def test_sweep_rows_carry_truth(self):
        spec = small_sweep_spec(estimators=("histogram",))
        cache = cache_for(spec)
        rows = run_mse_sweep(spec, cache)
        params, g, _ = spec.point(spec.values[0])
        expected = true_functional(params, g, spec.truth_n_mc, spec.truth_seed)
        assert rows[0].truth == expected.value
