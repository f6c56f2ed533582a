import numpy as np
import pytest

from ensest.baselines import (HistogramConfig, default_bins, histogram_plugin,
                              knn_functional)
from ensest.functionals import FunctionalSpec, uniform_value
from ensest.mixtures import MixtureParams, sample


class TestHistogram:
    def test_single_cell_gives_uniform_plugin_value(self):
        # bins=1: the density estimate is identically 1, so the estimate is
        # g(1) exactly, for every functional
        pts = sample(MixtureParams(6, 6, 0.8, 2), 500, seed=40)
        cfg = HistogramConfig(1)
        for g in (FunctionalSpec.shannon(), FunctionalSpec.quadratic(),
                  FunctionalSpec.renyi(0.6), FunctionalSpec.panter_dite(16, 2)):
            rec = histogram_plugin(g, pts, cfg)
            assert rec.value == pytest.approx(uniform_value(g), rel=1e-14)

    def test_all_samples_in_one_cell(self):
        # all mass in a cell of volume v: density 1/v, Shannon estimate log v
        rng = np.random.default_rng(41)
        pts = (0.25 * rng.random((200, 1)))
        rec = histogram_plugin(FunctionalSpec.shannon(), pts, HistogramConfig(4))
        assert rec.value == pytest.approx(np.log(0.25), rel=1e-12)

    def test_uniform_shannon_close_to_zero(self):
        t = 10_000
        pts = sample(MixtureParams(1, 1, 0.0, 1), t, seed=42)
        bins = int(np.ceil(t ** (1 / 3)))
        rec = histogram_plugin(FunctionalSpec.shannon(), pts, HistogramConfig(bins))
        assert abs(rec.value) < 0.05

    def test_default_binning_rule(self):
        assert default_bins(10_000, 1) == int(np.ceil(10_000 ** (1 / 3)))
        pts = sample(MixtureParams(6, 6, 0.8, 2), 300, seed=43)
        rec = histogram_plugin(FunctionalSpec.shannon(), pts)
        assert rec.detail["bins_per_dim"] == default_bins(300, 2)

    def test_boundary_sample_at_one(self):
        # x = 1.0 falls in the last cell, not out of range
        pts = np.array([[1.0], [0.0], [0.5]])
        rec = histogram_plugin(FunctionalSpec.quadratic(), pts, HistogramConfig(2))
        assert np.isfinite(rec.value)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            HistogramConfig(0)


class TestKnn:
    def test_uniform_shannon_close_to_zero(self):
        pts = sample(MixtureParams(1, 1, 0.0, 1), 5000, seed=44)
        rec = knn_functional(FunctionalSpec.shannon(), pts, k=5)
        assert abs(rec.value) < 0.05

    def test_panter_dite_is_scaled_renyi_integral(self):
        pts = sample(MixtureParams(6, 6, 0.8, 3), 400, seed=45)
        n, q = 16, 3
        pd = knn_functional(FunctionalSpec.panter_dite(n, q), pts, k=5)
        ren = knn_functional(FunctionalSpec.renyi(q / (q + 2.0)), pts, k=5)
        assert pd.value == pytest.approx(n ** (-2.0 / q) * ren.value, rel=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(46)
        pts = sample(MixtureParams(6, 6, 0.8, 2), 300, seed=46)
        base = knn_functional(FunctionalSpec.shannon(), pts, k=4).value
        shuffled = knn_functional(FunctionalSpec.shannon(), pts[rng.permutation(300)],
                                  k=4).value
        assert shuffled == pytest.approx(base, rel=1e-12)

    def test_duplicates_raise(self):
        pts = np.vstack([np.full((2, 2), 0.5), np.random.default_rng(47).random((20, 2))])
        with pytest.raises(ValueError, match="duplicate"):
            knn_functional(FunctionalSpec.shannon(), pts, k=1)

    def test_quadratic_unsupported(self):
        pts = sample(MixtureParams(6, 6, 0.8, 1), 50, seed=48)
        with pytest.raises(ValueError):
            knn_functional(FunctionalSpec.quadratic(), pts)

    def test_k_bounds(self):
        pts = sample(MixtureParams(6, 6, 0.8, 1), 20, seed=49)
        with pytest.raises(ValueError):
            knn_functional(FunctionalSpec.shannon(), pts, k=0)
        with pytest.raises(ValueError):
            knn_functional(FunctionalSpec.shannon(), pts, k=20)

    def test_renyi_sanity_on_uniform(self):
        # integral E[f^(alpha-1)] is 1 for the uniform density
        pts = sample(MixtureParams(1, 1, 0.0, 2), 4000, seed=50)
        rec = knn_functional(FunctionalSpec.renyi(0.75), pts, k=5)
        assert rec.value == pytest.approx(1.0, abs=0.1)
