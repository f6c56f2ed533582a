"""Command-line front end.

Thin wiring only: parse a JSON config, dispatch to the library, emit
deterministic artifacts (results.csv / summary.json / weights.json) into
the output directory.  See README for the config schema of each
subcommand.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._kernels import set_threads
from .baselines import HistogramConfig, histogram_plugin, knn_functional
from .functionals import FunctionalSpec
from .harness import (EstimatorOptions, SweepSpec, TestSpec, auc_vs_delta,
                      run_distribution_test, run_mse_sweep)
from .io import read_samples_csv, write_results_csv, write_summary_json
from .mixtures import MissingTruthError, MixtureParams, TruthCache, sample
from .plugin import SplitConfig, optimal_k, plugin_estimate, split
from .weights import (EnsembleConfig, default_lbar, ensemble_estimate, eta_exact,
                      solve_exact, solve_relaxed)

SWEEP_FIELDS = ["estimator", "axis", "x", "mse", "bias_sq", "variance", "mse_stderr",
                "trials", "truth", "truth_stderr"]

# which config key --seed overrides, per subcommand
_SEED_KEY = {"estimate": "seed", "oracle": "seed", "weights": "seed",
             "sweep-t": "base_seed", "sweep-d": "base_seed",
             "disttest": "base_seed", "auc-delta": "base_seed"}


def _options_from(cfg: dict) -> EstimatorOptions:
    ens = cfg.get("ensemble") or {}
    lbar = ens.get("lbar")
    return EstimatorOptions(
        alpha_frac=cfg.get("alpha_frac", 0.5),
        ensemble_size=ens.get("L", 50),
        eta=ens.get("eta"),
        lbar=tuple(lbar) if lbar is not None else None,
        knn_k=cfg.get("knn_k", 5),
        bins_per_dim=cfg.get("bins_per_dim"),
    )


def _ensemble_config(options: EstimatorOptions, d: int, t: int) -> EnsembleConfig:
    return EnsembleConfig(lbar=tuple(options.effective_lbar()), d=d, t=t)


def _truth_cache_from(cfg: dict) -> TruthCache:
    truth = cfg.get("truth") or {}
    if truth.get("cache"):
        return TruthCache.load(truth["cache"])
    return TruthCache.reference()


def _sweep_common(cfg: dict) -> dict:
    truth = cfg.get("truth") or {}
    return {
        "functional": FunctionalSpec.from_json(cfg["functional"]),
        "params": MixtureParams.from_json(cfg["mixture"]),
        "estimators": tuple(cfg["estimators"]),
        "trials": int(cfg["trials"]),
        "base_seed": int(cfg["base_seed"]),
        "options": _options_from(cfg),
        "truth_n_mc": int(truth.get("n_mc", 10_000_000)),
        "truth_seed": int(truth.get("seed", 101)),
    }


def _sweep_rows_out(rows) -> list[dict]:
    return [
        {"estimator": r.estimator_id, "axis": r.axis, "x": r.x, "mse": r.mse,
         "bias_sq": r.bias_sq, "variance": r.variance, "mse_stderr": r.mse_stderr,
         "trials": r.trials, "truth": r.truth, "truth_stderr": r.truth_stderr}
        for r in rows
    ]


def cmd_weights(cfg: dict, out: Path) -> int:
    lbar = cfg.get("lbar")
    lbar = tuple(lbar) if lbar is not None else tuple(default_lbar(cfg.get("L", 50)))
    ens = EnsembleConfig(lbar=lbar, d=int(cfg["d"]), t=int(cfg["T"]))
    eta = cfg.get("eta")
    eta = float(eta) if eta is not None else ens.eta_default
    exact = solve_exact(ens)
    relaxed = solve_relaxed(ens, eta)
    payload = {
        "config": cfg,
        "d": ens.d,
        "T": ens.t,
        "lbar": list(ens.lbar),
        "eta": eta,
        "eta_exact": eta_exact(ens),
        "exact": exact.to_json(),
        "relaxed": relaxed.to_json(),
    }
    write_summary_json(out / "weights.json", payload)
    print(f"exact:   ||w||^2 = {exact.norm_sq:.6g}")
    print(f"relaxed: epsilon = {relaxed.epsilon:.6g}  ||w||^2 = {relaxed.norm_sq:.6g}")
    print(f"relaxed residuals: {list(relaxed.residuals)}")
    return 0


def cmd_estimate(cfg: dict, out: Path) -> int:
    g = FunctionalSpec.from_json(cfg["functional"])
    estimator = cfg["estimator"]
    seed = int(cfg.get("seed", 0))
    options = _options_from(cfg)

    if cfg.get("samples_csv"):
        samples = read_samples_csv(cfg["samples_csv"])
        source = {"samples_csv": cfg["samples_csv"]}
    else:
        params = MixtureParams.from_json(cfg["mixture"])
        samples = sample(params, int(cfg["T"]), seed)
        source = {"mixture": params.to_json(), "T": int(cfg["T"])}

    if estimator in ("standard", "truncated"):
        eval_part, density_part = split(samples, SplitConfig(options.alpha_frac, seed))
        k = cfg.get("k")
        k = float(k) if k is not None else optimal_k(density_part.shape[0], samples.shape[1])
        record = plugin_estimate(g, eval_part, density_part, k, estimator, seed=seed)
    elif estimator == "weighted":
        ens = _ensemble_config(options, samples.shape[1], samples.shape[0])
        weights = solve_relaxed(ens, options.effective_eta(ens.d))
        record = ensemble_estimate(g, samples, ens, weights,
                                   SplitConfig(options.alpha_frac, seed))
    elif estimator == "histogram":
        hist_cfg = HistogramConfig(options.bins_per_dim) if options.bins_per_dim else None
        record = histogram_plugin(g, samples, hist_cfg, seed=seed)
    elif estimator == "knn":
        record = knn_functional(g, samples, k=options.knn_k, seed=seed)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")

    write_summary_json(out / "summary.json",
                       {"config": cfg, "source": source, "record": record.to_json()})
    print(f"{record.estimator_id}: {record.value!r}")
    return 0


def cmd_sweep(cfg: dict, out: Path, axis: str) -> int:
    common = _sweep_common(cfg)
    if axis == "T":
        spec = SweepSpec(axis="T", values=tuple(int(v) for v in cfg["T_values"]), **common)
    else:
        spec = SweepSpec(axis="d", values=tuple(int(v) for v in cfg["d_values"]),
                         t_fixed=int(cfg["T"]), adapt_q=bool(cfg.get("adapt_q", True)),
                         **common)
    rows = run_mse_sweep(spec, _truth_cache_from(cfg))
    out_rows = _sweep_rows_out(rows)
    write_results_csv(out / "results.csv", SWEEP_FIELDS, out_rows, cfg)
    write_summary_json(out / "summary.json", {"config": cfg, "rows": out_rows})
    for r in out_rows:
        print(f"{r['estimator']} {r['axis']}={r['x']}: mse={r['mse']:.6g}")
    return 0


def _test_spec_from(cfg: dict) -> TestSpec:
    return TestSpec(
        null_a=float(cfg["null"]["a"]), null_b=float(cfg["null"]["b"]),
        alt_a=float(cfg["alt"]["a"]), alt_b=float(cfg["alt"]["b"]),
        p=float(cfg["p"]), d=int(cfg["d"]),
        experiments=int(cfg["experiments"]),
        samples_per_experiment=int(cfg["samples"]),
        estimators=tuple(cfg.get("estimators", ["standard", "truncated", "weighted"])),
        functional=FunctionalSpec.from_json(cfg.get("functional", {"kind": "shannon"})),
        base_seed=int(cfg.get("base_seed", 0)),
        options=_options_from(cfg),
        direction=cfg.get("direction", "higher-is-alt"),
    )


def cmd_disttest(cfg: dict, out: Path) -> int:
    spec = _test_spec_from(cfg)
    result = run_distribution_test(spec)
    rows = []
    for est in spec.estimators:
        for label in ("null", "alt"):
            for e, value in enumerate(result.estimates[est][label]):
                rows.append({"estimator": est, "hypothesis": label, "experiment": e,
                             "value": float(value)})
    write_results_csv(out / "results.csv",
                      ["estimator", "hypothesis", "experiment", "value"], rows, cfg)
    summary = {
        "config": cfg,
        "deflection": {e: result.deflections[e] for e in spec.estimators},
        "auc": {e: result.aucs[e] for e in spec.estimators},
        "roc": {e: [[float(a), float(b)] for a, b in result.rocs[e]]
                for e in spec.estimators},
    }
    write_summary_json(out / "summary.json", summary)
    for est in spec.estimators:
        print(f"{est}: auc={result.aucs[est]:.4f} deflection={result.deflections[est]:.4f}")
    return 0


def cmd_auc_delta(cfg: dict, out: Path) -> int:
    base = _test_spec_from({**cfg, "null": {"a": cfg["a0"], "b": cfg["b0"]},
                            "alt": {"a": cfg["a0"], "b": cfg["b0"]}})
    rows, trends = auc_vs_delta(base, [float(v) for v in cfg["deltas"]])
    out_rows = [{"delta": r.delta, "estimator": r.estimator_id, "auc": r.auc} for r in rows]
    write_results_csv(out / "results.csv", ["delta", "estimator", "auc"], out_rows, cfg)
    write_summary_json(out / "summary.json",
                       {"config": cfg, "rows": out_rows, "spearman_trend": trends})
    for r in out_rows:
        print(f"delta={r['delta']} {r['estimator']}: auc={r['auc']:.4f}")
    return 0


def cmd_oracle(cfg: dict, out: Path) -> int:
    params = MixtureParams.from_json(cfg["mixture"])
    g = FunctionalSpec.from_json(cfg["functional"])
    n_mc = int(cfg["n_mc"])
    seed = int(cfg.get("seed", 101))
    cache_path = Path(cfg.get("truth_cache") or out / "truth_cache.json")
    cache = TruthCache.load(cache_path)
    estimate = cache.ensure(params, g, n_mc, seed)
    cache.save(cache_path)
    write_summary_json(out / "summary.json",
                       {"config": cfg, "truth": estimate.to_json(),
                        "cache": str(cache_path)})
    print(f"truth = {estimate.value!r} +- {estimate.stderr!r} (n_mc={n_mc})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensest",
        description="Weighted-ensemble estimation of density functionals",
    )
    parser.add_argument("command",
                        choices=["estimate", "weights", "sweep-t", "sweep-d",
                                 "disttest", "auc-delta", "oracle"])
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config's seed/base_seed")
    parser.add_argument("--threads", type=int, default=None,
                        help="compiled-kernel parallelism (results are unaffected)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        set_threads(args.threads)
        cfg = json.loads(Path(args.config).read_text())
        if args.seed is not None:
            cfg[_SEED_KEY[args.command]] = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "weights":
            return cmd_weights(cfg, out)
        if args.command == "estimate":
            return cmd_estimate(cfg, out)
        if args.command == "sweep-t":
            return cmd_sweep(cfg, out, "T")
        if args.command == "sweep-d":
            return cmd_sweep(cfg, out, "d")
        if args.command == "disttest":
            return cmd_disttest(cfg, out)
        if args.command == "auc-delta":
            return cmd_auc_delta(cfg, out)
        return cmd_oracle(cfg, out)
    except (ValueError, MissingTruthError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
