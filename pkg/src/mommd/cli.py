"""Command-line experiment runner.

Subcommands:
    exp1      synthetic-data error sweeps (Gaussian clean/contaminated, Pareto)
    dna       splice-junction two-sample tests
    estimate  one estimator value for two sample CSVs

Configs are flat JSON documents; every run is reproducible from (config,
seed) and rows are written in a fixed (estimator, N, Q, rep) order.  Exit
codes: 0 ok, 2 config error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from .datagen import (
    ContaminationSpec,
    contaminate,
    load_sample_csv,
    load_splice,
    sample_gaussian,
    sample_pareto,
    splice_sequences_by_label,
)
from .errors import DataFormatError, MommdError
from .kernels import parse_kernel_spec
from .mmd import ESTIMATOR_NAMES, Estimator, analytic_mmd_gaussian
from .twosample import two_sample_test

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3

EXPERIMENTS = ("gauss_clean", "gauss_outliers", "pareto", "dna")
DNA_PAIRS = ("EI-IE", "EI-EI", "IE-IE")

EXP1_COLUMNS = (
    "experiment,kernel,estimator,N,Q,rep,seed,mmd_hat,mmd_true,abs_error,wall_ms,error"
).split(",")
EXP2_COLUMNS = "pair,N,rep,seed,estimator,mmd_hat,q_hat,diff,error".split(",")


class ConfigError(MommdError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    kernel: str = "poly:degree=2,c=1"
    estimators: tuple[str, ...] = ("ustat", "monk_bcd")
    n_list: tuple[int, ...] = (200,)
    q_list: tuple[int, ...] = (5,)
    reps: int = 100
    iterations: int = 100
    bootstrap: int = 150
    alpha: float = 0.05
    seed: int = 0
    n_corrupt: int = 5
    x_corrupt: float = 2000.0
    y_corrupt: float = 4000.0
    # Experiment-1 Gaussian fixture; any values may be supplied.
    m1: float = 0.2
    s1: float = 0.7
    m2: float = 0.9
    s2: float = 0.4
    pareto_alpha: float = 3.0
    data: str | None = None
    pairs: tuple[str, ...] = DNA_PAIRS
    drop_remainder: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; one of {EXPERIMENTS}")
        unknown = set(self.estimators) - set(ESTIMATOR_NAMES)
        if unknown or not self.estimators:
            raise ConfigError(f"estimators must be a non-empty subset of {ESTIMATOR_NAMES}")
        if self.reps < 1 or self.iterations < 1 or self.bootstrap < 1:
            raise ConfigError("reps, iterations and bootstrap must be >= 1")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if not self.n_list or not self.q_list:
            raise ConfigError("n_list and q_list must be non-empty")
        try:
            kernel = parse_kernel_spec(self.kernel)
        except MommdError as exc:
            raise ConfigError(str(exc)) from None
        if self.experiment == "dna":
            if not kernel.is_string:
                raise ConfigError("the dna experiment needs a string kernel (ssk:...)")
        elif kernel.is_string:
            raise ConfigError(f"experiment {self.experiment} needs a numeric kernel")
        if self.experiment in ("gauss_clean", "gauss_outliers"):
            if not (
                kernel.family == "rbf"
                or (kernel.family == "polynomial" and kernel.params["degree"] == 2)
            ):
                raise ConfigError(
                    "Gaussian experiments compare against the closed-form MMD, "
                    "which needs rbf or a degree-2 polynomial kernel"
                )
        needs_blocks = {"monk_bcd", "monk_bcd_fast"} & set(self.estimators)
        if self.experiment == "dna":
            if self.data is None:
                raise ConfigError("dna experiment needs a data path")
            if len(self.q_list) != 1:
                raise ConfigError("dna experiment uses a single Q (q_list of length 1)")
            bad = [p for p in self.pairs if p not in DNA_PAIRS]
            if bad:
                raise ConfigError(f"unknown class pairs {bad}; one of {DNA_PAIRS}")
            if needs_blocks and not self.drop_remainder:
                for n in self.n_list:
                    if (n - n % 3) // 3 % self.q_list[0] != 0:
                        raise ConfigError(
                            f"Q={self.q_list[0]} does not divide the split size of N={n}; "
                            "enable drop_remainder"
                        )
        elif needs_blocks and not self.drop_remainder:
            for n in self.n_list:
                for q in self.q_list:
                    if n % q != 0:
                        raise ConfigError(
                            f"Q={q} does not divide N={n}; enable drop_remainder"
                        )
        return self


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        raw = json.loads(open(path).read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a flat JSON object")
    raw.update(overrides or {})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "experiment" not in raw:
        raise ConfigError("config must set 'experiment'")
    for key in ("estimators", "n_list", "q_list", "pairs"):
        if key in raw:
            if not isinstance(raw[key], list):
                raise ConfigError(f"{key} must be a JSON list")
            raw[key] = tuple(raw[key])
    try:
        return ExperimentConfig(**raw).validate()
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from None


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0])


def _fmt_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt_value(v) for v in row])


# ---------------------------------------------------------------------------
# Experiment 1: estimation error on synthetic data
# ---------------------------------------------------------------------------


def _exp1_data(cfg: ExperimentConfig, n: int, rep: int):
    seed_x = _derived_seed(cfg.seed, 1, n, rep, 0)
    seed_y = _derived_seed(cfg.seed, 1, n, rep, 1)
    if cfg.experiment == "pareto":
        xs = sample_pareto(cfg.pareto_alpha, n, seed_x)
        ys = sample_pareto(cfg.pareto_alpha, n, seed_y)
        return xs, ys
    xs = sample_gaussian(cfg.m1, cfg.s1, n, seed_x)
    ys = sample_gaussian(cfg.m2, cfg.s2, n, seed_y)
    if cfg.experiment == "gauss_outliers":
        spec = ContaminationSpec(cfg.n_corrupt, cfg.x_corrupt, cfg.y_corrupt)
        xs, ys = contaminate(xs, ys, spec)
    return xs, ys


def run_experiment1(cfg: ExperimentConfig, out_path) -> None:
    """Sweep (estimator, N, Q, rep), writing one CSV row per combination."""
    kernel = parse_kernel_spec(cfg.kernel)
    if cfg.experiment == "pareto":
        mmd_true = 0.0
    else:
        mmd_true = analytic_mmd_gaussian(kernel, cfg.m1, cfg.s1, cfg.m2, cfg.s2)
    rows = []
    for est_idx, name in enumerate(cfg.estimators):
        for n in cfg.n_list:
            for q in cfg.q_list:
                estimator = Estimator(
                    name, q, cfg.iterations, drop_remainder=cfg.drop_remainder
                )
                for rep in range(cfg.reps):
                    xs, ys = _exp1_data(cfg, n, rep)
                    est_seed = _derived_seed(cfg.seed, 2, est_idx, n, q, rep)
                    t0 = time.perf_counter()
                    try:
                        result = estimator.estimate(kernel, xs, ys, seed=est_seed)
                        wall_ms = (time.perf_counter() - t0) * 1e3
                        rows.append(
                            (
                                cfg.experiment,
                                cfg.kernel,
                                name,
                                n,
                                q,
                                rep,
                                est_seed,
                                result.value,
                                mmd_true,
                                abs(result.value - mmd_true),
                                round(wall_ms, 3),
                                "",
                            )
                        )
                    except MommdError as exc:
                        wall_ms = (time.perf_counter() - t0) * 1e3
                        rows.append(
                            (cfg.experiment, cfg.kernel, name, n, q, rep, est_seed,
                             "", mmd_true, "", round(wall_ms, 3), str(exc))
                        )
    _write_csv(out_path, EXP1_COLUMNS, rows)


# ---------------------------------------------------------------------------
# Experiment 2: splice-junction two-sample tests
# ---------------------------------------------------------------------------


def run_experiment2(cfg: ExperimentConfig, out_path) -> None:
    """Two-sample tests over class pairs, one CSV row per (pair, N, rep, estimator)."""
    kernel = parse_kernel_spec(cfg.kernel)
    diagnostics: list[str] = []
    records = load_splice(cfg.data, diagnostics)
    by_label = splice_sequences_by_label(records)
    estimators = {
        name: Estimator(name, cfg.q_list[0], cfg.iterations, drop_remainder=cfg.drop_remainder)
        for name in cfg.estimators
    }
    rows = []
    for pair_idx, pair in enumerate(cfg.pairs):
        label_a, label_b = pair.split("-")
        for lab in (label_a, label_b):
            if lab not in by_label:
                raise DataFormatError(f"no {lab} records in {cfg.data}")
        seq_a = np.empty(len(by_label[label_a]), dtype=object)
        seq_a[:] = by_label[label_a]
        seq_b = np.empty(len(by_label[label_b]), dtype=object)
        seq_b[:] = by_label[label_b]
        for n in cfg.n_list:
            if n > len(seq_a) or n > len(seq_b):
                raise DataFormatError(
                    f"cannot draw N={n} without replacement from classes of sizes "
                    f"{len(seq_a)}, {len(seq_b)}"
                )
            for rep in range(cfg.reps):
                test_seed = _derived_seed(cfg.seed, 3, pair_idx, n, rep)
                rng = np.random.default_rng(test_seed)
                xs = rng.choice(seq_a, size=n, replace=False)
                ys = rng.choice(seq_b, size=n, replace=False)
                memo: dict = {}
                for name, estimator in estimators.items():
                    try:
                        res = two_sample_test(
                            xs, ys, [kernel], estimator, cfg.bootstrap, cfg.alpha,
                            seed=test_seed, gram_memo=memo,
                        )
                        rows.append(
                            (pair, n, rep, test_seed, name,
                             res.statistic, res.quantile, res.diff, "")
                        )
                    except MommdError as exc:
                        rows.append((pair, n, rep, test_seed, name, "", "", "", str(exc)))
    _write_csv(out_path, EXP2_COLUMNS, rows)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mommd",
        description="Robust MMD estimation experiments (median-of-means block estimators).",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument(
        "--drop-remainder",
        action="store_true",
        help="truncate samples so the block count divides the sample size",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("exp1", help="synthetic-data estimation error sweep")
    p1.add_argument("--config", required=True)
    p1.add_argument("--out", required=True)

    p2 = sub.add_parser("dna", help="splice-junction two-sample tests")
    p2.add_argument("--data", required=True, help="splice file (label, id, sequence per line)")
    p2.add_argument("--config", required=True)
    p2.add_argument("--out", required=True)

    p3 = sub.add_parser("estimate", help="print one estimator value for two sample CSVs")
    p3.add_argument("--estimator", required=True, choices=ESTIMATOR_NAMES)
    p3.add_argument("--kernel", required=True, help='e.g. "rbf:sigma=1" or "poly:degree=2,c=1"')
    p3.add_argument("--x", required=True, help="CSV with header 'value' or 'sequence'")
    p3.add_argument("--y", required=True)
    p3.add_argument("--q", type=int, default=1, help="block count")
    p3.add_argument("--t", type=int, default=100, help="iteration budget")
    p3.add_argument("--seed", type=int, default=0, dest="est_seed")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.drop_remainder:
        cfg = replace(cfg, drop_remainder=True)
    return cfg.validate()


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "exp1":
            cfg = _apply_overrides(load_config(args.config), args)
            if cfg.experiment == "dna":
                raise ConfigError("exp1 runs the synthetic experiments; use the dna subcommand")
            run_experiment1(cfg, args.out)
        elif args.command == "dna":
            cfg = _apply_overrides(load_config(args.config, {"data": args.data}), args)
            if cfg.experiment != "dna":
                raise ConfigError("dna subcommand needs a config with experiment='dna'")
            run_experiment2(cfg, args.out)
        else:
            kernel = parse_kernel_spec(args.kernel)
            estimator = Estimator(
                args.estimator, args.q, args.t, drop_remainder=args.drop_remainder
            )
            xs = load_sample_csv(args.x)
            ys = load_sample_csv(args.y)
            result = estimator.estimate(kernel, xs, ys, seed=args.est_seed)
            print(result.value)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except MommdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
