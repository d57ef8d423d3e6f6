"""Experiment drivers behind the CLI subcommands.

Each run_* function validates its config, does the work, writes its data
files, and returns a RunOutput describing what was produced. Commands are
deterministic functions of (config, seeds): all randomness flows from
np.random.default_rng seeded with [seed, tag] pairs, and files are written
with repr-formatted floats, so reruns are byte-identical. Wall-clock
timings go into the RunOutput, not into data files; the one deliberate
exception is the timing benchmark's timing.csv, whose payload is the
measurement itself and sits outside the byte-reproducibility contract.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .data import DataError, gaussian_corrupt, gen_toy, load_csv, split, \
    standardize_fit_apply
from .gpcheck import NONLINEARITIES, KernelMCConfig, WideNetProbe, correspondence_report
from .mc import PredictiveSamples, mc_predict, summarize_classification, \
    summarize_regression
from .metrics import mpiw, msll, nll_gaussian, picp, risk_coverage, rmse
from .models import FAMILIES, build_mlp
from .nn import EVAL, softmax
from .optim import TrainConfig, fit, grid_search
from .runio import write_csv, write_json


class ConfigError(ValueError):
    """Invalid experiment configuration; reported before any work starts."""


@dataclass
class RunOutput:
    """What a command produced: artifact paths, headline metrics, timings."""

    files: dict[str, Path]
    metrics: dict
    timings: dict[str, float]
    inputs: dict[str, Path] = field(default_factory=dict)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


def spearman_rho(xs, ys) -> float:
    """Spearman rank correlation with average ranks for ties."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("spearman_rho expects two equal-length 1-D arrays")

    def ranks(v):
        order = np.argsort(v, kind="stable")
        r = np.empty(v.size, dtype=float)
        i = 0
        while i < v.size:
            j = i
            while j + 1 < v.size and v[order[j + 1]] == v[order[i]]:
                j += 1
            r[order[i:j + 1]] = 0.5 * (i + j) + 1.0
            i = j + 1
        return r

    rx, ry = ranks(xs), ranks(ys)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        return 0.0
    return float(rx @ ry) / denom


# ---------------------------------------------------------------------------
# toy


@dataclass
class ToyConfig:
    """1-D heteroscedastic regression comparison of the three noisy models."""

    outdir: str = "runs/toy"
    n_points: int = 200
    random_x: bool = False
    hidden: int = 100
    activation: str = "relu"
    lr: float = 0.005
    epochs: int = 500
    batch_size: int = 32
    passes: int = 500
    noise_level: float = 0.05
    dropout_p: float = 0.2
    alpha_penalty_lambda: float = 0.01
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)

    def validate(self) -> None:
        _require(self.n_points >= 2, "n_points must be >= 2")
        _require(self.hidden >= 1, "hidden must be >= 1")
        _require(self.lr > 0, "lr must be > 0")
        _require(self.epochs >= 1, "epochs must be >= 1")
        _require(self.batch_size >= 1, "batch_size must be >= 1")
        _require(self.passes >= 1, "passes must be >= 1")
        _require(0 <= self.dropout_p < 1, "dropout_p must be in [0, 1)")
        _require(self.noise_level >= 0, "noise_level must be >= 0")
        _require(len(self.seeds) >= 1, "at least one seed required")


TOY_MODELS = ("noise_fixed", "noise_learned", "mc_dropout")


def _toy_build(model: str, cfg: ToyConfig, rng) -> "object":
    kwargs = {}
    if model == "mc_dropout":
        kwargs["dropout_p"] = cfg.dropout_p
    else:
        kwargs["noise_level"] = cfg.noise_level
    if model == "noise_learned":
        kwargs["alpha_penalty_lambda"] = cfg.alpha_penalty_lambda
    return build_mlp(model, 1, [cfg.hidden], 1, task="regression",
                     activation=cfg.activation, rng=rng, **kwargs)


def run_toy(cfg: ToyConfig) -> RunOutput:
    cfg.validate()
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    train_cfg = TrainConfig(optimizer="adam", lr=cfg.lr, max_epochs=cfg.epochs,
                            batch_size=cfg.batch_size, patience=0)
    have_var = cfg.passes >= 2
    pred_rows, int_rows = [], []
    per_model: dict[str, dict] = {m: {"per_seed": {}} for m in TOY_MODELS}

    for seed in cfg.seeds:
        ds = gen_toy(cfg.n_points, seed=seed, random_x=cfg.random_x)
        for tag, model in enumerate(TOY_MODELS):
            build_rng, fit_rng, mc_rng = np.random.default_rng([seed, tag]).spawn(3)
            net = _toy_build(model, cfg, build_rng)
            fit(net, ds.X, ds.Y, train_cfg, rng=fit_rng)
            samples = mc_predict(net, ds.X, cfg.passes, mc_rng)
            if have_var:
                summ = summarize_regression(samples)
                mean, sigma = summ.mean[:, 0], summ.sigma[:, 0]
                lower, upper = summ.lower[:, 0], summ.upper[:, 0]
                stats = {"picp": picp(ds.Y[:, 0], lower, upper),
                         "mpiw": mpiw(lower, upper)}
            else:
                mean = samples.values[0, :, 0]
                sigma = lower = upper = None
                stats = {"picp": None, "mpiw": None}
            per_model[model]["per_seed"][str(seed)] = stats
            for i in range(cfg.n_points):
                x, y = ds.X[i, 0], ds.Y[i, 0]
                pred_rows.append([seed, model, x, y, mean[i],
                                  sigma[i] if have_var else ""])
                if have_var:
                    int_rows.append([seed, model, x, lower[i], upper[i]])

    for model in TOY_MODELS:
        stats = per_model[model]["per_seed"].values()
        if have_var:
            per_model[model]["mean"] = {
                k: float(np.mean([s[k] for s in stats])) for k in ("picp", "mpiw")}
        else:
            per_model[model]["mean"] = {"picp": None, "mpiw": None}

    metrics: dict = {"passes": cfg.passes, "seeds": list(cfg.seeds),
                     "models": per_model}
    if have_var:
        fixed = per_model["noise_fixed"]["per_seed"]
        drop = per_model["mc_dropout"]["per_seed"]
        metrics["comparison"] = {
            "n_seeds": len(cfg.seeds),
            "mpiw_wins_fixed_vs_dropout": sum(
                fixed[s]["mpiw"] < drop[s]["mpiw"] for s in fixed),
            "picp_wins_fixed_vs_dropout": sum(
                fixed[s]["picp"] >= drop[s]["picp"] for s in fixed),
        }
    else:
        metrics["variance"] = ("unavailable: variance and intervals require "
                               "at least 2 passes (got %d)" % cfg.passes)

    files = {}
    pred_path = outdir / "predictions.csv"
    write_csv(pred_path, ["seed", "model", "x", "y", "mean", "sigma"], pred_rows)
    files["predictions.csv"] = pred_path
    if have_var:
        int_path = outdir / "intervals.csv"
        write_csv(int_path, ["seed", "model", "x", "lower", "upper"], int_rows)
        files["intervals.csv"] = int_path
    metrics_path = outdir / "metrics.json"
    write_json(metrics_path, metrics)
    files["metrics.json"] = metrics_path
    return RunOutput(files, metrics, {"total_s": time.perf_counter() - t0})


# ---------------------------------------------------------------------------
# benchmark


@dataclass
class BenchmarkConfig:
    """Grid-searched regression comparison of the four model families."""

    data: str = ""
    target: str | int | None = None
    outdir: str = "runs/benchmark"
    hidden: tuple[int, ...] = (50, 50)
    activation: str = "relu"
    lr_grid: tuple[float, ...] = (0.0001, 0.0005, 0.001, 0.002)
    weight_decay_grid: tuple[float, ...] = (0.1, 0.01, 0.001, 1e-4, 1e-5, 1e-9)
    dropout_grid: tuple[float, ...] = (0.001, 0.005, 0.01, 0.05, 0.1, 0.2)
    noise_grid: tuple[float, ...] = (0.001, 0.005, 0.01, 0.05, 0.1)
    alpha_init_grid: tuple[float, ...] = (0.001, 0.005, 0.01, 0.05, 0.1)
    batch_size: int = 32
    max_epochs: int = 2000
    patience: int = 3
    passes: int = 100
    val_passes: int = 1
    split_fractions: tuple[float, float, float] = (0.8, 0.1, 0.1)
    families: tuple[str, ...] = FAMILIES
    seed: int = 0

    def validate(self) -> None:
        _require(bool(self.data), "benchmark requires a dataset path (data=...)")
        for name in ("lr_grid", "weight_decay_grid", "dropout_grid",
                     "noise_grid", "alpha_init_grid"):
            _require(len(getattr(self, name)) >= 1, f"{name} must be non-empty")
        _require(all(lr > 0 for lr in self.lr_grid), "learning rates must be > 0")
        _require(self.batch_size >= 1, "batch_size must be >= 1")
        _require(self.max_epochs >= 1, "max_epochs must be >= 1")
        _require(self.patience >= 0, "patience must be >= 0")
        _require(self.passes >= 2, "passes must be >= 2 for interval metrics")
        _require(self.val_passes >= 1, "val_passes must be >= 1")
        unknown = set(self.families) - set(FAMILIES)
        _require(not unknown, f"unknown families: {sorted(unknown)}")
        _require(len(self.families) >= 1, "at least one family required")


LEADERBOARD_HEADER = ["family", "lr", "weight_decay", "dropout_p", "noise_level",
                      "alpha_init", "val_loss", "test_rmse", "test_nll",
                      "test_picp", "test_mpiw"]


def _family_grid(cfg: BenchmarkConfig, family: str) -> dict:
    grid = {"lr": list(cfg.lr_grid), "weight_decay": list(cfg.weight_decay_grid)}
    if family == "mc_dropout":
        grid["dropout_p"] = list(cfg.dropout_grid)
    elif family == "noise_fixed":
        grid["noise_level"] = list(cfg.noise_grid)
    elif family == "noise_learned":
        grid["alpha_init"] = list(cfg.alpha_init_grid)
    return grid


def run_benchmark(cfg: BenchmarkConfig) -> RunOutput:
    cfg.validate()
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    dataset = load_csv(cfg.data, target=cfg.target, task="regression")
    train, val, test = split(dataset, cfg.split_fractions, seed=cfg.seed)
    train, val, test = standardize_fit_apply(train, val, test)

    in_dim = train.X.shape[1]
    rows = []
    best_per_family: dict[str, dict] = {}
    nll_store: dict[tuple[str, int], np.ndarray] = {}

    for family in cfg.families:
        def evaluate(config: dict, rng, family=family) -> dict:
            build_rng, fit_rng, mc_rng = rng.spawn(3)
            kwargs = {}
            if family == "mc_dropout":
                kwargs["dropout_p"] = config["dropout_p"]
            elif family == "noise_fixed":
                kwargs["noise_level"] = config["noise_level"]
            elif family == "noise_learned":
                kwargs["noise_level"] = config["alpha_init"]
            net = build_mlp(family, in_dim, list(cfg.hidden), 1,
                            task="regression", activation=cfg.activation,
                            rng=build_rng, **kwargs)
            tc = TrainConfig(optimizer="adam", lr=config["lr"],
                             weight_decay=config["weight_decay"],
                             max_epochs=cfg.max_epochs, batch_size=cfg.batch_size,
                             patience=cfg.patience, val_passes=cfg.val_passes)
            result = fit(net, train.X, train.Y, tc, val.X, val.Y, rng=fit_rng)
            summ = summarize_regression(mc_predict(net, test.X, cfg.passes, mc_rng))
            y = test.Y[:, 0]
            nll = nll_gaussian(y, summ.mean[:, 0], summ.sigma[:, 0])
            out = {"val_loss": result.best_val_loss,
                   "test_rmse": rmse(summ.mean[:, 0], y),
                   "test_nll": nll.total,
                   "test_picp": picp(y, summ.lower[:, 0], summ.upper[:, 0]),
                   "test_mpiw": mpiw(summ.lower[:, 0], summ.upper[:, 0]),
                   "_nll_per_point": nll.per_point}
            return out

        result = grid_search(evaluate, _family_grid(cfg, family), seed=cfg.seed)
        for row in result.rows:
            nll_store[(family, row["config_index"])] = row.pop("_nll_per_point")
            rows.append([family,
                         row["lr"], row["weight_decay"],
                         row.get("dropout_p", ""), row.get("noise_level", ""),
                         row.get("alpha_init", ""),
                         row["val_loss"], row["test_rmse"], row["test_nll"],
                         row["test_picp"], row["test_mpiw"]])
        best_per_family[family] = result.best

    metrics: dict = {"data": str(cfg.data), "passes": cfg.passes,
                     "seed": cfg.seed, "families": {}}
    baseline_nll = None
    if "mc_dropout" in best_per_family:
        b = best_per_family["mc_dropout"]
        baseline_nll = nll_store[("mc_dropout", b["config_index"])]
    for family in cfg.families:
        best = dict(best_per_family[family])
        best.pop("_nll_per_point", None)
        entry = {k: v for k, v in best.items()}
        if baseline_nll is not None:
            own = nll_store[(family, best["config_index"])]
            entry["msll_vs_mc_dropout"] = msll(own, baseline_nll)
        metrics["families"][family] = entry
    if "noise_fixed" in metrics["families"] and "deterministic" in metrics["families"]:
        det = metrics["families"]["deterministic"]["test_rmse"]
        fx = metrics["families"]["noise_fixed"]["test_rmse"]
        metrics["rmse_ratio_fixed_vs_deterministic"] = (
            fx / det if det > 0 else float("inf"))

    lead_path = outdir / "leaderboard.csv"
    write_csv(lead_path, LEADERBOARD_HEADER, rows)
    metrics_path = outdir / "metrics.json"
    write_json(metrics_path, metrics)
    files = {"leaderboard.csv": lead_path, "metrics.json": metrics_path}
    return RunOutput(files, metrics, {"total_s": time.perf_counter() - t0},
                     inputs={"data": Path(cfg.data)})


# ---------------------------------------------------------------------------
# riskcov


@dataclass
class RiskCovConfig:
    """Selective-prediction curve from prediction and uncertainty files."""

    pred_file: str = ""
    unc_file: str = ""
    risk_kind: str = "rmse"
    coverage_grid: tuple[float, ...] = tuple(round(0.05 * k, 2) for k in range(1, 21))
    outdir: str = "runs/riskcov"

    def validate(self) -> None:
        _require(bool(self.pred_file), "riskcov requires pred_file=...")
        _require(bool(self.unc_file), "riskcov requires unc_file=...")
        _require(self.risk_kind in ("rmse", "error_rate", "accuracy"),
                 f"unknown risk_kind {self.risk_kind!r}")
        _require(len(self.coverage_grid) >= 1, "coverage_grid must be non-empty")


def _read_columns(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            cols = {name.strip(): [] for name in header}
            names = [name.strip() for name in header]
            for lineno, row in enumerate(reader, start=2):
                if len(row) != len(names):
                    raise DataError(f"{path}: row {lineno} has {len(row)} fields, "
                                    f"expected {len(names)}")
                for name, cell in zip(names, row):
                    try:
                        cols[name].append(float(cell))
                    except ValueError:
                        raise DataError(f"{path}: row {lineno}, column {name!r}: "
                                        f"not numeric: {cell!r}") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    missing = [name for name in required if name not in cols]
    if missing:
        raise DataError(f"{path}: missing required columns {missing} "
                        f"(found {names})")
    return {name: np.asarray(vals, dtype=float) for name, vals in cols.items()}


def run_riskcov(cfg: RiskCovConfig) -> RunOutput:
    cfg.validate()
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    preds = _read_columns(cfg.pred_file, ("pred", "target"))
    uncs = _read_columns(cfg.unc_file, ("uncertainty",))
    pred, target = preds["pred"], preds["target"]
    unc = uncs["uncertainty"]
    if len(pred) != len(unc):
        raise DataError(f"misaligned inputs: {cfg.pred_file} has {len(pred)} rows, "
                        f"{cfg.unc_file} has {len(unc)}")

    kwargs: dict = {}
    if cfg.risk_kind == "rmse":
        kwargs = {"pred": pred, "target": target}
    else:
        kwargs = {"correct": pred == target}
    curve = risk_coverage(unc, risk_kind=cfg.risk_kind,
                          coverage_grid=cfg.coverage_grid, **kwargs)

    curve_path = outdir / "curve.csv"
    write_csv(curve_path, ["coverage", "risk"],
              [[c, r] for c, r in curve.points])
    metrics = {"risk_kind": cfg.risk_kind, "n_points": int(len(pred)),
               "risk_at_full_coverage": float(curve.risks[-1])}
    metrics_path = outdir / "metrics.json"
    write_json(metrics_path, metrics)
    files = {"curve.csv": curve_path, "metrics.json": metrics_path}
    return RunOutput(files, metrics, {"total_s": time.perf_counter() - t0},
                     inputs={"pred_file": Path(cfg.pred_file),
                             "unc_file": Path(cfg.unc_file)})


# ---------------------------------------------------------------------------
# noise sweep


@dataclass
class SweepConfig:
    """Input-corruption sweep of a small noisy classifier."""

    outdir: str = "runs/noise_sweep"
    sigmas: tuple[float, ...] = (0.0, 0.05, 0.1, 0.2, 0.4)
    passes: int = 100
    n_eval: int = 20
    n_train: int = 240
    hidden: tuple[int, ...] = (32,)
    activation: str = "relu"
    noise_level: float = 0.05
    lr: float = 0.01
    epochs: int = 300
    batch_size: int = 32
    seeds: tuple[int, ...] = (0, 1, 2)

    def validate(self) -> None:
        _require(len(self.sigmas) >= 2, "need at least 2 sigma values")
        _require(all(s >= 0 for s in self.sigmas), "sigmas must be >= 0")
        _require(self.passes >= 2, "passes must be >= 2")
        _require(self.n_eval >= 1, "n_eval must be >= 1")
        _require(self.n_train >= 4, "n_train must be >= 4")
        _require(self.epochs >= 1, "epochs must be >= 1")
        _require(len(self.seeds) >= 1, "at least one seed required")


def gen_blobs(n: int, seed_key, spread: float = 0.7):
    """Two 2-D Gaussian blobs at (-1,-1) and (+1,+1), balanced labels."""
    rng = np.random.default_rng(seed_key)
    labels = np.arange(n) % 2
    centers = np.where(labels[:, None] == 0, -1.0, 1.0)
    X = centers + spread * rng.standard_normal((n, 2))
    return X, labels.astype(np.int64)


def corrupted_predict(net, X, sigma: float, T: int, rng) -> PredictiveSamples:
    """T forward passes, each on a fresh Gaussian corruption of X.

    Weight noise stays active, so the predictive distribution marginalizes
    over input corruption and weight noise together. At sigma=0 every pass
    sees X bit-exactly, reducing to a clean prediction.
    """
    probs = net.task == "classification" and not net.outputs_probabilities
    values = None
    for t, stream in enumerate(rng.spawn(T)):
        corrupt_rng, pass_rng = stream.spawn(2)
        Xc = gaussian_corrupt(X, sigma, corrupt_rng)
        out, _ = net.forward(Xc, mode=EVAL, rng=pass_rng)
        if probs:
            out = softmax(out)
        if values is None:
            values = np.empty((T,) + out.shape)
        values[t] = out
    return PredictiveSamples(values=values, task=net.task, lineage=None)


def run_noise_sweep(cfg: SweepConfig) -> RunOutput:
    cfg.validate()
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    train_cfg = TrainConfig(optimizer="adam", lr=cfg.lr, max_epochs=cfg.epochs,
                            batch_size=cfg.batch_size, patience=0)
    rows = []
    per_seed: dict[str, dict] = {}
    for seed in cfg.seeds:
        X_train, y_train = gen_blobs(cfg.n_train, [seed, 11])
        X_eval, y_eval = gen_blobs(cfg.n_eval, [seed, 12])
        build_rng, fit_rng = np.random.default_rng([seed, 10]).spawn(2)
        net = build_mlp("noise_fixed", 2, list(cfg.hidden), 2,
                        task="classification", activation=cfg.activation,
                        rng=build_rng, noise_level=cfg.noise_level)
        fit(net, X_train, y_train, train_cfg, rng=fit_rng)

        sweep_streams = np.random.default_rng([seed, 13]).spawn(len(cfg.sigmas))
        mean_entropy = []
        for sigma, stream in zip(cfg.sigmas, sweep_streams):
            summ = summarize_classification(
                corrupted_predict(net, X_eval, sigma, cfg.passes, stream))
            mean_entropy.append(float(np.mean(summ.entropy)))
            for i in range(cfg.n_eval):
                rows.append([seed, sigma, i, int(y_eval[i]),
                             int(summ.predicted[i]), summ.entropy[i],
                             summ.mean_probs[i, 0], summ.mean_probs[i, 1]])
        rho = spearman_rho(cfg.sigmas, mean_entropy)
        per_seed[str(seed)] = {"mean_entropy_per_sigma": mean_entropy,
                               "spearman_rho": rho}

    metrics = {"sigmas": list(cfg.sigmas), "passes": cfg.passes,
               "per_seed": per_seed,
               "mean_spearman_rho": float(np.mean(
                   [v["spearman_rho"] for v in per_seed.values()]))}
    sweep_path = outdir / "sweep.csv"
    write_csv(sweep_path, ["seed", "sigma", "point", "label", "predicted",
                           "entropy", "mean_p0", "mean_p1"], rows)
    metrics_path = outdir / "metrics.json"
    write_json(metrics_path, metrics)
    files = {"sweep.csv": sweep_path, "metrics.json": metrics_path}
    return RunOutput(files, metrics, {"total_s": time.perf_counter() - t0})


# ---------------------------------------------------------------------------
# bench-time


@dataclass
class TimingConfig:
    """Wall-clock inference timing over repeated T-pass predictions."""

    outdir: str = "runs/bench_time"
    batch: int = 500
    input_dim: int = 10
    hidden: tuple[int, ...] = (50, 50)
    t_list: tuple[int, ...] = (1, 10, 100)
    reps: int = 10
    noise_level: float = 0.05
    dropout_p: float = 0.2
    families: tuple[str, ...] = ("deterministic", "noise_fixed", "mc_dropout")
    seed: int = 0

    def validate(self) -> None:
        _require(self.batch >= 1, "batch must be >= 1")
        _require(self.reps >= 2, "reps must be >= 2 to report a std")
        _require(all(t >= 1 for t in self.t_list), "passes must be >= 1")
        _require(len(self.t_list) >= 1, "t_list must be non-empty")
        unknown = set(self.families) - set(FAMILIES)
        _require(not unknown, f"unknown families: {sorted(unknown)}")


def run_bench_time(cfg: TimingConfig) -> RunOutput:
    cfg.validate()
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    X = np.random.default_rng([cfg.seed, 99]).standard_normal(
        (cfg.batch, cfg.input_dim))
    rows = []
    measured: dict[str, dict[str, float]] = {}
    for fam_idx, family in enumerate(cfg.families):
        net = build_mlp(family, cfg.input_dim, list(cfg.hidden), 1,
                        rng=np.random.default_rng([cfg.seed, fam_idx]),
                        noise_level=cfg.noise_level, dropout_p=cfg.dropout_p)
        t_values = (1,) if family == "deterministic" else cfg.t_list
        for T in t_values:
            times = []
            for rep in range(cfg.reps):
                rng = np.random.default_rng([cfg.seed, fam_idx, T, rep])
                tic = time.perf_counter()
                mc_predict(net, X, T, rng)
                times.append(time.perf_counter() - tic)
            mean_s = float(np.mean(times))
            std_s = float(np.std(times))
            rows.append([family, T, f"{mean_s:.4f}", f"{std_s:.4f}"])
            measured[f"{family}/T={T}"] = {"mean_s": mean_s, "std_s": std_s}

    timing_path = outdir / "timing.csv"
    write_csv(timing_path, ["model", "passes", "mean_seconds", "std_seconds"],
              rows)
    # measurements live under timings (excluded from the determinism
    # contract), keeping the manifest's results block rerun-stable
    metrics = {"batch": cfg.batch, "reps": cfg.reps,
               "families": list(cfg.families), "t_list": list(cfg.t_list)}
    files = {"timing.csv": timing_path}
    return RunOutput(files, metrics,
                     {"total_s": time.perf_counter() - t0, **measured})


# ---------------------------------------------------------------------------
# gpcheck


@dataclass
class GpCheckConfig:
    """Wide-network covariance vs Monte Carlo kernel comparison."""

    outdir: str = "runs/gpcheck"
    nonlinearity: str = "relu"
    bias_std: float = 1.0
    n_samples: int = 1_000_000
    n_networks: int = 10_000
    width: int = 4096
    widths: tuple[int, ...] = (64, 512, 4096)
    probes: tuple[tuple[float, ...], ...] = ((1.0, 0.5), (0.8, 0.6), (0.6, 1.0))
    seeds: tuple[int, ...] = (0,)

    def validate(self) -> None:
        _require(self.nonlinearity in NONLINEARITIES,
                 f"nonlinearity must be one of {NONLINEARITIES}")
        _require(self.bias_std >= 0, "bias_std must be >= 0")
        _require(self.n_samples >= 1, "n_samples must be >= 1")
        _require(self.n_networks >= 2, "n_networks must be >= 2")
        _require(self.width >= 1 and all(w >= 1 for w in self.widths),
                 "widths must be >= 1")
        _require(len(self.probes) >= 2, "need at least 2 probe inputs")
        dims = {len(p) for p in self.probes}
        _require(len(dims) == 1, "probe inputs must share one dimension")


def run_gpcheck(cfg: GpCheckConfig) -> RunOutput:
    cfg.validate()
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()

    input_dim = len(cfg.probes[0])
    rows = []
    per_seed = {}
    for seed in cfg.seeds:
        probe = WideNetProbe(width=cfg.width, n_networks=cfg.n_networks,
                             probe_inputs=cfg.probes, seed=seed)
        kcfg = KernelMCConfig(n_samples=cfg.n_samples,
                              nonlinearity=cfg.nonlinearity,
                              bias_std=cfg.bias_std, input_dim=input_dim,
                              seed=seed)
        report = correspondence_report(probe, kcfg,
                                       np.random.default_rng([seed, 17]),
                                       widths=cfg.widths)
        for entry in report.convergence:
            rows.append([entry["width"], entry["n_networks"],
                         entry["max_rel_deviation"], seed])
        per_seed[str(seed)] = {
            "max_rel_deviation": report.max_rel_deviation,
            "convergence": report.convergence}

    conv_path = outdir / "convergence.csv"
    write_csv(conv_path, ["width", "n_networks", "max_rel_dev", "seed"], rows)
    metrics = {"nonlinearity": cfg.nonlinearity, "bias_std": cfg.bias_std,
               "width": cfg.width, "per_seed": per_seed}
    metrics_path = outdir / "metrics.json"
    write_json(metrics_path, metrics)
    files = {"convergence.csv": conv_path, "metrics.json": metrics_path}
    return RunOutput(files, metrics, {"total_s": time.perf_counter() - t0})


def config_to_dict(cfg) -> dict:
    """Resolved-config view for manifests; tuples become lists."""
    out = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out
