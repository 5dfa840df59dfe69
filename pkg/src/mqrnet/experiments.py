"""Experiment runners: Monte-Carlo model comparison, paired-seed
convergence race, and the forward-pass complexity benchmark.

Every runner is a pure function of its config: datasets, model weights,
and batch orders all derive from the base seed, so rerunning a config
reproduces every output byte (wall-clock timings live in a separate
``timing.json``).  Output layout per experiment:

    <out>/config.json    resolved configuration
    <out>/runs.csv       one row per (run, model) record
    <out>/summary.json   aggregate statistics
    <out>/timing.json    wall-clock only (excluded from determinism)
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .datasets import Dataset, generate, load_csv, split
from .distributions import named_distribution
from .errors import TrainingDivergenceError
from .losses import QuantileGrid, default_grid
from .metrics import evaluate_predictions
from .models import ModelSpec, as_sorted_eval, build_model
from .rng import Rng, derive_seed
from .sorting import SortMode
from .training import EarlyStopping, MaxEpochs, Threshold, TrainConfig, fit

DEFAULT_WIDTHS = {0: (4, 4), 1: (5, 5), 2: (5, 5)}


@dataclass(frozen=True)
class Experiment1Config:
    """Monte-Carlo comparison of the model families on the nine synthetic
    datasets (three examples x three error laws)."""

    runs: int = 100
    base_seed: int = 0
    families: tuple[str, ...] = ("cqrnn", "cqrnnse", "scqrnn", "mcqrnn")
    examples: tuple[int, ...] = (0, 1, 2)
    dists: tuple[str, ...] = ("normal", "t", "chi2")
    n_samples: int = 600
    widths: tuple[int, ...] | None = None  # None: per-example defaults (4,4) / (5,5)
    lr: float = 0.01
    weight_decay: float = 0.05
    batch_size: int = 16
    patience: int = 20
    max_epochs: int = 2000
    smoothing: float | None = None
    sort_kind: str = "hard"
    sort_epsilon: float = 0.1
    activation: str = "tanh"

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


@dataclass(frozen=True)
class Experiment2Config:
    """Paired-seed convergence race between SCQRNN and CQRNN.

    Both models start every run from identical weights and see identical
    batch orders; the run records how many epochs each needs to push the
    validation loss below the threshold.  The default dataset is a
    synthetic stand-in (example 2, normal errors); point ``csv_path`` at a
    real dataset to race on external data instead.
    """

    runs: int = 100
    base_seed: int = 0
    csv_path: str | None = None
    target_column: str = "y"
    example: int = 2
    dist: str = "normal"
    n_samples: int = 600
    widths: tuple[int, ...] = (64, 32, 16)
    lr: float = 1e-3
    weight_decay: float = 0.005
    batch_size: int = 16
    threshold: float = 0.87
    max_epochs: int = 500
    smoothing: float | None = None
    sort_kind: str = "hard"
    sort_epsilon: float = 0.1
    activation: str = "tanh"

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")


PAPER_SCALE_EXP2 = {"widths": (600, 300, 150), "lr": 1e-4, "weight_decay": 0.005,
                    "threshold": 0.05, "max_epochs": 2000}


@dataclass(frozen=True)
class BenchConfig:
    """Forward-pass timing grid over hidden width L and level count T."""

    layer_sizes: tuple[int, ...] = (16, 32, 64, 128)
    t_values: tuple[int, ...] = (8, 16, 32, 64)
    reps: int = 200
    warmup: int = 20
    n_features: int = 16
    hidden_layers: int = 2
    base_seed: int = 0


@dataclass
class RunRecord:
    run: int
    seed: int
    family: str
    example: str
    dist: str
    rmse: float | None
    reliability: float | None
    epochs: int
    stop_reason: str

    def to_csv_row(self) -> list[str]:
        return [
            str(self.run), str(self.seed), self.family, self.example, self.dist,
            "" if self.rmse is None else repr(self.rmse),
            "" if self.reliability is None else repr(self.reliability),
            str(self.epochs), self.stop_reason,
        ]


RUNS_CSV_COLUMNS = ["run", "seed", "family", "example", "dist",
                    "rmse", "reliability", "epochs", "stop_reason"]


def _grid_for(t: int) -> QuantileGrid:
    return QuantileGrid((np.arange(t) + 1.0) / (t + 1.0))


def _spec(family: str, n_features: int, widths, grid, cfg) -> ModelSpec:
    return ModelSpec(
        family=family,
        n_features=n_features,
        hidden_widths=tuple(widths),
        grid=grid,
        activation=cfg.activation,
        sort_mode=SortMode(cfg.sort_kind, cfg.sort_epsilon),
        smoothing=cfg.smoothing,
    )


def run_experiment1(cfg: Experiment1Config, out_dir=None) -> list[RunRecord]:
    grid = default_grid()
    records: list[RunRecord] = []
    start = time.perf_counter()
    train_cqrnn = "cqrnn" in cfg.families or "cqrnnse" in cfg.families

    for run in range(cfg.runs):
        for example in cfg.examples:
            for dist_name in cfg.dists:
                dist = named_distribution(dist_name)
                data_rng = Rng(derive_seed(cfg.base_seed, "data", run, example, dist_name))
                dataset = generate(example, dist, cfg.n_samples, data_rng, grid=grid)
                tr, va, te = split(dataset, (1 / 3, 1 / 3, 1 / 3),
                                   Rng(derive_seed(cfg.base_seed, "split", run, example, dist_name)))
                widths = cfg.widths if cfg.widths is not None else DEFAULT_WIDTHS[example]
                model_seed = derive_seed(cfg.base_seed, "model", run, example, dist_name)
                train_cfg = TrainConfig(
                    lr=cfg.lr, weight_decay=cfg.weight_decay, batch_size=cfg.batch_size,
                    stop_rules=(EarlyStopping(cfg.patience), MaxEpochs(cfg.max_epochs)),
                    seed=derive_seed(cfg.base_seed, "fit", run, example, dist_name),
                    smoothing=cfg.smoothing,
                )

                def record(family, model, report):
                    ev = evaluate_predictions(model.predict(te.X), te.y, grid, te.ideal)
                    records.append(RunRecord(
                        run=run, seed=model_seed, family=family, example=str(example),
                        dist=dist_name, rmse=ev.rmse, reliability=ev.overall_reliability,
                        epochs=report.epochs_run, stop_reason=report.stop_reason,
                    ))

                def record_failure(family, epoch):
                    records.append(RunRecord(
                        run=run, seed=model_seed, family=family, example=str(example),
                        dist=dist_name, rmse=None, reliability=None,
                        epochs=epoch or 0, stop_reason="diverged",
                    ))

                if train_cqrnn:
                    model = build_model(_spec("cqrnn", dataset.n_features, widths, grid, cfg), model_seed)
                    try:
                        report = fit(model, tr, va, train_cfg)
                    except TrainingDivergenceError as err:
                        for fam in ("cqrnn", "cqrnnse"):
                            if fam in cfg.families:
                                record_failure(fam, err.epoch)
                    else:
                        # post hoc sorting shares the trained network and its report
                        if "cqrnn" in cfg.families:
                            record("cqrnn", model, report)
                        if "cqrnnse" in cfg.families:
                            record("cqrnnse", as_sorted_eval(model), report)
                for family in ("scqrnn", "mcqrnn"):
                    if family not in cfg.families:
                        continue
                    model = build_model(_spec(family, dataset.n_features, widths, grid, cfg), model_seed)
                    try:
                        report = fit(model, tr, va, train_cfg)
                    except TrainingDivergenceError as err:
                        record_failure(family, err.epoch)
                    else:
                        record(family, model, report)

    elapsed = time.perf_counter() - start
    if out_dir is not None:
        _write_outputs(out_dir, _config_dict("exp1", cfg), records,
                       _summarize_exp1(cfg, records), elapsed)
    return records


def _summarize_exp1(cfg: Experiment1Config, records: list[RunRecord]) -> dict:
    cells = {}
    for family in cfg.families:
        for example in cfg.examples:
            for dist_name in cfg.dists:
                rows = [r for r in records
                        if r.family == family and r.example == str(example) and r.dist == dist_name]
                ok = [r for r in rows if r.stop_reason != "diverged"]
                cell = {"n": len(rows), "failures": len(rows) - len(ok)}
                for metric in ("rmse", "reliability"):
                    vals = np.array([getattr(r, metric) for r in ok], dtype=np.float64)
                    if vals.size:
                        cell[metric] = {
                            "median": float(np.median(vals)),
                            "q05": float(np.quantile(vals, 0.05)),
                            "q95": float(np.quantile(vals, 0.95)),
                        }
                cell["median_epochs"] = float(np.median([r.epochs for r in ok])) if ok else None
                cells[f"{family}/example{example}/{dist_name}"] = cell
    return {"experiment": "exp1", "cells": cells}


def _load_exp2_dataset(cfg: Experiment2Config) -> Dataset:
    if cfg.csv_path is not None:
        return load_csv(cfg.csv_path, cfg.target_column)
    dist = named_distribution(cfg.dist)
    return generate(cfg.example, dist, cfg.n_samples,
                    Rng(derive_seed(cfg.base_seed, "data")))


def run_experiment2(cfg: Experiment2Config, out_dir=None) -> list[RunRecord]:
    grid = default_grid()
    dataset = _load_exp2_dataset(cfg)
    tr, va, _ = split(dataset, (1 / 3, 1 / 3, 1 / 3), Rng(derive_seed(cfg.base_seed, "split")))
    example_label = "csv" if cfg.csv_path is not None else str(cfg.example)
    dist_label = "csv" if cfg.csv_path is not None else cfg.dist

    records: list[RunRecord] = []
    start = time.perf_counter()
    for run in range(cfg.runs):
        model_seed = derive_seed(cfg.base_seed, "run", run)
        batch_seed = derive_seed(cfg.base_seed, "batch", run)
        train_cfg = TrainConfig(
            lr=cfg.lr, weight_decay=cfg.weight_decay, batch_size=cfg.batch_size,
            stop_rules=(Threshold(cfg.threshold), MaxEpochs(cfg.max_epochs)),
            seed=batch_seed, smoothing=cfg.smoothing,
        )
        for family in ("scqrnn", "cqrnn"):
            model = build_model(_spec(family, dataset.n_features, cfg.widths, grid, cfg), model_seed)
            try:
                report = fit(model, tr, va, train_cfg)
                records.append(RunRecord(
                    run=run, seed=model_seed, family=family, example=example_label,
                    dist=dist_label, rmse=None, reliability=None,
                    epochs=report.epochs_run, stop_reason=report.stop_reason,
                ))
            except TrainingDivergenceError as err:
                records.append(RunRecord(
                    run=run, seed=model_seed, family=family, example=example_label,
                    dist=dist_label, rmse=None, reliability=None,
                    epochs=err.epoch or 0, stop_reason="diverged",
                ))

    elapsed = time.perf_counter() - start
    if out_dir is not None:
        _write_outputs(out_dir, _config_dict("exp2", cfg), records,
                       summarize_exp2(records), elapsed)
    return records


def summarize_exp2(records: list[RunRecord]) -> dict:
    """Per-model epoch statistics plus the faster-model tally.

    Runs that hit the epoch cap or diverged are kept (flagged), so the
    tally always partitions: faster(SCQRNN) + faster(CQRNN) + ties = runs.
    """
    by_family = {}
    for family in ("scqrnn", "cqrnn"):
        rows = sorted((r for r in records if r.family == family), key=lambda r: r.run)
        epochs = np.array([r.epochs for r in rows], dtype=np.float64)
        by_family[family] = {
            "median_epochs": float(np.median(epochs)),
            "mean_epochs": float(np.mean(epochs)),
            "std_epochs": float(np.std(epochs, ddof=1)) if epochs.size > 1 else 0.0,
            "capped_runs": sum(1 for r in rows if r.stop_reason != "threshold"),
        }
    s_rows = {r.run: r.epochs for r in records if r.family == "scqrnn"}
    c_rows = {r.run: r.epochs for r in records if r.family == "cqrnn"}
    faster_s = sum(1 for run in s_rows if s_rows[run] < c_rows[run])
    faster_c = sum(1 for run in s_rows if c_rows[run] < s_rows[run])
    ties = len(s_rows) - faster_s - faster_c
    return {
        "experiment": "exp2",
        "models": by_family,
        "runs": len(s_rows),
        "faster": {"scqrnn": faster_s, "cqrnn": faster_c, "ties": ties},
    }


def run_complexity_bench(cfg: BenchConfig, out_dir=None) -> list[dict]:
    """Median forward-pass wall time of SCQRNN vs MCQRNN on a single
    sample, across the (L, T) grid.  MCQRNN evaluates once per level, so
    its cost is expected to scale with T relative to SCQRNN."""
    rows = []
    raw = {}
    start = time.perf_counter()
    for L in cfg.layer_sizes:
        for t in cfg.t_values:
            grid = _grid_for(t)
            widths = tuple([L] * cfg.hidden_layers)
            seed = derive_seed(cfg.base_seed, "bench", L, t)
            scqrnn = build_model(ModelSpec("scqrnn", cfg.n_features, widths, grid), seed)
            mcqrnn = build_model(ModelSpec("mcqrnn", cfg.n_features, widths, grid), seed)
            x = Rng(derive_seed(cfg.base_seed, "bench-x", L, t)).normal(cfg.n_features).reshape(1, -1)
            s_times = _time_forward(scqrnn, x, cfg.reps, cfg.warmup)
            m_times = _time_forward(mcqrnn, x, cfg.reps, cfg.warmup)
            s_med, m_med = float(np.median(s_times)), float(np.median(m_times))
            rows.append({"L": L, "T": t, "scqrnn_ns": s_med, "mcqrnn_ns": m_med,
                         "ratio": m_med / s_med})
            raw[f"L{L}_T{t}"] = {"scqrnn_ns": s_times.tolist(), "mcqrnn_ns": m_times.tolist()}
    elapsed = time.perf_counter() - start

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _dump_json(out / "config.json", _config_dict("bench", cfg))
        with open(out / "bench.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["L", "T", "scqrnn_ns", "mcqrnn_ns", "ratio"])
            for row in rows:
                writer.writerow([row["L"], row["T"], repr(row["scqrnn_ns"]),
                                 repr(row["mcqrnn_ns"]), repr(row["ratio"])])
        _dump_json(out / "bench_raw.json", raw)
        _dump_json(out / "timing.json", {"wall_clock_seconds": elapsed})
    return rows


def _time_forward(model, x: np.ndarray, reps: int, warmup: int) -> np.ndarray:
    for _ in range(warmup):
        model.predict(x)
    times = np.empty(reps)
    for i in range(reps):
        t0 = time.perf_counter_ns()
        model.predict(x)
        times[i] = time.perf_counter_ns() - t0
    return times


def _config_dict(experiment: str, cfg) -> dict:
    d = asdict(cfg)
    d["experiment"] = experiment
    return d


def _write_outputs(out_dir, config: dict, records: list[RunRecord], summary: dict, elapsed: float):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _dump_json(out / "config.json", config)
    with open(out / "runs.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUNS_CSV_COLUMNS)
        for r in records:
            writer.writerow(r.to_csv_row())
    _dump_json(out / "summary.json", summary)
    _dump_json(out / "timing.json", {"wall_clock_seconds": elapsed})


def _dump_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")
