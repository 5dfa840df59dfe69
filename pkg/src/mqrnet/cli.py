"""Command-line driver.

Subcommands: ``gen-data``, ``train``, ``eval``, ``exp1``, ``exp2``,
``bench``, ``sort-check``.  Values resolve in order: built-in default,
then ``--config`` JSON file, then an explicit flag.  Failures print a
machine-readable JSON error to stderr and exit 1; usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import checks
from .datasets import generate, load_csv, save_csv, split, write_meta_sidecar
from .distributions import named_distribution
from .errors import MqrError
from .experiments import (PAPER_SCALE_EXP2, BenchConfig, Experiment1Config,
                          Experiment2Config, run_complexity_bench,
                          run_experiment1, run_experiment2)
from .losses import default_grid
from .metrics import EvalResult, evaluate_predictions
from .models import FAMILIES, ModelSpec, build_model, load_model, save_model
from .rng import Rng, derive_seed
from .sorting import SortMode
from .training import EarlyStopping, MaxEpochs, Threshold, TrainConfig, fit


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (MqrError, OSError, ValueError, FloatingPointError) as err:
        json.dump({"error": type(err).__name__, "message": str(err)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    common.add_argument("--config", type=str, default=None, help="JSON config file")
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="json",
                        help="output format where both are supported")

    parser = argparse.ArgumentParser(prog="mqrnet",
                                     description="Multi-quantile regression networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[common], help="generate a synthetic dataset CSV")
    p.add_argument("--example", type=int, choices=(0, 1, 2), required=True)
    p.add_argument("--dist", choices=("normal", "t", "chi2"), required=True)
    p.add_argument("--n", type=int, default=600)
    p.set_defaults(handler=_cmd_gen_data)

    p = sub.add_parser("train", parents=[common], help="train one model")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--family", choices=FAMILIES, default="scqrnn")
    p.add_argument("--threshold", type=float, default=None, help="stop when validation loss < value")
    p.add_argument("--patience", type=int, default=20)
    p.add_argument("--max-epochs", type=int, default=2000)
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("eval", parents=[common], help="evaluate a saved model")
    p.add_argument("--model", type=str, required=True)
    _add_data_flags(p)
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("exp1", parents=[common], help="Monte-Carlo model comparison")
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--families", type=str, default=None, help="comma list, e.g. cqrnn,scqrnn")
    p.add_argument("--examples", type=str, default=None, help="comma list of 0,1,2")
    p.add_argument("--dists", type=str, default=None, help="comma list of normal,t,chi2")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--widths", type=str, default=None, help="comma list; default per-example")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--weight-decay", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--max-epochs", type=int, default=None)
    p.add_argument("--smoothing", type=float, default=None)
    p.add_argument("--sort", choices=("hard", "soft"), default=None)
    p.add_argument("--sort-epsilon", type=float, default=None)
    p.set_defaults(handler=_cmd_exp1)

    p = sub.add_parser("exp2", parents=[common], help="paired-seed convergence race")
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--csv", type=str, default=None, help="race on an external CSV dataset")
    p.add_argument("--target", type=str, default=None)
    p.add_argument("--example", type=int, choices=(0, 1, 2), default=None)
    p.add_argument("--dist", choices=("normal", "t", "chi2"), default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--widths", type=str, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--weight-decay", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--max-epochs", type=int, default=None)
    p.add_argument("--paper-scale", action="store_true",
                   help="full-scale preset: widths 600,300,150, lr 1e-4, threshold 0.05")
    p.set_defaults(handler=_cmd_exp2)

    p = sub.add_parser("bench", parents=[common], help="forward-pass complexity benchmark")
    p.add_argument("--sizes", type=str, default=None, help="comma list of hidden widths L")
    p.add_argument("--taus", type=str, default=None, help="comma list of level counts T")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--warmup", type=int, default=None)
    p.add_argument("--features", type=int, default=None)
    p.set_defaults(handler=_cmd_bench)

    p = sub.add_parser("sort-check", parents=[common],
                       help="run the sorted-loss dominance and gradient suites")
    p.set_defaults(handler=_cmd_sort_check)

    return parser


def _add_data_flags(p):
    p.add_argument("--example", type=int, choices=(0, 1, 2), default=None)
    p.add_argument("--dist", choices=("normal", "t", "chi2"), default=None)
    p.add_argument("--n", type=int, default=600)
    p.add_argument("--csv", type=str, default=None, help="train/evaluate on a CSV dataset")
    p.add_argument("--target", type=str, default="y")
    p.add_argument("--normalize", choices=("minmax", "zscore"), default=None)


def _add_model_flags(p):
    p.add_argument("--widths", type=str, default="5,5")
    p.add_argument("--activation", choices=("tanh", "sigmoid", "relu", "identity"), default="tanh")
    p.add_argument("--sort", choices=("hard", "soft"), default="hard")
    p.add_argument("--sort-epsilon", type=float, default=0.1)
    p.add_argument("--smoothing", type=float, default=None)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--weight-decay", type=float, default=0.05)
    p.add_argument("--batch-size", type=int, default=16)


def _load_config_file(args) -> dict:
    if args.config is None:
        return {}
    path = Path(args.config)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"config file {path} must contain a JSON object")
    return cfg


def _ints(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).split(",") if v != "")


def _strs(text) -> tuple[str, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(str(v) for v in text)
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _merge_config(cfg_cls, file_cfg: dict, overrides: dict):
    """dataclass defaults < config file < explicit CLI flags."""
    names = {f.name for f in fields(cfg_cls)}
    unknown = set(file_cfg) - names - {"experiment"}
    if unknown:
        raise ValueError(f"unknown config keys for {cfg_cls.__name__}: {sorted(unknown)}")
    kwargs = {k: v for k, v in file_cfg.items() if k in names}
    kwargs.update({k: v for k, v in overrides.items() if v is not None and k in names})
    for key in ("families", "dists"):
        if key in kwargs:
            kwargs[key] = _strs(kwargs[key])
    for key in ("widths", "examples", "layer_sizes", "t_values"):
        if key in kwargs and kwargs[key] is not None:
            kwargs[key] = _ints(kwargs[key])
    return cfg_cls(**kwargs)


def _out_dir(args, default_name: str) -> Path:
    out = Path(args.out) if args.out is not None else Path(default_name)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_gen_data(args) -> int:
    file_cfg = _load_config_file(args)
    seed = args.seed if args.seed is not None else file_cfg.get("seed", 0)
    out = _out_dir(args, ".")
    dist = named_distribution(args.dist)
    dataset = generate(args.example, dist, args.n, Rng(seed))
    stem = f"example{args.example}_{args.dist}_n{args.n}_seed{seed}"
    save_csv(dataset, out / f"{stem}.csv")
    write_meta_sidecar(dataset, out / f"{stem}.meta.json")
    print(out / f"{stem}.csv")
    return 0


def _resolve_dataset(args, seed: int):
    if args.csv is not None:
        return load_csv(args.csv, args.target, getattr(args, "normalize", None))
    if args.example is None or args.dist is None:
        raise ValueError("provide either --csv or both --example and --dist")
    dist = named_distribution(args.dist)
    return generate(args.example, dist, args.n, Rng(derive_seed(seed, "data")),
                    grid=default_grid())


def _cmd_train(args) -> int:
    _load_config_file(args)  # validates existence; train uses flags directly
    seed = args.seed if args.seed is not None else 0
    out = _out_dir(args, "train-out")
    dataset = _resolve_dataset(args, seed)
    tr, va, _ = split(dataset, (1 / 3, 1 / 3, 1 / 3), Rng(derive_seed(seed, "split")))
    grid = default_grid()
    spec = ModelSpec(
        family=args.family, n_features=dataset.n_features, hidden_widths=_ints(args.widths),
        grid=grid, activation=args.activation, sort_mode=SortMode(args.sort, args.sort_epsilon),
        smoothing=args.smoothing,
    )
    model = build_model(spec, derive_seed(seed, "model"))
    rules = [MaxEpochs(args.max_epochs)]
    if args.threshold is not None:
        rules.append(Threshold(args.threshold))
    else:
        rules.append(EarlyStopping(args.patience))
    report = fit(model, tr, va, TrainConfig(
        lr=args.lr, weight_decay=args.weight_decay, batch_size=args.batch_size,
        stop_rules=tuple(rules), seed=derive_seed(seed, "fit"), smoothing=args.smoothing,
    ))
    save_model(model, out / "model.mqr")
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    print(f"trained {args.family}: {report.epochs_run} epochs ({report.stop_reason}), "
          f"final val loss {report.val_losses[-1] if report.val_losses else float('nan'):.6f}")
    return 0


def _cmd_eval(args) -> int:
    _load_config_file(args)
    seed = args.seed if args.seed is not None else 0
    model = load_model(args.model)
    grid = model.spec.grid
    if args.csv is not None:
        dataset = load_csv(args.csv, args.target, getattr(args, "normalize", None))
        test = dataset
    else:
        dataset = _resolve_dataset(args, seed)
        _, _, test = split(dataset, (1 / 3, 1 / 3, 1 / 3), Rng(derive_seed(seed, "split")))
    result = evaluate_predictions(model.predict(test.X), test.y, grid, test.ideal)
    if args.format == "csv":
        text = ",".join(EvalResult.csv_header()) + "\n" + ",".join(result.to_csv_row()) + "\n"
    else:
        text = result.to_json() + "\n"
    if args.out is not None:
        out = _out_dir(args, "eval-out")
        (out / f"eval.{args.format}").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def _cmd_exp1(args) -> int:
    file_cfg = _load_config_file(args)
    overrides = {
        "runs": args.runs, "base_seed": args.seed, "families": args.families,
        "examples": args.examples, "dists": args.dists, "n_samples": args.n,
        "widths": args.widths, "lr": args.lr, "weight_decay": args.weight_decay,
        "batch_size": args.batch_size, "patience": args.patience,
        "max_epochs": args.max_epochs, "smoothing": args.smoothing,
        "sort_kind": args.sort, "sort_epsilon": args.sort_epsilon,
    }
    cfg = _merge_config(Experiment1Config, file_cfg, overrides)
    out = _out_dir(args, "exp1-out")
    records = run_experiment1(cfg, out)
    print(f"exp1: {len(records)} records -> {out}")
    return 0


def _cmd_exp2(args) -> int:
    file_cfg = _load_config_file(args)
    overrides = {
        "runs": args.runs, "base_seed": args.seed, "csv_path": args.csv,
        "target_column": args.target, "example": args.example, "dist": args.dist,
        "n_samples": args.n, "widths": args.widths, "lr": args.lr,
        "weight_decay": args.weight_decay, "batch_size": args.batch_size,
        "threshold": args.threshold, "max_epochs": args.max_epochs,
    }
    if args.paper_scale:
        for key, value in PAPER_SCALE_EXP2.items():
            if overrides.get(key) is None:
                overrides[key] = value
    cfg = _merge_config(Experiment2Config, file_cfg, overrides)
    out = _out_dir(args, "exp2-out")
    records = run_experiment2(cfg, out)
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    faster = summary["faster"]
    print(f"exp2: {cfg.runs} paired runs -> {out}")
    print(f"  median epochs: scqrnn={summary['models']['scqrnn']['median_epochs']:.0f} "
          f"cqrnn={summary['models']['cqrnn']['median_epochs']:.0f}")
    print(f"  faster: scqrnn {faster['scqrnn']}, cqrnn {faster['cqrnn']}, ties {faster['ties']}")
    return 0


def _cmd_bench(args) -> int:
    file_cfg = _load_config_file(args)
    overrides = {
        "layer_sizes": args.sizes, "t_values": args.taus, "reps": args.reps,
        "warmup": args.warmup, "n_features": args.features, "base_seed": args.seed,
    }
    cfg = _merge_config(BenchConfig, file_cfg, overrides)
    out = _out_dir(args, "bench-out")
    rows = run_complexity_bench(cfg, out)
    for row in rows:
        print(f"L={row['L']:4d} T={row['T']:3d}  scqrnn={row['scqrnn_ns']:>10.0f}ns  "
              f"mcqrnn={row['mcqrnn_ns']:>10.0f}ns  ratio={row['ratio']:.2f}")
    return 0


def _cmd_sort_check(args) -> int:
    seed = args.seed if args.seed is not None else 0
    results = checks.run_all_checks(seed)
    all_ok = True
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"[{status}] {res.name}: {res.detail}")
        all_ok &= res.passed
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
