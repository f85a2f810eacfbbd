"""Command-line pipeline: ingest, eda, train, eval, serve.

Every subcommand is deterministic given ``--seed``; training therefore does
not record a wall-clock timestamp unless ``--stamp`` is passed (equal seeds
must produce byte-identical model files).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import CleaningConfig
from .dataset import CleanDataset, DatasetSplit, ingest, split_dataset
from .eda import eda_report
from .evaluation import DEFAULT_GRID, evaluate, grid_search
from .forest import Hyperparams, derive_seed, fit_forest
from .model_io import load_model, save_model

ENV_PORT = "CARWORTH_PORT"
ENV_MODEL = "CARWORTH_MODEL"

# Tag mixed into the master seed to derive the subsample stream, so
# subsampling never shares a generator with splitting or tree fitting.
_SUBSAMPLE_TAG = 0x5AB5


def subsample_rows(n: int, k: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, _SUBSAMPLE_TAG)))
    rows = rng.permutation(n)[:k]
    rows.sort()
    return rows


def restrict_rows(ds: CleanDataset, rows: np.ndarray) -> CleanDataset:
    return CleanDataset(
        features=ds.features[rows],
        price=ds.price[rows],
        vocab=ds.vocab,
        config=ds.config,
        columns=ds.columns,
    )


def _effective_dataset(ds: CleanDataset, sample: int | None, seed: int) -> CleanDataset:
    if sample is not None and sample < ds.n_rows:
        return restrict_rows(ds, subsample_rows(ds.n_rows, sample, seed))
    return ds


def _write_json(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _cmd_ingest(args) -> int:
    config = CleaningConfig.from_json_file(args.config) if args.config else CleaningConfig()
    try:
        with open(args.input, "rb") as fh:
            dataset, report, parse_skips = ingest(fh, config)
    except FileNotFoundError:
        print(f"error: input CSV not found: {args.input}", file=sys.stderr)
        return 1
    dataset.save(args.output)
    payload = dict(report.to_dict(), parse_skipped_rows=parse_skips)
    _write_json(str(args.output) + ".report.json", payload)
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_eda(args) -> int:
    dataset = CleanDataset.load(args.input)
    _write_json(args.out, eda_report(dataset).to_dict())
    print(f"wrote EDA report for {dataset.n_rows} rows to {args.out}")
    return 0


def _cmd_train(args) -> int:
    full = CleanDataset.load(args.input)
    ds = _effective_dataset(full, args.sample, args.seed)
    split = split_dataset(ds.n_rows, args.seed)
    X, y = ds.feature_matrix(), ds.target()

    base = Hyperparams(n_estimators=args.trees, max_features=len(ds.columns))
    grid_info = None
    if args.grid:
        params, candidates = grid_search(
            X, y, split.train, split.cv,
            grid=DEFAULT_GRID, base_params=base, master_seed=args.seed, n_jobs=args.jobs,
        )
        grid_info = {
            "grid": list(DEFAULT_GRID),
            "candidates": [
                {"n_estimators": c.n_estimators, "cv_r2": c.cv_r2, "seed": c.seed}
                for c in candidates
            ],
        }
        print(f"grid search picked n_estimators={params.n_estimators}")
    else:
        params = base

    model = fit_forest(X[split.train], y[split.train], params, master_seed=args.seed,
                       n_jobs=args.jobs)
    build_info = {
        "training_rows": int(len(split.train)),
        "dataset_rows": int(ds.n_rows),
        "sample_rows": args.sample,
        "split_seed": args.seed,
        "cleaning": ds.config.to_dict(),
        "grid": grid_info,
        "trained_at": datetime.now(timezone.utc).isoformat() if args.stamp else None,
    }
    data = save_model(model.with_schema(ds.vocab, ds.columns, build_info), args.out)
    print(f"trained {params.n_estimators} trees on {len(split.train)} rows "
          f"-> {args.out} ({len(data)} bytes)")
    return 0


def _split_for_eval(ds: CleanDataset, seed: int) -> DatasetSplit:
    return split_dataset(ds.n_rows, seed)


def _cmd_eval(args) -> int:
    try:
        model = load_model(args.model)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    full = CleanDataset.load(args.input)
    seed = args.seed if args.seed is not None else model.build_info.get("split_seed")
    if seed is None:
        print("error: no --seed given and the model records none", file=sys.stderr)
        return 1
    sample = args.sample if args.sample is not None else model.build_info.get("sample_rows")
    ds = _effective_dataset(full, sample, seed)
    grid_info = model.build_info.get("grid") or {}
    report = evaluate(model, ds, _split_for_eval(ds, seed), searched_grid=grid_info.get("grid"))
    _write_json(args.out, report.to_dict())
    print(f"train R2 = {report.train_r2:.4f}  test R2 = {report.test_r2:.4f}  "
          f"cv R2 = {report.cv_r2:.4f}")
    print(f"baseline train R2 = {report.baseline_train_r2:.4f}  "
          f"test R2 = {report.baseline_test_r2:.4f}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import build_app, load_state

    model_path = args.model or os.environ.get(ENV_MODEL)
    if not model_path:
        print(f"error: no model: pass --model or set {ENV_MODEL}", file=sys.stderr)
        return 1
    port = args.port if args.port is not None else int(os.environ.get(ENV_PORT, "8000"))
    state = load_state(model_path)
    app = build_app(state, static_dir=args.static)
    print(f"serving model {state.version} on {args.host}:{port}")
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="carworth",
                                     description="used-car price estimation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="clean a raw listings CSV")
    p.add_argument("--input", required=True, help="raw CSV dump")
    p.add_argument("--output", required=True, help="cleaned dataset container")
    p.add_argument("--config", help="JSON cleaning config overrides")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("eda", help="exploratory statistics report")
    p.add_argument("--input", required=True, help="cleaned dataset container")
    p.add_argument("--out", required=True, help="JSON report path")
    p.set_defaults(func=_cmd_eda)

    p = sub.add_parser("train", help="fit the forest")
    p.add_argument("--input", required=True, help="cleaned dataset container")
    p.add_argument("--trees", type=int, default=500, help="tree count (default 500)")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--grid", action="store_true",
                   help="pick the tree count by cv grid search over 50..500")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers (-1 = all cores); output is identical either way")
    p.add_argument("--sample", type=int,
                   help="train on a seed-deterministic subsample of this many rows")
    p.add_argument("--stamp", action="store_true",
                   help="record a wall-clock timestamp (breaks byte-for-byte reproducibility)")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="score a trained model")
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--input", required=True, help="cleaned dataset container")
    p.add_argument("--seed", type=int, help="split seed (default: the model's)")
    p.add_argument("--sample", type=int, help="subsample size (default: the model's)")
    p.add_argument("--out", required=True, help="JSON report path")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="serve predictions over HTTP")
    p.add_argument("--model", help=f"model file (or ${ENV_MODEL})")
    p.add_argument("--port", type=int, help=f"port (or ${ENV_PORT}, default 8000)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", help="directory of static web UI assets to mount at /")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
