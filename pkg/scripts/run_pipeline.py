#!/usr/bin/env python3
"""End-to-end pipeline driver: clean, explore, train, and score in one go.

Typical invocations::

    # full run (expect ~25-30 min on 4 cores, several GB of RAM)
    python scripts/run_pipeline.py --csv data/autos.csv --workdir out

    # quick check on a 50k-row subsample (~3-5 min)
    python scripts/run_pipeline.py --csv data/autos.csv --workdir out --sample 50000

Reference targets for the full dataset: train R^2 around 0.95, test R^2
around 0.84, linear baseline under 0.75 on its own training slice.
"""
import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from carworth.cli import main as carworth


def run(argv: list[str]) -> None:
    started = time.monotonic()
    rc = carworth(argv)
    if rc != 0:
        raise SystemExit(f"step failed (exit {rc}): carworth {' '.join(argv)}")
    print(f"  [{time.monotonic() - started:6.1f}s] carworth {' '.join(argv)}")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--csv", required=True, help="raw listings CSV (Kaggle dump)")
    parser.add_argument("--workdir", default="out", help="where artifacts land")
    parser.add_argument("--trees", type=int, default=500)
    parser.add_argument("--seed", type=int, default=2017)
    parser.add_argument("--sample", type=int, help="optional subsample size, e.g. 50000")
    parser.add_argument("--jobs", type=int, default=-1, help="training workers")
    parser.add_argument("--grid", action="store_true",
                        help="grid-search the tree count over 50..500 first")
    args = parser.parse_args()

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    clean = work / "clean.cwc"
    model = work / "model.cwm"
    eda_out = work / "eda.json"
    eval_out = work / "eval.json"

    run(["ingest", "--input", args.csv, "--output", str(clean)])
    run(["eda", "--input", str(clean), "--out", str(eda_out)])

    train_args = ["train", "--input", str(clean), "--trees", str(args.trees),
                  "--seed", str(args.seed), "--out", str(model),
                  "--jobs", str(args.jobs)]
    if args.sample:
        train_args += ["--sample", str(args.sample)]
    if args.grid:
        train_args.append("--grid")
    run(train_args)

    run(["eval", "--model", str(model), "--input", str(clean), "--out", str(eval_out)])

    report = json.loads(eval_out.read_text())
    eda = json.loads(eda_out.read_text())
    print("\n=== summary ===")
    print(f"rows after cleaning : {eda['rows']}")
    print(f"mean price / km     : {eda['summary']['mean_price']:.0f} EUR / "
          f"{eda['summary']['mean_kilometer']:.0f} km")
    print(f"median age          : {eda['summary']['median_age']} years")
    print(f"forest train R^2    : {report['train_r2']:.4f}   (reference ~0.9582)")
    print(f"forest test R^2     : {report['test_r2']:.4f}   (reference ~0.8363)")
    print(f"baseline train R^2  : {report['baseline']['train_r2']:.4f}   (expected < 0.75)")
    print(f"\nserve it:  python -m carworth serve --model {model} --port 8000")
    return 0


if __name__ == "__main__":
    sys.exit(main())
