"""Run a set of experiment configs and print their throughput side by side.

Usage: python scripts/trend.py [--threads N] [--trials N] [--outdir DIR] CONFIG...

Defaults to the three trend configs in configs/. Each arm writes its CSV to
DIR (default results/) under the config's file stem.
"""
import argparse
import os
from pathlib import Path

from nckscma.harness import emit_csv, load_config, run_experiment

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = [ROOT / "configs" / f"trend_{n}.json" for n in ("k3", "4_2_2", "4_3_2")]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="*", type=Path, default=DEFAULT)
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    args = ap.parse_args()

    table = {}
    for path in args.configs:
        cfg = load_config(path)
        if args.trials:
            cfg = cfg.replace(trials=args.trials)
        metrics = run_experiment(cfg, threads=args.threads)
        emit_csv(metrics, args.outdir / f"{path.stem}.csv", cfg)
        table[path.stem] = metrics

    names = list(table)
    print("snr_db  " + "  ".join(f"{n:>22}" for n in names))
    for i, m0 in enumerate(table[names[0]]):
        cells = [f"{table[n][i].throughput:.4f} +- {table[n][i].ci95_per:.4f}".rjust(22) for n in names]
        print(f"{m0.snr_db:6g}  " + "  ".join(cells))


if __name__ == "__main__":
    main()
