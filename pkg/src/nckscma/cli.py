"""Command line entry point: ``simulate``, ``validate`` and ``oracle``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .harness import ConfigError, build_link, emit_csv, format_csv, load_config, run_experiment
from .oracles import ORACLES

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_CHECK_FAILED = 0, 1, 2, 3


def parse_snr_range(text: str) -> list:
    """``a:b:step`` -> [a, a + step, ..., b] (inclusive of b when it lands on the grid)."""
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ConfigError(f"--snr-override expects a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise ConfigError(f"--snr-override needs step > 0 and b >= a, got {text!r}")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return [round(a + i * step, 10) for i in range(n)]


def _simulate(args) -> int:
    cfg = load_config(args.config)
    changes = {}
    if args.snr_override:
        changes["snr_db"] = parse_snr_range(args.snr_override)
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output"] = args.out
    if changes:
        cfg = cfg.replace(**changes)
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    metrics = run_experiment(cfg, threads=args.threads)
    if cfg.output:
        emit_csv(metrics, cfg.output, cfg)
    else:
        sys.stdout.write(format_csv(metrics, cfg))
    return EXIT_OK


def _validate(args) -> int:
    cfg = load_config(args.config)
    setup = build_link(cfg, cfg.snr_db[0])
    n = setup.schedule.cfg
    print(f"codebook: J={setup.cb.J} R={setup.cb.R} M={setup.cb.M}")
    print(f"code: N={setup.code.N} K={setup.code.K} rate={setup.code.rate:.4f}")
    print(f"scheme: K_eq={n.K_eq} T={n.T} K_in={n.K_in} K_nc={n.K_nc} N_R={n.N_R} "
          f"N_R_bar={float(n.N_R_bar):g} layout={setup.schedule.layout.value}")
    print(f"sweep: {len(cfg.snr_db)} SNR points x {cfg.trials} groups, N_re={cfg.N_re}")
    print("OK")
    return EXIT_OK


def _oracle(args) -> int:
    names = list(ORACLES) if args.name == "all" else [args.name]
    if names[0] not in ORACLES:
        raise ConfigError(f"unknown oracle {args.name!r}; choose from: all, {', '.join(ORACLES)}")
    ok = True
    for name in names:
        res = ORACLES[name]()
        print(res.line())
        ok &= res.passed
    return EXIT_OK if ok else EXIT_CHECK_FAILED


class _Parser(argparse.ArgumentParser):
    """Usage errors are config errors; argparse's own status 2 is reserved for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _join_negative_values(argv):
    """``--snr-override -6:-3:1`` -> ``--snr-override=-6:-3:1`` so argparse does
    not read a negative range as an option."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--snr-override":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nckscma", description="NCK-SCMA link-level simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a Monte Carlo SNR sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--snr-override", metavar="A:B:STEP")
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--threads", type=int, default=1, help="worker processes")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=_simulate)

    v = sub.add_parser("validate", help="check a config and its data files without simulating")
    v.add_argument("--config", required=True)
    v.set_defaults(func=_validate)

    o = sub.add_parser("oracle", help="run a brute-force reference check")
    o.add_argument("name", help=f"one of: all, {', '.join(ORACLES)}")
    o.set_defaults(func=_oracle)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
