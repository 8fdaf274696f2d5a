"""Command line entry point: ``mha run|oracle|compare|sweep``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .core import ConfigError, LossSpecError
from .harness import (NumericFailure, compare_strategies, compute_oracle, load_config,
                      override, resolve_output_dir, run_experiment, sweep)
from .oracle import OracleError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mha", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--horizon", type=int)
        sp.add_argument("--out", help="output directory (relative paths go under $MHA_OUTPUT_ROOT)")

    common(sub.add_parser("run", help="run MHA and write trace.csv / summary.txt"))
    common(sub.add_parser("oracle", help="compute the constrained optimum and write oracle.txt"))
    cmp_ = sub.add_parser("compare", help="compare MHA with single experts")
    common(cmp_)
    cmp_.add_argument("--strategies", nargs="+", default=["mha", "const_max", "const_zero"],
                      help="mha, const_max, const_zero or H(k,h)")
    sw = sub.add_parser("sweep", help="run every *.toml config in a directory")
    sw.add_argument("config_dir")
    sw.add_argument("--out")
    sw.add_argument("--workers", type=int)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "sweep":
            for trace, summary in sweep(args.config_dir, args.out, args.workers):
                print(f"{trace}\t{summary}")
            return EXIT_OK
        cfg = override(load_config(args.config), args.seed, args.horizon)
        if args.command == "run":
            trace, summary = run_experiment(cfg, args.out)
            print(summary.read_text(), end="")
        elif args.command == "oracle":
            res = compute_oracle(cfg)
            if res is None:
                raise ConfigError("oracle needs an iid or Markov process")
            path = res.write(resolve_output_dir(cfg, args.out) / "oracle.txt")
            print(path.read_text(), end="")
        elif args.command == "compare":
            rows = compare_strategies(cfg, args.strategies, args.out)
            print(",".join(rows[0]))
            for r in rows:
                print(",".join(v if isinstance(v, str) else f"{v:.6g}" for v in r.values()))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericFailure, OracleError, LossSpecError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
