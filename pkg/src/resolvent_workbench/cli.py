"""Command-line front end.

Examples
--------
Run the configured suite and write a report::

    resolvent-workbench --config suite.json --out report.json

Evaluate one expression::

    resolvent-workbench --config suite.json --expr "cliff(f1)" --action dbar_s
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from .algebra import DomainError
from .config import CHECK_IDS, ConfigError, SuiteConfig, load_config
from .suite import ACTIONS, eval_expr, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resolvent-workbench", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="suite configuration (JSON)")
    p.add_argument("--check", nargs="+", metavar="ID", help=f"checks to run: {', '.join(CHECK_IDS)}")
    p.add_argument("--seed", type=int, help="override the RNG seed")
    p.add_argument("--out", help="report path (JSON array)")
    p.add_argument("--expr", help="expression text, e.g. 'zeta(f1)*res(1,f2)'")
    p.add_argument("--action", choices=ACTIONS, help="operation applied to --expr")
    p.add_argument("--acceptance", action="store_true", help="run the acceptance criteria and print one line each")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _config(args) -> SuiteConfig:
    data = {"model": {"flavor": "canonical_pairs", "n_pairs": 1}}
    cfg = load_config(args.config) if args.config else load_config(data)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("seed: must be an unsigned 64-bit integer")
        cfg = cfg.model_copy(update={"seed": args.seed})
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.acceptance:
            from .acceptance import run_all

            results = run_all()
            for r in results:
                print(r.line())
            return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL
        cfg = _config(args)
        if args.expr is not None or args.action is not None:
            if args.expr is None or args.action is None:
                raise ConfigError("expr: --expr and --action must be given together")
            print(json.dumps(eval_expr(cfg, args.expr, args.action)))
            return EXIT_OK
        status, reports = run_suite(cfg, args.check, args.out)
        for r in reports:
            print(f"{r['verdict'].upper():4} {r['check_id']}  max={r['residuals']['max']:.3e}")
        return status
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
