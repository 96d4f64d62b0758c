"""``mm <suite> --config PATH [--out PATH] [--format csv|json] [--seed N]``.

Exit status: 0 if every row passes, 1 if any row fails, 2 for configuration,
input or output errors. Output is written only after the whole suite has
finished, and atomically, so a failed run never leaves a partial report.
"""

import argparse
import sys

from .config import SUITES, load_config, parse_config
from .errors import ConfigError, MMError
from .report import render, write_text
from .suites import run_suite


def build_parser():
    p = argparse.ArgumentParser(prog="mm", description="Moving-surface verification suites.")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--config", help="key = value config file (defaults are used if omitted)")
    p.add_argument("--out", help="report path (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--seed", type=int, default=None)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.suite) if args.config else parse_config("", args.suite)
        if args.seed is not None:
            cfg.values["seed"] = args.seed
        fmt = args.format or cfg.get("format", "csv")
        out = args.out or cfg.get("out")
        rows = run_suite(cfg)
        text = render(rows, fmt)
        if out:
            write_text(out, text)
        else:
            sys.stdout.write(text)
    except (ConfigError, OSError) as exc:
        print(f"mm: error: {exc}", file=sys.stderr)
        return 2
    except (MMError, ValueError) as exc:
        print(f"mm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(f"FAIL {r.suite} {r.case} {r.resolution}: error {r.error:.3g} > {r.tolerance:.3g}",
              file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
