"""``nhl`` command-line entry point."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .report import CHECK_LEVELS, COMMANDS, RunConfig, emit_report, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nhl",
        description="Homology of Leibniz n-algebras and Filippov algebras given by structure constants.",
    )
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("algebra", help="algebra JSON file")
    p.add_argument("--max-degree", "-K", type=int, default=2, help="top homology degree (default 2)")
    p.add_argument("--field", help="override the field: rational or prime:P")
    p.add_argument("--check-level", choices=CHECK_LEVELS, default="full")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--dump-actions", action="store_true", help="include co-representation matrices")
    p.add_argument("--workers", type=int, default=1, help="threads for boundary assembly and page cells")
    p.add_argument("--timings", action="store_true", help="include timing and memory statistics")
    p.add_argument("--allow-small-dimension", action="store_true",
                   help="run the spectral sequence on algebras of dimension below the arity")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.max_degree < 0:
        print("nhl: --max-degree must be nonnegative", file=sys.stderr)
        return 2
    config = RunConfig(
        command=args.command,
        path=args.algebra,
        max_degree=args.max_degree,
        field=args.field,
        check_level=args.check_level,
        output=args.output,
        fmt=args.format,
        dump_actions=args.dump_actions,
        workers=max(1, args.workers),
        timings=args.timings,
        allow_small_dimension=args.allow_small_dimension,
    )
    try:
        code, doc = run(config)
    except ValueError as exc:
        # bad --field strings and similar configuration errors
        print(f"nhl: {exc}", file=sys.stderr)
        return 2
    data = emit_report(doc, config.fmt)
    if config.output:
        Path(config.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
