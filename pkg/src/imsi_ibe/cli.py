"""Command-line entry point: run scenarios, compare solutions, self-test."""

from __future__ import annotations

import argparse
import json
import sys

from .config import load_config
from .errors import ConfigError
from .flows import check_against_paper, compare_all, table_json, table_text
from .scenarios import SCENARIOS, run_scenario
from .selftest import run_selftest

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imsi-ibe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one simulation scenario")
    run.add_argument("scenario", help=f"one of: {', '.join(SCENARIOS)}")
    run.add_argument("--config", help="JSON config file (default: packaged config)")
    run.add_argument("--seed", type=int, help="override sim.seed from the config")
    run.add_argument("--trace", help="write the transcript as JSONL here")
    run.add_argument("--metrics", help="write metrics, outcomes and checks as JSON here")

    cmp_ = sub.add_parser("compare", help="compare solution families")
    cmp_.add_argument("--config", help="JSON config file (sizes section is used)")
    cmp_.add_argument("--out", help="write the comparison table as JSON here")

    st = sub.add_parser("selftest", help="crypto property checks")
    st.add_argument("--trials", type=int, default=200)
    st.add_argument("--seed", type=int, default=0)
    return parser


def _run(args) -> int:
    if args.scenario not in SCENARIOS:
        print(f"unknown scenario {args.scenario!r}; valid: {', '.join(SCENARIOS)}",
              file=sys.stderr)
        return EXIT_USAGE
    config = load_config(args.config)
    result = run_scenario(args.scenario, config, args.seed)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(result.trace_jsonl())
    if args.metrics:
        with open(args.metrics, "w") as fh:
            json.dump(result.summary(), fh, sort_keys=True, indent=2)
            fh.write("\n")
    for name, ok in result.checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    m = result.metrics
    print(f"{result.name} seed={result.seed}: air {m.air_msgs} msgs/{m.air_bytes} B, "
          f"backhaul {m.backhaul_msgs} msgs/{m.backhaul_bytes} B, "
          f"UE-SN trips {m.ue_sn_round_trips}, SN-HN trips {m.sn_hn_round_trips}")
    return EXIT_OK if result.passed else EXIT_FAIL


def _compare(args) -> int:
    config = load_config(args.config)
    table = compare_all(config.sizes)
    report = check_against_paper(table)
    print(table_text(table))
    print()
    for r in report:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.claim}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table_json(table, report) + "\n")
    return EXIT_OK if all(r.passed for r in report) else EXIT_FAIL


def _selftest(args) -> int:
    results = run_selftest(args.trials, args.seed)
    for name, ok, detail in results:
        print(f"[{'PASS' if ok else 'FAIL'}] {name} ({detail})")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return {"run": _run, "compare": _compare, "selftest": _selftest}[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
