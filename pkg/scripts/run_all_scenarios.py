"""Run every scenario, write traces and metrics under an output directory.

    python scripts/run_all_scenarios.py --out runs/ --seed 1
"""

import argparse
import json
from pathlib import Path

from imsi_ibe.config import load_config
from imsi_ibe.scenarios import SCENARIOS, run_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()

    config = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for name in SCENARIOS:
        result = run_scenario(name, config, args.seed)
        (out / f"{name}.jsonl").write_text(result.trace_jsonl())
        (out / f"{name}.json").write_text(json.dumps(result.summary(), sort_keys=True, indent=2))
        m = result.metrics
        print(f"{'ok  ' if result.passed else 'FAIL'} {name:16s} air {m.air_msgs:2d} msgs "
              f"{m.air_bytes:5d} B  backhaul {m.backhaul_msgs:2d} msgs {m.backhaul_bytes:5d} B  "
              f"checks {sum(ok for _, ok in result.checks)}/{len(result.checks)}")
        failed += not result.passed
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
