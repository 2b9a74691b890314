"""Print the solution comparison table, optionally under alternative sizes.

    python scripts/compare_table.py
    python scripts/compare_table.py --toy          # sizes of the toy group
    python scripts/compare_table.py --set certificate=256 signature=48
"""

import argparse
from dataclasses import replace

from imsi_ibe.flows import TOY_SIZES, Sizes, check_against_paper, compare_all, table_text


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--toy", action="store_true", help="use the toy implementation's sizes")
    ap.add_argument("--set", nargs="*", default=[], metavar="FIELD=BYTES")
    args = ap.parse_args()

    sizes = TOY_SIZES if args.toy else Sizes()
    overrides = dict(kv.split("=", 1) for kv in args.set)
    sizes = replace(sizes, **{k: int(v) for k, v in overrides.items()})
    table = compare_all(sizes)
    print(table_text(table))
    print()
    for r in check_against_paper(table):
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.claim}")


if __name__ == "__main__":
    main()
