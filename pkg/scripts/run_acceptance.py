#!/usr/bin/env python3
"""Run the acceptance checks and write a JSON report.

Usage: python3 scripts/run_acceptance.py [--report out.json] [suite ...]
"""

import argparse
import json
import sys

from hgelfand.checks import SUITES, SUPPLEMENTARY, run_suites


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("suites", nargs="*", help=f"default: all of {', '.join(SUITES)} plus roundtrip_adequate")
    ap.add_argument("--report", help="JSON report path")
    args = ap.parse_args()
    names = args.suites or list(SUITES) + list(SUPPLEMENTARY)
    results = []
    for name in names:
        (r,) = run_suites([name])
        print(r.line(), flush=True)
        results.append(r)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump([r.to_json() for r in results], fh, indent=1, sort_keys=True)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
