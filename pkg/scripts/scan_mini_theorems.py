#!/usr/bin/env python3
"""Scan the seven two-covariate selection statements on a dense grid and
print any violations with full context."""

import argparse
import sys
import time

from medsel.geometry2d import mini_theorem_scan


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--resolution", type=int, default=60,
                        help="simplex lattice steps (cells grow cubically)")
    parser.add_argument("--offset", type=float, default=1e-6)
    args = parser.parse_args(argv)

    t0 = time.time()
    rep = mini_theorem_scan(resolution=args.resolution, offset=args.offset)
    elapsed = time.time() - t0
    for case, count in rep.cells_checked.items():
        print(f"{case.value}: {count} cells checked, {rep.cells_skipped[case]} skipped")
    if rep.ok:
        print(f"no violations ({elapsed:.1f}s)")
        return 0
    print(f"{len(rep.violations)} violations ({elapsed:.1f}s):")
    for v in rep.violations[:50]:
        print(f"  statement {v.statement} at {v.triple} probs={v.probs}: "
              f"mpm={v.mpm} optimal={v.optimal} ({v.detail})")
    return 1


if __name__ == "__main__":
    sys.exit(main())
