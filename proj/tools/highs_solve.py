#!/usr/bin/env python3
"""External-backend adapter: solve an MPS file with HiGHS and write a raw
HiGHS solution file.

usage: highs_solve.py MODEL.mps SOLUTION.sol [--gap G] [--time-limit S]
"""
import argparse
import sys

import highspy


def main() -> int:
    p = argparse.ArgumentParser()
    p.add_argument("model")
    p.add_argument("solution")
    p.add_argument("--gap", type=float, default=1e-6)
    p.add_argument("--time-limit", type=float, default=None)
    args = p.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", True)
    h.setOptionValue("mip_rel_gap", args.gap)
    if args.time_limit is not None:
        h.setOptionValue("time_limit", args.time_limit)
    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.model}", file=sys.stderr)
        return 2
    h.run()
    h.writeSolution(args.solution, 0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
