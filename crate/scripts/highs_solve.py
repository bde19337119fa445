#!/usr/bin/env python3
"""Solve an LP file with HiGHS and write the raw solution file.

Usage: highs_solve.py INPUT.lp OUTPUT.txt

Exit status 0 means OUTPUT was written (whatever the model status);
1 means HiGHS could not read the model; 2 means a usage error.
"""
import sys

import highspy


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(argv[1]) != highspy.HighsStatus.kOk:
        print(f"cannot read {argv[1]}", file=sys.stderr)
        return 1
    h.run()
    h.writeSolution(argv[2], 0)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
