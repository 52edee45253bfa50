#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write a deepcycle solution file.

Usage: highs_solve.py PROBLEM.mps SOLUTION.sol [MIP_GAP]
"""
import sys

import highspy


def main():
    mps, sol = sys.argv[1], sys.argv[2]
    gap = float(sys.argv[3]) if len(sys.argv) > 3 else 1e-6
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", gap)
    if h.readModel(mps) != highspy.HighsStatus.kOk:
        sys.exit(f"cannot read {mps}")
    h.run()
    status = h.getModelStatus()
    lp = h.getLp()
    with open(sol, "w") as out:
        if status == highspy.HighsModelStatus.kOptimal:
            out.write("# status optimal\n")
            out.write(f"# objective {h.getInfo().objective_function_value!r}\n")
            for name, v in zip(lp.col_names_, h.getSolution().col_value):
                out.write(f"{name} {v!r}\n")
        elif status == highspy.HighsModelStatus.kInfeasible:
            out.write("# status infeasible\n")
        else:
            sys.exit(f"HiGHS stopped with {h.modelStatusToString(status)}")


if __name__ == "__main__":
    main()
