#!/usr/bin/env python3
"""Solve an exported LP_TEXT (.lp) or free MPS (.mps) file with HiGHS.

Prints {"objective": ..., "variables": ...} as JSON. The objective is
reported in the model's maximize sense: MPS exports carry a negated
objective row, so its minimum is negated back.
"""
import json
import sys

import highspy


def main() -> int:
    if len(sys.argv) != 2:
        print("usage: solve_lp_file.py MODEL.{lp,mps}", file=sys.stderr)
        return 2
    path = sys.argv[1]
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(path) != highspy.HighsStatus.kOk:
        print(f"cannot read {path}", file=sys.stderr)
        return 1
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        print(f"not optimal: {h.modelStatusToString(h.getModelStatus())}", file=sys.stderr)
        return 1
    obj = h.getInfo().objective_function_value
    if path.endswith(".mps"):
        obj = -obj
    print(json.dumps({"objective": obj, "variables": h.getNumCol()}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
