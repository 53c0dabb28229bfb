#!/usr/bin/env python3
"""G function (a = 0) behind the line protocol of the subprocess evaluator.

Reads "EVAL n x1 ... xn" lines, answers each with one number, stops on QUIT.
"""
import sys

for line in sys.stdin:
    parts = line.split()
    if not parts or parts[0] == "QUIT":
        break
    xs = [float(v) for v in parts[2:2 + int(parts[1])]]
    y = 1.0
    for x in xs:
        y *= abs(4.0 * x - 2.0)
    print(repr(y), flush=True)
