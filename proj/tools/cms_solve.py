#!/usr/bin/env python3
"""Reads extended DIMACS (with "x" XOR lines) and solves it with pycryptosat.

Prints "s SATISFIABLE" / "s UNSATISFIABLE" and a "v" model line, the usual
competition output format.
"""
import argparse
import sys

import pycryptosat


def load(path, solver):
    nvars = 0
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line[0] == "c":
                continue
            if line.startswith("p "):
                nvars = int(line.split()[2])
                continue
            if line[0] == "x":
                lits = [int(t) for t in line[1:].split()][:-1]
                rhs = True
                for l in lits:
                    if l < 0:
                        rhs = not rhs
                solver.add_xor_clause([abs(l) for l in lits], rhs)
            else:
                solver.add_clause([int(t) for t in line.split()][:-1])
    return nvars


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("cnf")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    s = pycryptosat.Solver(threads=args.threads, verbose=0)
    nvars = load(args.cnf, s)
    sat, model = s.solve()
    if sat is None:
        print("s INDETERMINATE")
        return 0
    if not sat:
        print("s UNSATISFIABLE")
        return 20
    out = ["v"]
    for v in range(1, nvars + 1):
        val = model[v] if v < len(model) else False
        out.append(str(v if val else -v))
    out.append("0")
    print("s SATISFIABLE")
    print(" ".join(out))
    return 10


if __name__ == "__main__":
    sys.exit(main())
