#!/usr/bin/env python3
"""Solve a free-format MPS file with HiGHS (through scipy) and write the
primal solution, one decimal per line in column order, for
`randcert certify-randomness --backend export --solution`."""

import argparse
import math
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix


def read_mps(path):
    rows = {}
    row_order = []
    objective = None
    cols = {}
    col_order = []
    entries = []
    rhs = {}
    lower = {}
    upper = {}
    section = None
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                continue
            f = line.split()
            if section == "ROWS":
                kind, name = f
                if kind == "N":
                    if objective is None:
                        objective = name
                    continue
                rows[name] = (len(row_order), kind)
                row_order.append(name)
            elif section == "COLUMNS":
                col = f[0]
                if col not in cols:
                    cols[col] = len(col_order)
                    col_order.append(col)
                for k in range(1, len(f), 2):
                    entries.append((f[k], cols[col], float(f[k + 1])))
            elif section == "RHS":
                for k in range(1, len(f), 2):
                    rhs[f[k]] = float(f[k + 1])
            elif section == "BOUNDS":
                kind, col = f[0], f[2]
                value = float(f[3]) if len(f) > 3 else 0.0
                if kind == "UP":
                    upper[col] = value
                elif kind == "LO":
                    lower[col] = value
                elif kind == "FX":
                    lower[col] = upper[col] = value
                elif kind == "FR":
                    lower[col], upper[col] = -math.inf, math.inf
                elif kind == "MI":
                    lower[col] = -math.inf
                elif kind == "PL":
                    upper[col] = math.inf
                else:
                    raise ValueError("unsupported bound type " + kind)
            elif section in ("RANGES", "OBJSENSE"):
                raise ValueError("unsupported section " + section)
    return objective, rows, row_order, col_order, entries, rhs, lower, upper


def solve(path):
    objective, rows, row_order, col_order, entries, rhs, lower, upper = read_mps(path)
    n = len(col_order)
    c = np.zeros(n)
    ub_r, ub_c, ub_v, ub_b = [], [], [], []
    eq_r, eq_c, eq_v, eq_b = [], [], [], []
    ub_index, eq_index = {}, {}
    for name in row_order:
        _, kind = rows[name]
        b = rhs.get(name, 0.0)
        if kind == "E":
            eq_index[name] = len(eq_b)
            eq_b.append(b)
        elif kind == "L":
            ub_index[name] = (len(ub_b), 1.0)
            ub_b.append(b)
        else:
            ub_index[name] = (len(ub_b), -1.0)
            ub_b.append(-b)
    for row, col, value in entries:
        if row == objective:
            c[col] += value
        elif row in eq_index:
            eq_r.append(eq_index[row])
            eq_c.append(col)
            eq_v.append(value)
        else:
            r, sign = ub_index[row]
            ub_r.append(r)
            ub_c.append(col)
            ub_v.append(sign * value)
    a_ub = csr_matrix((ub_v, (ub_r, ub_c)), shape=(len(ub_b), n)) if ub_b else None
    a_eq = csr_matrix((eq_v, (eq_r, eq_c)), shape=(len(eq_b), n)) if eq_b else None
    names = col_order
    bounds = [(lower.get(v, 0.0), upper.get(v, math.inf)) for v in names]
    bounds = [(None if lo == -math.inf else lo, None if hi == math.inf else hi) for lo, hi in bounds]
    res = linprog(c, A_ub=a_ub, b_ub=np.array(ub_b) if ub_b else None, A_eq=a_eq,
                  b_eq=np.array(eq_b) if eq_b else None, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    return res, names


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("mps")
    parser.add_argument("solution")
    args = parser.parse_args()
    res, names = solve(args.mps)
    if res.status != 0:
        print("solver status %d: %s" % (res.status, res.message), file=sys.stderr)
        return 1
    with open(args.solution, "w") as fh:
        for v in res.x:
            fh.write("%.17g\n" % v)
    print("objective %.12g (minimized form), %d columns" % (res.fun, len(names)), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
