#!/usr/bin/env python3
"""Solves SDPA-format SDPs with cvxopt; prints one JSON line per file.

Falls back to cvxpy with Clarabel when cvxopt does not report optimal.

Problem: minimize c^T y subject to sum_i y_i F_i - F_0 >= 0 blockwise.
Negative block sizes are diagonal blocks.
"""

import argparse
import json
import re
import sys

import numpy as np
from cvxopt import matrix, solvers, spmatrix


def read_sdpa(path):
    with open(path) as f:
        lines = [l for l in f if l.strip() and l.lstrip()[0] not in '*"']
    clean = lambda s: re.sub(r"[{}(),]", " ", s).split()
    m = int(clean(lines[0])[0])
    nb = int(clean(lines[1])[0])
    sizes = [int(v) for v in clean(lines[2])[:nb]]
    c = np.array([float(v) for v in clean(lines[3])[:m]])
    entries = []
    for l in lines[4:]:
        a = l.split()
        entries.append((int(a[0]), int(a[1]) - 1, int(a[2]) - 1, int(a[3]) - 1,
                        float(a[4])))
    return m, sizes, c, entries


def build(m, sizes, c, entries):
    # Diagonal blocks stack into one linear inequality G_l y <= h_l.
    offsets, nl = {}, 0
    for b, s in enumerate(sizes):
        if s < 0:
            offsets[b] = nl
            nl += -s
    gl = ([], [], [])
    hl = np.zeros(nl)
    gs = {b: ([], [], []) for b, s in enumerate(sizes) if s > 0}
    hs = {b: np.zeros((s, s)) for b, s in enumerate(sizes) if s > 0}
    for k, b, i, j, v in entries:
        if sizes[b] < 0:
            if i != j:
                raise ValueError("off-diagonal entry in a diagonal block")
            row = offsets[b] + i
            if k == 0:
                hl[row] -= v
            else:
                gl[0].append(-v), gl[1].append(row), gl[2].append(k - 1)
        else:
            n = sizes[b]
            pairs = {(i, j), (j, i)}
            for (r, q) in pairs:
                if k == 0:
                    hs[b][r, q] -= v
                else:
                    g = gs[b]
                    g[0].append(-v), g[1].append(q * n + r), g[2].append(k - 1)
    args = {"c": matrix(c)}
    if nl:
        args["Gl"] = spmatrix(gl[0], gl[1], gl[2], (nl, m))
        args["hl"] = matrix(hl)
    blocks = sorted(gs)
    args["Gs"] = [spmatrix(gs[b][0], gs[b][1], gs[b][2], (sizes[b] ** 2, m))
                  for b in blocks]
    args["hs"] = [matrix(hs[b]) for b in blocks]
    return args


def solve_cvxopt(data):
    sol = solvers.sdp(**build(*data))
    return sol["status"], sol["primal objective"]


def solve_clarabel(data):
    # Fallback for programs cvxopt stalls on.
    import cvxpy as cp
    m, sizes, c, entries = data
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    for k, b, i, j, v in entries:
        mats[k][b][i, j] = v
        mats[k][b][j, i] = v
    y = cp.Variable(m)
    cons = []
    for b, s in enumerate(sizes):
        used = [i for i in range(m) if np.any(mats[i + 1][b])]
        expr = sum(y[i] * mats[i + 1][b] for i in used) - mats[0][b]
        if s < 0:
            cons.append(cp.diag(expr) >= 0)
        else:
            cons.append((expr + expr.T) / 2 >> 0)
    prob = cp.Problem(cp.Minimize(c @ y), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10,
               tol_feas=1e-10)
    return prob.status, prob.value


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("sdpa", nargs="+")
    ap.add_argument("--tol", type=float, default=1e-9)
    ap.add_argument("--max-iter", type=int, default=200)
    a = ap.parse_args()
    solvers.options.update(show_progress=False, abstol=a.tol, reltol=a.tol,
                           feastol=a.tol, maxiters=a.max_iter)
    for path in a.sdpa:
        data = read_sdpa(path)
        out = {"file": path}
        for name, solve in (("cvxopt", solve_cvxopt), ("clarabel", solve_clarabel)):
            try:
                status, obj = solve(data)
            except Exception as e:  # solver breakdown; try the next one
                status, obj = "error: %s" % e, None
            out.update(solver=name, status=status, primal_objective=obj)
            if status == "optimal":
                break
        json.dump(out, sys.stdout)
        sys.stdout.write("\n")
        sys.stdout.flush()
    return 0

if __name__ == "__main__":
    sys.exit(main())
