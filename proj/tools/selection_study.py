#!/usr/bin/env python3
"""Companion study for the noise-sweep acceptance check.

Both relaxations can have a large set of optimal points (for pesdp the
per-edge cone shift absorbs every squared distance at desk scale), so the
reported position error depends on which optimal point a solver returns.
This script re-solves exported program pairs with an interior-point solver
(cvxpy/CLARABEL), whose central solution is a different selection than the
first-order splitting solver's, and prints both orderings side by side.

Usage:
  edgeloc-dump-pairs is not needed: pass any directory containing
  pair_{e,p}{l}.dat-s and pair_meta{l}.txt files produced by
  `edgeloc solve --sdpa ...`, or run with --generate CLI_PATH to build the
  default desk-scale sigma=0.2 pairs first.
"""

import argparse
import os
import subprocess
import sys
import tempfile

try:
    import cvxpy as cp
    import numpy as np
except ImportError:
    print("cvxpy/numpy not available")
    sys.exit(77)


def parse_sdpa(path):
    lines = []
    for raw in open(path):
        raw = raw.strip()
        if not raw or raw[0] in '"*':
            continue
        lines.append(raw)
    mdim = int(lines[0].split()[0])
    blockstruct = [int(t) for t in lines[2].split()]
    c = np.array([float(t) for t in lines[3].split()])
    mats = {}
    for raw in lines[4:]:
        k, b, i, j, v = raw.split()
        mats.setdefault((int(k), int(b)), []).append(
            (int(i) - 1, int(j) - 1, float(v)))
    return mdim, blockstruct, c, mats


def solve_sdpa(path):
    mdim, blockstruct, c, mats = parse_sdpa(path)
    y = cp.Variable(mdim)
    cons = []
    for b, size in enumerate(blockstruct, start=1):
        dim = abs(size)
        f0 = np.zeros((dim, dim))
        for (i, j, v) in mats.get((0, b), []):
            f0[i, j] = v
            f0[j, i] = v
        expr = -cp.Constant(f0)
        for k in range(1, mdim + 1):
            ent = mats.get((k, b), [])
            if not ent:
                continue
            fk = np.zeros((dim, dim))
            for (i, j, v) in ent:
                fk[i, j] = v
                fk[j, i] = v
            expr = expr + y[k - 1] * cp.Constant(fk)
        cons.append(cp.diag(expr) >= 0 if size < 0 else expr >> 0)
    prob = cp.Problem(cp.Minimize(c @ y), cons)
    prob.solve(solver="CLARABEL")
    if prob.status != "optimal":
        raise RuntimeError(f"CLARABEL returned {prob.status} on {path}")
    return y.value


def position_error(yv, meta):
    pe = 0.0
    for row in meta:
        x1, x2, tx, ty = int(row[0]), int(row[1]), row[2], row[3]
        est = (yv[x1], yv[x2]) if x1 >= 0 else (0.0, 0.0)
        pe += np.hypot(est[0] - tx, est[1] - ty)
    return pe / len(meta)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("pairs_dir", nargs="?", help="directory with pair files")
    ap.add_argument("--generate", metavar="CLI",
                    help="edgeloc binary; generates the default pairs first")
    ap.add_argument("--count", type=int, default=6)
    args = ap.parse_args()

    pairs_dir = args.pairs_dir
    if args.generate:
        pairs_dir = pairs_dir or tempfile.mkdtemp(prefix="edgeloc_pairs_")
        for l in range(args.count):
            net = os.path.join(pairs_dir, f"net{l}.json")
            subprocess.run(
                [args.generate, "generate", "--sensors", "40", "--anchors", "5",
                 "--radio", "0.3", "--seed", str(7000 + l),
                 "--symmetric-anchors", "--out", net],
                check=True, capture_output=True)
            for method, tag in (("esdp", "e"), ("pesdp", "p")):
                proc = subprocess.run(
                    [args.generate, "solve", "--net", net, "--method", method,
                     "--sigma", "0.2", "--noise-seed", str(l),
                     "--max-iter", "100000",
                     "--out", os.path.join(pairs_dir, f"report_{tag}{l}.json"),
                     "--sdpa", os.path.join(pairs_dir, f"pair_{tag}{l}.dat-s"),
                     "--meta", os.path.join(pairs_dir, f"pair_meta{l}.txt")],
                    capture_output=True)
                if proc.returncode not in (0, 2):  # 2 = solve not Optimal
                    raise RuntimeError(proc.stderr.decode())
    if not pairs_dir:
        ap.error("need a pairs directory or --generate")

    import json
    pe = {"e": {"ipm": [], "splitting": []}, "p": {"ipm": [], "splitting": []}}
    for l in range(args.count):
        meta = np.loadtxt(os.path.join(pairs_dir, f"pair_meta{l}.txt"))
        for tag in ("e", "p"):
            yv = solve_sdpa(os.path.join(pairs_dir, f"pair_{tag}{l}.dat-s"))
            pe[tag]["ipm"].append(position_error(yv, meta))
            report = os.path.join(pairs_dir, f"report_{tag}{l}.json")
            if os.path.exists(report):
                pe[tag]["splitting"].append(json.load(open(report))["delta"])
        line = f"l={l} ipm: esdp={pe['e']['ipm'][-1]:.4f} pesdp={pe['p']['ipm'][-1]:.4f}"
        if pe["e"]["splitting"]:
            line += (f"   splitting: esdp={pe['e']['splitting'][-1]:.4f}"
                     f" pesdp={pe['p']['splitting'][-1]:.4f}")
        print(line)
    print(f"ipm means:       esdp={np.mean(pe['e']['ipm']):.4f}"
          f" pesdp={np.mean(pe['p']['ipm']):.4f}")
    if pe["e"]["splitting"]:
        print(f"splitting means: esdp={np.mean(pe['e']['splitting']):.4f}"
              f" pesdp={np.mean(pe['p']['splitting']):.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
