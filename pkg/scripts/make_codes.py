"""Regenerate the bundled alist files under src/nckscma/data/.

Usage: python scripts/make_codes.py [--outdir DIR]

The N=264 codes come from a plain progressive-edge-growth construction with
column weight 3; the seed is fixed so the output is reproducible.
"""
import argparse
from pathlib import Path

import numpy as np

from nckscma.ldpc import LdpcCode, write_alist

DATA = Path(__file__).resolve().parents[1] / "src" / "nckscma" / "data"


def peg(n, m, col_weight, rng):
    H = np.zeros((m, n), dtype=np.uint8)
    check_deg = np.zeros(m, dtype=int)
    for v in range(n):
        for k in range(col_weight):
            if k == 0:
                cands = np.flatnonzero(check_deg == check_deg.min())
            else:
                # BFS from v over the current graph; prefer checks outside the tree
                reached = set(np.flatnonzero(H[:, v]).tolist())
                depth_sets = [set(reached)]
                while True:
                    nxt = set()
                    for c in list(depth_sets[-1]):
                        for u in np.flatnonzero(H[c]):
                            for c2 in np.flatnonzero(H[:, u]):
                                if c2 not in reached:
                                    nxt.add(int(c2))
                    if not nxt:
                        break
                    if len(reached) + len(nxt) == m:
                        break
                    reached |= nxt
                    depth_sets.append(nxt)
                outside = np.array(sorted(set(range(m)) - reached))
                if outside.size == 0:
                    outside = np.flatnonzero(H[:, v] == 0)
                degs = check_deg[outside]
                cands = outside[degs == degs.min()]
            c = int(rng.choice(cands))
            H[c, v] = 1
            check_deg[c] += 1
    return H


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", type=Path, default=DATA)
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    hamming = np.array([[1, 0, 1, 0, 1, 0, 1],
                        [0, 1, 1, 0, 0, 1, 1],
                        [0, 0, 0, 1, 1, 1, 1]])
    write_alist(hamming, args.outdir / "hamming_7_4.alist")
    # three checks chained through bits 2 and 4: Tanner graph is a tree
    tree = np.zeros((3, 7), dtype=int)
    tree[0, [0, 1, 2]] = tree[1, [2, 3, 4]] = tree[2, [4, 5, 6]] = 1
    write_alist(tree, args.outdir / "tree_7_4.alist")

    for name, m, seed in [("peg_264_r12", 132, 12), ("peg_264_r56", 44, 56)]:
        H = peg(264, m, 3, np.random.default_rng(seed))
        code = LdpcCode(H, name)
        print(f"{name}: N={code.N} C={code.C} rank={code.rank} K={code.K} rate={code.rate:.4f}")
        write_alist(H, args.outdir / f"{name}.alist")


if __name__ == "__main__":
    main()
