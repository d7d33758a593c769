"""Regenerate the bundled example SCMA codebooks under src/nckscma/data/.

Usage: python scripts/make_codebooks.py [--iters N] [--outdir DIR]

Every user maps its 2 bits to a QPSK point on each of its two resources,
with a different labelling on the second resource so that neighbours on one
resource are far apart on the other. Per-(user, resource) phase rotations are
then picked by seeded random search to maximise the minimum distance of the
superimposed constellation on every resource. These are stand-ins, not
published designs.
"""
import argparse
import itertools
from pathlib import Path

import numpy as np

from nckscma.codebook import Codebook, save_codebook

DATA = Path(__file__).resolve().parents[1] / "src" / "nckscma" / "data"

QPSK = np.exp(1j * np.pi / 4) * np.array([1, 1j, -1j, -1])  # Gray: 00, 01, 10, 11
SECOND = QPSK[[0, 3, 1, 2]]  # 00/01 and 10/11 opposite

SIG_4x6 = np.array([[0, 1, 1, 0, 1, 0],
                    [1, 0, 1, 0, 0, 1],
                    [0, 1, 0, 1, 0, 1],
                    [1, 0, 0, 1, 1, 0]])


def sig_5x10():
    sig = np.zeros((5, 10), dtype=int)
    for j, (a, b) in enumerate(itertools.combinations(range(5), 2)):
        sig[a, j] = sig[b, j] = 1
    return sig


def build(sig, phases):
    R, J = sig.shape
    cw = np.zeros((J, 4, R), dtype=complex)
    for j in range(J):
        r1, r2 = np.flatnonzero(sig[:, j])
        cw[j, :, r1] = QPSK * np.exp(1j * phases[j, r1]) / np.sqrt(2)
        cw[j, :, r2] = SECOND * np.exp(1j * phases[j, r2]) / np.sqrt(2)
    return cw


def score(sig, cw):
    worst = np.inf
    for r in range(sig.shape[0]):
        users = np.flatnonzero(sig[r])
        pts = np.zeros(1, dtype=complex)
        for j in users:
            pts = (pts[:, None] + cw[j, :, r][None, :]).ravel()
        d = np.abs(pts[:, None] - pts[None, :])
        d[np.diag_indices_from(d)] = np.inf
        worst = min(worst, d.min())
    return worst


def search(sig, iters, rng):
    best = rng.uniform(0, np.pi / 2, sig.T.shape)
    best_s = score(sig, build(sig, best))
    for it in range(iters):
        step = 0.3 if it < iters // 2 else 0.05
        cand = best + step * rng.standard_normal(best.shape)
        s = score(sig, build(sig, cand))
        if s > best_s:
            best, best_s = cand, s
    return build(sig, best), best_s


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--iters", type=int, default=3000)
    ap.add_argument("--outdir", type=Path, default=DATA)
    args = ap.parse_args()
    rng = np.random.default_rng(2024)
    for name, sig in [("codebook_4x6", SIG_4x6), ("codebook_5x10", sig_5x10())]:
        cw, s = search(sig, args.iters, rng)
        cb = Codebook(cw, sig, name=name).normalized()
        cb.validate()
        print(f"{name}: J={cb.J} R={cb.R} d_v={cb.d_v} d_f={cb.d_f} min superposition distance {s:.4f}")
        save_codebook(cb, args.outdir / f"{name}.json",
                      mapping="big-endian bits; QPSK Gray on first resource, relabelled QPSK on second",
                      note="example stand-in generated by scripts/make_codebooks.py")


if __name__ == "__main__":
    main()
