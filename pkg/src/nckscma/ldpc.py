"""Binary LDPC codes loaded from alist files, with a GF(2) systematic encoder
and a flooding belief-propagation decoder."""
from __future__ import annotations

import warnings
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .llr import ATANH_CLIP, LLR_MAX, TANH_CLIP, hard_decision


class AlistError(ValueError):
    pass


def gf2_rref(H: np.ndarray):
    """Reduced row echelon form over GF(2). Returns (rref, pivot_columns)."""
    A = (np.asarray(H) % 2).astype(bool).copy()
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(A[r:, c])
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            A[[r, p]] = A[[p, r]]
        others = np.flatnonzero(A[:, c])
        others = others[others != r]
        A[others] ^= A[r]
        pivots.append(c)
        r += 1
    return A[:r].astype(np.uint8), np.array(pivots, dtype=int)


class LdpcCode:
    """Parity-check matrix ``H`` (C x N) with adjacency and encoder tables.

    Edges are numbered in row-major order of the nonzeros of ``H``, so the
    edges of each check are contiguous.
    """

    def __init__(self, H, name: str = ""):
        H = (np.asarray(H) % 2).astype(np.uint8)
        if H.ndim != 2:
            raise ValueError("H must be a matrix")
        self.H = H
        self.name = name
        self.C, self.N = H.shape
        self.edge_check, self.edge_var = np.nonzero(H)
        self.E = self.edge_check.size
        self.row_adj = [np.flatnonzero(H[c]) for c in range(self.C)]
        self.col_adj = [np.flatnonzero(H[:, n]) for n in range(self.N)]
        if any(len(a) == 0 for a in self.row_adj):
            raise ValueError("H has an empty check row")
        self.check_starts = np.searchsorted(self.edge_check, np.arange(self.C))
        self.check_degree = H.sum(axis=1).astype(int)
        self.var_degree = H.sum(axis=0).astype(int)
        self._var_sum = sp.csr_matrix(
            (np.ones(self.E), (self.edge_var, np.arange(self.E))), shape=(self.N, self.E))
        self._single = self.check_degree[self.edge_check] == 1

        rref, pivots = gf2_rref(H)
        self.rank = len(pivots)
        if self.rank < self.C:
            warnings.warn(f"{name or 'H'}: rank {self.rank} < {self.C} checks; "
                          f"information length is {self.N - self.rank}", stacklevel=2)
        self.parity_positions = pivots
        self.info_positions = np.setdiff1d(np.arange(self.N), pivots)
        self._parity_map = rref[:, self.info_positions]

    @property
    def K(self) -> int:
        return self.N - self.rank

    @property
    def rate(self) -> float:
        return self.K / self.N

    def var_totals(self, Q):
        """Sum of edge messages per variable; ``Q`` has shape (..., E)."""
        Q = np.asarray(Q)
        flat = Q.reshape(-1, self.E)
        return (self._var_sum @ flat.T).T.reshape(Q.shape[:-1] + (self.N,))

    def check_messages(self, S):
        """Extrinsic check-to-variable LLRs for every edge; ``S`` is (..., E)."""
        S = np.asarray(S, dtype=float)
        t = np.tanh(np.clip(S / 2.0, -TANH_CLIP, TANH_CLIP))
        with np.errstate(divide="ignore"):
            logmag = np.log(np.maximum(np.abs(t), 1e-300))
        neg = (t < 0).astype(np.int64)
        tot_log = np.add.reduceat(logmag, self.check_starts, axis=-1)[..., self.edge_check]
        tot_neg = np.add.reduceat(neg, self.check_starts, axis=-1)[..., self.edge_check]
        sign = 1.0 - 2.0 * ((tot_neg - neg) & 1)
        prod = sign * np.exp(tot_log - logmag)
        Q = 2.0 * np.arctanh(np.clip(prod, -ATANH_CLIP, ATANH_CLIP))
        Q[..., self._single] = LLR_MAX
        return Q

    def variable_messages(self, Q, prior):
        """Extrinsic variable-to-check LLRs: all incoming ``Q`` but the target
        edge's own, plus the per-variable ``prior`` (..., N)."""
        totals = self.var_totals(Q) + prior
        return totals[..., self.edge_var] - Q

    def syndromes(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64)
        return (bits @ self.H.T.astype(np.int64)) % 2

    def __repr__(self):
        return f"LdpcCode({self.name!r}, N={self.N}, C={self.C}, K={self.K})"


def load_alist(path) -> LdpcCode:
    path = Path(path)
    try:
        tokens = [list(map(int, line.split())) for line in path.read_text().splitlines() if line.strip()]
    except ValueError as exc:
        raise AlistError(f"{path}: non-integer token ({exc})") from None
    try:
        N, C = tokens[0][:2]
        max_col, max_row = tokens[1][:2]
        col_w = tokens[2]
        row_w = tokens[3]
        col_lines = tokens[4:4 + N]
        row_lines = tokens[4 + N:4 + N + C]
    except (IndexError, ValueError):
        raise AlistError(f"{path}: truncated header") from None
    if len(col_w) != N or len(row_w) != C:
        raise AlistError(f"{path}: weight lists have {len(col_w)}/{len(row_w)} entries, expected {N}/{C}")
    if len(col_lines) != N or len(row_lines) != C:
        raise AlistError(f"{path}: expected {N} column and {C} row lines")
    if max(col_w) != max_col or max(row_w) != max_row:
        raise AlistError(f"{path}: max weights disagree with weight lists")
    H = np.zeros((C, N), dtype=np.uint8)
    for n, line in enumerate(col_lines):
        idx = [v for v in line if v != 0]
        if len(idx) != col_w[n]:
            raise AlistError(f"{path}: column {n + 1} lists {len(idx)} entries, weight says {col_w[n]}")
        for v in idx:
            if not 1 <= v <= C:
                raise AlistError(f"{path}: column {n + 1} references check {v} out of range")
            H[v - 1, n] = 1
    for c, line in enumerate(row_lines):
        idx = sorted(v for v in line if v != 0)
        if len(idx) != row_w[c]:
            raise AlistError(f"{path}: row {c + 1} lists {len(idx)} entries, weight says {row_w[c]}")
        if idx != (np.flatnonzero(H[c]) + 1).tolist():
            raise AlistError(f"{path}: row {c + 1} disagrees with the column lists")
    return LdpcCode(H, name=path.stem)


def write_alist(H, path) -> None:
    H = np.asarray(H)
    C, N = H.shape
    cols = [np.flatnonzero(H[:, n]) + 1 for n in range(N)]
    rows = [np.flatnonzero(H[c]) + 1 for c in range(C)]
    mc, mr = max(map(len, cols)), max(map(len, rows))
    pad = lambda v, k: " ".join(map(str, list(v) + [0] * (k - len(v))))
    lines = [f"{N} {C}", f"{mc} {mr}",
             " ".join(str(len(v)) for v in cols), " ".join(str(len(v)) for v in rows)]
    lines += [pad(v, mc) for v in cols] + [pad(v, mr) for v in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def encode(code: LdpcCode, info) -> np.ndarray:
    """Systematic encoding; works on a single vector or a batch (..., K)."""
    info = np.asarray(info, dtype=np.uint8)
    if info.shape[-1] != code.K:
        raise ValueError(f"expected {code.K} information bits, got {info.shape[-1]}")
    x = np.zeros(info.shape[:-1] + (code.N,), dtype=np.uint8)
    x[..., code.info_positions] = info
    x[..., code.parity_positions] = (info.astype(np.int64) @ code._parity_map.T.astype(np.int64)) % 2
    return x


def check_node_update(incoming) -> float:
    incoming = np.asarray(incoming, dtype=float)
    if incoming.size == 0:
        return LLR_MAX
    prod = np.prod(np.tanh(np.clip(incoming / 2.0, -TANH_CLIP, TANH_CLIP)))
    return float(2.0 * np.arctanh(np.clip(prod, -ATANH_CLIP, ATANH_CLIP)))


def syndrome_ok(code: LdpcCode, hard_bits) -> bool:
    hard_bits = np.asarray(hard_bits)
    if hard_bits.shape[-1] != code.N:
        raise ValueError(f"expected {code.N} bits")
    return bool(not np.any(code.syndromes(hard_bits)))


class BpResult(NamedTuple):
    bits: np.ndarray
    converged: bool
    iterations: int
    llr: np.ndarray


def bp_decode(code: LdpcCode, channel_llrs, max_iter: int, early_stop: bool = True) -> BpResult:
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    llr = np.clip(np.asarray(channel_llrs, dtype=float), -LLR_MAX, LLR_MAX)
    Q = np.zeros(code.E)
    S = llr[code.edge_var]
    it = 0
    ok = False
    for it in range(1, max_iter + 1):
        Q = code.check_messages(S)
        total = code.var_totals(Q) + llr
        bits = hard_decision(total)
        ok = syndrome_ok(code, bits)
        if ok and early_stop:
            break
        S = total[code.edge_var] - Q
    return BpResult(bits, ok, it, total)
