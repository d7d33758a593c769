"""Brute-force reference checks for the detector building blocks.

Each oracle compares a package routine against an independent exhaustive
computation on a problem small enough to enumerate, and returns an
:class:`OracleResult`. The CLI ``oracle`` command and the test suite share
these functions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import sample_channel, transmit
from .codebook import Codebook, bit_table
from .detector import (Case, DetectorConfig, accumulate_svn_evidence, detect_round,
                       fn_likelihoods, fn_update, ncn_update, svn_update, symbol_posteriors)
from .ldpc import LdpcCode, encode
from .schedule import build_schedule, derive_config, interleave, make_interleavers, soft_xor


@dataclass(frozen=True)
class OracleResult:
    name: str
    passed: bool
    max_err: float
    tol: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: max error {self.max_err:.3g} (tol {self.tol:g}) {self.detail}".rstrip()


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _log_bit_prior(llrs, bits):
    """log P(symbol) for independent bits, computed from probabilities directly."""
    p1 = _sigmoid(-np.asarray(llrs, dtype=float))  # P(bit = 1)
    p = np.where(bits[None, :, :] == 1, p1[:, None, :], 1.0 - p1[:, None, :])
    return np.log(p).sum(axis=-1)


# -- toy problems --------------------------------------------------------------

def toy_tree_codebook(seed: int = 7) -> Codebook:
    """Two users on two resources, M = 4; user 0 uses both resources, user 1
    only the second one, so the SCMA graph is a tree."""
    rng = np.random.default_rng(seed)
    sig = np.array([[1, 0], [1, 1]])
    cw = (rng.standard_normal((2, 4, 2)) + 1j * rng.standard_normal((2, 4, 2))) / np.sqrt(2)
    cw *= sig.T[:, None, :]
    return Codebook(cw, sig, "toy_tree")


def toy_orthogonal_codebook() -> Codebook:
    """Two BPSK users sharing one resource on orthogonal axes, so the
    resource likelihood factors into one term per user."""
    cw = np.array([[1, -1], [1j, -1j]]).reshape(2, 2, 1)
    return Codebook(cw, np.array([[1, 1]]), "toy_orthogonal")


def gray_qpsk_codebook() -> Codebook:
    b = bit_table(2).astype(float)
    cw = ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2)
    return Codebook(cw.reshape(1, 4, 1), np.array([[1]]), "gray_qpsk")


def tree_code_7_4() -> LdpcCode:
    H = np.zeros((3, 7), dtype=np.uint8)
    for c, cols in enumerate(((0, 1, 2), (2, 3, 4), (4, 5, 6))):
        H[c, list(cols)] = 1
    return LdpcCode(H, "tree_7_4")


# -- oracles -------------------------------------------------------------------

NAMED_TRIPLES = {
    # (K_eq, T, K_in): (N_R, N_R_bar)
    (4, 2, 2): (6, 3),
    (4, 2, 3): (7, 3.5),
    (4, 3, 2): (9, 3),
    (5, 2, 3): (8, 4),
    (3, 2, 1): (4, 2),
    (3, 3, 1): (6, 2),
}


def config_oracle() -> OracleResult:
    errs = []
    for (K_eq, T, K_in), (N_R, nbar) in NAMED_TRIPLES.items():
        cfg = derive_config(K_eq, T, K_in, 264, 2)
        if cfg.N_R != N_R or cfg.N_R_bar != nbar or cfg.equivalent_repetitions() != K_eq:
            errs.append((K_eq, T, K_in))
    return OracleResult("config", not errs, float(len(errs)), 0.0,
                        f"mismatched: {errs}" if errs else f"{len(NAMED_TRIPLES)} schemes")


def soft_xor_oracle(n: int = 10_000, seed: int = 1, tol: float = 1e-9) -> OracleResult:
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-10, 10, (2, n))
    pa, pb = _sigmoid(-a), _sigmoid(-b)  # P(bit = 1)
    exact = pa * (1 - pb) + pb * (1 - pa)
    got = _sigmoid(-soft_xor(a, b))
    err = float(np.max(np.abs(got - exact)))
    return OracleResult("soft-xor", err <= tol, err, tol, f"{n} pairs")


def mpa_oracle(draws: int = 100, seed: int = 2, N0: float = 0.5, n_iter: int = 6,
               tol: float = 1e-6) -> OracleResult:
    """FN/SVN message passing on a tree toy codebook vs exhaustive MAP."""
    cb = toy_tree_codebook()
    rng = np.random.default_rng(seed)
    ch = sample_channel(cb.signature, draws, 1, "rayleigh_iid", rng, N0)
    sym = rng.integers(0, cb.M, (draws, cb.J))
    X = cb.codewords[np.arange(cb.J)[None, :], sym]
    Y = transmit(X, ch, rng)
    prior = rng.uniform(-3, 3, (draws, cb.J, cb.b))

    lik = fn_likelihoods(cb, Y, ch.h, N0)
    G = np.full((draws, cb.R, cb.J, cb.M), 1.0 / cb.M)
    for _ in range(n_iter):
        I = fn_update(cb, lik, G)
        G = svn_update(cb, I, prior)
    got = symbol_posteriors(cb, I, prior)

    logp = np.zeros((draws, cb.M, cb.M))
    for m0, m1 in itertools.product(range(cb.M), repeat=2):
        x = cb.codewords[0, m0] * ch.h[:, 0] + cb.codewords[1, m1] * ch.h[:, 1]
        logp[:, m0, m1] = -(np.abs(Y - x) ** 2).sum(axis=1) / N0
    logp += _log_bit_prior(prior[:, 0], cb.bits)[:, :, None]
    logp += _log_bit_prior(prior[:, 1], cb.bits)[:, None, :]
    p = np.exp(logp - logp.max(axis=(1, 2), keepdims=True))
    p /= p.sum(axis=(1, 2), keepdims=True)
    exact = np.stack([p.sum(axis=2), p.sum(axis=1)], axis=1)
    err = float(np.max(np.abs(got - exact)))
    return OracleResult("mpa", err <= tol, err, tol, f"{draws} draws")


def joint_map_oracle(draws: int = 20, seed: int = 3, N0: float = 2.0,
                     tol: float = 1e-6) -> OracleResult:
    """Full detector (SCMA + LDPC, T = 1) vs enumeration of all codeword pairs."""
    cb, code = toy_orthogonal_codebook(), tree_code_7_4()
    ncfg = derive_config(1, 1, 1, code.N, cb.b)
    schedule = build_schedule(ncfg, "KScma")
    perms = make_interleavers(seed, cb.J, 1, code.N)
    dcfg = DetectorConfig(max_iter=12, early_stop=False)
    info = np.array(list(itertools.product((0, 1), repeat=code.K)), dtype=np.uint8)
    book = encode(code, info)                                      # (16, 7)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        cw = book[rng.integers(0, len(book), cb.J)]
        tx = interleave(cw[:, None, :], perms)[:, 0]               # (J, N)
        X = cb.codewords[np.arange(cb.J)[None, :], tx.T]
        ch = sample_channel(cb.signature, 1, code.N, "awgn_unit", rng, N0)
        Y = transmit(X, ch, rng)
        res = detect_round(cb, code, schedule, Y, ch.h, N0, perms, cfg=dcfg)

        sent = [interleave(book, perms[j, 0][None, :]) for j in range(cb.J)]  # (16, N) per user
        logp = np.zeros((len(book), len(book)))
        for a, c in itertools.product(range(len(book)), repeat=2):
            x = cb.codewords[0, sent[0][a], 0] + cb.codewords[1, sent[1][c], 0]
            logp[a, c] = -np.sum(np.abs(Y[:, 0] - x) ** 2) / N0
        p = np.exp(logp - logp.max())
        p /= p.sum()
        for j, marg in enumerate((p.sum(axis=1), p.sum(axis=0))):
            p1 = marg @ book
            exact = np.log(1 - p1) - np.log(p1)
            worst = max(worst, float(np.max(np.abs(res.llr[j, 0] - exact))))
    return OracleResult("joint-map", worst <= tol, worst, tol, f"{draws} draws")


def _direct_partial_fail(I_a, I_b, I_w, F_a, F_b, F_w):
    """PartialFail NCN output with soft XOR written in log-sum-exp form."""
    def bp(x, y):
        return np.logaddexp(0.0, x + y) - np.logaddexp(x, y)
    return I_a + F_a + bp(I_b, I_w) + bp(F_b, F_w)


def ncn_oracle(n: int = 1000, seed: int = 4, tol: float = 1e-12) -> OracleResult:
    rng = np.random.default_rng(seed)
    I_a, I_b, I_w, F_a, F_b, F_w = rng.uniform(-15, 15, (6, n))
    zero = np.zeros(n)
    all_fail = ncn_update(I_a, I_b, I_w, zero, zero, zero, Case.ALL_FAIL)
    fresh = ncn_update(I_a, I_b, I_w, zero, zero, zero, Case.ALL_SUCCESS)
    exact_cases = bool(np.array_equal(all_fail, fresh))
    got = ncn_update(I_a, I_b, I_w, F_a, F_b, F_w, Case.PARTIAL_FAIL)
    err = float(np.max(np.abs(got - _direct_partial_fail(I_a, I_b, I_w, F_a, F_b, F_w))))
    return OracleResult("ncn-cases", exact_cases and err <= tol, err, tol,
                        f"all-fail with zero buffers == fresh: {exact_cases}")


def mrc_oracle(symbols: int = 100_000, seed: int = 5, snr_db: float = 0.0,
               tol: float = 0.02) -> OracleResult:
    """Two repetitions at N0 vs one transmission at N0 / 2 (+3 dB): the
    combined bit LLRs must have the same mean and variance."""
    cb = gray_qpsk_codebook()
    N0 = 10 ** (-snr_db / 10)
    rng = np.random.default_rng(seed)

    def llrs(n_rep, n0):
        ncfg = derive_config(n_rep, 1, n_rep, 2 * symbols, cb.b)
        schedule = build_schedule(ncfg, "KScma")
        sym = rng.integers(0, cb.M, symbols)
        X = np.tile(cb.codewords[0, sym], (n_rep, 1))[:, None, :]
        ch = sample_channel(cb.signature, n_rep, symbols, "awgn_unit", rng, n0)
        Y = transmit(X, ch, rng)
        I = fn_update(cb, fn_likelihoods(cb, Y, ch.h, n0), np.full((n_rep * symbols, 1, 1, cb.M), 0.25))
        total = accumulate_svn_evidence(cb, I, schedule)[0][0, 0]
        sign = 1 - 2 * cb.bits[sym].reshape(-1).astype(float)
        return total * sign

    rep, single = llrs(2, N0), llrs(1, N0 / 2)
    stats = np.array([[rep.mean(), rep.var()], [single.mean(), single.var()]])
    rel = np.abs(stats[0] - stats[1]) / np.abs(stats[1])
    err = float(rel.max())
    return OracleResult("mrc", err <= tol, err, tol,
                        f"mean {stats[0, 0]:.4f}/{stats[1, 0]:.4f}, var {stats[0, 1]:.4f}/{stats[1, 1]:.4f}")


ORACLES = {
    "config": config_oracle,
    "soft-xor": soft_xor_oracle,
    "mpa": mpa_oracle,
    "joint-map": joint_map_oracle,
    "ncn-cases": ncn_oracle,
    "mrc": mrc_oracle,
}
