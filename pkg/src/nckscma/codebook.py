"""SCMA codebooks: loading, bit mapping and symbol/bit domain conversion."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .llr import LLR_MAX

ENERGY_TOL = 1e-6


class CodebookError(ValueError):
    pass


def bit_table(b: int) -> np.ndarray:
    """(2**b, b) table of symbol bits, big-endian (bit 0 is the MSB)."""
    m = np.arange(2**b)
    shifts = np.arange(b - 1, -1, -1)
    return ((m[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class Codebook:
    """Per-user SCMA codeword sets plus the R x J signature matrix.

    ``codewords[j, m, r]`` is resource ``r`` of symbol ``m`` for user ``j``.
    The constructor checks structure only (shapes, M = 2**b, sparsity);
    :meth:`validate` adds the load-time checks (overloading, regularity,
    unit energy).
    """

    codewords: np.ndarray
    signature: np.ndarray
    name: str = ""
    users_on: tuple = field(init=False, repr=False)
    resources_of: tuple = field(init=False, repr=False)
    bits: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        cw = np.asarray(self.codewords, dtype=complex)
        sig = np.asarray(self.signature).astype(np.uint8)
        if cw.ndim != 3:
            raise CodebookError(f"codewords must be J x M x R, got shape {cw.shape}")
        J, M, R = cw.shape
        if sig.shape != (R, J):
            raise CodebookError(f"signature must be {R} x {J}, got {sig.shape}")
        if not np.all((sig == 0) | (sig == 1)):
            raise CodebookError("signature entries must be 0 or 1")
        b = int(round(np.log2(M))) if M > 0 else 0
        if M < 2 or 2**b != M:
            raise CodebookError(f"M = {M} is not a power of two (M != 2^b)")
        for j in range(J):
            for r in range(R):
                if sig[r, j] == 0:
                    bad = np.flatnonzero(cw[j, :, r] != 0)
                    if bad.size:
                        raise CodebookError(
                            f"sparsity mismatch: codewords[{j}][{bad[0]}][{r}] is nonzero "
                            f"but signature[{r}][{j}] = 0")
                elif not np.any(cw[j, :, r] != 0):
                    raise CodebookError(
                        f"sparsity mismatch: user {j} is all-zero on its resource {r}")
        cw.setflags(write=False)
        sig.setflags(write=False)
        object.__setattr__(self, "codewords", cw)
        object.__setattr__(self, "signature", sig)
        object.__setattr__(self, "users_on", tuple(np.flatnonzero(sig[r]) for r in range(R)))
        object.__setattr__(self, "resources_of", tuple(np.flatnonzero(sig[:, j]) for j in range(J)))
        object.__setattr__(self, "bits", bit_table(b))

    @property
    def J(self) -> int:
        return self.codewords.shape[0]

    @property
    def M(self) -> int:
        return self.codewords.shape[1]

    @property
    def R(self) -> int:
        return self.codewords.shape[2]

    @property
    def b(self) -> int:
        return self.bits.shape[1]

    @property
    def d_v(self) -> int:
        return int(self.signature.sum(axis=0).max())

    @property
    def d_f(self) -> int:
        return int(self.signature.sum(axis=1).max())

    def energies(self) -> np.ndarray:
        return (np.abs(self.codewords) ** 2).sum(axis=2).mean(axis=1)

    def validate(self) -> None:
        if self.J <= self.R:
            raise CodebookError(f"not overloaded: J = {self.J} <= R = {self.R}")
        col = self.signature.sum(axis=0)
        row = self.signature.sum(axis=1)
        if np.any(col != col[0]):
            raise CodebookError(f"irregular signature: user degrees {col.tolist()}")
        if np.any(row != row[0]):
            raise CodebookError(f"irregular signature: resource degrees {row.tolist()}")
        e = self.energies()
        bad = np.flatnonzero(np.abs(e - 1.0) > ENERGY_TOL)
        if bad.size:
            raise CodebookError(
                f"energy: user {bad[0]} has average codeword energy {e[bad[0]]:.9g}, expected 1")

    def normalized(self) -> "Codebook":
        scale = np.sqrt(self.energies())[:, None, None]
        return Codebook(self.codewords / scale, self.signature, self.name)


def load_codebook(path) -> Codebook:
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CodebookError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    for key in ("J", "R", "M", "signature", "codewords"):
        if key not in doc:
            raise CodebookError(f"{path}: missing key {key!r}")
    J, R, M = int(doc["J"]), int(doc["R"]), int(doc["M"])
    sig = np.asarray(doc["signature"])
    if sig.shape != (R, J):
        raise CodebookError(f"{path}: signature is {sig.shape}, header says {R} x {J}")
    raw = doc["codewords"]
    if len(raw) != J:
        raise CodebookError(f"{path}: codewords lists {len(raw)} users, header says J = {J}")
    cw = np.zeros((J, M, R), dtype=complex)
    for j, user in enumerate(raw):
        if len(user) != M:
            raise CodebookError(f"{path}: codewords[{j}] has {len(user)} symbols, expected M = {M}")
        for m, word in enumerate(user):
            if len(word) != R:
                raise CodebookError(f"{path}: codewords[{j}][{m}] has {len(word)} entries, expected R = {R}")
            for r, pair in enumerate(word):
                if len(pair) != 2:
                    raise CodebookError(f"{path}: codewords[{j}][{m}][{r}] is not a [re, im] pair")
                cw[j, m, r] = complex(pair[0], pair[1])
    try:
        cb = Codebook(cw, sig, name=doc.get("name", path.stem))
        cb.validate()
    except CodebookError as exc:
        raise CodebookError(f"{path}: {exc}") from None
    return cb


def save_codebook(cb: Codebook, path, **extra) -> None:
    doc = {"name": cb.name, **extra, "J": cb.J, "R": cb.R, "M": cb.M,
           "signature": cb.signature.tolist(),
           "codewords": [[[[float(z.real), float(z.imag)] for z in word] for word in user]
                         for user in cb.codewords]}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def bits_to_index(bits) -> np.ndarray:
    """Big-endian symbol index of the last axis of ``bits``."""
    bits = np.asarray(bits, dtype=np.int64)
    b = bits.shape[-1]
    weights = 1 << np.arange(b - 1, -1, -1)
    return bits @ weights


def map_bits(cb: Codebook, j: int, bits) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape != (cb.b,):
        raise ValueError(f"expected {cb.b} bits, got shape {bits.shape}")
    return cb.codewords[j, int(bits_to_index(bits))]


def marginalize_log(logp, bits: np.ndarray, llr_max=LLR_MAX) -> np.ndarray:
    """Bit LLRs from unnormalized symbol log-probabilities on the last axis."""
    logp = np.asarray(logp, dtype=float)
    b = bits.shape[1]
    out = np.empty(logp.shape[:-1] + (b,))
    for i in range(b):
        zero = bits[:, i] == 0
        out[..., i] = logsumexp(logp[..., zero], axis=-1) - logsumexp(logp[..., ~zero], axis=-1)
    return np.clip(np.nan_to_num(out, nan=0.0), -llr_max, llr_max)


def inverse_marginalize_log(llrs, bits: np.ndarray, llr_max=LLR_MAX) -> np.ndarray:
    """Normalized symbol log-probabilities from bit LLRs on the last axis."""
    llrs = np.clip(np.asarray(llrs, dtype=float), -llr_max, llr_max)
    log0 = -np.logaddexp(0.0, -llrs)  # log P(bit=0)
    log1 = -np.logaddexp(0.0, llrs)
    # (..., b) x (M, b) -> (..., M)
    return log0 @ (1 - bits.T).astype(float) + log1 @ bits.T.astype(float)


def marginalize(cb: Codebook, symbol_probs) -> np.ndarray:
    p = np.asarray(symbol_probs, dtype=float)
    if p.shape[-1] != cb.M:
        raise ValueError(f"expected {cb.M} symbol probabilities")
    if np.any(p < 0):
        raise ValueError("symbol probabilities must be nonnegative")
    if np.any(p.sum(axis=-1) <= 0):
        raise ValueError("symbol probabilities sum to zero")
    with np.errstate(divide="ignore"):
        return marginalize_log(np.log(p), cb.bits)


def inverse_marginalize(cb: Codebook, llrs) -> np.ndarray:
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape[-1] != cb.b:
        raise ValueError(f"expected {cb.b} LLRs")
    p = np.exp(inverse_marginalize_log(llrs, cb.bits))
    return p / p.sum(axis=-1, keepdims=True)


def modulate(cb: Codebook, bits) -> tuple[np.ndarray, np.ndarray]:
    """Map per-user bit streams (J, L*b) to symbol indices (L, J) and
    transmitted resource values (L, J, R)."""
    bits = np.asarray(bits)
    J, n = bits.shape
    if J != cb.J or n % cb.b:
        raise ValueError(f"expected ({cb.J}, multiple of {cb.b}) bits, got {bits.shape}")
    idx = bits_to_index(bits.reshape(J, n // cb.b, cb.b)).T
    return idx, cb.codewords[np.arange(J)[None, :], idx]
