"""Uplink SCMA channel: Rayleigh/AWGN fading, superposition and noise."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Fading(str, enum.Enum):
    RAYLEIGH_IID = "rayleigh_iid"
    BLOCK_PER_TTI = "block_per_tti"
    AWGN_UNIT = "awgn_unit"


class SnrConvention(str, enum.Enum):
    ES_N0 = "EsN0"
    EB_N0 = "EbN0"


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """``h[l, j, r]`` for every codeword slot ``l``; zero off the signature."""
    h: np.ndarray
    N0: float


def snr_to_n0(snr_db: float, convention="EsN0", rate: float | None = None, b: int | None = None) -> float:
    n0 = 10.0 ** (-snr_db / 10.0)
    if SnrConvention(convention) is SnrConvention.EB_N0:
        if rate is None or b is None:
            raise ValueError("Eb/N0 needs the code rate and bits per symbol")
        n0 /= rate * b
    return n0


def sample_channel(signature, n_slots: int, L: int, fading, rng: np.random.Generator,
                   N0: float = 0.0) -> ChannelRealization:
    """Channel coefficients for ``n_slots`` TTIs of ``L`` codewords each."""
    sig = np.asarray(signature)
    R, J = sig.shape
    fading = Fading(fading)
    if fading is Fading.AWGN_UNIT:
        h = np.ones((n_slots * L, J, R), dtype=complex)
    else:
        rows = n_slots * L if fading is Fading.RAYLEIGH_IID else n_slots
        h = (rng.standard_normal((rows, J, R)) + 1j * rng.standard_normal((rows, J, R))) / np.sqrt(2)
        if fading is Fading.BLOCK_PER_TTI:
            h = np.repeat(h, L, axis=0)
    return ChannelRealization(h * sig.T[None, :, :], float(N0))


def transmit(X, ch: ChannelRealization, rng: np.random.Generator) -> np.ndarray:
    """Received samples ``Y[l, r]`` for transmitted values ``X[l, j, r]``."""
    X = np.asarray(X)
    if X.shape != ch.h.shape:
        raise ValueError(f"codeword array {X.shape} does not match channel {ch.h.shape}")
    Y = np.einsum("ljr,ljr->lr", ch.h, X)
    if ch.N0 > 0:
        shape = Y.shape
        Y = Y + np.sqrt(ch.N0 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return Y
