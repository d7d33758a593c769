"""Shared LLR conventions.

LLRs are ``log(P(bit=0) / P(bit=1))`` everywhere in the package.
"""
import numpy as np

LLR_MAX = 40.0
# tanh(x) rounds to 1.0 in double precision beyond this
TANH_CLIP = 19.0
ATANH_CLIP = 1.0 - 1e-12


def clip_llr(llr, llr_max=LLR_MAX):
    return np.clip(llr, -llr_max, llr_max)


def boxplus(a, b):
    """Elementwise soft XOR of two LLR arrays.

    Uses the sign-min form with its exact correction terms, which stays
    accurate where the tanh product rounds to one.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
            + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b))))


def hard_decision(llr):
    # ties (LLR == 0) decide for bit 0
    return (np.asarray(llr) < 0).astype(np.uint8)
