"""NCK-SCMA scheme arithmetic and per-TTI transmission schedules."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .llr import boxplus


class InfeasibleScheme(ValueError):
    pass


class Layout(str, enum.Enum):
    TYPE_A = "TypeA"
    TYPE_B = "TypeB"
    TYPE_C = "TypeC"
    K_SCMA = "KScma"


@dataclass(frozen=True)
class NckConfig:
    K_eq: int
    T: int
    K_in: int
    K_nc: int
    W: int
    N_R: int
    pairs: tuple
    N: int
    b: int

    @property
    def L(self) -> int:
        return self.N // self.b

    @property
    def N_R_bar(self) -> Fraction:
        return Fraction(self.N_R, self.T)

    def equivalent_repetitions(self) -> Fraction:
        return self.K_in + Fraction(2 * (self.N_R - self.T * self.K_in), self.T)

    def pairs_of(self, t: int):
        """(pair index, partner) for every pair that packet ``t`` belongs to."""
        return [(w, b if a == t else a) for w, (a, b) in enumerate(self.pairs) if t in (a, b)]


def derive_config(K_eq: int, T: int, K_in: int, N: int, b: int) -> NckConfig:
    for name, v in (("K_eq", K_eq), ("T", T), ("K_in", K_in), ("N", N), ("b", b)):
        if int(v) != v:
            raise InfeasibleScheme(f"{name} must be an integer, got {v}")
    if T < 1 or K_in < 1 or K_eq < K_in:
        raise InfeasibleScheme(f"need K_eq >= K_in >= 1 and T >= 1, got ({K_eq}, {T}, {K_in})")
    if b < 1 or N < 1 or N % b:
        raise InfeasibleScheme(f"packet length N = {N} must be a positive multiple of b = {b}")
    if T == 1:
        if K_eq != K_in:
            raise InfeasibleScheme(f"K-SCMA (T = 1) needs K_eq == K_in, got {K_eq} != {K_in}")
        K_nc, W = 0, 0
    else:
        if (K_eq - K_in) % (T - 1):
            raise InfeasibleScheme(
                f"K_nc = (K_eq - K_in)/(T - 1) = {K_eq - K_in}/{T - 1} is not an integer")
        K_nc = (K_eq - K_in) // (T - 1)
        W = comb(T, 2)
    N_R = T * K_in + W * K_nc
    pairs = tuple(itertools.combinations(range(T), 2))
    cfg = NckConfig(K_eq, T, K_in, K_nc, W, N_R, pairs, N, b)
    if cfg.equivalent_repetitions() != K_eq:
        raise InfeasibleScheme(f"({K_eq}, {T}, {K_in}) violates K_eq = K_in + 2(N_R - T K_in)/T")
    return cfg


@dataclass(frozen=True)
class Slot:
    """One TTI. ``index`` is the packet t for initial slots, the pair w for
    coded slots; ``offset`` is the codeword base index of the slot."""
    kind: str  # "init" or "coded"
    index: int
    rep: int
    offset: int


@dataclass(frozen=True)
class Schedule:
    cfg: NckConfig
    layout: Layout
    slots: tuple
    feedback_points: tuple  # number of slots sent before each feedback

    @property
    def offsets(self) -> dict:
        return {s: s.offset for s in self.slots}

    def init_slots(self, t: int) -> list:
        return [s for s in self.slots if s.kind == "init" and s.index == t]

    def coded_slots(self, w: int) -> list:
        return [s for s in self.slots if s.kind == "coded" and s.index == w]


def init_offset(cfg: NckConfig, t: int, k: int) -> int:
    return t * cfg.K_in * cfg.L + k * cfg.L


def coded_offset(cfg: NckConfig, w: int, k: int) -> int:
    return cfg.T * cfg.L * cfg.K_in + w * cfg.K_nc * cfg.L + k * cfg.L


def build_schedule(cfg: NckConfig, layout) -> Schedule:
    layout = Layout(layout)
    if layout is Layout.K_SCMA and cfg.T != 1:
        raise InfeasibleScheme("KScma layout needs T = 1")
    if layout in (Layout.TYPE_A, Layout.TYPE_B) and cfg.T < 2:
        raise InfeasibleScheme(f"{layout.value} layout needs T >= 2")
    if layout is Layout.TYPE_C and cfg.T < 3:
        raise InfeasibleScheme("TypeC layout needs T >= 3")

    def init(t, k):
        return Slot("init", t, k, init_offset(cfg, t, k))

    def coded(w, k):
        return Slot("coded", w, k, coded_offset(cfg, w, k))

    initial = [init(t, k) for t in range(cfg.T) for k in range(cfg.K_in)]
    nc = [coded(w, k) for w in range(cfg.W) for k in range(cfg.K_nc)]
    if layout is Layout.K_SCMA:
        slots, fb = initial, (cfg.N_R,)
    elif layout is Layout.TYPE_B:
        first_k = -(-cfg.K_in // 2)
        first_nc = -(-len(nc) // 2)
        rtt1 = [s for s in initial if s.rep < first_k] + nc[:first_nc]
        rtt2 = [s for s in initial if s.rep >= first_k] + nc[first_nc:]
        slots, fb = rtt1 + rtt2, (len(rtt1), cfg.N_R)
    else:
        slots, fb = initial + nc, (len(initial),)
    return Schedule(cfg, layout, tuple(slots), fb)


def xor_packets(p_a, p_b) -> np.ndarray:
    p_a, p_b = np.asarray(p_a, dtype=np.uint8), np.asarray(p_b, dtype=np.uint8)
    if p_a.shape != p_b.shape:
        raise ValueError(f"packet lengths differ: {p_a.shape} vs {p_b.shape}")
    return p_a ^ p_b


def soft_xor(L1, L2):
    out = boxplus(L1, L2)
    return float(out) if np.ndim(out) == 0 else out


def make_interleavers(seed: int, J: int, T: int, N: int) -> np.ndarray:
    """Bit interleavers ``perms[j, t]``, one per (user, packet slot)."""
    return np.stack([np.stack([np.random.default_rng([seed, j, t]).permutation(N)
                               for t in range(T)]) for j in range(J)])


def interleave(x, perms):
    """``out[..., eta] = x[..., perms[..., eta]]``."""
    return np.take_along_axis(np.asarray(x), perms, axis=-1)


def deinterleave(y, perms):
    y = np.asarray(y)
    out = np.empty_like(y)
    np.put_along_axis(out, perms, y, axis=-1)
    return out
