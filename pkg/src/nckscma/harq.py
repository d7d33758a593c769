"""HARQ controller for NCK-SCMA groups with ideal ACK/NACK feedback.

A group starts with T fresh packets per user and runs up to N_re + 1
rounds. After each round, packets that decoded (or ran out of attempts) are
resolved and their slot is refilled with a fresh filler packet, so the next
round mixes retransmissions with new data exactly as the three NCN cases
assume. Only the group's original packets are scored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import Fading, sample_channel, transmit
from .codebook import Codebook, modulate
from .detector import Case, DetectorConfig, SoftBuffer, detect_round
from .ldpc import LdpcCode, encode
from .llr import boxplus
from .schedule import Schedule, interleave


@dataclass(frozen=True)
class PacketOutcome:
    packet_id: tuple  # (user, packet slot)
    success: bool
    rounds: int


@dataclass
class LinkSetup:
    cb: Codebook
    code: LdpcCode
    schedule: Schedule
    perms: np.ndarray
    fading: Fading = Fading.RAYLEIGH_IID
    N0: float = 1.0
    N_re: int = 0
    detector: DetectorConfig = field(default_factory=DetectorConfig)


@dataclass
class HarqGroupState:
    info: np.ndarray          # (J, T, K) payloads, scoring only
    codewords: np.ndarray     # (J, T, N)
    scored: np.ndarray        # (J, T) original packet still unresolved
    pending: np.ndarray       # (J, T) slot carries a retransmission
    attempts: np.ndarray      # (J, T)
    buffers: SoftBuffer
    rounds: int = 0


@dataclass
class GroupResult:
    outcomes: list
    rounds: int
    iterations: int
    ttis: int
    trace: list = field(default_factory=list)


def classify_case(pending) -> Case:
    """NCN case for one user from the retransmission flags of its T slots."""
    pending = np.asarray(pending, dtype=bool)
    if pending.all():
        return Case.ALL_FAIL
    if not pending.any():
        return Case.ALL_SUCCESS
    return Case.PARTIAL_FAIL


def update_buffers(buffers: SoftBuffer, I_t, I_w, pending_next, pairs) -> SoftBuffer:
    """Fold a round's SVN evidence into the soft buffers.

    Pending packets and pairs whose two members are both pending accumulate;
    everything else is reset. When a partner leaves, its last combined
    information and the pair's is turned into NC evidence for the packet
    that stays.
    """
    keep = np.asarray(pending_next, dtype=bool)[:, :, None]
    cum_t = buffers.F_initial + I_t
    cum_w = buffers.F_coded + I_w
    out = SoftBuffer(np.where(keep, cum_t, 0.0), np.zeros_like(buffers.F_coded),
                     np.where(keep, buffers.F_carry, 0.0))
    for w, (a, b) in enumerate(pairs):
        alive = keep[:, a] & keep[:, b]
        out.F_coded[:, w] = np.where(alive, cum_w[:, w], 0.0)
        for t, u in ((a, b), (b, a)):
            retire = keep[:, t] & ~keep[:, u]
            if retire.any():
                out.F_carry[:, t] += np.where(retire, boxplus(cum_t[:, u], cum_w[:, w]), 0.0)
    return out


def build_transmission(cb: Codebook, schedule: Schedule, packets) -> np.ndarray:
    """Transmitted values (NL, J, R) for interleaved packets (J, T, N)."""
    cfg = schedule.cfg
    L = cfg.L
    X = np.zeros((cfg.N_R * L, cb.J, cb.R), dtype=complex)
    for s in schedule.slots:
        if s.kind == "init":
            bits = packets[:, s.index]
        else:
            a, b = cfg.pairs[s.index]
            bits = packets[:, a] ^ packets[:, b]
        X[s.offset:s.offset + L] = modulate(cb, bits)[1]
    return X


def new_group(setup: LinkSetup, rng: np.random.Generator) -> HarqGroupState:
    cfg = setup.schedule.cfg
    J, T = setup.cb.J, cfg.T
    info = rng.integers(0, 2, (J, T, setup.code.K), dtype=np.uint8)
    return HarqGroupState(info, encode(setup.code, info), np.ones((J, T), bool),
                          np.zeros((J, T), bool), np.zeros((J, T), int),
                          SoftBuffer.zeros(J, T, cfg.W, cfg.N))


def run_group(setup: LinkSetup, rng: np.random.Generator,
              detector: Callable = detect_round) -> GroupResult:
    cb, code, schedule = setup.cb, setup.code, setup.schedule
    cfg = schedule.cfg
    state = new_group(setup, rng)
    outcomes = []
    iterations = 0
    trace = []
    for _ in range(setup.N_re + 1):
        state.attempts += 1
        state.rounds += 1
        X = build_transmission(cb, schedule, interleave(state.codewords, setup.perms))
        ch = sample_channel(cb.signature, cfg.N_R, cfg.L, setup.fading, rng, setup.N0)
        Y = transmit(X, ch, rng)
        res = detector(cb, code, schedule, Y, ch.h, setup.N0, setup.perms,
                       state.buffers, state.pending, setup.detector)
        iterations += res.iterations
        trace.append(res.trace)

        success = res.syndrome_ok & np.all(res.bits == state.codewords, axis=-1)
        exhausted = ~success & (state.attempts >= setup.N_re + 1)
        for j, t in zip(*np.nonzero(state.scored & (success | exhausted))):
            outcomes.append(PacketOutcome((int(j), int(t)), bool(success[j, t]), int(state.attempts[j, t])))
        state.scored &= ~(success | exhausted)
        pending_next = ~(success | exhausted)
        state.buffers = update_buffers(state.buffers, res.I_t, res.I_w, pending_next, cfg.pairs)
        if not state.scored.any():
            break
        refill = ~pending_next
        if refill.any():
            fresh = rng.integers(0, 2, (int(refill.sum()), code.K), dtype=np.uint8)
            state.info[refill] = fresh
            state.codewords[refill] = encode(code, fresh)
            state.attempts[refill] = 0
        state.pending = pending_next
    return GroupResult(outcomes, state.rounds, iterations, state.rounds * cfg.N_R, trace)
