"""Joint SCMA / network-coding / LDPC iterative receiver.

Array conventions (``NL`` = N_R * L codeword slots of one transmission round):

* ``I``, ``G``: FN->SVN and SVN->FN messages, probability domain,
  shape (NL, R, J, M). Entries off the signature are kept uniform so that
  products over all resources equal products over the user's own resources.
* per-packet bit arrays are (J, T, N) and per-pair arrays (J, W, N); LDPC
  instance k = j * T + t is row k of the (J*T, ...) reshapes.
* NCN quantities live in the interleaved bit order; the LDPC side works in
  codeword order.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .codebook import Codebook, inverse_marginalize_log
from .ldpc import LdpcCode
from .llr import LLR_MAX, boxplus, hard_decision
from .schedule import Schedule, deinterleave, interleave

PROB_FLOOR = _kernels.PROB_FLOOR
N0_FLOOR = 1e-12


class Case(str, enum.Enum):
    ALL_FAIL = "AllFail"
    ALL_SUCCESS = "AllSuccess"
    PARTIAL_FAIL = "PartialFail"


@dataclass
class DetectorConfig:
    max_iter: int = 50
    llr_clip: float = LLR_MAX
    damping: float = 1.0
    max_log: bool = False
    # feed NCN with the SVN posterior (NC prior included) instead of the FN product alone
    evidence_with_prior: bool = False
    # let each pair term also see the partner's LDPC check totals
    partner_decoder_llr: bool = False
    early_stop: bool = True
    trace: bool = False

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must be in (0, 1]")


@dataclass
class SoftBuffer:
    """Soft information kept across HARQ rounds.

    ``F_carry`` holds, per packet, the NC evidence of partner/pair
    combinations that were retired when the partner succeeded.
    """
    F_initial: np.ndarray
    F_coded: np.ndarray
    F_carry: np.ndarray

    @classmethod
    def zeros(cls, J: int, T: int, W: int, N: int) -> "SoftBuffer":
        return cls(np.zeros((J, T, N)), np.zeros((J, W, N)), np.zeros((J, T, N)))

    def copy(self) -> "SoftBuffer":
        return SoftBuffer(self.F_initial.copy(), self.F_coded.copy(), self.F_carry.copy())


@dataclass
class MessageState:
    I: np.ndarray
    G: np.ndarray
    Q: np.ndarray
    S: np.ndarray
    lam_lvn: np.ndarray
    lam_svn: np.ndarray


@dataclass
class RoundResult:
    bits: np.ndarray          # (J, T, N) hard decisions, codeword order
    syndrome_ok: np.ndarray   # (J, T)
    llr: np.ndarray           # (J, T, N) accumulated LVN LLRs, codeword order
    I_t: np.ndarray           # (J, T, N) combined SVN evidence per packet
    I_w: np.ndarray           # (J, W, N) combined SVN evidence per pair
    iterations: int
    trace: list = field(default_factory=list)


def _normalize(p):
    s = p.sum(axis=-1, keepdims=True)
    p = p / np.where(s > 0, s, 1.0)
    p = np.maximum(p, PROB_FLOOR)
    return p / p.sum(axis=-1, keepdims=True)


def initialize(cb: Codebook, code: LdpcCode, n_codewords: int, T: int) -> MessageState:
    shape = (n_codewords, cb.R, cb.J, cb.M)
    return MessageState(
        I=np.full(shape, 1.0 / cb.M),
        G=np.full(shape, 1.0 / cb.M),
        Q=np.zeros((cb.J * T, code.E)),
        S=np.zeros((cb.J * T, code.E)),
        lam_lvn=np.zeros((cb.J, T, code.N)),
        lam_svn=np.zeros((cb.J, T, code.N)),
    )


# -- SCMA side ---------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def _graph_tables(cb: Codebook):
    """Per-resource symbol-combination tables and a padded (J, d_v) table of
    each user's resources (-1 padding for irregular toy signatures)."""
    combos = [np.array(list(np.ndindex(*(cb.M,) * len(u))), dtype=np.int64).reshape(-1, len(u))
              for u in cb.users_on]
    dv = max(len(r) for r in cb.resources_of)
    res_of = np.full((cb.J, dv), -1, dtype=np.int64)
    for j, rs in enumerate(cb.resources_of):
        res_of[j, :len(rs)] = rs
    users = [np.asarray(u, dtype=np.int64) for u in cb.users_on]
    return combos, res_of, users, cb.bits.astype(np.int64)


def fn_likelihoods(cb: Codebook, Y, h, N0: float) -> list:
    """Per-resource likelihoods (NL, M**d) over the symbol combinations of the
    d users on the resource, scaled so the largest entry of every slot is 1."""
    Y = np.asarray(Y)
    N0 = max(float(N0), N0_FLOOR)
    out = []
    for r, users in enumerate(cb.users_on):
        contrib = h[:, users, r][:, :, None] * cb.codewords[users, :, r][None, :, :]
        d = len(users)
        pts = contrib[:, 0, :]
        for i in range(1, d):
            pts = (pts[..., None] + contrib[:, i, :].reshape((-1,) + (1,) * i + (cb.M,)))
        pts = pts.reshape(pts.shape[0], -1)
        ll = -np.abs(Y[:, r, None] - pts) ** 2 / N0
        ll -= ll.max(axis=1, keepdims=True)
        out.append(np.exp(ll))
    return out


def fn_update(cb: Codebook, lik: list, G, max_log: bool = False) -> np.ndarray:
    """FN -> SVN messages for all slots from the per-resource likelihoods."""
    combos, _, users, _ = _graph_tables(cb)
    I = np.full(G.shape, 1.0 / cb.M)
    G = np.ascontiguousarray(G)
    for r in range(cb.R):
        _kernels.fn_resource(lik[r], G, r, users[r], combos[r], max_log, I)
    return I


def svn_update(cb: Codebook, I, prior_llr) -> np.ndarray:
    """SVN -> FN messages: extrinsic product of FN messages times the symbol
    prior built from the NCN bit LLRs ``prior_llr`` (NL, J, b)."""
    _, res_of, _, bits = _graph_tables(cb)
    G = np.full(I.shape, 1.0 / cb.M)
    _kernels.svn_all(np.ascontiguousarray(I), np.ascontiguousarray(prior_llr, dtype=float),
                     res_of, bits, G)
    return G


def svn_update_initial(cb: Codebook, I_slot, lam_bits) -> np.ndarray:
    """SVN update for an initial slot; ``lam_bits`` (L, J, b) are the NCN
    LLRs of the packet the slot carries."""
    return svn_update(cb, I_slot, lam_bits)


def svn_update_coded(cb: Codebook, I_slot, lam_a, lam_b) -> np.ndarray:
    """SVN update for a coded slot carrying the XOR of two packets."""
    return svn_update(cb, I_slot, boxplus(lam_a, lam_b))


def symbol_posteriors(cb: Codebook, I, prior_llr=None) -> np.ndarray:
    """Normalized SVN beliefs (NL, J, M): all FN messages times the prior."""
    logp = np.log(I).sum(axis=1)
    if prior_llr is not None:
        logp = logp + inverse_marginalize_log(prior_llr, cb.bits)
    p = np.exp(logp - logp.max(axis=-1, keepdims=True))
    return p / p.sum(axis=-1, keepdims=True)


def slot_bit_llrs(cb: Codebook, I, n_slots: int, prior_llr=None, llr_max=LLR_MAX) -> np.ndarray:
    """Marginalized bit LLRs of every slot, arranged (J, n_slots, N)."""
    _, res_of, _, bits = _graph_tables(cb)
    NL, R, J, M = I.shape
    llr = np.empty((NL, J, cb.b))
    use_prior = prior_llr is not None
    pl = np.ascontiguousarray(prior_llr, dtype=float) if use_prior else np.zeros((NL, J, cb.b))
    _kernels.evidence_all(np.ascontiguousarray(I), res_of, pl, use_prior, bits, float(llr_max), llr)
    L = NL // n_slots
    return llr.reshape(n_slots, L, J, cb.b).transpose(2, 0, 1, 3).reshape(J, n_slots, L * cb.b)


def accumulate_svn_evidence(cb: Codebook, I, schedule: Schedule, prior_llr=None,
                            llr_max=LLR_MAX):
    """Sum the marginalized FN products over the repetitions of each packet
    (initial slots) and each pair (coded slots)."""
    cfg = schedule.cfg
    per_slot = slot_bit_llrs(cb, I, cfg.N_R, prior_llr, llr_max)
    L = cfg.L
    I_t = np.zeros((cb.J, cfg.T, cfg.N))
    I_w = np.zeros((cb.J, cfg.W, cfg.N))
    for s in schedule.slots:
        target = I_t if s.kind == "init" else I_w
        target[:, s.index] += per_slot[:, s.offset // L]
    return I_t, I_w


# -- network-coding check nodes ----------------------------------------------

def ncn_update(I_a, I_b, I_w, F_a, F_b, F_w, case) -> np.ndarray:
    """NCN -> LVN message for packet a of a pair (a, b) with coded packet w."""
    case = Case(case)
    if case is Case.ALL_FAIL:
        return boxplus(I_b + F_b, I_w + F_w) + I_a + F_a
    if case is Case.ALL_SUCCESS:
        return boxplus(I_b, I_w) + I_a
    return I_a + F_a + boxplus(I_b, I_w) + boxplus(F_b, F_w)


def ncn_messages(schedule: Schedule, I_t, I_w, buffers: SoftBuffer, pending,
                 partner_extra=None) -> np.ndarray:
    """NCN -> LVN messages (J, T, N) for all packets.

    ``pending[j, t]`` marks a retransmitted packet. A pending packet adds its
    own buffer; each of its pairs uses the all-fail combination when the
    partner is pending too, otherwise the fresh pair evidence, with the
    retired combination entering through ``F_carry``. A fresh packet uses
    no buffers at all. For T = 2 this is exactly ``ncn_update`` under the
    three cases.
    """
    cfg = schedule.cfg
    pending = np.asarray(pending, dtype=bool)
    lam = I_t + np.where(pending[:, :, None], buffers.F_initial + buffers.F_carry, 0.0)
    part = I_t if partner_extra is None else I_t + partner_extra
    for w, (a, b) in enumerate(cfg.pairs):
        for t, u in ((a, b), (b, a)):
            both = (pending[:, t] & pending[:, u])[:, None]
            fresh = boxplus(part[:, u], I_w[:, w])
            if both.any():
                full = boxplus(part[:, u] + buffers.F_initial[:, u], I_w[:, w] + buffers.F_coded[:, w])
                fresh = np.where(both, full, fresh)
            lam[:, t] += fresh
    return lam


def ncn_feedback_to_svn(code: LdpcCode, Q, perms) -> np.ndarray:
    """Interleaved LDPC totals (J, T, N) used as SVN bit priors."""
    J, T, N = perms.shape
    totals = code.var_totals(Q).reshape(J, T, N)
    return interleave(totals, perms)


def slot_prior_llrs(cb: Codebook, schedule: Schedule, lam_svn) -> np.ndarray:
    """Per-slot bit priors (NL, J, b) from NCN -> SVN LLRs; coded slots get
    the soft XOR of the two packets' LLRs."""
    cfg = schedule.cfg
    L = cfg.L
    out = np.empty((cfg.N_R * L, cb.J, cb.b))
    coded = [boxplus(lam_svn[:, a], lam_svn[:, b]) for a, b in cfg.pairs]
    for s in schedule.slots:
        bits = lam_svn[:, s.index] if s.kind == "init" else coded[s.index]
        out[s.offset:s.offset + L] = bits.reshape(cb.J, L, cb.b).transpose(1, 0, 2)
    return out


# -- LDPC side ---------------------------------------------------------------

def lvn_update(code: LdpcCode, Q, prior) -> np.ndarray:
    """LVN -> PN messages; ``prior`` is the deinterleaved NCN message (K, N)."""
    return code.variable_messages(Q, prior)


def decide_and_check(code: LdpcCode, Q, prior):
    llr = code.var_totals(Q) + prior
    bits = hard_decision(llr)
    ok = ~np.any(code.syndromes(bits), axis=-1)
    return bits, ok, llr


# -- full round --------------------------------------------------------------

def detect_round(cb: Codebook, code: LdpcCode, schedule: Schedule, Y, h, N0: float,
                 perms, buffers: SoftBuffer | None = None, pending=None,
                 cfg: DetectorConfig | None = None) -> RoundResult:
    """Run the joint iterative detector on one received round."""
    cfg = cfg or DetectorConfig()
    ncfg = schedule.cfg
    J, T, W, N = cb.J, ncfg.T, ncfg.W, ncfg.N
    NL = ncfg.N_R * ncfg.L
    if code.N != N or perms.shape != (J, T, N):
        raise ValueError("code / interleaver dimensions do not match the scheme")
    if np.shape(Y) != (NL, cb.R) or np.shape(h) != (NL, J, cb.R):
        raise ValueError(f"received block must be ({NL}, {cb.R}) with channel ({NL}, {J}, {cb.R})")
    if buffers is None:
        buffers = SoftBuffer.zeros(J, T, W, N)
    if pending is None:
        pending = np.zeros((J, T), dtype=bool)

    st = initialize(cb, code, NL, T)
    lik = fn_likelihoods(cb, Y, h, N0)
    prior_llr = np.zeros((NL, J, cb.b))
    trace = []
    it = 0
    for it in range(1, cfg.max_iter + 1):
        I_new = fn_update(cb, lik, st.G, cfg.max_log)
        st.I = I_new if cfg.damping == 1.0 else _normalize(cfg.damping * I_new + (1 - cfg.damping) * st.I)
        st.Q = code.check_messages(st.S)
        I_t, I_w = accumulate_svn_evidence(
            cb, st.I, schedule, prior_llr if cfg.evidence_with_prior else None, cfg.llr_clip)
        st.lam_svn = np.clip(ncn_feedback_to_svn(code, st.Q, perms), -cfg.llr_clip, cfg.llr_clip)
        extra = st.lam_svn if cfg.partner_decoder_llr else None
        st.lam_lvn = np.clip(ncn_messages(schedule, I_t, I_w, buffers, pending, extra),
                             -cfg.llr_clip, cfg.llr_clip)
        prior = deinterleave(st.lam_lvn, perms).reshape(J * T, N)
        st.S = lvn_update(code, st.Q, prior)
        bits, ok, llr = decide_and_check(code, st.Q, prior)
        if cfg.trace:
            trace.append(int((~ok).sum()))
        if cfg.early_stop and ok.all():
            break
        prior_llr = slot_prior_llrs(cb, schedule, st.lam_svn)
        st.G = svn_update(cb, st.I, prior_llr)
    return RoundResult(bits.reshape(J, T, N), ok.reshape(J, T), llr.reshape(J, T, N),
                       I_t, I_w, it, trace)
