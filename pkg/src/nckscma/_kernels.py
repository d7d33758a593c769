"""Compiled inner loops of the SCMA message updates."""
import math

import numpy as np
from numba import njit

PROB_FLOOR = 1e-100


@njit(cache=True)
def _normalize_into(acc, out):
    s = 0.0
    for m in range(acc.shape[0]):
        s += acc[m]
    if s > 0.0:
        for m in range(acc.shape[0]):
            acc[m] /= s
    else:
        acc[:] = 1.0
    s = 0.0
    for m in range(acc.shape[0]):
        if acc[m] < PROB_FLOOR:
            acc[m] = PROB_FLOOR
        s += acc[m]
    for m in range(acc.shape[0]):
        out[m] = acc[m] / s


@njit(cache=True)
def fn_resource(lik, G, r, users, combos, max_log, I):
    """FN -> SVN messages on resource ``r`` for all slots.

    ``lik`` is (NL, C) over the C = M**d symbol combinations in ``combos``.
    """
    NL, C = lik.shape
    d = users.shape[0]
    M = G.shape[3]
    acc = np.zeros((d, M))
    g = np.empty((d, M))
    for l in range(NL):
        for k in range(d):
            for m in range(M):
                g[k, m] = G[l, r, users[k], m]
        acc[:, :] = 0.0
        if d == 3 and not max_log and C == M * M * M:
            # combos are in row-major order, so walk them as three nested loops
            c = 0
            for a in range(M):
                ga = g[0, a]
                for b in range(M):
                    gb = g[1, b]
                    gab = ga * gb
                    s = 0.0
                    for e in range(M):
                        w = lik[l, c]
                        c += 1
                        ge = g[2, e]
                        s += w * ge
                        acc[2, e] += w * gab
                    acc[0, a] += s * gb
                    acc[1, b] += s * ga
            for i in range(d):
                _normalize_into(acc[i], I[l, r, users[i]])
            continue
        for c in range(C):
            w = lik[l, c]
            if w == 0.0:
                continue
            for i in range(d):
                p = w
                for k in range(d):
                    if k != i:
                        p *= g[k, combos[c, k]]
                m = combos[c, i]
                if max_log:
                    if p > acc[i, m]:
                        acc[i, m] = p
                else:
                    acc[i, m] += p
        for i in range(d):
            _normalize_into(acc[i], I[l, r, users[i]])


@njit(cache=True)
def _log_prior(llrs, bits, lp):
    M, b = bits.shape
    for m in range(M):
        s = 0.0
        for i in range(b):
            x = -llrs[i] if bits[m, i] == 0 else llrs[i]
            # -softplus(x)
            s -= max(x, 0.0) + math.log1p(math.exp(-abs(x)))
        lp[m] = s


@njit(cache=True)
def svn_all(I, prior_llr, res_of, bits, G):
    """SVN -> FN messages: prior times the product of the other FN messages."""
    NL, R, J, M = I.shape
    dv = res_of.shape[1]
    lp = np.empty(M)
    acc = np.empty(M)
    for l in range(NL):
        for j in range(J):
            _log_prior(prior_llr[l, j], bits, lp)
            mx = lp.max()
            for m in range(M):
                lp[m] = math.exp(lp[m] - mx)
            for a in range(dv):
                v = res_of[j, a]
                if v < 0:
                    break
                for m in range(M):
                    p = lp[m]
                    for c in range(dv):
                        r = res_of[j, c]
                        if r < 0:
                            break
                        if r != v:
                            p *= I[l, r, j, m]
                    acc[m] = p
                _normalize_into(acc, G[l, v, j])


@njit(cache=True)
def evidence_all(I, res_of, prior_llr, use_prior, bits, llr_max, out):
    """Bit LLRs of the full FN product of every (slot, user); ``out`` is (NL, J, b)."""
    NL, R, J, M = I.shape
    b = bits.shape[1]
    dv = res_of.shape[1]
    lp = np.empty(M)
    for l in range(NL):
        for j in range(J):
            if use_prior:
                _log_prior(prior_llr[l, j], bits, lp)
            else:
                lp[:] = 0.0
            for c in range(dv):
                r = res_of[j, c]
                if r < 0:
                    break
                for m in range(M):
                    lp[m] += math.log(I[l, r, j, m])
            mx = lp.max()
            for i in range(b):
                s0 = 0.0
                s1 = 0.0
                for m in range(M):
                    e = math.exp(lp[m] - mx)
                    if bits[m, i] == 0:
                        s0 += e
                    else:
                        s1 += e
                if s1 == 0.0:
                    v = llr_max
                elif s0 == 0.0:
                    v = -llr_max
                else:
                    v = math.log(s0) - math.log(s1)
                out[l, j, i] = min(max(v, -llr_max), llr_max)
