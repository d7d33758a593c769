import numpy as np
import pytest

from nckscma.channel import snr_to_n0
from nckscma.detector import Case, DetectorConfig, RoundResult, SoftBuffer, ncn_messages, ncn_update
from nckscma.harq import LinkSetup, classify_case, new_group, run_group, update_buffers
from nckscma.llr import boxplus
from nckscma.schedule import build_schedule, derive_config, make_interleavers


def _setup(cb, code, triple, layout, snr, fading="rayleigh_iid", N_re=1, **det):
    ncfg = derive_config(*triple, code.N, cb.b)
    return LinkSetup(cb, code, build_schedule(ncfg, layout), make_interleavers(0, cb.J, ncfg.T, code.N),
                     fading, snr_to_n0(snr), N_re, DetectorConfig(**det))


def test_classify_case():
    assert classify_case([True, True]) is Case.ALL_FAIL
    assert classify_case([False, False]) is Case.ALL_SUCCESS
    assert classify_case([False, True]) is Case.PARTIAL_FAIL
    assert classify_case([True, False, True]) is Case.PARTIAL_FAIL


def test_buffers_accumulate_and_reset(rng):
    pairs = ((0, 1),)
    buf = SoftBuffer.zeros(1, 2, 1, 5)
    I1 = rng.normal(size=(2, 1, 2, 5)), rng.normal(size=(2, 1, 1, 5))
    both = np.array([[True, True]])
    buf = update_buffers(buf, I1[0][0], I1[1][0], both, pairs)
    np.testing.assert_array_equal(buf.F_initial, I1[0][0])
    np.testing.assert_array_equal(buf.F_coded, I1[1][0])
    buf2 = update_buffers(buf, I1[0][1], I1[1][1], both, pairs)
    np.testing.assert_allclose(buf2.F_initial, I1[0][0] + I1[0][1])
    np.testing.assert_allclose(buf2.F_coded, I1[1][0] + I1[1][1])
    # packet 0 succeeds: its slot is refilled, packet 1 keeps its combined evidence
    buf3 = update_buffers(buf2, I1[0][1], I1[1][1], np.array([[False, True]]), pairs)
    assert not buf3.F_initial[0, 0].any() and not buf3.F_coded.any()
    np.testing.assert_allclose(buf3.F_initial[0, 1], buf2.F_initial[0, 1] + I1[0][1][0, 1])


def test_partial_fail_buffers_reproduce_case_formula(rng):
    """After one packet of a failed pair succeeds, the NCN output for the
    pending packet equals the PartialFail formula with the pair's buffers."""
    sch = build_schedule(derive_config(3, 2, 1, 6, 2), "TypeA")
    I_t0, I_t1 = rng.normal(0, 3, (2, 1, 2, 6))
    I_w0, I_w1 = rng.normal(0, 3, (2, 1, 1, 6))
    buf = update_buffers(SoftBuffer.zeros(1, 2, 1, 6), I_t0, I_w0, np.array([[True, True]]), ((0, 1),))
    F_a, F_b, F_w = buf.F_initial[:, 1], buf.F_initial[:, 0], buf.F_coded[:, 0]
    buf = update_buffers(buf, I_t0 * 0, I_w0 * 0, np.array([[False, True]]), ((0, 1),))
    lam = ncn_messages(sch, I_t1, I_w1, buf, np.array([[False, True]]))
    expected = ncn_update(I_t1[:, 1], I_t1[:, 0], I_w1[:, 0], F_a, F_b, F_w, Case.PARTIAL_FAIL)
    np.testing.assert_allclose(lam[:, 1], expected, atol=1e-12)
    # the refilled packet sees no buffers at all
    fresh = ncn_update(I_t1[:, 0], I_t1[:, 1], I_w1[:, 0], 0, 0, 0, Case.ALL_SUCCESS)
    np.testing.assert_allclose(lam[:, 0], fresh, atol=1e-12)
    assert np.allclose(buf.F_carry[:, 1], boxplus(F_b, F_w))


def test_noiseless_group(cb46, code12, rng):
    setup = _setup(cb46, code12, (3, 2, 1), "TypeA", 60.0, "awgn_unit")
    g = run_group(setup, rng)
    assert g.rounds == 1 and g.ttis == 4
    assert len(g.outcomes) == cb46.J * 2
    assert all(o.success and o.rounds == 1 for o in g.outcomes)


def test_no_retransmission_single_round(cb46, code12, rng):
    setup = _setup(cb46, code12, (3, 2, 1), "TypeA", -20.0, N_re=0, max_iter=2)
    g = run_group(setup, rng)
    assert g.rounds == 1
    assert not any(o.success for o in g.outcomes)


def test_tti_budget(cb46, code12, rng):
    setup = _setup(cb46, code12, (4, 2, 2), "TypeA", -20.0, N_re=2, max_iter=2)
    g = run_group(setup, rng)
    assert g.rounds == 3 and g.ttis == 3 * 6 <= (setup.N_re + 1) * 6
    assert all(o.rounds == 3 for o in g.outcomes)


class ScriptedDetector:
    """Fails every packet in the first round, then decodes everything;
    records the buffers and pending flags it was handed."""

    def __init__(self, fail_rounds=1):
        self.fail_rounds = fail_rounds
        self.calls = []

    def __call__(self, cb, code, schedule, Y, h, N0, perms, buffers, pending, cfg):
        cfg_ = schedule.cfg
        self.calls.append((buffers.copy(), np.array(pending)))
        k = len(self.calls)
        I_t = np.full((cb.J, cfg_.T, cfg_.N), float(k))
        I_w = np.full((cb.J, cfg_.W, cfg_.N), 10.0 * k)
        ok = k > self.fail_rounds
        truth = self.truth if ok else 1 - self.truth
        return RoundResult(truth, np.full((cb.J, cfg_.T), ok), np.zeros_like(I_t), I_t, I_w, 3)


def test_stub_trace_all_fail_then_success(cb46, code12):
    setup = _setup(cb46, code12, (3, 2, 1), "TypeA", 0.0, N_re=2)
    stub = ScriptedDetector()
    rng = np.random.default_rng(4)
    state = new_group(setup, np.random.default_rng(4))
    stub.truth = state.codewords
    g = run_group(setup, rng, detector=stub)
    assert len(stub.calls) == 2 and g.rounds == 2
    first_buf, first_pending = stub.calls[0]
    assert not first_pending.any() and not first_buf.F_initial.any()
    second_buf, second_pending = stub.calls[1]
    assert second_pending.all()
    assert classify_case(second_pending[0]) is Case.ALL_FAIL
    np.testing.assert_array_equal(second_buf.F_initial, 1.0)
    np.testing.assert_array_equal(second_buf.F_coded, 10.0)
    assert all(o.success and o.rounds == 2 for o in g.outcomes)
    assert g.iterations == 6


def test_baseline_equivalence(cb46, code12):
    """T = 1 without retransmissions is plain coded K-SCMA: one round of K_in slots."""
    setup = _setup(cb46, code12, (2, 1, 2), "KScma", 60.0, "awgn_unit", N_re=0)
    g = run_group(setup, np.random.default_rng(0))
    assert g.rounds == 1 and g.ttis == 2
    assert all(o.success for o in g.outcomes)
