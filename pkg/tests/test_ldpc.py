import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
import hypothesis.extra.numpy as stnp

from nckscma.ldpc import (AlistError, LdpcCode, bp_decode, check_node_update, encode, gf2_rref,
                          load_alist, syndrome_ok, write_alist)
from nckscma.llr import LLR_MAX

llr_lists = st.lists(st.floats(-20, 20), min_size=1, max_size=6)


def test_hamming_dimensions(hamming):
    assert (hamming.N, hamming.C, hamming.K) == (7, 3, 4)


def test_rate_half_code(code12):
    # rank from an independent elimination of H
    _, pivots = gf2_rref(code12.H)
    assert code12.N == 264
    assert code12.K == 264 - len(pivots) == 132
    assert code12.rate == 0.5


def test_rate_five_sixths_code(data_dir):
    code = load_alist(data_dir / "peg_264_r56.alist")
    assert code.N == 264 and code.K == 220


def test_adjacency_mirrors_h(code12):
    for c, vs in enumerate(code12.row_adj):
        np.testing.assert_array_equal(vs, np.flatnonzero(code12.H[c]))
    for n, cs in enumerate(code12.col_adj):
        np.testing.assert_array_equal(cs, np.flatnonzero(code12.H[:, n]))
    assert code12.E == code12.H.sum()


def test_alist_round_trip(code12, tmp_path):
    write_alist(code12.H, tmp_path / "c.alist")
    np.testing.assert_array_equal(load_alist(tmp_path / "c.alist").H, code12.H)


def test_alist_count_mismatch(data_dir, tmp_path):
    lines = (data_dir / "hamming_7_4.alist").read_text().splitlines()
    counts = lines[2].split()
    counts[0] = str(int(counts[0]) + 1)
    lines[2] = " ".join(counts)
    (tmp_path / "bad.alist").write_text("\n".join(lines))
    with pytest.raises(AlistError):
        load_alist(tmp_path / "bad.alist")


def test_alist_garbage(tmp_path):
    (tmp_path / "bad.alist").write_text("7 3\nthree 4\n")
    with pytest.raises(AlistError):
        load_alist(tmp_path / "bad.alist")


def test_rank_deficient_warns():
    H = np.array([[1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 1, 0]])
    with pytest.warns(UserWarning, match="rank"):
        code = LdpcCode(H)
    assert code.K == 2


def test_encode_all_codewords_of_hamming(hamming):
    info = np.array(list(itertools.product((0, 1), repeat=4)), dtype=np.uint8)
    cw = encode(hamming, info)
    assert not np.any(cw.astype(int) @ hamming.H.T % 2)
    np.testing.assert_array_equal(cw[:, hamming.info_positions], info)
    assert len({tuple(c) for c in cw}) == 16


def test_encode_unit_vector(hamming):
    x = encode(hamming, [1, 0, 0, 0])
    assert not np.any((hamming.H.astype(int) @ x) % 2)
    assert not np.any(encode(hamming, [0, 0, 0, 0]))


def test_encode_length_mismatch(hamming):
    with pytest.raises(ValueError):
        encode(hamming, [1, 0, 1])


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_encode_linear_and_valid(code12, seed):
    r = np.random.default_rng(seed)
    a, b = r.integers(0, 2, (2, code12.K), dtype=np.uint8)
    np.testing.assert_array_equal(encode(code12, a) ^ encode(code12, b), encode(code12, a ^ b))
    assert syndrome_ok(code12, encode(code12, a))


def test_syndrome_single_flip(code12, rng):
    x = encode(code12, rng.integers(0, 2, code12.K, dtype=np.uint8))
    assert syndrome_ok(code12, x)
    assert syndrome_ok(code12, np.zeros(code12.N, dtype=np.uint8))
    for n in rng.choice(code12.N, 20, replace=False):
        y = x.copy()
        y[n] ^= 1
        assert not syndrome_ok(code12, y)


def test_check_node_examples():
    assert check_node_update([1.0, 2.0]) == pytest.approx(2 * np.arctanh(np.tanh(0.5) * np.tanh(1.0)))
    assert check_node_update([1.0, 2.0]) == pytest.approx(0.7354, abs=1e-4)
    assert check_node_update([LLR_MAX, 1.7]) == pytest.approx(1.7, abs=1e-9)
    assert check_node_update([0.0, 5.0, -3.0]) == 0.0
    assert check_node_update([]) == LLR_MAX


@given(llr_lists)
def test_check_node_symmetric_odd_contracting(xs):
    out = check_node_update(xs)
    # atanh of a tanh product near 1 amplifies rounding, so allow ~1e-9 at large LLRs
    assert check_node_update(xs[::-1]) == pytest.approx(out, abs=1e-8)
    neg = [-xs[0]] + xs[1:]
    assert check_node_update(neg) == pytest.approx(-out, abs=1e-8)
    assert abs(out) <= min(abs(x) for x in xs) + 1e-9


def test_code_messages_match_scalar_update(hamming, rng):
    S = rng.normal(0, 3, hamming.E)
    Q = hamming.check_messages(S)
    for e in range(hamming.E):
        c = hamming.edge_check[e]
        others = [S[f] for f in range(hamming.E) if hamming.edge_check[f] == c and f != e]
        assert Q[e] == pytest.approx(check_node_update(others), abs=1e-10)


def test_bp_noiseless_one_iteration(code12, rng):
    x = encode(code12, rng.integers(0, 2, code12.K, dtype=np.uint8))
    res = bp_decode(code12, 10.0 * (1 - 2.0 * x), 50)
    assert res.converged and res.iterations == 1
    np.testing.assert_array_equal(res.bits, x)


def test_bp_recovers_erasure(hamming):
    x = encode(hamming, [1, 0, 1, 1])
    llr = 8.0 * (1 - 2.0 * x)
    llr[3] = 0.0
    res = bp_decode(hamming, llr, 10)
    assert res.converged
    np.testing.assert_array_equal(res.bits, x)


def test_bp_zero_llrs_tie_rule(code12):
    res = bp_decode(code12, np.zeros(code12.N), 5)
    assert not res.bits.any()
    assert res.converged  # the all-zero word is a codeword


def test_bp_rejects_zero_iterations(hamming):
    with pytest.raises(ValueError):
        bp_decode(hamming, np.zeros(7), 0)


@settings(max_examples=25)
@given(stnp.arrays(float, 7, elements=st.floats(-6, 6)))
def test_bp_exact_on_tree_code(tree74, llr):
    info = np.array(list(itertools.product((0, 1), repeat=4)), dtype=np.uint8)
    book = encode(tree74, info)
    logp = ((1 - 2.0 * book) * llr / 2).sum(axis=1)
    p = np.exp(logp - logp.max())
    p /= p.sum()
    p1 = np.clip(p @ book, 1e-300, 1)
    exact = np.log(np.clip(1 - p1, 1e-300, 1)) - np.log(p1)
    res = bp_decode(tree74, llr, 10, early_stop=False)
    np.testing.assert_allclose(res.llr, exact, atol=1e-6)
