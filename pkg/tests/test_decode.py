import pickle
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ratml.algebra import BitVector
from ratml.code import bch_63_7, encode, enumerate_codewords, repetition
from ratml.decode import (ApproxDecoder, BMDecoder, HardDecisionDecoder, MLDecoder,
                          approx_ml_decode, bit_errors, bm_decode, bm_decode_batch, ml_decode,
                          ml_soft_batch, parity_form)
from ratml.errors import InvalidEpsilon, LengthMismatch, NotBchCode
from ratml.rational_map import init_point
from ratml.taylor import clean_truncated_map, taylor_eval, truncated_map

from conftest import random_codes, small_codes
import oracles

ORACLE_CODES = small_codes() + random_codes(10, seed=41, n_max=10, k_max=5)


@pytest.fixture(scope="module")
def bch():
    return bch_63_7()


# -- exact ML --------------------------------------------------------------

def test_repetition_majority():
    out = ml_decode(repetition(3), BitVector.from_string("110"), 0.1)
    assert str(out.decoded) == "111"
    assert not out.failed and out.method == "ml"
    # posterior of 1: 0.9^2 0.1 / (0.9^2 0.1 + 0.1^2 0.9) = 0.9
    assert np.allclose(out.soft, 0.9)


def test_ties_decode_to_one():
    out = ml_decode(repetition(2), BitVector.from_string("10"), 0.2)
    assert np.allclose(out.soft, 0.5)
    assert str(out.decoded) == "11"
    out = ml_decode(repetition(4), BitVector.from_string("0110"), 0.3)
    assert str(out.decoded) == "1111"


@settings(max_examples=80, deadline=None)
@given(st.integers(0, len(ORACLE_CODES) - 1), st.data(),
       st.sampled_from([0.01, 0.05, 0.1, 0.16, 0.25, 0.3, 0.45]))
def test_ml_matches_bruteforce(ci, data, eps):
    code = ORACLE_CODES[ci]
    y = data.draw(st.lists(st.integers(0, 1), min_size=code.n, max_size=code.n))
    out = ml_decode(code, BitVector.from_bits(y), eps)
    rows = oracles.rows_of(code)
    assert list(out.decoded) == oracles.ml_decisions(rows, y, Fraction(eps))
    post = oracles.ml_marginals(rows, y, Fraction(eps))
    assert np.allclose(out.soft, [float(p) for p in post], atol=1e-12)


@pytest.mark.parametrize("code", small_codes(), ids=lambda c: c.name)
def test_codewords_decode_to_themselves(code):
    for x in list(enumerate_codewords(code))[:32]:
        assert ml_decode(code, x, 0.1).decoded == x


def test_ml_batch_matches_scalar(hamming):
    Y = np.random.default_rng(1).integers(0, 2, (20, 7)).astype(np.uint8)
    soft, dec = ml_soft_batch(hamming, Y, 0.2)
    for r in range(20):
        one = ml_decode(hamming, BitVector.from_bits(Y[r]), 0.2)
        assert np.allclose(soft[r], one.soft, atol=1e-15)
        assert list(dec[r]) == list(one.decoded)
    assert np.array_equal(MLDecoder(hamming, 0.2).decode_batch(Y), dec)


def test_ml_input_errors(hamming):
    with pytest.raises(LengthMismatch):
        ml_decode(hamming, BitVector.zeros(6), 0.1)
    with pytest.raises(InvalidEpsilon):
        ml_decode(hamming, BitVector.zeros(7), 0.5)


def test_ml_long_code_has_no_underflow(bch):
    x = encode(bch, BitVector.from_string("1100101"))
    e = BitVector(63, sum(1 << p for p in (2, 9, 17, 30, 44, 50, 61)))
    out = ml_decode(bch, x ^ e, 0.01)
    assert out.decoded == x
    assert np.isfinite(out.soft).all()


# -- approximate ML --------------------------------------------------------

APPROX_CASES = [(small_codes()[3], 3), (small_codes()[2], 3), (small_codes()[2], 2),
                (repetition(3), 3), (small_codes()[4], 3)]


@pytest.mark.parametrize("code,l", APPROX_CASES, ids=lambda x: getattr(x, "name", str(x)))
def test_parity_form_matches_taylor_eval(code, l):
    tm = truncated_map(code, l, "auto")
    Y = np.random.default_rng(2).integers(0, 2, (50, code.n)).astype(np.uint8)
    for eps in (0.05, 0.16, 0.3):
        soft, dec = parity_form(tm).evaluate(Y, eps)
        U = np.where(Y == 1, 1.0 - eps, eps)
        ref = taylor_eval(tm, U)
        assert np.allclose(soft, ref, atol=1e-12)
        # decisions against exact rational evaluation, so ties resolve to 1
        e = Fraction(eps)
        for r in range(Y.shape[0]):
            v = [Fraction(1, 2) - e if b else e - Fraction(1, 2) for b in Y[r]]
            for i in range(1, code.n + 1):
                terms = [(Fraction(t.coef), t.index) for t in tm.terms_for(i)]
                assert dec[r, i - 1] == int(oracles.poly_eval_terms(terms, v) >= 0)


@pytest.mark.parametrize("code", [c for c in small_codes() if c.name in
                                  ("hermitian16", "hamming7_4")], ids=lambda c: c.name)
def test_clean_map_decodes_codewords_to_themselves(code):
    tm = clean_truncated_map(code, 3)
    for x in enumerate_codewords(code):
        assert approx_ml_decode(tm, x, 0.1).decoded == x


def test_empty_theta_gives_hard_decision(herm):
    tm = clean_truncated_map(herm, 2)
    assert len(tm) == 16
    y = BitVector.from_string("1011000011100001")
    out = approx_ml_decode(tm, y, 0.16)
    assert out.decoded == y
    assert out.method == "approx:2"


def test_hermitian_zero_word_decodes_to_zero(herm):
    out = approx_ml_decode(clean_truncated_map(herm, 3), BitVector.zeros(16), 0.16)
    assert out.decoded == BitVector.zeros(16)
    assert np.allclose(out.soft, 0.16 - 12 * 0.34 ** 3)


def test_approx_decoder_pickles(herm):
    dec = ApproxDecoder(clean_truncated_map(herm, 3), 0.1)
    Y = np.zeros((3, 16), dtype=np.uint8)
    before = dec.decode_batch(Y)
    clone = pickle.loads(pickle.dumps(dec))
    assert "form" not in clone.__dict__
    assert np.array_equal(clone.decode_batch(Y), before)


def test_approx_length_mismatch(herm):
    with pytest.raises(LengthMismatch):
        approx_ml_decode(clean_truncated_map(herm, 3), BitVector.zeros(15), 0.1)


# -- Berlekamp-Massey ------------------------------------------------------

def test_bm_on_codeword(bch):
    x = encode(bch, BitVector.from_string("0110101"))
    out = bm_decode(bch, x)
    assert out.decoded == x and not out.failed


def test_bm_corrects_up_to_t(bch):
    rng = np.random.default_rng(7)
    for trial in range(60):
        x = encode(bch, BitVector.from_bits(rng.integers(0, 2, 7)))
        w = int(rng.integers(1, 16))
        e = BitVector(63, sum(1 << int(p) for p in rng.choice(63, w, replace=False)))
        out = bm_decode(bch, x ^ e)
        assert out.decoded == x and not out.failed


def test_bm_beyond_t_never_crashes(bch):
    rng = np.random.default_rng(8)
    x = BitVector.zeros(63)
    for trial in range(40):
        e = BitVector(63, sum(1 << int(p) for p in rng.choice(63, 16, replace=False)))
        out = bm_decode(bch, x ^ e)
        if out.failed:
            assert out.decoded == x ^ e
        else:
            assert out.decoded != x        # a weight-16 pattern cannot be corrected
            assert bch.contains(out.decoded)


def test_bm_batch_matches_scalar(bch):
    rng = np.random.default_rng(9)
    Y = (rng.random((200, 63)) < 0.2).astype(np.uint8)
    out, failed = bm_decode_batch(bch, Y)
    for r in range(200):
        one = bm_decode(bch, BitVector.from_bits(Y[r]))
        assert list(out[r]) == list(one.decoded)
        assert failed[r] == one.failed
    assert np.array_equal(BMDecoder(bch).decode_batch(Y), out)


def test_bm_requires_bch(hamming):
    with pytest.raises(NotBchCode):
        bm_decode(hamming, BitVector.zeros(7))
    with pytest.raises(NotBchCode):
        BMDecoder(hamming)


# -- helpers ---------------------------------------------------------------

def test_bit_errors():
    a = BitVector.from_string("1011")
    assert bit_errors(a, a) == 0
    assert bit_errors(a, BitVector.from_string("0100")) == 4
    assert bit_errors(a, BitVector.from_string("1110")) == 2
    with pytest.raises(LengthMismatch):
        bit_errors(a, BitVector.zeros(3))


def test_hard_decision_is_identity():
    Y = np.array([[0, 1, 1]], dtype=np.uint8)
    assert np.array_equal(HardDecisionDecoder().decode_batch(Y), Y)
