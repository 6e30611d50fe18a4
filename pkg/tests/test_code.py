import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ratml.algebra import BitVector, poly_mod, rank
from ratml.code import (CLEAN_ORDER_CAP, LinearCode, RandomCodeSpec, bch_63_7, bch_code, builtin,
                        codeword_blocks, codeword_table, dual, encode, encode_array,
                        enumerate_codewords, max_clean_order, min_distance, random_systematic_circulant,
                        repetition, smallest_dependent_columns, subcode_count)
from ratml.errors import InvalidCode, InvalidSpec, LengthMismatch

from conftest import matrix, random_codes, small_codes
import oracles


def test_code_rejects_bad_generators():
    with pytest.raises(InvalidCode):
        LinearCode.from_generator(matrix(["110", "110"]))
    with pytest.raises(InvalidCode):
        LinearCode.from_generator(matrix(["110", "011"]).vstack(matrix(["000"])))
    with pytest.raises(InvalidCode):
        LinearCode.from_generator(matrix(["110", "100"]))   # zero third column


@pytest.mark.parametrize("code", small_codes(), ids=lambda c: c.name)
def test_generator_and_parity_check_annihilate(code):
    assert code.G.annihilates(code.H)
    assert rank(code.H) == code.n - code.k


@pytest.mark.parametrize("code", small_codes(), ids=lambda c: c.name)
def test_enumeration_matches_span(code):
    words = {tuple(w) for w in enumerate_codewords(code)}
    assert words == oracles.span(oracles.rows_of(code))
    assert len(words) == 2 ** code.k
    table = codeword_table(code)
    assert {tuple(r) for r in table.tolist()} == words
    blocks = np.concatenate(list(codeword_blocks(code, block_bits=2)))
    assert {tuple(r) for r in blocks.tolist()} == words


@pytest.mark.parametrize("code", small_codes(), ids=lambda c: c.name)
def test_min_distance_matches_oracle(code):
    assert min_distance(code) == oracles.min_distance(oracles.rows_of(code))


def test_known_distances(herm, hamming):
    assert min_distance(herm) == 4
    assert min_distance(hamming) == 3
    assert min_distance(repetition(5)) == 5


def test_hermitian_is_self_dual(herm):
    assert herm.G.same_row_space(herm.H)
    assert herm.G.annihilates(herm.G)
    assert min_distance(dual(herm)) == 4


def test_dual_roundtrip(hamming):
    d = dual(hamming)
    assert (d.n, d.k) == (7, 3)
    assert min_distance(d) == 4
    assert dual(d).G == hamming.G


def test_encode_and_contains(hamming):
    m = BitVector.from_string("1011")
    x = encode(hamming, m)
    assert hamming.contains(x)
    assert not hamming.contains(x.flip(2))
    arr = encode_array(hamming, np.array([[1, 0, 1, 1]], dtype=np.uint8))
    assert arr[0].tolist() == list(x)
    with pytest.raises(LengthMismatch):
        hamming.contains(BitVector.zeros(6))


def test_subcode_count(hamming):
    assert subcode_count(hamming, []) == 16
    assert subcode_count(hamming, [(1, 1)]) == 8
    assert subcode_count(hamming, [((1, 2), 0), (3, 1)]) == 4


@pytest.mark.parametrize("code", small_codes() + random_codes(25, seed=11),
                         ids=lambda c: c.name)
def test_clean_order_matches_bruteforce(code):
    rows = oracles.rows_of(code)
    size = oracles.smallest_dependent_size(rows, CLEAN_ORDER_CAP)
    mco = max_clean_order(code)
    if size is None:
        assert mco == (CLEAN_ORDER_CAP, True)
    else:
        assert mco == (size - 1, False)
        dep = smallest_dependent_columns(code)
        assert len(dep) == size
        assert not any(oracles.xor_cols(oracles.columns(rows), dep))


def test_clean_order_equals_dual_distance_minus_one(herm, hamming):
    for code in (herm, hamming, repetition(3)):
        mco = max_clean_order(code)
        if not mco.capped:
            assert mco.order == min_distance(dual(code)) - 1


def test_bch_63_7_structure():
    code = bch_63_7()
    assert (code.n, code.k) == (63, 7)
    assert code.designed_distance == 31 and code.t == 15
    assert min_distance(code) == 31
    # g(x) divides x^63 - 1
    assert poly_mod((1 << 63) | 1, code.generator_poly) == 0
    # cyclic: any shift of a codeword is a codeword
    x = encode(code, BitVector.from_string("1010011"))
    shifted = BitVector(63, ((x.value << 5) | (x.value >> 58)) & ((1 << 63) - 1))
    assert code.contains(shifted)


def test_bch_small_parameters():
    code = bch_code(4, 7)
    assert (code.n, code.k, code.designed_distance) == (15, 7, 5)
    assert min_distance(code) == 5
    with pytest.raises(InvalidSpec):
        bch_code(4, 6)


def test_random_circulant_shape_and_determinism():
    spec = RandomCodeSpec(8, 3, 2, seed=5)
    a = random_systematic_circulant(spec)
    b = random_systematic_circulant(spec)
    assert a.G == b.G
    assert (a.n, a.k) == (32, 8)
    arr = a.G.to_array()
    assert np.array_equal(arr[:, :8], np.eye(8, dtype=np.uint8))
    # every parity block is a column permutation of the weight-2 circulant
    for j in range(3):
        block = arr[:, 8 * (j + 1): 8 * (j + 2)]
        assert (block.sum(axis=0) == 2).all()
        assert (block.sum(axis=1) == 2).all()
    assert random_systematic_circulant(RandomCodeSpec(8, 3, 2, seed=6)).G != a.G


@pytest.mark.parametrize("bad", [RandomCodeSpec(0, 1, 1, 0), RandomCodeSpec(4, 1, 5, 0),
                                 RandomCodeSpec(4, 0, 2, 0)])
def test_random_spec_validation(bad):
    with pytest.raises(InvalidSpec):
        random_systematic_circulant(bad)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 10), st.integers(1, 3), st.integers(1, 4), st.integers(0, 10**6))
def test_random_circulant_is_valid_code(k, blocks, w, seed):
    w = min(w, k)
    code = random_systematic_circulant(RandomCodeSpec(k, blocks, w, seed))
    assert code.G.annihilates(code.H)
    assert 0 not in code.column_keys


def test_builtins():
    assert builtin("repetition3").n == 3
    with pytest.raises(InvalidSpec):
        builtin("nope")
