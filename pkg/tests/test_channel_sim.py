import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ratml.algebra import BitVector
from ratml.channel_sim import (CSV_HEADER, ChannelConfig, bsc_transmit, draw_trials, estimate_ber,
                               format_csv, parse_spec, read_spec, sweep, trial_stride,
                               wilson_interval, write_csv)
from ratml.code import bch_63_7, hamming_7_4
from ratml.decode import HardDecisionDecoder, MLDecoder
from ratml.errors import ConfigError, InvalidEpsilon
from ratml.rng import derive_key, labelled_stream


# -- intervals -------------------------------------------------------------

def test_wilson_interval_values():
    lo, hi = wilson_interval(0, 10)
    assert lo == 0.0
    assert hi == pytest.approx(1.959963984540054 ** 2 / (10 + 1.959963984540054 ** 2))
    lo, hi = wilson_interval(5, 10)
    assert (lo, hi) == pytest.approx((0.2366, 0.7634), abs=1e-4)


@given(st.integers(1, 10**6), st.data())
def test_wilson_interval_contains_estimate(n, data):
    c = data.draw(st.integers(0, n))
    lo, hi = wilson_interval(c, n)
    assert 0.0 <= lo <= c / n <= hi <= 1.0


# -- channel ---------------------------------------------------------------

def test_channel_config_validation():
    with pytest.raises(InvalidEpsilon):
        ChannelConfig(0.5)
    with pytest.raises(InvalidEpsilon):
        ChannelConfig(0.0)


def test_bsc_transmit_flip_rate():
    rng = labelled_stream(1, "test")
    x = BitVector.zeros(4000)
    y = bsc_transmit(x, ChannelConfig(0.1), rng)
    assert abs(y.weight() / 4000 - 0.1) < 5 * math.sqrt(0.09 / 4000)


def test_draw_trials_shapes_and_codewords():
    code = hamming_7_4()
    assert trial_stride(code) == 12
    X, Y = draw_trials(code, 0.2, key=123, start=0, count=500)
    assert X.shape == Y.shape == (500, 7)
    assert all(code.contains(BitVector.from_bits(x)) for x in X[:50])
    flips = (X ^ Y).mean()
    assert abs(flips - 0.2) < 5 * math.sqrt(0.16 / 3500)
    # messages are fair coins
    assert abs(X[:, :4].mean() - 0.5) < 0.05


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 300), st.integers(1, 200))
def test_trial_stream_is_position_addressed(start, count):
    code = hamming_7_4()
    X, Y = draw_trials(code, 0.1, key=9, start=0, count=start + count)
    Xs, Ys = draw_trials(code, 0.1, key=9, start=start, count=count)
    assert np.array_equal(X[start:], Xs)
    assert np.array_equal(Y[start:], Ys)


# -- estimates -------------------------------------------------------------

def test_identity_decoder_matches_epsilon():
    code = hamming_7_4()
    res = estimate_ber(code, HardDecisionDecoder(), ChannelConfig(0.16), 20000, seed=5)
    sigma = math.sqrt(0.16 * 0.84 / 20000)
    assert np.all(np.abs(res.pe - 0.16) <= 3 * sigma)
    assert res.decoder == "identity"
    assert res.pe_bit == max(res.counts) / 20000
    assert res.counts[res.worst_bit_index - 1] == max(res.counts)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 3000))
def test_counts_do_not_depend_on_chunking(chunk):
    code = hamming_7_4()
    dec = MLDecoder(code, 0.1)
    a = estimate_ber(code, dec, ChannelConfig(0.1), 3000, seed=1, chunk=chunk)
    b = estimate_ber(code, dec, ChannelConfig(0.1), 3000, seed=1, chunk=1024)
    assert a.counts == b.counts


def test_counts_do_not_depend_on_workers():
    code = hamming_7_4()
    dec = MLDecoder(code, 0.1)
    one = estimate_ber(code, dec, ChannelConfig(0.1), 5000, seed=2, chunk=700, workers=1)
    two = estimate_ber(code, dec, ChannelConfig(0.1), 5000, seed=2, chunk=700, workers=3)
    assert one.counts == two.counts


def test_seed_and_cell_change_the_stream():
    code = hamming_7_4()
    dec = HardDecisionDecoder()
    cfg = ChannelConfig(0.2)
    a = estimate_ber(code, dec, cfg, 2000, seed=1)
    assert estimate_ber(code, dec, cfg, 2000, seed=2).counts != a.counts
    assert estimate_ber(code, dec, cfg, 2000, seed=1, cell=("other",)).counts != a.counts
    assert derive_key(1, "trial", "a", 1) != derive_key(1, "trial", "a", 2)


def test_ml_beats_hard_decision():
    code = hamming_7_4()
    cfg = ChannelConfig(0.05)
    ml = estimate_ber(code, MLDecoder(code, 0.05), cfg, 20000, seed=3)
    raw = estimate_ber(code, HardDecisionDecoder(), cfg, 20000, seed=3)
    assert ml.pe_bit < raw.pe_bit


def test_ml_monotone_in_epsilon():
    code = bch_63_7()
    pes = []
    for eps in (0.15, 0.2, 0.25):
        res = estimate_ber(code, MLDecoder(code, eps), ChannelConfig(eps), 4000, seed=4)
        pes.append((res.pe_bit, math.sqrt(res.pe_bit * (1 - res.pe_bit) / 4000)))
    for (p0, s0), (p1, s1) in zip(pes, pes[1:]):
        assert p1 >= p0 - 2 * math.hypot(s0, s1)


# -- experiment specs ------------------------------------------------------

BASIC = """
# quick run
code = hamming7_4
decoder = ml
decoder = identity
epsilon = 0.05:0.15:0.05
trials = 1000
seed = 7
timing = off
"""


def test_parse_spec_basic():
    spec = parse_spec(BASIC)
    assert spec.decoders == ["ml", "identity"]
    assert spec.epsilons == [0.05, 0.1, 0.15]
    assert spec.trials == 1000 and spec.seed == 7
    assert not spec.timing and not spec.random


@pytest.mark.parametrize("text,line", [
    ("code = hamming7_4\ndecoder = ml\nepsilon = 0.1\ntrials = 0\n", 4),
    ("code = hamming7_4\ndecoder = nope\nepsilon = 0.1\ntrials = 5\n", 2),
    ("code = hamming7_4\ndecoder = ml\nepsilon = 0.7\ntrials = 5\n", 3),
    ("code = hamming7_4\ndecoder = ml\nepsilon = 0.1\ntrials = 5\ncolour = red\n", 5),
    ("code = hamming7_4\ncode = bch63_7\ndecoder = ml\nepsilon = 0.1\ntrials = 5\n", 2),
    ("code = hamming7_4\ndecoder = ml\nepsilon = 0.1\ntrials = 5\nno equals sign\n", 5),
    ("code = missing.txt\ndecoder = ml\nepsilon = 0.1\ntrials = 5\n", 1),
    ("code = hamming7_4\ndecoder = ml\nepsilon = 0.1\ntrials = 5\ntiming = maybe\n", 5),
])
def test_parse_spec_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_spec(text)
    assert info.value.line == line


def test_parse_spec_rejects_two_grids():
    text = ("k = 4\nblocks = 1\nblocks = 2\nw = 2\ndecoder = ml\n"
            "epsilon = 0.1\nepsilon = 0.2\ntrials = 5\n")
    with pytest.raises(ConfigError):
        parse_spec(text)


def test_sweep_fixed_code_rows():
    rows = sweep(parse_spec(BASIC))
    assert len(rows) == 6
    assert all(len(r) == len(CSV_HEADER) for r in rows)
    r = rows[0]
    assert r[:4] == ["hamming7_4", "ml", "7", "4"]
    assert r[6] == "NA" and r[7] == "NA" and r[14] == "NA"
    # decoders in the same cell share trials: identity counts are raw flips
    assert rows[1][1] == "identity"


def test_sweep_random_family_best_rows():
    text = "k = 4\nblocks = 1\nblocks = 2\nw = 2\nrealizations = 3\ndecoder = approx:2\n" \
           "decoder = ml\nepsilon = 0.1\ntrials = 2000\nseed = 3\ntiming = off\n"
    rows = sweep(parse_spec(text))
    per = [r for r in rows if r[7] != "best"]
    best = [r for r in rows if r[7] == "best"]
    assert len(per) == 2 * 3 * 2 and len(best) == 2 * 2
    for b in best:
        group = [float(r[10]) for r in per if r[0] == b[0] and r[1] == b[1]]
        assert float(b[10]) == min(group)
    assert {r[6] for r in rows if r[1] == "approx:2"} == {"2"}


def test_sweep_bm_needs_bch():
    spec = parse_spec("code = hamming7_4\ndecoder = bm\nepsilon = 0.1\ntrials = 10\n")
    with pytest.raises(ConfigError):
        sweep(spec)


def test_csv_is_deterministic_across_workers(tmp_path):
    spec = parse_spec(BASIC.replace("trials = 1000", "trials = 3000\nchunk = 512"))
    a = format_csv(sweep(spec, workers=1))
    b = format_csv(sweep(spec, workers=2))
    assert a == b
    assert a.startswith(",".join(CSV_HEADER) + "\n")
    assert "\r" not in a
    path = tmp_path / "out.csv"
    write_csv(str(path), sweep(spec))
    assert path.read_bytes() == a.encode()


def test_read_spec_resolves_matrix_files(tmp_path):
    (tmp_path / "g.txt").write_text("1 3\n1 1 1\n")
    (tmp_path / "run.spec").write_text("code = g.txt\ndecoder = ml\nepsilon = 0.2\n"
                                       "trials = 500\ntiming = off\n")
    spec = read_spec(str(tmp_path / "run.spec"))
    rows = sweep(spec)
    assert rows[0][0] == "g.txt" and rows[0][2] == "3"
