"""Seeded Monte Carlo estimation of bit error probabilities on the BSC.

Trial ``t`` of a cell reads words ``[t * stride, (t + 1) * stride)`` of one
Philox stream keyed by ``(seed, "trial", cell)``: ``k`` words for the message
bits, then ``n`` words for the channel flips.  A chunk of trials is therefore
one contiguous slice of the stream, and results do not depend on how chunks
are distributed over workers.  All decoders of a cell see the same trials.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .algebra import BitVector, read_matrix
from .code import (BchCode, LinearCode, RandomCodeSpec, builtin, encode_array,
                   random_systematic_circulant)
from .decode import ApproxDecoder, BMDecoder, HardDecisionDecoder, MLDecoder
from .errors import ConfigError, DecodeError, InvalidEpsilon, RatmlError
from .rng import PHILOX_BLOCK, derive_key, derive_seed, raw_words, stream, uniforms
from .taylor import truncated_map

CHUNK_TRIALS = 8192
Z95 = NormalDist().inv_cdf(0.975)

CSV_HEADER = ("code", "decoder", "n", "k", "rate", "epsilon", "order", "realization", "seed",
              "trials", "pe_bit", "pe_bit_lo", "pe_bit_hi", "worst_bit_index", "elapsed_s")


@dataclass(frozen=True)
class ChannelConfig:
    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < 0.5:
            raise InvalidEpsilon(f"epsilon must be in (0, 1/2), got {self.epsilon}")


def bsc_transmit(x: BitVector, cfg: ChannelConfig, rng: np.random.Generator) -> BitVector:
    """Flip each bit of ``x`` independently with probability epsilon."""
    flips = uniforms(raw_words(rng, x.length)) < cfg.epsilon
    return x ^ BitVector.from_bits(flips.astype(np.uint8))


def wilson_interval(count: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    p = count / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    # the endpoints are exactly 0 and 1 at the extremes; avoid cancellation residue
    lo = 0.0 if count == 0 else max(0.0, centre - half)
    hi = 1.0 if count == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class BerResult:
    code: str
    decoder: str
    n: int
    k: int
    epsilon: float
    trials: int
    seed: int
    counts: tuple[int, ...]
    elapsed_s: float = 0.0

    @property
    def pe(self) -> np.ndarray:
        """Per-bit estimates ``P^e_i``."""
        return np.array(self.counts, dtype=np.float64) / self.trials

    @property
    def worst_bit_index(self) -> int:
        """1-based position of the largest count (first on ties)."""
        return int(np.argmax(self.counts)) + 1

    @property
    def pe_bit(self) -> float:
        return max(self.counts) / self.trials

    @property
    def pe_bit_interval(self) -> tuple[float, float]:
        return wilson_interval(max(self.counts), self.trials)


def trial_stride(code: LinearCode) -> int:
    words = code.k + code.n
    return -(-words // PHILOX_BLOCK) * PHILOX_BLOCK


def draw_trials(code: LinearCode, epsilon: float, key: int, start: int,
                count: int) -> tuple[np.ndarray, np.ndarray]:
    """Transmitted codewords and received words for trials ``[start, start + count)``."""
    stride = trial_stride(code)
    gen = stream(key, start * stride)
    raw = raw_words(gen, count * stride).reshape(count, stride)
    msgs = (raw[:, :code.k] >> np.uint64(63)).astype(np.uint8)
    flips = (uniforms(raw[:, code.k:code.k + code.n]) < epsilon).astype(np.uint8)
    X = encode_array(code, msgs)
    return X, X ^ flips


def _chunk_counts(code, decoder, epsilon, key, start, count) -> np.ndarray:
    X, Y = draw_trials(code, epsilon, key, start, count)
    try:
        Xh = decoder.decode_batch(Y)
    except RatmlError as exc:
        raise DecodeError(f"decoder {decoder.tag} failed on trials {start}..{start + count}: {exc}")
    return (Xh != X).sum(axis=0, dtype=np.int64)


_WORKER: dict = {}


def _worker_init(code, decoder, epsilon, key):
    _WORKER.update(code=code, decoder=decoder, epsilon=epsilon, key=key)


def _worker_chunk(bounds):
    w = _WORKER
    return _chunk_counts(w["code"], w["decoder"], w["epsilon"], w["key"], *bounds)


def default_workers() -> int:
    env = os.environ.get("RATML_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def estimate_ber(code: LinearCode, decoder, cfg: ChannelConfig, trials: int, seed: int, *,
                 workers: int = 1, cell: Sequence[int | str] | None = None,
                 chunk: int = CHUNK_TRIALS) -> BerResult:
    """Estimate per-bit error probabilities of ``decoder`` over ``trials`` trials.

    ``cell`` labels the trial stream; decoders run with the same ``cell``
    see identical messages and channel noise.  It defaults to
    ``(code.name, epsilon)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if cell is None:
        cell = (code.name, repr(cfg.epsilon))
    key = derive_key(seed, "trial", *cell)
    bounds = [(s, min(chunk, trials - s)) for s in range(0, trials, chunk)]
    t0 = time.perf_counter()
    if workers <= 1 or len(bounds) == 1:
        parts = [_chunk_counts(code, decoder, cfg.epsilon, key, *b) for b in bounds]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(bounds)), initializer=_worker_init,
                                 initargs=(code, decoder, cfg.epsilon, key)) as pool:
            parts = list(pool.map(_worker_chunk, bounds))
    counts = np.zeros(code.n, dtype=np.int64)
    for p in parts:
        counts += p
    return BerResult(code.name, decoder.tag, code.n, code.k, cfg.epsilon, trials, seed,
                     tuple(int(c) for c in counts), time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# experiment specs and sweeps
# ---------------------------------------------------------------------------

DECODER_NAMES = ("ml", "bm", "identity")


@dataclass
class ExperimentSpec:
    """One BER experiment.

    The code is either ``code`` (builtin name or matrix file) or a random
    family ``(k, blocks, w)`` with ``realizations`` draws per ``blocks``
    value.  At most one of the epsilon and blocks lists has several values.
    """

    decoders: list[str]
    epsilons: list[float]
    trials: int
    seed: int
    code: str | None = None
    k: int | None = None
    blocks: list[int] = field(default_factory=list)
    w: int | None = None
    realizations: int = 1
    mode: str = "auto"
    output: str | None = None
    timing: bool = True
    chunk: int = CHUNK_TRIALS
    base_dir: str = "."

    @property
    def random(self) -> bool:
        return self.code is None


def _parse_bool(value: str, line: int) -> bool:
    v = value.lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}", line)


def _parse_epsilons(value: str, line: int) -> list[float]:
    try:
        if ":" in value:
            start, stop, step = (float(x) for x in value.split(":"))
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(value)]
    except ValueError:
        raise ConfigError(f"bad epsilon {value!r}", line)


def _check_decoder(name: str, line: int) -> str:
    if name in DECODER_NAMES:
        return name
    if name.startswith("approx:"):
        try:
            order = int(name.split(":", 1)[1])
        except ValueError:
            order = 0
        if 1 <= order <= 4:
            return name
    raise ConfigError(f"unknown decoder {name!r} (ml, bm, identity, approx:<order>)", line)


def parse_spec(text: str, base_dir: str = ".") -> ExperimentSpec:
    """Parse ``key = value`` lines; repeated keys accumulate into lists."""
    single = {"code", "k", "w", "realizations", "trials", "seed", "mode", "output", "timing",
              "chunk"}
    listed = {"decoder", "epsilon", "blocks"}
    values: dict[str, list[tuple[str, int]]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in single | listed:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in single and key in values:
            raise ConfigError(f"key {key!r} given twice", lineno)
        values.setdefault(key, []).append((value, lineno))

    def one(key, conv=str, default=None):
        if key not in values:
            return default
        value, line = values[key][0]
        try:
            return conv(value)
        except ValueError:
            raise ConfigError(f"bad value {value!r} for {key}", line)

    def where(key):
        return values[key][0][1] if key in values else None

    decoders = [_check_decoder(v, ln) for v, ln in values.get("decoder", [])]
    if not decoders:
        raise ConfigError("at least one decoder is required")
    epsilons = [e for v, ln in values.get("epsilon", []) for e in _parse_epsilons(v, ln)]
    if not epsilons:
        raise ConfigError("at least one epsilon is required")
    for e in epsilons:
        if not 0.0 < e < 0.5:
            raise ConfigError(f"epsilon {e} outside (0, 1/2)", where("epsilon"))
    trials = one("trials", int)
    if trials is None or trials < 1:
        raise ConfigError("trials must be a positive integer", where("trials"))
    seed = one("seed", int, 0)
    spec = ExperimentSpec(decoders=decoders, epsilons=epsilons, trials=trials, seed=seed,
                          code=one("code"), k=one("k", int), w=one("w", int),
                          blocks=[int(v) for v, _ in values.get("blocks", [])],
                          realizations=one("realizations", int, 1), mode=one("mode", str, "auto"),
                          output=one("output"), chunk=one("chunk", int, CHUNK_TRIALS),
                          base_dir=base_dir)
    if "timing" in values:
        spec.timing = _parse_bool(*values["timing"][0])
    if spec.mode not in ("auto", "clean", "general"):
        raise ConfigError(f"mode must be auto, clean or general, got {spec.mode!r}", where("mode"))
    if spec.chunk < 1:
        raise ConfigError("chunk must be positive", where("chunk"))
    if spec.code is not None:
        if spec.k is not None or spec.w is not None or spec.blocks:
            raise ConfigError("give either 'code' or the random family keys k, blocks, w",
                              where("code"))
        path = os.path.join(base_dir, spec.code)
        if not _is_builtin(spec.code) and not os.path.exists(path):
            raise ConfigError(f"code {spec.code!r} is neither a builtin nor a file", where("code"))
    else:
        if spec.k is None or spec.w is None or not spec.blocks:
            raise ConfigError("random codes need k, blocks and w")
        try:
            for b in spec.blocks:
                RandomCodeSpec(spec.k, b, spec.w, 0).validate()
        except RatmlError as exc:
            raise ConfigError(str(exc), where("k"))
        if spec.realizations < 1:
            raise ConfigError("realizations must be positive", where("realizations"))
    if len(spec.epsilons) > 1 and len(spec.blocks) > 1:
        raise ConfigError("sweep either epsilon or blocks (rate), not both")
    return spec


def read_spec(path: str) -> ExperimentSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read(), os.path.dirname(os.path.abspath(path)))


def _is_builtin(name: str) -> bool:
    try:
        builtin(name)
        return True
    except RatmlError:
        return False


@dataclass
class CodeCell:
    code: LinearCode
    label: str
    realization: int | None
    blocks: int | None


def spec_codes(spec: ExperimentSpec) -> list[CodeCell]:
    """Every code the spec refers to, in output order."""
    if not spec.random:
        if _is_builtin(spec.code):
            code = builtin(spec.code)
        else:
            G = read_matrix(os.path.join(spec.base_dir, spec.code))
            code = LinearCode.from_generator(G, os.path.basename(spec.code))
        return [CodeCell(code, code.name, None, None)]
    cells = []
    for b in spec.blocks:
        for r in range(spec.realizations):
            sub = derive_seed(spec.seed, "matrix", spec.k, b, spec.w, r)
            code = random_systematic_circulant(RandomCodeSpec(spec.k, b, spec.w, sub))
            label = f"random_k{spec.k}_b{b}_w{spec.w}"
            cells.append(CodeCell(code, label, r, b))
    return cells


def make_decoder(name: str, code: LinearCode, epsilon: float, mode: str = "auto", cache=None):
    if name == "ml":
        return MLDecoder(code, epsilon)
    if name == "bm":
        return BMDecoder(code)
    if name == "identity":
        return HardDecisionDecoder()
    order = int(name.split(":", 1)[1])
    cache = {} if cache is None else cache
    key = (id(code), order, mode)
    if key not in cache:
        cache[key] = truncated_map(code, order, mode)
    return ApproxDecoder(cache[key], epsilon, name)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _row(cell: CodeCell, name: str, spec: ExperimentSpec, res: BerResult,
         realization: str) -> list[str]:
    lo, hi = res.pe_bit_interval
    order = name.split(":", 1)[1] if name.startswith("approx:") else "NA"
    return [cell.label, name, str(res.n), str(res.k), _fmt(res.k / res.n), repr(res.epsilon),
            order, realization, str(spec.seed), str(res.trials), _fmt(res.pe_bit), _fmt(lo),
            _fmt(hi), str(res.worst_bit_index),
            f"{res.elapsed_s:.3f}" if spec.timing else "NA"]


def sweep(spec: ExperimentSpec, workers: int = 1, progress=None) -> list[list[str]]:
    """Run every (code, epsilon, decoder) cell; returns CSV rows without header.

    Random-code specs get one row per realization followed by a ``best``
    row (lowest ``pe_bit``, earliest realization on ties) per
    ``(blocks, epsilon, decoder)``.
    """
    cells = spec_codes(spec)
    for cell in cells:
        if "bm" in spec.decoders and not isinstance(cell.code, BchCode):
            raise ConfigError(f"decoder bm needs a BCH code, {cell.label} is not one")
    rows = []
    best: dict[tuple, tuple[BerResult, CodeCell]] = {}
    cache: dict = {}
    for cell in cells:
        for eps in spec.epsilons:
            cfg = ChannelConfig(eps)
            trial_cell = (cell.label, "NA" if cell.realization is None else cell.realization,
                          repr(eps))
            for name in spec.decoders:
                decoder = make_decoder(name, cell.code, eps, spec.mode, cache)
                res = estimate_ber(cell.code, decoder, cfg, spec.trials, spec.seed,
                                   workers=workers, cell=trial_cell, chunk=spec.chunk)
                real = "NA" if cell.realization is None else str(cell.realization)
                rows.append(_row(cell, name, spec, res, real))
                if progress:
                    progress(rows[-1])
                if spec.random:
                    k = (cell.blocks, eps, name)
                    if k not in best or res.pe_bit < best[k][0].pe_bit:
                        best[k] = (res, cell)
    for (b, eps, name), (res, cell) in best.items():
        rows.append(_row(cell, name, spec, res, "best"))
    return rows


def format_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(path: str, rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(rows))
