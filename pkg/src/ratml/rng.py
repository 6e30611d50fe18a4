"""Labelled seed derivation and counter-based random streams.

Every random quantity in the package is drawn from a Philox generator whose
128-bit key is a hash of ``(seed, label, *parts)``.  Philox is counter based,
so a stream can be entered at any position; the simulation harness uses this
to give each trial its own reproducible slice regardless of how trials are
split across workers.
"""

from __future__ import annotations

import hashlib

import numpy as np

# Philox4x64 emits 4 words per counter increment.
PHILOX_BLOCK = 4


def _part(p) -> str:
    return p if isinstance(p, str) else str(int(p))


def derive_key(seed: int, label: str, *parts: int | str) -> int:
    text = ":".join([str(int(seed)), label, *(_part(p) for p in parts)])
    digest = hashlib.blake2b(text.encode("ascii"), digest_size=16).digest()
    return int.from_bytes(digest, "little")


def derive_seed(seed: int, label: str, *parts: int | str) -> int:
    """A 64-bit sub-seed, e.g. to seed one code realization."""
    return derive_key(seed, label, *parts) & ((1 << 64) - 1)


def stream(key: int, position: int = 0) -> np.random.Generator:
    """Generator whose first raw word is word ``position`` of stream ``key``.

    ``position`` must be a multiple of :data:`PHILOX_BLOCK`.
    """
    if position % PHILOX_BLOCK:
        raise ValueError("position must be a multiple of 4")
    c = position // PHILOX_BLOCK
    mask = (1 << 64) - 1
    counter = [c & mask, (c >> 64) & mask, 0, 0]
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def labelled_stream(seed: int, label: str, *parts: int | str) -> np.random.Generator:
    return stream(derive_key(seed, label, *parts))


def raw_words(gen: np.random.Generator, count: int) -> np.ndarray:
    return gen.bit_generator.random_raw(count).astype(np.uint64)


def uniforms(raw: np.ndarray) -> np.ndarray:
    """Map raw 64-bit words to doubles in [0, 1) using the top 53 bits."""
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
