"""Exhaustive correctness check of compiled protocols against plaintext.

Every input assignment is run under ``tapes_per_input`` independent random
tapes.  Lane ``L`` of the batch carries assignment ``L >> log2(tapes)``, so
each input word is either a fixed intra-word lane pattern or an all-zero /
all-one word, and the whole enumeration is generated directly in packed form.
"""
from __future__ import annotations

import numpy as np

from .circuits import Circuit
from .compile import CompileOptions, compile_circuit
from .runtime import WORD_BITS, TapeSet, prepare, run_batch

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


def _lane_pattern(k: int) -> np.uint64:
    """Word whose lane ``l`` holds bit ``k`` of ``l`` (k < 6)."""
    word = 0
    for lane in range(WORD_BITS):
        if (lane >> k) & 1:
            word |= 1 << lane
    return np.uint64(word)


def _assignment_words(bit: int, words: np.ndarray) -> np.ndarray:
    if bit < 6:
        return np.full(len(words), _lane_pattern(bit), dtype=np.uint64)
    return np.where((words >> np.uint64(bit - 6)) & np.uint64(1), _ONES, np.uint64(0))


def exhaustive_mismatches(c: Circuit, opts: CompileOptions | None = None,
                          tapes_per_input: int = 32, seed: int = 0,
                          chunk_words: int = 1 << 14) -> int:
    """Number of runs whose outputs differ from plaintext evaluation.

    ``tapes_per_input`` must be a power of two.
    """
    if tapes_per_input < 1 or tapes_per_input & (tapes_per_input - 1):
        raise ValueError("tapes_per_input must be a power of two")
    opts = opts or CompileOptions()
    program, analysis = prepare(compile_circuit(c, opts))
    shift = tapes_per_input.bit_length() - 1
    order = [(q, k) for q in ("P1", "P2") for k in range(len(c.inputs.get(q, [])))]
    total_runs = 1 << (len(order) + shift)
    total_words = -(-total_runs // WORD_BITS)
    rng = np.random.default_rng(seed)
    mismatches = 0
    for start in range(0, total_words, chunk_words):
        words = np.arange(start, min(start + chunk_words, total_words), dtype=np.uint64)
        runs = min(len(words) * WORD_BITS, total_runs - start * WORD_BITS)
        inputs = {q: [] for q in c.inputs}
        for j, (q, _) in enumerate(order):
            inputs[q].append(_assignment_words(j + shift, words))
        secret = {q: np.array(inputs.get(q, []), dtype=np.uint64).reshape(-1, len(words))
                  for q in analysis.parties}
        random = {q: rng.integers(0, 2**64, size=(analysis.random_widths[q], len(words)),
                                  dtype=np.uint64) for q in analysis.parties}
        trace = run_batch(program, TapeSet(runs, secret, random), analysis=analysis)
        expected = c.evaluate(inputs, ones=_ONES)
        bad = np.zeros(len(words), dtype=np.uint64)
        for q, bits in expected.items():
            for v, want in zip(trace._outputs[q], bits):
                bad |= v ^ want
        if runs < len(words) * WORD_BITS:
            bad[-1] &= np.uint64((1 << (runs % WORD_BITS)) - 1)
        mismatches += int(np.unpackbits(bad.view(np.uint8)).sum())
    return mismatches
