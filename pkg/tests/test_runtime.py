import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mpcprobe.circuits import gen_less_than
from mpcprobe.compile import compile_gmw
from mpcprobe.errors import BadCorruptionSet, TapeExhausted
from mpcprobe.runtime import (TapeSet, extract_views, pack_bits, prepare, run_batch,
                              unpack_bits)
from mpcprobe.syntax import parse_program

TOY = """
x = SECRET @P1
y = SECRET @P2
r = FLIP @P1
m = x + r
SEND m TO P2
z = m ^ y
q = FLIP @P2
o = OBLIVIOUSLY [z, q]?x FOR P1
OUTPUT z
OUTPUT o @P1
"""


def all_inputs(bits):
    return np.array(list(itertools.product((0, 1), repeat=bits)), dtype=np.uint8).T


@given(st.integers(1, 300), st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_pack_unpack_round_trip(runs, width, seed):
    bits = np.random.default_rng(seed).integers(0, 2, (width, runs), dtype=np.uint8)
    assert np.array_equal(unpack_bits(pack_bits(bits), runs), bits)


def test_toy_program_semantics():
    x, y, r, q = all_inputs(4)
    tapes = TapeSet.from_bits({"P1": [x], "P2": [y]}, {"P1": [r], "P2": [q]})
    trace = run_batch(parse_program(TOY), tapes)
    m = x ^ r
    z = m & y
    o = np.where(x == 1, q, z)
    assert np.array_equal(trace.outputs("P1"), np.stack([o]))  # z lives only at P2
    assert np.array_equal(trace.outputs("P2"), np.stack([z]))
    assert np.array_equal(trace.messages("P2"), np.stack([m]))
    assert np.array_equal(trace.messages("P1"), np.stack([o]))
    rec = trace[5]
    assert rec.inputs == {"P1": (int(x[5]),), "P2": (int(y[5]),)}
    assert len(trace) == 16 and len(trace[2:4]) == 2


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 130), st.integers(0, 2**32 - 1))
def test_runs_do_not_interfere(runs, seed):
    """Each lane of a batch equals that run executed alone."""
    prog, a = prepare(parse_program(TOY))
    tapes = TapeSet.uniform(a, runs, np.random.default_rng(seed))
    batch = run_batch(prog, tapes, analysis=a)
    k = runs // 2
    single = TapeSet.from_bits(
        {q: tapes.secret_bits(q)[:, k:k + 1] for q in a.parties},
        {q: tapes.random_bits(q)[:, k:k + 1] for q in a.parties}, runs=1)
    alone = run_batch(prog, single, analysis=a)
    for q in a.parties:
        assert np.array_equal(batch.outputs(q)[:, k:k + 1], alone.outputs(q))
        assert np.array_equal(batch.messages(q)[:, k:k + 1], alone.messages(q))


def test_short_tape_is_reported():
    prog = parse_program("r = FLIP @P1\ns = FLIP @P1\nOUTPUT s")
    with pytest.raises(TapeExhausted):
        run_batch(prog, TapeSet.from_bits({}, {"P1": [[0, 1]]}))


def test_seeded_runs_are_reproducible():
    a = run_batch(parse_program(TOY), runs=100, rng=7)
    b = run_batch(parse_program(TOY), runs=100, rng=7)
    assert all(np.array_equal(a.outputs(q), b.outputs(q)) for q in ("P1", "P2"))


def test_view_extraction_layout():
    x, y, r, q = all_inputs(4)
    tapes = TapeSet.from_bits({"P1": [x], "P2": [y]}, {"P1": [r], "P2": [q]})
    trace = run_batch(parse_program(TOY), tapes)
    v = extract_views(trace, "P2")
    assert v.widths == (1, 2, 2)  # L: x; I: y, z; R: q, m
    assert np.array_equal(v.L[:, 0], x)
    assert np.array_equal(v.I, np.stack([y, (x ^ r) & y], 1))
    assert np.array_equal(v.R, np.stack([q, x ^ r], 1))
    v1 = extract_views(trace, {"P1"})
    assert v1.widths == (1, 2, 2)  # L: y; I: x, o; R: r, o
    for bad in ({"P3"}, set(), {"P1", "P2"}):
        with pytest.raises(BadCorruptionSet):
            extract_views(trace, bad)


def test_handwritten_listing_computes_less_than(lt2_source):
    x0, x1, y2, y3 = all_inputs(4)
    prog, a = prepare(parse_program(lt2_source))
    tapes = TapeSet.uniform(a, 16, np.random.default_rng(0))
    tapes = TapeSet(16, {"P1": pack_bits(np.stack([x0, x1])),
                         "P2": pack_bits(np.stack([y2, y3]))}, tapes.random)
    trace = run_batch(prog, tapes, analysis=a)
    expected = ((2 * y2 + y3) < (2 * x0 + x1)).astype(np.uint8)
    for q in ("P1", "P2"):
        assert np.array_equal(trace.outputs(q)[0], expected)


def test_handwritten_listing_matches_compiled_comparison(lt2_source):
    """Same input/output behaviour as the compiled two-bit comparison."""
    hand, ha = prepare(parse_program(lt2_source))
    comp, ca = prepare(compile_gmw(gen_less_than(2)))
    ins = all_inputs(4)
    for prog, a in ((hand, ha), (comp, ca)):
        tapes = TapeSet.uniform(a, 16 * 64, np.random.default_rng(1))
        tapes = TapeSet(16 * 64, {"P1": pack_bits(np.repeat(ins[:2], 64, axis=1)),
                                  "P2": pack_bits(np.repeat(ins[2:], 64, axis=1))},
                        tapes.random)
        out = run_batch(prog, tapes, analysis=a)
        if prog is hand:
            ref = {q: out.outputs(q) for q in ("P1", "P2")}
        else:
            for q in ("P1", "P2"):
                assert np.array_equal(out.outputs(q), ref[q])
