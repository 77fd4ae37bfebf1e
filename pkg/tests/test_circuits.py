import itertools

import numpy as np
import pytest

from mpcprobe.circuits import (Circuit, Gate, bits_of, builtin, format_bristol, gen_adder,
                               gen_beaver_triple_gen, gen_less_than, parse_bristol, value_of)
from mpcprobe.errors import TopologyViolation, UnknownGateKind


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_adder_matches_integer_addition(n):
    c = gen_adder(n)
    for x, y in itertools.product(range(2**n), repeat=2):
        out = c.evaluate({"P1": bits_of(x, n), "P2": bits_of(y, n)})
        assert value_of(out["P1"]) == value_of(out["P2"]) == x + y


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_less_than_matches_integer_comparison(n):
    c = gen_less_than(n)
    for x, y in itertools.product(range(2**n), repeat=2):
        out = c.evaluate({"P1": bits_of(x, n), "P2": bits_of(y, n)})
        assert out["P1"] == out["P2"] == [int(y < x)]


@pytest.mark.parametrize("n", [1, 2])
def test_triple_generator_shares_a_valid_triple(n):
    c = gen_beaver_triple_gen(n)
    for bits in itertools.product((0, 1), repeat=6 * n):
        p1, p2 = list(bits[:3 * n]), list(bits[3 * n:])
        out = c.evaluate({"P1": p1, "P2": p2})
        u1, v1, c1 = (out["P1"][k * n:(k + 1) * n] for k in range(3))
        u2, v2, c2 = (out["P2"][k * n:(k + 1) * n] for k in range(3))
        for i in range(n):
            assert c1[i] ^ c2[i] == (u1[i] ^ u2[i]) & (v1[i] ^ v2[i])


def test_and_gate_counts():
    assert len(gen_less_than(2).and_gates) == 2
    assert len(gen_adder(3).and_gates) == 3
    assert len(builtin("btgen:3").and_gates) == 3
    with pytest.raises(ValueError):
        builtin("mul:2")


def test_packed_evaluation_matches_scalar():
    c = gen_adder(2)
    ones = np.uint64(2**64 - 1)
    rng = np.random.default_rng(0)
    xs = rng.integers(0, 2**64, 4, dtype=np.uint64)
    packed = c.evaluate({"P1": list(xs[:2]), "P2": list(xs[2:])}, ones=ones)
    for lane in (0, 17, 63):
        bit = [int(w >> np.uint64(lane)) & 1 for w in xs]
        scalar = c.evaluate({"P1": bit[:2], "P2": bit[2:]})
        assert [int(w >> np.uint64(lane)) & 1 for w in packed["P1"]] == scalar["P1"]


BRISTOL_AND_NOT = """3 5
2 1 1
1 1
2 1 0 1 2 AND
1 1 2 3 INV
2 1 3 0 4 XOR
"""


def test_bristol_parse():
    c = parse_bristol(BRISTOL_AND_NOT)
    assert c.inputs == {"P1": [0], "P2": [1]}
    assert c.outputs == {"P1": [4], "P2": [4]}
    for x, y in itertools.product((0, 1), repeat=2):
        assert c.evaluate({"P1": [x], "P2": [y]})["P1"] == [(1 - (x & y)) ^ x]


def test_bristol_round_trip():
    for c in (gen_adder(3), gen_less_than(2), parse_bristol(BRISTOL_AND_NOT)):
        again = parse_bristol(format_bristol(c))
        assert again.gates == c.gates and again.inputs == c.inputs


@pytest.mark.parametrize("text, error", [
    ("1 3\n2 1 1\n1 1\n2 1 0 1 2 MAND\n", UnknownGateKind),
    ("1 3\n2 1 1\n1 1\n2 1 0 5 2 AND\n", TopologyViolation),
    ("2 3\n2 1 1\n1 1\n2 1 0 1 2 AND\n", TopologyViolation),
    ("1 3\n2 1\n1 1\n2 1 0 1 2 AND\n", TopologyViolation),
    ("1 3\n", TopologyViolation),
])
def test_bad_bristol(text, error):
    with pytest.raises(error):
        parse_bristol(text)


def test_topology_checks():
    with pytest.raises(TopologyViolation):
        Circuit(3, {"P1": [0]}, {"P1": [2]}, [Gate("XOR", (0, 1), 2)])
    with pytest.raises(TopologyViolation):
        Circuit(2, {"P1": [0]}, {"P1": [1]}, [Gate("INV", (0,), 0)])
    with pytest.raises(UnknownGateKind):
        Circuit(2, {"P1": [0]}, {"P1": [1]}, [Gate("OR", (0, 0), 1)])


def test_bit_helpers():
    assert bits_of(6, 4) == [0, 1, 1, 0]
    assert value_of([1, 0, 1]) == 5
