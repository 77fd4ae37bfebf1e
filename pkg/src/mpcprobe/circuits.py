"""Boolean circuits: Bristol-fashion parsing, builtin generators, evaluation.

Builtin circuits read every multi-bit number most-significant bit first,
matching the bit order of the hand-written two-bit comparison choreography
shipped in ``mpcprobe/data``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import TopologyViolation, UnknownGateKind

GATE_KINDS = ("XOR", "AND", "INV")
PARTIES = ("P1", "P2")


@dataclass(frozen=True)
class Gate:
    kind: str
    ins: tuple[int, ...]
    out: int


@dataclass
class Circuit:
    n_wires: int
    inputs: dict[str, list[int]]
    outputs: dict[str, list[int]]
    gates: list[Gate] = field(default_factory=list)
    name: str = "circuit"

    def __post_init__(self):
        check_topology(self)

    @property
    def and_gates(self):
        return [g for g in self.gates if g.kind == "AND"]

    def evaluate(self, inputs: dict, ones=1) -> dict:
        """Plaintext evaluation.

        ``inputs`` maps party to a sequence of bits per input wire; each bit
        may be an int or a numpy array (evaluated element-wise).  For packed
        words pass the all-ones word as ``ones`` so INV flips every lane.
        """
        wires: dict[int, object] = {}
        for q, ws in self.inputs.items():
            bits = list(inputs[q])
            if len(bits) != len(ws):
                raise ValueError(f"{q} needs {len(ws)} input bits, got {len(bits)}")
            wires.update(zip(ws, bits))
        for g in self.gates:
            if g.kind == "XOR":
                wires[g.out] = wires[g.ins[0]] ^ wires[g.ins[1]]
            elif g.kind == "AND":
                wires[g.out] = wires[g.ins[0]] & wires[g.ins[1]]
            else:
                wires[g.out] = ones ^ wires[g.ins[0]]
        return {q: [wires[w] for w in ws] for q, ws in self.outputs.items()}


def check_topology(c: Circuit) -> None:
    written = set()
    for ws in c.inputs.values():
        for w in ws:
            if not 0 <= w < c.n_wires or w in written:
                raise TopologyViolation(f"input wire {w} is out of range or repeated")
            written.add(w)
    for k, g in enumerate(c.gates):
        if g.kind not in GATE_KINDS:
            raise UnknownGateKind(g.kind)
        if len(g.ins) != (1 if g.kind == "INV" else 2):
            raise TopologyViolation(f"gate {k}: {g.kind} takes {1 if g.kind == 'INV' else 2} inputs")
        for w in g.ins:
            if w not in written:
                raise TopologyViolation(f"gate {k} reads wire {w} before it is written")
        if not 0 <= g.out < c.n_wires or g.out in written:
            raise TopologyViolation(f"gate {k} writes wire {g.out}, which is out of range "
                                    "or already written")
        written.add(g.out)
    for q, ws in c.outputs.items():
        for w in ws:
            if w not in written:
                raise TopologyViolation(f"output wire {w} of {q} is never written")


def parse_bristol(text: str, parties=PARTIES) -> Circuit:
    """Parse a Bristol-fashion circuit (XOR/AND/INV gates only).

    Input value ``i`` belongs to ``parties[i]``; the output values are the
    last wires of the circuit and go to every party.
    """
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 3:
        raise TopologyViolation("a Bristol file needs a size line and input/output lines")
    try:
        n_gates, n_wires = map(int, lines[0][:2])
        niv, *in_widths = map(int, lines[1])
        nov, *out_widths = map(int, lines[2])
    except ValueError as exc:
        raise TopologyViolation(f"malformed header: {exc}") from None
    if len(in_widths) != niv or len(out_widths) != nov:
        raise TopologyViolation("input/output width lists do not match their counts")
    if niv > len(parties):
        raise TopologyViolation(f"{niv} input values but only parties {parties}")
    inputs, w = {}, 0
    for q, width in zip(parties, in_widths):
        inputs[q] = list(range(w, w + width))
        w += width
    n_out = sum(out_widths)
    out_wires = list(range(n_wires - n_out, n_wires))
    gates = []
    for k, tok in enumerate(lines[3:]):
        kind = tok[-1]
        if kind not in GATE_KINDS:
            raise UnknownGateKind(f"gate {k}: {kind!r} (only XOR, AND, INV are supported)")
        try:
            n_in, n_out_g = int(tok[0]), int(tok[1])
            wires = [int(x) for x in tok[2:-1]]
        except ValueError:
            raise TopologyViolation(f"gate {k}: malformed line {' '.join(tok)!r}") from None
        if n_out_g != 1 or len(wires) != n_in + 1:
            raise TopologyViolation(f"gate {k}: wire count does not match header")
        gates.append(Gate(kind, tuple(wires[:n_in]), wires[n_in]))
    if len(gates) != n_gates:
        raise TopologyViolation(f"header announces {n_gates} gates, found {len(gates)}")
    return Circuit(n_wires, inputs, {q: list(out_wires) for q in parties[:max(niv, 1)]}, gates)


def format_bristol(c: Circuit) -> str:
    """Write ``c`` in Bristol fashion (outputs must be the final, shared wires)."""
    parties = list(c.inputs)
    outs = next(iter(c.outputs.values()))
    lines = [f"{len(c.gates)} {c.n_wires}",
             " ".join(map(str, [len(parties)] + [len(c.inputs[q]) for q in parties])),
             f"1 {len(outs)}"]
    for g in c.gates:
        lines.append(" ".join(map(str, [len(g.ins), 1, *g.ins, g.out, g.kind])))
    return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self):
        self.n = 0
        self.gates: list[Gate] = []

    def wires(self, k):
        ws = list(range(self.n, self.n + k))
        self.n += k
        return ws

    def gate(self, kind, *ins):
        out = self.n
        self.n += 1
        self.gates.append(Gate(kind, tuple(ins), out))
        return out

    def xor(self, a, b):
        return self.gate("XOR", a, b)

    def and_(self, a, b):
        return self.gate("AND", a, b)

    def inv(self, a):
        return self.gate("INV", a)


def gen_adder(n: int) -> Circuit:
    """(n+1)-bit sum of both parties' n-bit numbers, output to both."""
    if n < 1:
        raise ValueError("n must be at least 1")
    b = _Builder()
    x, y = b.wires(n), b.wires(n)
    sums = []
    carry = None
    for i in reversed(range(n)):  # least significant bit is last
        t = b.xor(x[i], y[i])
        if carry is None:
            sums.append(t)
            carry = b.and_(x[i], y[i])
        else:
            sums.append(b.xor(t, carry))
            # carry' = maj(x, y, c) = c ^ ((x ^ c) & (y ^ c))
            carry = b.xor(carry, b.and_(b.xor(x[i], carry), b.xor(y[i], carry)))
    out = [carry] + sums[::-1]
    return Circuit(b.n, {"P1": x, "P2": y}, {"P1": out, "P2": out}, b.gates, f"adder{n}")


def gen_less_than(n: int) -> Circuit:
    """One output bit, to both parties: 1 iff P2's number is below P1's."""
    if n < 1:
        raise ValueError("n must be at least 1")
    b = _Builder()
    x, y = b.wires(n), b.wires(n)
    # borrow of y - x, computed from the least significant bit up
    borrow = None
    for i in reversed(range(n)):
        ny = b.inv(y[i])
        if borrow is None:
            borrow = b.and_(ny, x[i])
        else:
            # borrow' = maj(~y, x, borrow)
            borrow = b.xor(borrow, b.and_(b.xor(ny, borrow), b.xor(x[i], borrow)))
    return Circuit(b.n, {"P1": x, "P2": y}, {"P1": [borrow], "P2": [borrow]}, b.gates,
                   f"lt{n}")


def gen_beaver_triple_gen(n: int) -> Circuit:
    """n bitwise Beaver triples, secret-shared between the two parties.

    Each party inputs three n-bit masks (u, v, w).  With a = u1^u2 and
    b = v1^v2, P1 receives (u1, v1, (a&b)^w2) and P2 receives (u2, v2, w2),
    so the two c-shares XOR to a&b.  P1's w input is not needed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    bld = _Builder()
    u1, v1, w1 = bld.wires(n), bld.wires(n), bld.wires(n)
    u2, v2, w2 = bld.wires(n), bld.wires(n), bld.wires(n)
    c1 = []
    for i in range(n):
        a = bld.xor(u1[i], u2[i])
        b = bld.xor(v1[i], v2[i])
        c1.append(bld.xor(bld.and_(a, b), w2[i]))
    return Circuit(bld.n, {"P1": u1 + v1 + w1, "P2": u2 + v2 + w2},
                   {"P1": u1 + v1 + c1, "P2": u2 + v2 + w2}, bld.gates, f"btgen{n}")


BUILTINS = {"adder": gen_adder, "lt": gen_less_than, "btgen": gen_beaver_triple_gen}


def builtin(spec: str) -> Circuit:
    """``"adder:4"`` / ``"lt:2"`` / ``"btgen:3"`` to a circuit."""
    name, _, n = spec.partition(":")
    if name not in BUILTINS or not n.isdigit():
        raise ValueError(f"unknown builtin {spec!r}; expected one of adder:N, lt:N, btgen:N")
    return BUILTINS[name](int(n))


def bits_of(value: int, n: int) -> list[int]:
    """MSB-first bits of ``value``."""
    return [(value >> (n - 1 - i)) & 1 for i in range(n)]


def value_of(bits) -> int:
    v = 0
    for bit in bits:
        v = (v << 1) | int(bit)
    return v
