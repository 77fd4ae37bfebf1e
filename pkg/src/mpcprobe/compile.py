"""Compile boolean circuits to two-party choreographies.

Both frameworks keep every wire as an XOR sharing ``(share at P1, share at
P2)``.  They differ only in AND gates: GMW uses a 1-of-4 oblivious transfer
from P2 to P1, the Beaver framework consumes a triple dealt by party ``D``.

Mutations (see :mod:`mpcprobe.mutate`) are woven in here because their
sites are compiler-internal.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Literal

from .circuits import Circuit
from .errors import IncompatibleKind, NoSuchSite
from .syntax import (And, Assign, Const, Flip, Not, Oblivious, OTBranch, Output, Program,
                     Secret, Send, Var, Xor, expr_vars)

DEALER = "D"


@dataclass(frozen=True)
class CompileOptions:
    framework: Literal["gmw", "beaver"] = "gmw"
    mutation: object | None = None  # a MutationSpec

    def __post_init__(self):
        if self.framework not in ("gmw", "beaver"):
            raise ValueError(f"unknown framework {self.framework!r}")

    @property
    def parties(self):
        return ("P1", "P2", DEALER) if self.framework == "beaver" else ("P1", "P2")


class _Emitter:
    """Appends statements while tracking which parties hold each variable."""

    def __init__(self, parties):
        self.parties = parties
        self.body: list = []
        self.holders: dict[str, frozenset] = {}
        self.owner: dict[str, str] = {}
        self.counter = itertools.count()

    def fresh(self, prefix):
        return f"{prefix}{next(self.counter)}"

    def _define(self, name, holders):
        assert name not in self.holders, name
        self.holders[name] = frozenset(holders)
        self.owner[name] = min(holders, key=self.parties.index)

    def secret(self, name, party):
        self.body.append(Assign(name, Secret(party)))
        self._define(name, {party})
        return name

    def flip(self, party, prefix="r"):
        name = self.fresh(prefix)
        self.body.append(Assign(name, Flip(party)))
        self._define(name, {party})
        return name

    def coin(self, party, bias, prefix="r"):
        """A bit equal to 1 with probability 2**-bias (AND of ``bias`` flips)."""
        flips = [self.flip(party, prefix) for _ in range(bias)]
        if bias == 1:
            return flips[0]
        expr = Var(flips[0])
        for f in flips[1:]:
            expr = And(expr, Var(f))
        return self.assign(self.fresh("coin"), expr)

    def assign(self, name, expr):
        names = expr_vars(expr)
        at = frozenset.intersection(*(self.holders[v] for v in names))
        assert at, f"{name} = {expr} is not computable by any single party"
        self.body.append(Assign(name, expr))
        self._define(name, at)
        return name

    def send(self, var, to):
        if to in self.holders[var]:
            return
        self.body.append(Send(var, to))
        self.holders[var] = self.holders[var] | {to}

    def ot(self, name, table, receiver):
        self.body.append(Assign(name, Oblivious(table, receiver)))
        self._define(name, {receiver})
        return name

    def output(self, var, party=None):
        self.body.append(Output(Var(var), party))

    def program(self):
        return Program(self.parties, (), tuple(self.body))


def _x(a, b):
    return Xor(Var(a), Var(b))


class _Compiler:
    def __init__(self, c: Circuit, opts: CompileOptions):
        self.c = c
        self.opts = opts
        self.em = _Emitter(opts.parties)
        self.share: dict[int, tuple[str, str]] = {}
        m = opts.mutation
        self.mutation = m
        self.honest = getattr(m, "honest", "P2")
        self.corrupt = "P1" if self.honest == "P2" else "P2"
        self.input_sites = self._sites(len(c.inputs.get(self.honest, [])),
                                       ("biased_sharing", "accidental_secret"))
        self.and_sites = self._sites(len(c.and_gates), ("biased_and", "accidental_gate"))
        if m is not None and m.kind == "biased_and" and opts.framework == "gmw" \
                and self.honest != "P2":
            raise IncompatibleKind("in GMW the AND-gate randomness belongs to P2, the OT "
                                   "sender; biased_and needs honest='P2'")

    def _sites(self, count, kinds):
        m = self.mutation
        if m is None or m.kind not in kinds:
            return frozenset()
        if m.sites == "all":
            return frozenset(range(count))
        bad = [s for s in m.sites if not 0 <= s < count]
        if bad:
            raise NoSuchSite(f"{m.kind}: sites {bad} out of range (0..{count - 1})")
        return frozenset(m.sites)

    def active(self, kind, site, sites):
        return self.mutation is not None and self.mutation.kind == kind and site in sites

    def leak(self, var, owner):
        """Send var XOR (biased coin) from the honest party to the corrupt one."""
        em = self.em
        r = em.coin(owner, self.mutation.bias, prefix="leak_r")
        m = em.assign(em.fresh("leak"), _x(var, r))
        em.send(m, self.corrupt)

    # -- inputs -------------------------------------------------------------
    def share_inputs(self):
        em = self.em
        for q in ("P1", "P2"):
            other = "P2" if q == "P1" else "P1"
            for k, w in enumerate(self.c.inputs.get(q, [])):
                x = em.secret(f"{q.lower()}_in{k}", q)
                honest_site = q == self.honest
                if honest_site and self.active("biased_sharing", k, self.input_sites):
                    mask = em.coin(q, self.mutation.bias, prefix=f"{q.lower()}_mask")
                else:
                    mask = em.flip(q, prefix=f"{q.lower()}_mask")
                masked = em.assign(em.fresh(f"{q.lower()}_sh"), _x(x, mask))
                em.send(masked, other)
                self.share[w] = (mask, masked) if q == "P1" else (masked, mask)
                if honest_site and self.active("accidental_secret", k, self.input_sites):
                    self.leak(x, q)

    # -- gates --------------------------------------------------------------
    def gate_xor(self, g):
        (a1, a2), (b1, b2) = self.share[g.ins[0]], self.share[g.ins[1]]
        w = g.out
        self.share[w] = (self.em.assign(f"w{w}_1", _x(a1, b1)),
                         self.em.assign(f"w{w}_2", _x(a2, b2)))

    def gate_inv(self, g):
        a1, a2 = self.share[g.ins[0]]
        w = g.out
        self.share[w] = (self.em.assign(f"w{w}_1", Not(Var(a1))),
                         self.em.assign(f"w{w}_2", Var(a2)))

    def gate_and_gmw(self, g, j):
        em = self.em
        (x1, x2), (y1, y2) = self.share[g.ins[0]], self.share[g.ins[1]]
        w = g.out
        if self.active("biased_and", j, self.and_sites):
            o2 = em.coin("P2", self.mutation.bias, prefix=f"w{w}_r")
            o2 = em.assign(f"w{w}_2", Var(o2))
        else:
            o2 = em.flip("P2", prefix=f"w{w}_2_")
        table = {}
        for a, b in itertools.product((0, 1), repeat=2):
            expr = Xor(Var(o2), And(Xor(Var(x2), Const(a)), Xor(Var(y2), Const(b))))
            table[a, b] = em.assign(f"w{w}_t{a}{b}", expr)
        tree = OTBranch(OTBranch(table[0, 0], table[0, 1], y1),
                        OTBranch(table[1, 0], table[1, 1], y1), x1)
        o1 = em.ot(f"w{w}_1", tree, "P1")
        self.share[w] = (o1, o2)
        if self.active("accidental_gate", j, self.and_sites):
            self.leak(o2 if self.honest == "P2" else o1, self.honest)

    def gate_and_beaver(self, g, j):
        em = self.em
        (x1, x2), (y1, y2) = self.share[g.ins[0]], self.share[g.ins[1]]
        w = g.out
        biased = self.active("biased_and", j, self.and_sites)
        a = em.flip(DEALER, prefix=f"w{w}_a")
        b = em.flip(DEALER, prefix=f"w{w}_b")
        c = em.assign(f"w{w}_c", And(Var(a), Var(b)))
        shares = {}
        for label, value in (("a", a), ("b", b), ("c", c)):
            if biased:
                mask = em.coin(DEALER, self.mutation.bias, prefix=f"w{w}_m{label}")
            else:
                mask = em.flip(DEALER, prefix=f"w{w}_m{label}")
            masked = em.assign(f"w{w}_{label}x", _x(value, mask))
            # the mask goes to the honest computing party, the masked value to the other
            em.send(mask, self.honest)
            em.send(masked, self.corrupt)
            shares[label] = {self.honest: mask, self.corrupt: masked}
        a1, a2 = shares["a"]["P1"], shares["a"]["P2"]
        b1, b2 = shares["b"]["P1"], shares["b"]["P2"]
        c1, c2 = shares["c"]["P1"], shares["c"]["P2"]
        d1 = em.assign(f"w{w}_d1", _x(x1, a1))
        d2 = em.assign(f"w{w}_d2", _x(x2, a2))
        e1 = em.assign(f"w{w}_e1", _x(y1, b1))
        e2 = em.assign(f"w{w}_e2", _x(y2, b2))
        em.send(d1, "P2")
        em.send(d2, "P1")
        em.send(e1, "P2")
        em.send(e2, "P1")
        d = em.assign(f"w{w}_d", _x(d1, d2))
        e = em.assign(f"w{w}_e", _x(e1, e2))
        z1 = em.assign(f"w{w}_1", Xor(Xor(Xor(Var(c1), And(Var(d), Var(b1))),
                                          And(Var(e), Var(a1))), And(Var(d), Var(e))))
        z2 = em.assign(f"w{w}_2", Xor(Xor(Var(c2), And(Var(d), Var(b2))),
                                      And(Var(e), Var(a2))))
        self.share[w] = (z1, z2)
        if self.active("accidental_gate", j, self.and_sites):
            self.leak(z2 if self.honest == "P2" else z1, self.honest)

    # -- outputs ------------------------------------------------------------
    def reveal(self):
        em = self.em
        outs = self.c.outputs
        lists = [outs.get(q, []) for q in ("P1", "P2")]
        if lists[0] == lists[1]:
            for w in lists[0]:
                s1, s2 = self.share[w]
                em.send(s1, "P2")
                em.send(s2, "P1")
                r = em.assign(em.fresh(f"out_w{w}_"), _x(s1, s2))
                em.output(r)  # held by exactly P1 and P2, so both output it
            return
        for q, ws in zip(("P1", "P2"), lists):
            for w in ws:
                s1, s2 = self.share[w]
                em.send(s1, q)
                em.send(s2, q)
                r = em.assign(em.fresh(f"out_{q.lower()}_w{w}_"), _x(s1, s2))
                em.output(r, q)

    def run(self):
        self.share_inputs()
        and_index = 0
        for g in self.c.gates:
            if g.kind == "XOR":
                self.gate_xor(g)
            elif g.kind == "INV":
                self.gate_inv(g)
            else:
                if self.opts.framework == "gmw":
                    self.gate_and_gmw(g, and_index)
                else:
                    self.gate_and_beaver(g, and_index)
                and_index += 1
        self.reveal()
        return self.em.program()


def compile_gmw(c: Circuit, opts: CompileOptions | None = None) -> Program:
    """GMW: XOR sharing, local linear gates, 1-of-4 OT per AND gate."""
    opts = opts or CompileOptions("gmw")
    if opts.framework != "gmw":
        raise ValueError("compile_gmw needs framework='gmw'")
    return _Compiler(c, opts).run()


def compile_beaver(c: Circuit, opts: CompileOptions | None = None) -> Program:
    """Beaver-triple multiplication with an inline dealer ``D``."""
    opts = opts or CompileOptions("beaver")
    if opts.framework != "beaver":
        raise ValueError("compile_beaver needs framework='beaver'")
    return _Compiler(c, opts).run()


def compile_circuit(c: Circuit, opts: CompileOptions) -> Program:
    return (compile_gmw if opts.framework == "gmw" else compile_beaver)(c, opts)
