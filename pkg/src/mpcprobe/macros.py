"""Macro expansion for ``.cho`` programs.

A macro is parameterised over parties as well as variables: in
``MACRO share(P1(x), P2()) AS ...`` the names ``P1``/``P2`` are formal
parties, bound positionally at each ``DO`` site.  Variables assigned inside
the body are renamed apart per call; ``GET(outer=inner)`` exposes an inner
variable under an outer name.
"""
from __future__ import annotations

import itertools
from dataclasses import replace

from .errors import ArityMismatch, RenameOfUndefinedInnerVar, UseBeforeAssign
from .syntax import (And, Assign, Const, Flip, MacroCall, Not, Oblivious, OTBranch,
                     Output, Program, Secret, Send, Var, Xor, collect_parties,
                     expr_vars)


def _all_names(p: Program) -> set[str]:
    names: set[str] = set()

    def visit(stmts):
        for s in stmts:
            if isinstance(s, Assign):
                names.add(s.var)
                names.update(expr_vars(s.expr))
            elif isinstance(s, Send):
                names.add(s.var)
            elif isinstance(s, Output) and isinstance(s.value, Var):
                names.add(s.value.name)
            elif isinstance(s, MacroCall):
                for _, vs in s.args:
                    names.update(vs)
                for outer, inner in s.renames:
                    names.update((outer, inner))

    visit(p.body)
    for m in p.macros:
        visit(m.body)
        for _, vs in m.params:
            names.update(vs)
    return names


def _rename_expr(e, vmap, pmap):
    if isinstance(e, Var):
        return Var(vmap[e.name])
    if isinstance(e, Const):
        return e
    if isinstance(e, Not):
        return Not(_rename_expr(e.operand, vmap, pmap))
    if isinstance(e, And):
        return And(_rename_expr(e.left, vmap, pmap), _rename_expr(e.right, vmap, pmap))
    if isinstance(e, Xor):
        return Xor(_rename_expr(e.left, vmap, pmap), _rename_expr(e.right, vmap, pmap))
    if isinstance(e, Flip):
        return Flip(pmap.get(e.party, e.party))
    if isinstance(e, Secret):
        return Secret(pmap.get(e.party, e.party))
    if isinstance(e, Oblivious):
        return Oblivious(_rename_ot(e.table, vmap), pmap.get(e.receiver, e.receiver))
    raise TypeError(e)


def _rename_ot(t, vmap):
    if isinstance(t, str):
        return vmap[t]
    return OTBranch(_rename_ot(t.zero, vmap), _rename_ot(t.one, vmap), vmap[t.selector])


def _assigned_in(body) -> list[str]:
    out = []
    for s in body:
        if isinstance(s, Assign):
            out.append(s.var)
        elif isinstance(s, MacroCall):
            out.extend(outer for outer, _ in s.renames)
    return out


class _Expander:
    def __init__(self, program: Program):
        self.program = program
        self.used = _all_names(program)
        self.counter = itertools.count()

    def fresh(self, base: str) -> str:
        while True:
            name = f"{base}__{next(self.counter)}"
            if name not in self.used:
                self.used.add(name)
                return name

    def expand_body(self, body, vmap=None, pmap=None):
        out = []
        for s in body:
            if isinstance(s, MacroCall):
                out.extend(self.expand_call(s, vmap, pmap))
            elif vmap is None:
                out.append(s)
            else:
                out.append(self.rename_stmt(s, vmap, pmap))
        return out

    def rename_stmt(self, s, vmap, pmap):
        try:
            if isinstance(s, Assign):
                return Assign(vmap[s.var], _rename_expr(s.expr, vmap, pmap))
            if isinstance(s, Send):
                return Send(vmap[s.var], pmap.get(s.to, s.to))
            if isinstance(s, Output):
                value = Var(vmap[s.value.name]) if isinstance(s.value, Var) else s.value
                return Output(value, pmap.get(s.party, s.party) if s.party else None)
        except KeyError as exc:
            raise UseBeforeAssign(f"macro body reads {exc.args[0]!r}, which is "
                                  "neither a parameter nor assigned in the macro") from None
        raise TypeError(s)

    def expand_call(self, call: MacroCall, vmap=None, pmap=None):
        m = self.program.macro(call.name)
        if vmap is not None:
            # a call inside a macro body: translate into the enclosing scope
            try:
                call = MacroCall(
                    call.name,
                    tuple((pmap.get(p, p), tuple(vmap[v] for v in vs)) for p, vs in call.args),
                    tuple((vmap[o], i) for o, i in call.renames),
                )
            except KeyError as exc:
                raise UseBeforeAssign(f"macro call reads undefined {exc.args[0]!r}") from None
        if len(call.args) != len(m.params):
            raise ArityMismatch(f"{m.name} takes {len(m.params)} parties, got {len(call.args)}")
        inner_pmap: dict[str, str] = {}
        inner_vmap: dict[str, str] = {}
        for (formal, params), (actual, args) in zip(m.params, call.args):
            if len(params) != len(args):
                raise ArityMismatch(f"{m.name}: party {formal} takes {len(params)} "
                                    f"arguments, got {len(args)}")
            inner_pmap[formal] = actual
            inner_vmap.update(zip(params, args))
        assigned = _assigned_in(m.body)
        renamed = {}
        for outer, inner in call.renames:
            if inner not in assigned:
                raise RenameOfUndefinedInnerVar(f"{m.name} does not assign {inner!r}")
            renamed[inner] = outer
        for name in assigned:
            inner_vmap[name] = renamed[name] if name in renamed else self.fresh(name)
        return self.expand_body(m.body, inner_vmap, inner_pmap)


def expand_macros(p: Program) -> Program:
    """Inline every ``DO`` call; the result has no macros."""
    if not p.macros and not any(isinstance(s, MacroCall) for s in p.body):
        return p
    body = tuple(_Expander(p).expand_body(p.body))
    parties = dict.fromkeys(p.parties)
    parties.update(dict.fromkeys(collect_parties(body)))
    return replace(p, parties=tuple(parties), macros=(), body=body)
