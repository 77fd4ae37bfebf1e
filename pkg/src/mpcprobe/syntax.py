"""AST, parser and pretty-printer for the ``.cho`` choreography language.

The language is line oriented::

    -- comment
    MACRO name(P1(a, b), P2(c)) AS
      ...
    ENDMACRO
    x = SECRET @P1
    r = FLIP @P2
    y = (x + r) ^ ~x          -- '+' is XOR, '^' is AND, '~' is NOT
    SEND y TO P2
    z = OBLIVIOUSLY [[a, b]?s, [c, d]?s]?t FOR P1
    DO name(P1(x), P2(y)) GET(out=inner)
    OUTPUT z

A statement continues onto the next line while brackets are unbalanced.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import ChoSyntaxError, DuplicateMacro, UnknownMacro

KEYWORDS = frozenset({
    "MACRO", "AS", "ENDMACRO", "DO", "GET", "SEND", "TO", "OUTPUT",
    "FLIP", "SECRET", "OBLIVIOUSLY", "FOR",
})
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


# --------------------------------------------------------------------------
# AST
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Xor:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Flip:
    party: str


@dataclass(frozen=True)
class Secret:
    party: str


@dataclass(frozen=True)
class OTBranch:
    """``[zero, one]?selector``; children are variable names or branches."""
    zero: Union[str, "OTBranch"]
    one: Union[str, "OTBranch"]
    selector: str


@dataclass(frozen=True)
class Oblivious:
    table: OTBranch
    receiver: str


Expr = Union[Const, Var, Not, And, Xor, Flip, Secret, Oblivious]


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class Send:
    var: str
    to: str


@dataclass(frozen=True)
class Output:
    """``OUTPUT v`` outputs at every party holding ``v``; ``@P`` restricts it.

    ``value`` is a :class:`Var`, or a :class:`Const` when a party is given.
    """
    value: Union[Var, Const]
    party: str | None = None


@dataclass(frozen=True)
class MacroCall:
    name: str
    args: tuple[tuple[str, tuple[str, ...]], ...]
    renames: tuple[tuple[str, str], ...] = ()  # (outer, inner)


Stmt = Union[Assign, Send, Output, MacroCall]


@dataclass(frozen=True)
class MacroDef:
    name: str
    params: tuple[tuple[str, tuple[str, ...]], ...]
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class Program:
    parties: tuple[str, ...] = ()
    macros: tuple[MacroDef, ...] = ()
    body: tuple[Stmt, ...] = ()

    def macro(self, name):
        for m in self.macros:
            if m.name == name:
                return m
        raise UnknownMacro(name)


# --------------------------------------------------------------------------
# expression helpers
# --------------------------------------------------------------------------

def expr_vars(expr) -> list[str]:
    """Variables read by an expression, in left-to-right order."""
    out: list[str] = []

    def walk(e):
        if isinstance(e, Var):
            out.append(e.name)
        elif isinstance(e, Not):
            walk(e.operand)
        elif isinstance(e, (And, Xor)):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Oblivious):
            walk_ot(e.table)

    def walk_ot(t):
        if isinstance(t, str):
            out.append(t)
        else:
            walk_ot(t.zero)
            walk_ot(t.one)
            out.append(t.selector)

    walk(expr)
    return out


def ot_leaves(table) -> list[str]:
    if isinstance(table, str):
        return [table]
    return ot_leaves(table.zero) + ot_leaves(table.one)


def ot_selectors(table) -> list[str]:
    if isinstance(table, str):
        return []
    return [table.selector] + ot_selectors(table.zero) + ot_selectors(table.one)


def ot_depths(table, depth=0) -> set[int]:
    if isinstance(table, str):
        return {depth}
    return ot_depths(table.zero, depth + 1) | ot_depths(table.one, depth + 1)


def stmt_parties(stmt) -> list[str]:
    """Party names mentioned by a body statement."""
    if isinstance(stmt, Assign):
        e = stmt.expr
        if isinstance(e, (Flip, Secret)):
            return [e.party]
        if isinstance(e, Oblivious):
            return [e.receiver]
        return []
    if isinstance(stmt, Send):
        return [stmt.to]
    if isinstance(stmt, Output):
        return [stmt.party] if stmt.party else []
    if isinstance(stmt, MacroCall):
        return [p for p, _ in stmt.args]
    return []


def collect_parties(body) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for s in body:
        for p in stmt_parties(s):
            seen.setdefault(p, None)
    return tuple(seen)


# --------------------------------------------------------------------------
# lexer
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, NUM, KW, OP, NL, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<comment>--[^\n]*)
  | (?P<nl>\n)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>[0-9]+)
  | (?P<op>[=+^~()\[\],?@])
""", re.VERBOSE)


def tokenize(text: str) -> Iterator[Token]:
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ChoSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            yield Token("NL", tok, line, col)
            line += 1
            line_start = m.end()
        elif kind == "ident":
            yield Token("KW" if tok in KEYWORDS else "IDENT", tok, line, col)
        elif kind == "num":
            yield Token("NUM", tok, line, col)
        elif kind == "op":
            yield Token("OP", tok, line, col)
        pos = m.end()
    yield Token("EOF", "", line, pos - line_start + 1)


def logical_lines(tokens) -> Iterator[list[Token]]:
    """Group tokens into statements, joining lines while brackets are open."""
    depth = 0
    current: list[Token] = []
    for tok in tokens:
        if tok.kind == "EOF":
            break
        if tok.kind == "NL":
            if depth == 0:
                if current:
                    yield current
                current = []
            continue
        if tok.kind == "OP" and tok.text in "([":
            depth += 1
        elif tok.kind == "OP" and tok.text in ")]":
            depth -= 1
            if depth < 0:
                raise ChoSyntaxError(f"unbalanced {tok.text!r}", tok.line, tok.col)
        current.append(tok)
    if depth > 0:
        last = current[-1]
        raise ChoSyntaxError("unclosed bracket at end of input", last.line, last.col)
    if current:
        yield current


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

class _Cursor:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0

    def peek(self) -> Token | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def error(self, msg):
        tok = self.peek() or self.toks[-1]
        raise ChoSyntaxError(msg, tok.line, tok.col)

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of statement")
        self.i += 1
        return tok

    def at(self, kind, text=None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind, text=None):
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind, text=None) -> Token:
        if not self.at(kind, text):
            want = text or kind.lower()
            got = self.peek()
            self.error(f"expected {want!r}, got {got.text if got else 'end of line'!r}")
        return self.next()

    def ident(self) -> str:
        return self.expect("IDENT").text

    def done(self):
        if self.peek() is not None:
            self.error(f"unexpected {self.peek().text!r}")


def _parse_expr(c: _Cursor):
    left = _parse_and(c)
    while c.accept("OP", "+"):
        left = Xor(left, _parse_and(c))
    return left


def _parse_and(c: _Cursor):
    left = _parse_unary(c)
    while c.accept("OP", "^"):
        left = And(left, _parse_unary(c))
    return left


def _parse_unary(c: _Cursor):
    if c.accept("OP", "~"):
        return Not(_parse_unary(c))
    if c.accept("OP", "("):
        e = _parse_expr(c)
        c.expect("OP", ")")
        return e
    tok = c.peek()
    if tok is not None and tok.kind == "NUM":
        c.next()
        if tok.text not in ("0", "1"):
            raise ChoSyntaxError(f"constant must be 0 or 1, got {tok.text}", tok.line, tok.col)
        return Const(int(tok.text))
    if tok is not None and tok.kind == "KW" and tok.text in ("FLIP", "SECRET", "OBLIVIOUSLY"):
        c.error(f"{tok.text} must be the whole right-hand side of an assignment")
    return Var(c.ident())


def _parse_ot(c: _Cursor) -> OTBranch:
    c.expect("OP", "[")
    zero = _parse_ot(c) if c.at("OP", "[") else c.ident()
    c.expect("OP", ",")
    one = _parse_ot(c) if c.at("OP", "[") else c.ident()
    c.expect("OP", "]")
    c.expect("OP", "?")
    return OTBranch(zero, one, c.ident())


def _parse_rhs(c: _Cursor):
    if c.accept("KW", "FLIP"):
        c.expect("OP", "@")
        return Flip(c.ident())
    if c.accept("KW", "SECRET"):
        c.expect("OP", "@")
        return Secret(c.ident())
    if c.accept("KW", "OBLIVIOUSLY"):
        table = _parse_ot(c)
        c.expect("KW", "FOR")
        return Oblivious(table, c.ident())
    return _parse_expr(c)


def _parse_party_lists(c: _Cursor) -> tuple[tuple[str, tuple[str, ...]], ...]:
    groups = []
    while True:
        party = c.ident()
        c.expect("OP", "(")
        names = []
        if not c.at("OP", ")"):
            names.append(c.ident())
            while c.accept("OP", ","):
                names.append(c.ident())
        c.expect("OP", ")")
        groups.append((party, tuple(names)))
        if not c.accept("OP", ","):
            break
    return tuple(groups)


def _parse_stmt(c: _Cursor):
    if c.accept("KW", "SEND"):
        var = c.ident()
        c.expect("KW", "TO")
        stmt = Send(var, c.ident())
    elif c.accept("KW", "OUTPUT"):
        tok = c.peek()
        if tok is not None and tok.kind == "NUM":
            value = _parse_unary(c)
        else:
            value = Var(c.ident())
        party = c.ident() if c.accept("OP", "@") else None
        if isinstance(value, Const) and party is None:
            c.error("a constant OUTPUT needs an @party")
        stmt = Output(value, party)
    elif c.accept("KW", "DO"):
        name = c.ident()
        c.expect("OP", "(")
        args = _parse_party_lists(c) if not c.at("OP", ")") else ()
        c.expect("OP", ")")
        renames = []
        if c.accept("KW", "GET"):
            c.expect("OP", "(")
            if not c.at("OP", ")"):
                while True:
                    outer = c.ident()
                    c.expect("OP", "=")
                    renames.append((outer, c.ident()))
                    if not c.accept("OP", ","):
                        break
            c.expect("OP", ")")
        stmt = MacroCall(name, args, tuple(renames))
    else:
        var = c.ident()
        c.expect("OP", "=")
        stmt = Assign(var, _parse_rhs(c))
    c.done()
    return stmt


def parse_program(text: str) -> Program:
    """Parse ``.cho`` source text into a :class:`Program` (macros unexpanded)."""
    macros: dict[str, MacroDef] = {}
    body: list = []
    open_macro = None  # (name, params, stmts, header token)
    for toks in logical_lines(tokenize(text)):
        c = _Cursor(toks)
        if c.accept("KW", "MACRO"):
            if open_macro is not None:
                c.error("macro definitions cannot be nested")
            name = c.ident()
            c.expect("OP", "(")
            params = _parse_party_lists(c) if not c.at("OP", ")") else ()
            c.expect("OP", ")")
            c.expect("KW", "AS")
            c.done()
            if name in macros:
                raise DuplicateMacro(f"macro {name!r} defined twice (line {toks[0].line})")
            open_macro = (name, params, [], toks[0])
            continue
        if c.accept("KW", "ENDMACRO"):
            c.done()
            if open_macro is None:
                raise ChoSyntaxError("ENDMACRO without MACRO", toks[0].line, toks[0].col)
            name, params, stmts, _ = open_macro
            macros[name] = MacroDef(name, params, tuple(stmts))
            open_macro = None
            continue
        stmt = _parse_stmt(c)
        if isinstance(stmt, MacroCall) and stmt.name not in macros:
            raise UnknownMacro(f"line {toks[0].line}: macro {stmt.name!r} is not defined")
        if open_macro is not None:
            open_macro[2].append(stmt)
        else:
            body.append(stmt)
    if open_macro is not None:
        tok = open_macro[3]
        raise ChoSyntaxError(f"macro {open_macro[0]!r} is missing ENDMACRO", tok.line, tok.col)
    return Program(collect_parties(body), tuple(macros.values()), tuple(body))


# --------------------------------------------------------------------------
# printer
# --------------------------------------------------------------------------

_PREC = {Xor: 1, And: 2}


def format_expr(e, parent_prec=0, right=False) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Not):
        inner = e.operand
        s = format_expr(inner, 3)
        return "~" + s
    if isinstance(e, (And, Xor)):
        prec = _PREC[type(e)]
        op = " ^ " if isinstance(e, And) else " + "
        s = format_expr(e.left, prec) + op + format_expr(e.right, prec, right=True)
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({s})"
        return s
    if isinstance(e, Flip):
        return f"FLIP @{e.party}"
    if isinstance(e, Secret):
        return f"SECRET @{e.party}"
    if isinstance(e, Oblivious):
        return f"OBLIVIOUSLY {format_ot(e.table)} FOR {e.receiver}"
    raise TypeError(f"not an expression: {e!r}")


def format_ot(t) -> str:
    if isinstance(t, str):
        return t
    return f"[{format_ot(t.zero)}, {format_ot(t.one)}]?{t.selector}"


def _groups(groups) -> str:
    return ", ".join(f"{p}({', '.join(names)})" for p, names in groups)


def format_stmt(s) -> str:
    if isinstance(s, Assign):
        return f"{s.var} = {format_expr(s.expr)}"
    if isinstance(s, Send):
        return f"SEND {s.var} TO {s.to}"
    if isinstance(s, Output):
        target = format_expr(s.value)
        return f"OUTPUT {target}" + (f" @{s.party}" if s.party else "")
    if isinstance(s, MacroCall):
        text = f"DO {s.name}({_groups(s.args)})"
        if s.renames:
            text += " GET(" + ", ".join(f"{o}={i}" for o, i in s.renames) + ")"
        return text
    raise TypeError(f"not a statement: {s!r}")


def format_program(p: Program) -> str:
    lines = []
    for m in p.macros:
        lines.append(f"MACRO {m.name}({_groups(m.params)}) AS")
        lines.extend("  " + format_stmt(s) for s in m.body)
        lines.append("ENDMACRO")
    lines.extend(format_stmt(s) for s in p.body)
    return "\n".join(lines) + ("\n" if lines else "")
