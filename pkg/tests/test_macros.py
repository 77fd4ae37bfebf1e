import pytest

from mpcprobe.errors import ArityMismatch, RenameOfUndefinedInnerVar, UseBeforeAssign
from mpcprobe.macros import expand_macros
from mpcprobe.syntax import Assign, Flip, MacroCall, Send, Var, Xor, parse_program

SHARE = """
MACRO share(P1(x), P2()) AS
  s1 = FLIP @P1
  s2 = x + s1
  SEND s2 TO P2
ENDMACRO
"""


def test_call_is_inlined_with_party_and_variable_substitution():
    prog = parse_program(SHARE + "a = SECRET @P2\nDO share(P2(a), P1()) GET(mine=s1)")
    out = expand_macros(prog)
    assert out.macros == ()
    flip, mix, send = out.body[1:]
    assert flip == Assign("mine", Flip("P2"))
    assert mix.expr == Xor(Var("a"), Var("mine"))
    assert mix.var not in {"a", "mine", "s2"}
    assert send == Send(mix.var, "P1")


def test_repeated_calls_get_distinct_fresh_names():
    prog = parse_program(SHARE + "a = SECRET @P1\nb = SECRET @P1\n"
                         "DO share(P1(a), P2())\nDO share(P1(b), P2())")
    assigned = [s.var for s in expand_macros(prog).body if isinstance(s, Assign)]
    assert len(assigned) == len(set(assigned)) == 6


def test_fresh_names_avoid_existing_ones():
    prog = parse_program(SHARE + "s1__0 = SECRET @P1\nDO share(P1(s1__0), P2())")
    assigned = [s.var for s in expand_macros(prog).body if isinstance(s, Assign)]
    assert len(assigned) == len(set(assigned))


def test_nested_calls_expand_in_the_callers_scope():
    prog = parse_program(SHARE + """
MACRO twice(P1(u, v), P2()) AS
  DO share(P1(u), P2()) GET(first=s2)
  DO share(P1(v), P2())
  w = first
ENDMACRO
a = SECRET @P1
b = SECRET @P1
DO twice(P1(a, b), P2()) GET(done=w)
""")
    out = expand_macros(prog)
    assert not any(isinstance(s, MacroCall) for s in out.body)
    assert out.body[-1].var == "done"
    assert sum(isinstance(s, Send) for s in out.body) == 2


def test_arity_and_rename_errors():
    with pytest.raises(ArityMismatch):
        expand_macros(parse_program(SHARE + "DO share(P1())"))
    with pytest.raises(ArityMismatch):
        expand_macros(parse_program(SHARE + "a = SECRET @P1\nDO share(P1(a, a), P2())"))
    with pytest.raises(RenameOfUndefinedInnerVar):
        expand_macros(parse_program(SHARE + "a = SECRET @P1\nDO share(P1(a), P2()) GET(q=zz)"))


def test_free_variable_in_macro_body_is_rejected():
    src = "MACRO bad(P1()) AS\n  y = ghost\nENDMACRO\nDO bad(P1())"
    with pytest.raises(UseBeforeAssign):
        expand_macros(parse_program(src))


def test_expansion_is_idempotent(lt2_source):
    once = expand_macros(parse_program(lt2_source))
    assert expand_macros(once) == once
    assert len(once.body) == 62
