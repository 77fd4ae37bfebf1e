import pytest

from mpcprobe.errors import (BadObliviousTable, CrossPartyExpression, InvalidSend,
                             NotExpanded, Reassignment, UnknownParty, UseBeforeAssign,
                             ValidationError)
from mpcprobe.runtime import prepare
from mpcprobe.syntax import parse_program
from mpcprobe.validate import validate


def check(text, parties=None):
    return validate(parse_program(text), parties)


def test_holders_are_the_intersection_and_sends_add_the_receiver():
    a = check("x = SECRET @P1\ny = SECRET @P2\nSEND x TO P2\nz = x + y\nw = ~x")
    assert a.holders["x"] == {"P1", "P2"}
    assert a.holders["z"] == {"P2"} and a.owner["z"] == "P2"
    assert a.holders["w"] == {"P1", "P2"} and a.owner["w"] == "P1"
    assert [(m.var, m.sender, m.receiver) for m in a.messages] == [("x", "P1", "P2")]


def test_widths_and_output_parties():
    a = check("x = SECRET @P1\nr = FLIP @P1\ns = FLIP @P2\nSEND x TO P2\nOUTPUT x\n"
              "OUTPUT r @P1\nOUTPUT 0 @P2")
    assert a.secret_widths == {"P1": 1, "P2": 0}
    assert a.random_widths == {"P1": 1, "P2": 1}
    assert a.output_widths == {"P1": 2, "P2": 2}


def test_ot_sender_and_receiver():
    a = check("a = FLIP @P2\nb = FLIP @P2\ns = SECRET @P1\no = OBLIVIOUSLY [a, b]?s FOR P1")
    assert a.holders["o"] == {"P1"}
    assert a.messages[-1].sender == "P2" and a.messages[-1].kind == "ot"


@pytest.mark.parametrize("text, error", [
    ("x = SECRET @P1\ny = SECRET @P2\nz = x + y", CrossPartyExpression),
    ("z = 1 + 0", CrossPartyExpression),
    ("x = SECRET @P1\nOUTPUT x @P2", CrossPartyExpression),
    ("z = y", UseBeforeAssign),
    ("SEND y TO P1", UseBeforeAssign),
    ("x = SECRET @P1\nx = FLIP @P1", Reassignment),
    ("x = SECRET @P1\nSEND x TO P1", InvalidSend),
    ("a = FLIP @P2\nb = FLIP @P2\ns = SECRET @P2\nt = SECRET @P1\n"
     "o = OBLIVIOUSLY [a, b]?s FOR P1", ValidationError),
    ("a = FLIP @P1\nb = FLIP @P2\ns = SECRET @P1\no = OBLIVIOUSLY [a, b]?s FOR P1",
     ValidationError),
    ("a = FLIP @P2\nb = FLIP @P2\ns = SECRET @P1\nt = SECRET @P1\n"
     "o = OBLIVIOUSLY [[a, b]?s, a]?t FOR P1", BadObliviousTable),
])
def test_invalid_programs(text, error):
    with pytest.raises(error):
        check(text)


def test_unknown_party_with_pinned_order():
    with pytest.raises(UnknownParty):
        check("x = SECRET @P3", parties=("P1", "P2"))


def test_unexpanded_macro_call():
    with pytest.raises(NotExpanded):
        check("MACRO m(P1()) AS\n  r = FLIP @P1\nENDMACRO\nDO m(P1())")


def test_all_errors_are_collected():
    with pytest.raises(ValidationError) as info:
        check("z = y\nx = SECRET @P1\nx = SECRET @P1")
    assert len(info.value.errors) == 2


def test_handwritten_listing_analysis(lt2_source):
    prog, a = prepare(parse_program(lt2_source))
    assert a.parties == ("P1", "P2")
    assert a.secret_widths == {"P1": 2, "P2": 2}
    assert a.random_widths == {"P1": 2, "P2": 7}
    assert a.output_widths == {"P1": 1, "P2": 1}
