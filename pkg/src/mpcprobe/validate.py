"""Static location checking for macro-free choreographies.

Every variable gets an *owner* (the party that created it) and a set of
*holders* (the owner plus everyone it was sent to, or every party able to
compute it locally).  An expression is evaluated at each party that holds
all of its operands; if no party does, the program is rejected.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import (BadObliviousTable, CrossPartyExpression, InvalidSend, NotExpanded,
                     Reassignment, UnknownParty, UseBeforeAssign, ValidationError)
from .syntax import (Assign, Const, Flip, MacroCall, Oblivious, Output, Program, Secret,
                     Send, Var, expr_vars, ot_depths, ot_leaves, ot_selectors)


@dataclass(frozen=True)
class MessageSite:
    """One bit delivered from ``sender`` to ``receiver`` by statement ``index``."""
    index: int
    var: str
    sender: str
    receiver: str
    kind: str  # "send" or "ot"


@dataclass
class Analysis(Mapping):
    """Result of :func:`validate`; behaves as a ``var -> owner`` mapping."""
    parties: tuple[str, ...]
    owner: dict[str, str] = field(default_factory=dict)
    holders: dict[str, frozenset] = field(default_factory=dict)
    secret_widths: dict[str, int] = field(default_factory=dict)
    random_widths: dict[str, int] = field(default_factory=dict)
    output_widths: dict[str, int] = field(default_factory=dict)
    messages: list[MessageSite] = field(default_factory=list)
    # per statement: sender for Send / Oblivious, output parties for Output
    stmt_info: list = field(default_factory=list)

    def __getitem__(self, var):
        return self.owner[var]

    def __iter__(self):
        return iter(self.owner)

    def __len__(self):
        return len(self.owner)

    def messages_to(self, party):
        return [m for m in self.messages if m.receiver == party]


def validate(p: Program, parties=None) -> Analysis:
    """Check locality and single assignment; return the location analysis.

    ``parties`` pins an explicit party order (it must cover every party the
    program mentions).  Raises the first problem found, as a subclass of
    :class:`~mpcprobe.errors.ValidationError`, with all problems in ``.errors``.
    """
    order = tuple(parties) if parties is not None else p.parties
    a = Analysis(order)
    for q in order:
        a.secret_widths[q] = a.random_widths[q] = a.output_widths[q] = 0
    errors: list[ValidationError] = []
    rank = {q: i for i, q in enumerate(order)}

    def err(exc):
        errors.append(exc)

    def check_party(q, i):
        if q not in rank:
            err(UnknownParty(f"statement {i}: party {q!r} is not in {order}"))
            return False
        return True

    def define(var, owner, holders, i):
        if var in a.owner:
            err(Reassignment(f"statement {i}: {var!r} is assigned twice"))
            return
        a.owner[var] = owner
        a.holders[var] = frozenset(holders)

    def sorted_parties(qs):
        return sorted(qs, key=rank.__getitem__)

    for i, s in enumerate(p.body):
        info = None
        if isinstance(s, MacroCall):
            err(NotExpanded(f"statement {i}: macro call {s.name!r}; expand macros first"))
        elif isinstance(s, Assign):
            e = s.expr
            if isinstance(e, (Flip, Secret)):
                if check_party(e.party, i):
                    widths = a.random_widths if isinstance(e, Flip) else a.secret_widths
                    widths[e.party] += 1
                    define(s.var, e.party, {e.party}, i)
            elif isinstance(e, Oblivious):
                info = _check_ot(s, e, a, i, err, check_party, sorted_parties)
                if info is not None:
                    define(s.var, e.receiver, {e.receiver}, i)
                    a.messages.append(MessageSite(i, s.var, info, e.receiver, "ot"))
            else:
                names = expr_vars(e)
                missing = [v for v in names if v not in a.owner]
                if missing:
                    err(UseBeforeAssign(f"statement {i}: {missing[0]!r} used before assignment"))
                    continue
                if not names:
                    err(CrossPartyExpression(f"statement {i}: {s.var!r} has no operand "
                                             "variable to locate it at a party"))
                    continue
                at = frozenset.intersection(*(a.holders[v] for v in names))
                if not at:
                    where = {v: sorted_parties(a.holders[v]) for v in dict.fromkeys(names)}
                    err(CrossPartyExpression(f"statement {i}: operands of {s.var!r} are "
                                             f"held at different parties {where}"))
                    continue
                define(s.var, sorted_parties(at)[0], at, i)
        elif isinstance(s, Send):
            if s.var not in a.owner:
                err(UseBeforeAssign(f"statement {i}: {s.var!r} sent before assignment"))
            elif check_party(s.to, i):
                sender = a.owner[s.var]
                if s.to == sender:
                    err(InvalidSend(f"statement {i}: {s.var!r} is sent to its own owner {sender}"))
                else:
                    info = sender
                    a.holders[s.var] = a.holders[s.var] | {s.to}
                    a.messages.append(MessageSite(i, s.var, sender, s.to, "send"))
        elif isinstance(s, Output):
            if isinstance(s.value, Const):
                if check_party(s.party, i):
                    info = (s.party,)
            elif s.value.name not in a.owner:
                err(UseBeforeAssign(f"statement {i}: {s.value.name!r} output before assignment"))
            elif s.party is not None:
                if check_party(s.party, i):
                    if s.party not in a.holders[s.value.name]:
                        err(CrossPartyExpression(f"statement {i}: {s.party} does not hold "
                                                 f"{s.value.name!r}"))
                    else:
                        info = (s.party,)
            else:
                info = tuple(sorted_parties(a.holders[s.value.name]))
            for q in info or ():
                a.output_widths[q] += 1
        a.stmt_info.append(info)

    if errors:
        first = errors[0]
        first.errors = errors
        raise first
    return a


def _check_ot(s, e: Oblivious, a, i, err, check_party, sorted_parties):
    """Return the OT sender, or None after reporting a problem."""
    if not check_party(e.receiver, i):
        return None
    leaves = ot_leaves(e.table)
    selectors = ot_selectors(e.table)
    for v in leaves + selectors:
        if v not in a.owner:
            err(UseBeforeAssign(f"statement {i}: {v!r} used before assignment"))
            return None
    if len(ot_depths(e.table)) != 1:
        err(BadObliviousTable(f"statement {i}: OT table is not a complete binary tree"))
        return None
    for v in selectors:
        if e.receiver not in a.holders[v]:
            err(CrossPartyExpression(f"statement {i}: selector {v!r} is not held by "
                                     f"receiver {e.receiver}"))
            return None
    senders = frozenset.intersection(*(a.holders[v] for v in leaves)) - {e.receiver}
    if not senders:
        err(CrossPartyExpression(f"statement {i}: OT leaves are not all held by one "
                                 f"party other than {e.receiver}"))
        return None
    owner = a.owner[leaves[0]]
    return owner if owner in senders else sorted_parties(senders)[0]
