"""Batched execution of validated choreographies.

Each protocol run is one *lane*; 64 lanes are packed into one ``uint64``
word and every statement is a single vectorised bitwise operation over the
packed arrays.  Lanes never interact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Sequence

import numpy as np

from .errors import BadCorruptionSet, TapeExhausted
from .macros import expand_macros
from .syntax import And, Assign, Const, Flip, Not, Oblivious, OTBranch, Output, Program, Secret, Send, Var, Xor
from .validate import Analysis, validate
from .views import ViewTable

WORD_BITS = 64
_WORD = np.dtype("<u8")
_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


def n_words(runs: int) -> int:
    return (runs + WORD_BITS - 1) // WORD_BITS


def pack_bits(bits) -> np.ndarray:
    """Pack a ``(..., runs)`` 0/1 array into ``(..., n_words)`` uint64 lanes."""
    bits = np.asarray(bits, dtype=np.uint8)
    runs = bits.shape[-1]
    pad = n_words(runs) * WORD_BITS - runs
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), np.uint8)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(_WORD)


def unpack_bits(words, runs: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns uint8 of shape ``(..., runs)``."""
    words = np.ascontiguousarray(np.asarray(words, dtype=_WORD))
    bits = np.unpackbits(words.view(np.uint8), axis=-1, bitorder="little")
    return bits[..., :runs]


@dataclass
class TapeSet:
    """Per-party secret and random tapes, stored packed: ``(width, n_words)``."""
    runs: int
    secret: dict[str, np.ndarray] = field(default_factory=dict)
    random: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_bits(cls, secret: dict, random: dict, runs: int | None = None):
        """Build from 0/1 arrays of shape ``(width, runs)`` per party."""
        arrays = [np.asarray(v) for v in list(secret.values()) + list(random.values())]
        if runs is None:
            runs = next((x.shape[-1] for x in arrays if x.ndim == 2 and x.size), None)
            if runs is None:
                raise ValueError("cannot infer the number of runs from empty tapes")
        def conv(d):
            out = {}
            for q, v in d.items():
                v = np.asarray(v, dtype=np.uint8).reshape(-1, runs)
                out[q] = pack_bits(v)
            return out
        return cls(runs, conv(secret), conv(random))

    @classmethod
    def uniform(cls, analysis: Analysis, runs: int, rng: np.random.Generator):
        """Uniform tapes sized exactly to the program's needs."""
        nw = n_words(runs)
        secret, random = {}, {}
        for q in analysis.parties:
            secret[q] = rng.integers(0, 2**64, size=(analysis.secret_widths[q], nw),
                                     dtype=np.uint64)
            random[q] = rng.integers(0, 2**64, size=(analysis.random_widths[q], nw),
                                     dtype=np.uint64)
        return cls(runs, secret, random)

    def secret_bits(self, party):
        return unpack_bits(self.secret.get(party, np.zeros((0, n_words(self.runs)), _WORD)), self.runs)

    def random_bits(self, party):
        return unpack_bits(self.random.get(party, np.zeros((0, n_words(self.runs)), _WORD)), self.runs)


@dataclass(frozen=True)
class Message:
    index: int
    var: str
    sender: str
    receiver: str
    kind: str
    words: np.ndarray


@dataclass(frozen=True)
class ExecutionRecord:
    """Everything each party saw during one run (all values are bit tuples)."""
    inputs: dict[str, tuple[int, ...]]
    randomness: dict[str, tuple[int, ...]]
    messages: dict[str, tuple[int, ...]]
    outputs: dict[str, tuple[int, ...]]


class Trace(Sequence):
    """The result of :func:`run_batch`: a sequence of ``runs`` execution records.

    Bulk accessors (``inputs``, ``randomness``, ``outputs``, ``messages``)
    return ``(width, runs)`` uint8 matrices without materialising records.
    """

    def __init__(self, program, analysis, runs, tapes, used_random, messages, outputs):
        self.program = program
        self.analysis = analysis
        self.runs = runs
        self.tapes = tapes
        self._used_random = used_random
        self.message_log: list[Message] = messages
        self._outputs = outputs

    @property
    def parties(self):
        return self.analysis.parties

    def __len__(self):
        return self.runs

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(self.runs))]
        if i < 0:
            i += self.runs
        if not 0 <= i < self.runs:
            raise IndexError(i)
        def col(m):
            return tuple(int(x) for x in m[:, i])
        return ExecutionRecord(
            inputs={q: col(self.inputs(q)) for q in self.parties},
            randomness={q: col(self.randomness(q)) for q in self.parties},
            messages={q: col(self.messages(q)) for q in self.parties},
            outputs={q: col(self.outputs(q)) for q in self.parties},
        )

    def _stack(self, rows):
        if not rows:
            return np.zeros((0, self.runs), np.uint8)
        return unpack_bits(np.stack(rows), self.runs)

    def inputs(self, party):
        width = self.analysis.secret_widths[party]
        return unpack_bits(self.tapes.secret[party][:width], self.runs)

    def randomness(self, party):
        width = self._used_random[party]
        return unpack_bits(self.tapes.random[party][:width], self.runs)

    def outputs(self, party):
        return self._stack(self._outputs[party])

    def messages(self, party, senders=None):
        """Bits received by ``party`` in program order, optionally filtered by sender."""
        rows = [m.words for m in self.message_log
                if m.receiver == party and (senders is None or m.sender in senders)]
        return self._stack(rows)


def _const(bit, nw):
    return np.full(nw, _ONES if bit else 0, dtype=_WORD)


def _eval(e, env, nw):
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Xor):
        return _eval(e.left, env, nw) ^ _eval(e.right, env, nw)
    if isinstance(e, And):
        return _eval(e.left, env, nw) & _eval(e.right, env, nw)
    if isinstance(e, Not):
        return ~_eval(e.operand, env, nw)
    if isinstance(e, Const):
        return _const(e.value, nw)
    raise TypeError(f"cannot evaluate {e!r}")


def _select(t, env):
    if isinstance(t, str):
        return env[t]
    s = env[t.selector]
    return (_select(t.zero, env) & ~s) | (_select(t.one, env) & s)


def prepare(program: Program, parties=None) -> tuple[Program, Analysis]:
    """Expand macros and validate; the pair run_batch needs."""
    program = expand_macros(program)
    return program, validate(program, parties)


def run_batch(program: Program, tapes: TapeSet | None = None, runs: int | None = None,
              rng=None, analysis: Analysis | None = None) -> Trace:
    """Execute ``runs`` independent runs of ``program``.

    Tapes may be supplied; otherwise uniform tapes are drawn from ``rng``
    (a ``numpy.random.Generator`` or a seed).
    """
    if analysis is None:
        program, analysis = prepare(program)
    if tapes is None:
        if runs is None:
            raise ValueError("give either tapes or runs")
        tapes = TapeSet.uniform(analysis, runs, np.random.default_rng(rng))
    runs = tapes.runs
    nw = n_words(runs)
    env: dict[str, np.ndarray] = {}
    cursor_secret = dict.fromkeys(analysis.parties, 0)
    cursor_random = dict.fromkeys(analysis.parties, 0)
    messages: list[Message] = []
    outputs: dict[str, list] = {q: [] for q in analysis.parties}

    def read(tape, cursor, q, what):
        k = cursor[q]
        available = tape[q].shape[0] if q in tape else 0
        if k >= available:
            raise TapeExhausted(f"{q} has only {available} {what} bits")
        cursor[q] = k + 1
        return tape[q][k]

    for i, s in enumerate(program.body):
        info = analysis.stmt_info[i]
        if isinstance(s, Assign):
            e = s.expr
            if isinstance(e, Flip):
                env[s.var] = read(tapes.random, cursor_random, e.party, "random")
            elif isinstance(e, Secret):
                env[s.var] = read(tapes.secret, cursor_secret, e.party, "secret")
            elif isinstance(e, Oblivious):
                v = _select(e.table, env)
                env[s.var] = v
                messages.append(Message(i, s.var, info, e.receiver, "ot", v))
            else:
                env[s.var] = _eval(e, env, nw)
        elif isinstance(s, Send):
            messages.append(Message(i, s.var, info, s.to, "send", env[s.var]))
        elif isinstance(s, Output):
            v = env[s.value.name] if isinstance(s.value, Var) else _const(s.value.value, nw)
            for q in info:
                outputs[q].append(v)
    return Trace(program, analysis, runs, tapes, cursor_random, messages, outputs)


def extract_views(trace: Trace, corrupt) -> ViewTable:
    """Split a trace into honest labels L, ideal view I and real-only view R.

    L: honest parties' input bits.  I: corrupt inputs then corrupt outputs.
    R: corrupt random bits consumed, then bits corrupt parties received from
    honest parties, in program order.
    """
    parties = trace.parties
    corrupt = {corrupt} if isinstance(corrupt, str) else set(corrupt)
    unknown = corrupt - set(parties)
    if unknown:
        raise BadCorruptionSet(f"unknown parties {sorted(unknown)}")
    if not corrupt or corrupt == set(parties):
        raise BadCorruptionSet("the corrupt set must be a nonempty proper subset of the parties")
    honest = [q for q in parties if q not in corrupt]
    bad = [q for q in parties if q in corrupt]
    runs = trace.runs

    def cat(blocks, names):
        blocks = [b for b in blocks if b.shape[0]]
        if not blocks:
            return np.zeros((runs, 0), np.uint8), names
        return np.ascontiguousarray(np.concatenate(blocks, axis=0).T), names

    l_names = [f"{q}.in{k}" for q in honest for k in range(trace.analysis.secret_widths[q])]
    i_names = ([f"{q}.in{k}" for q in bad for k in range(trace.analysis.secret_widths[q])]
               + [f"{q}.out{k}" for q in bad for k in range(len(trace._outputs[q]))])
    msgs = [m for m in trace.message_log if m.receiver in corrupt and m.sender not in corrupt]
    r_names = ([f"{q}.rand{k}" for q in bad for k in range(trace._used_random[q])]
               + [f"{m.receiver}<-{m.sender}:{m.var}" for m in msgs])

    L, _ = cat([trace.inputs(q) for q in honest], l_names)
    I, _ = cat([trace.inputs(q) for q in bad] + [trace.outputs(q) for q in bad], i_names)
    R, _ = cat([trace.randomness(q) for q in bad]
               + ([unpack_bits(np.stack([m.words for m in msgs]), runs)] if msgs else []),
               r_names)
    return ViewTable(L, I, R, descriptions=(tuple(l_names), tuple(i_names), tuple(r_names)))
