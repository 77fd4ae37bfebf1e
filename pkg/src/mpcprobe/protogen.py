"""Random choreographies for stress-testing the detector.

A generated program reads its secrets, runs ``body_len`` random statements
(local computation, sends, 1-of-2 oblivious transfers) and ends with each
party's outputs.  Operands are drawn with weight ``1 / (1 + times used)``,
so fresh values are preferred and dependency chains grow deep.  Random
flips are emitted lazily, right before their first use, and never count
toward ``body_len``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .compile import _Emitter
from .errors import FilterTimeout, Unsatisfiable
from .indep_test import MAYBE_SECURE, TestConfig, test_program
from .syntax import And, Const, Not, OTBranch, Output, Program, Var, Xor

OPS = ("compute", "send", "oblivious", "flip")


def _per_party(value, parties, name):
    if isinstance(value, dict):
        out = {q: int(value.get(q, 0)) for q in parties}
    else:
        out = dict.fromkeys(parties, int(value))
    if any(v < 0 for v in out.values()):
        raise ValueError(f"{name} must be non-negative")
    return out


@dataclass(frozen=True)
class GenConfig:
    parties: int = 2
    secret_bits: object = 2  # int (every party) or {party: count}
    random_bits: object = 4
    output_bits: object = 1
    body_len: int = 20
    max_width: int = 3
    op_weights: dict = field(default_factory=lambda: {"compute": 4.0, "send": 2.0,
                                                     "oblivious": 1.0, "flip": 1.0})
    seed: int = 0

    def __post_init__(self):
        if self.parties < 2:
            raise ValueError("need at least two parties")
        if self.body_len < 0 or self.max_width < 1:
            raise ValueError("body_len must be >= 0 and max_width >= 1")
        w = {k: float(self.op_weights.get(k, 0.0)) for k in OPS}
        unknown = set(self.op_weights) - set(OPS)
        if unknown:
            raise ValueError(f"unknown op weights {sorted(unknown)}; use {OPS}")
        if any(v < 0 for v in w.values()) or not any(w.values()):
            raise ValueError("op weights must be non-negative and not all zero")
        object.__setattr__(self, "op_weights", w)
        for name in ("secret_bits", "random_bits", "output_bits"):
            _per_party(getattr(self, name), self.party_names, name)

    @property
    def party_names(self):
        return tuple(f"P{k + 1}" for k in range(self.parties))

    def widths(self, name):
        return _per_party(getattr(self, name), self.party_names, name)

    @classmethod
    def full_scale(cls, seed=0):
        return cls(2, 16, 48, 16, 500, 3, seed=seed)

    @classmethod
    def from_dict(cls, d):
        keys = {"parties": "parties", "secretBits": "secret_bits", "randomBits": "random_bits",
                "outputBits": "output_bits", "bodyLen": "body_len", "maxWidth": "max_width",
                "opWeights": "op_weights", "seed": "seed"}
        kwargs = {}
        for k, v in d.items():
            if k in keys:
                kwargs[keys[k]] = v
            elif k in keys.values():
                kwargs[k] = v
            else:
                raise ValueError(f"unknown generator option {k!r}")
        return cls(**kwargs)

    def to_dict(self):
        return {"parties": self.parties, "secretBits": self.secret_bits,
                "randomBits": self.random_bits, "outputBits": self.output_bits,
                "bodyLen": self.body_len, "maxWidth": self.max_width,
                "opWeights": dict(self.op_weights), "seed": self.seed}


class UsageLedger:
    """How often each variable has been used as an operand."""

    def __init__(self):
        self.uses: dict[str, int] = {}

    def add(self, var):
        self.uses.setdefault(var, 0)

    def weights(self, candidates):
        return np.array([1.0 / (1 + self.uses[v]) for v in candidates])

    def pick(self, rng, candidates):
        w = self.weights(candidates)
        v = candidates[rng.choice(len(candidates), p=w / w.sum())]
        self.uses[v] += 1
        return v


class _Generator:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.parties = cfg.party_names
        self.em = _Emitter(self.parties)
        self.ledger = UsageLedger()
        self.flips_left = cfg.widths("random_bits")
        self.order: list[str] = []  # creation order, for deterministic candidate lists
        self.live = {q: [] for q in self.parties}
        w = cfg.op_weights
        self.flip_share = w["flip"] / (w["flip"] + w["compute"]) if w["flip"] else 0.0
        self.op_p = np.array([w[k] for k in OPS[:3]])

    def new(self, name):
        self.ledger.add(name)
        self.order.append(name)
        for q in sorted(self.em.holders[name], key=self.parties.index):
            self.live[q].append(name)
        return name

    def held_by(self, q):
        return self.live[q]

    def fresh_flip(self, q):
        self.flips_left[q] -= 1
        name = self.new(self.em.flip(q, prefix=f"{q.lower()}_r"))
        self.ledger.uses[name] += 1
        return name

    def operand(self, q):
        live = self.held_by(q)
        can_flip = self.flips_left[q] > 0
        if can_flip and (not live or self.rng.random() < self.flip_share):
            v = self.fresh_flip(q)
        elif live:
            v = self.ledger.pick(self.rng, live)
        else:
            return None
        e = Var(v)
        return Not(e) if self.rng.random() < 0.25 else e

    # each op returns False if it is impossible in the current state
    def compute(self):
        q = self.parties[self.rng.integers(len(self.parties))]
        if not self.held_by(q) and self.flips_left[q] == 0:
            return False
        k = int(self.rng.integers(1, self.cfg.max_width + 1))
        expr = None
        for _ in range(k):
            e = self.operand(q)
            if expr is None:
                expr = e
            else:
                expr = Xor(expr, e) if self.rng.random() < 0.5 else And(expr, e)
        self.new(self.em.assign(self.em.fresh("v"), expr))
        return True

    def send(self):
        everyone = frozenset(self.parties)
        live = [v for v in self.order if self.em.holders[v] != everyone]
        if not live:
            return False
        v = self.ledger.pick(self.rng, live)
        targets = [q for q in self.parties if q not in self.em.holders[v]]
        to = targets[self.rng.integers(len(targets))]
        self.em.send(v, to)
        self.live[to].append(v)
        return True

    def oblivious(self):
        r = self.parties[self.rng.integers(len(self.parties))]
        selectors = self.held_by(r)
        senders = [q for q in self.parties if q != r and self.held_by(q)]
        if not selectors or not senders:
            return False
        s = senders[self.rng.integers(len(senders))]
        a = self.ledger.pick(self.rng, self.held_by(s))
        b = self.ledger.pick(self.rng, self.held_by(s))
        sel = self.ledger.pick(self.rng, selectors)
        self.new(self.em.ot(self.em.fresh("o"), OTBranch(a, b, sel), r))
        return True

    def run(self) -> Program:
        cfg, em = self.cfg, self.em
        for q, n in cfg.widths("secret_bits").items():
            for k in range(n):
                self.new(em.secret(f"{q.lower()}_s{k}", q))
        ops = (self.compute, self.send, self.oblivious)
        for _ in range(cfg.body_len):
            p = self.op_p.copy()
            while True:
                if not p.any():
                    raise Unsatisfiable("no statement can be generated: no live variables "
                                        "and no random bits left")
                j = self.rng.choice(len(ops), p=p / p.sum())
                if ops[j]():
                    break
                p[j] = 0.0
        for q, n in cfg.widths("output_bits").items():
            for _ in range(n):
                live = self.held_by(q)
                if live:
                    em.output(self.ledger.pick(self.rng, live), q)
                else:
                    em.body.append(Output(Const(0), q))
        return em.program()


def generate(cfg: GenConfig) -> Program:
    """A random valid program; the same config always gives the same program."""
    w = cfg.op_weights
    if cfg.body_len and not (w["compute"] or w["send"] or w["oblivious"]):
        raise Unsatisfiable("body_len > 0 needs a positive compute, send or oblivious weight")
    return _Generator(cfg).run()


@dataclass
class FilterResult:
    programs: list
    seeds: list
    attempts: int
    attrition: int
    log: list  # one dict per candidate: seed, verdict, pValue


def candidate_seed(base: int, k: int) -> int:
    return int(np.random.SeedSequence([base, k]).generate_state(1, np.uint32)[0])


LOW_POWER = TestConfig(iters=16, trainN=128, testN=32, alpha=0.05)


def filter_stream(cfg: GenConfig, test_cfg: TestConfig | None = None, keep: int = 1,
                  corrupt: str = "P1", max_attempts: int | None = None) -> FilterResult:
    """Generate programs and keep only those a low-power test passes.

    Candidate ``k`` is generated with seed ``candidate_seed(cfg.seed, k)`` and
    tested with the same seed.  Raises ``FilterTimeout`` after
    ``max_attempts`` candidates (default ``100 * keep``).
    """
    test_cfg = test_cfg or LOW_POWER
    max_attempts = max_attempts if max_attempts is not None else 100 * max(keep, 1)
    kept, seeds, log = [], [], []
    k = 0
    while len(kept) < keep:
        if k >= max_attempts:
            raise FilterTimeout(f"kept {len(kept)} of {keep} after {k} candidates")
        seed = candidate_seed(cfg.seed, k)
        prog = generate(replace(cfg, seed=seed))
        report = test_program(prog, corrupt, replace(test_cfg, seed=seed))
        log.append({"seed": seed, "verdict": report.verdict, "pValue": report.p_value})
        if report.verdict == MAYBE_SECURE:
            kept.append(prog)
            seeds.append(seed)
        k += 1
    return FilterResult(kept, seeds, k, k - len(kept), log)


def manifest_line(seed, cfg: GenConfig, verdict=None, path=None, p_value=None) -> str:
    entry = {"seed": seed, "config": replace(cfg, seed=seed).to_dict(), "verdict": verdict}
    if p_value is not None:
        entry["pValue"] = p_value
    if path is not None:
        entry["path"] = path
    return json.dumps(entry, sort_keys=True)
