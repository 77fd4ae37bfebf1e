"""Inject the four security-bug classes into compiled protocols.

Severity is a bias level ``b``: the faulty randomness is the AND of ``b``
fresh flips, so it is 1 with probability ``2**-b``.  ``b = 1`` is an
ordinary fair flip and therefore no bug at all.

* ``biased_sharing``    honest input masks use the biased coin
* ``biased_and``        AND-gate randomness uses the biased coin (P2's OT
                        output share in GMW, the dealer's share masks in Beaver)
* ``accidental_secret`` the honest party sends ``x XOR coin`` for its inputs
* ``accidental_gate``   the same leak applied to its AND-output shares

Bugs are aimed at the ``honest`` party (default P2); the other computing
party is the one to corrupt when testing.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .circuits import Circuit
from .compile import CompileOptions, compile_circuit
from .errors import IncompatibleKind, NoSuchSite
from .syntax import And, Assign, Flip, Program, Secret, Send, Var, Xor

KINDS = ("biased_sharing", "biased_and", "accidental_secret", "accidental_gate")


@dataclass(frozen=True)
class MutationSpec:
    kind: str
    bias: int = 1
    sites: object = "all"  # "all" or a tuple of site indices
    honest: str = "P2"
    seed: int = 0

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise IncompatibleKind(f"unknown mutation {self.kind!r}; choose from {KINDS}")
        if int(self.bias) < 1:
            raise ValueError("bias level b must be >= 1")
        if self.honest not in ("P1", "P2"):
            raise ValueError("honest must be P1 or P2")
        if self.sites != "all":
            object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))

    @property
    def corrupt(self) -> str:
        return "P1" if self.honest == "P2" else "P2"

    @property
    def leak_probability(self) -> float:
        """Chance that one faulty coin is 0, i.e. that a leak is exact."""
        return 1 - 2.0 ** -self.bias

    @classmethod
    def parse(cls, text: str) -> "MutationSpec":
        """Parse ``kind=biased_sharing,b=3,sites=all`` (sites: ``0;2;5``)."""
        fields = {}
        for part in filter(None, (p.strip() for p in text.split(","))):
            key, sep, value = part.partition("=")
            if not sep:
                raise ValueError(f"expected key=value, got {part!r}")
            fields[key.strip().lower()] = value.strip()
        if "kind" not in fields:
            raise ValueError("mutation spec needs kind=...")
        sites = fields.get("sites", "all")
        if sites != "all":
            sites = tuple(int(s) for s in sites.replace(":", ";").split(";") if s)
        return cls(fields["kind"], int(fields.get("b", fields.get("bias", 1))), sites,
                   fields.get("honest", "P2"), int(fields.get("seed", 0)))

    def format(self) -> str:
        sites = "all" if self.sites == "all" else ";".join(map(str, self.sites))
        return f"kind={self.kind},b={self.bias},sites={sites},honest={self.honest}"


def mutate(c: Circuit, opts: CompileOptions, spec: MutationSpec) -> Program:
    """Compile ``c`` under ``opts.framework`` with ``spec`` injected."""
    return compile_circuit(c, replace(opts, mutation=spec))


def mutate_program(p: Program, spec: MutationSpec, corrupt: str | None = None) -> Program:
    """Add accidental-secret leaks to an arbitrary macro-free program.

    Only ``accidental_secret`` applies: secrets are the one thing that can
    be recognised syntactically.  Each selected ``SECRET`` read by the honest
    party is followed by a leak message to ``corrupt``.
    """
    if spec.kind != "accidental_secret":
        raise IncompatibleKind(f"{spec.kind} needs compiler sites; only accidental_secret "
                               "applies to a plain program")
    corrupt = corrupt or spec.corrupt
    secrets = [i for i, s in enumerate(p.body)
               if isinstance(s, Assign) and isinstance(s.expr, Secret)
               and s.expr.party == spec.honest]
    if spec.sites == "all":
        chosen = set(range(len(secrets)))
    else:
        chosen = set(spec.sites)
        bad = sorted(k for k in chosen if not 0 <= k < len(secrets))
        if bad:
            raise NoSuchSite(f"sites {bad} out of range (0..{len(secrets) - 1})")
    taken = {s.var for s in p.body if isinstance(s, Assign)}
    counter = 0

    def fresh(base):
        nonlocal counter
        while True:
            name = f"{base}{counter}"
            counter += 1
            if name not in taken:
                taken.add(name)
                return name

    body = []
    for i, s in enumerate(p.body):
        body.append(s)
        if i in secrets and secrets.index(i) in chosen:
            flips = [fresh("leak_r") for _ in range(spec.bias)]
            body.extend(Assign(f, Flip(spec.honest)) for f in flips)
            coin = Var(flips[0])
            for f in flips[1:]:
                coin = And(coin, Var(f))
            leak = fresh("leak")
            body.append(Assign(leak, Xor(Var(s.var), coin)))
            body.append(Send(leak, corrupt))
    return replace(p, body=tuple(body))
