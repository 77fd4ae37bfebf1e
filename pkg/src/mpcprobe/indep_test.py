"""The insecurity test: real-world versus ideal-world predictability.

Each iteration draws fresh rows, trains one forest on the real view (I then
R columns) and one on the ideal view (I only) to predict the honest inputs
L, and scores both on further fresh rows.  If the real-world forests make
fewer mistakes than the ideal-world ones, significantly so under a
one-sided signed-rank test, the protocol leaks and is reported INSECURE.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientData
from .runtime import extract_views, prepare, run_batch
from .stats import NEGLIGIBLE_P, wilcoxon_less
from .tree import SCORE_EPSILON, Forest, train_trees
from .views import ViewTable

INSECURE = "INSECURE"
MAYBE_SECURE = "MAYBE_SECURE"


@dataclass(frozen=True)
class TestConfig:
    iters: int = 100
    trainN: int = 1024
    testN: int = 256
    alpha: float = 0.05
    seed: int = 0
    block: int = 8  # iterations whose trees are grown together

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.iters < 6:
            raise ValueError("iters must be at least 6; fewer pairs can never reach p < 0.05")
        if self.trainN < 1 or self.testN < 1:
            raise ValueError("trainN and testN must be positive")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.block < 1:
            raise ValueError("block must be positive")


@dataclass(frozen=True)
class ScorePair:
    real: float
    ideal: float


@dataclass
class TestReport:
    p_value: float
    verdict: str
    pairs: list[ScorePair]
    config: TestConfig
    wall_seconds: float = 0.0
    widths: tuple = field(default=(0, 0, 0))

    __test__ = False

    @property
    def negligible(self) -> bool:
        return self.p_value < NEGLIGIBLE_P

    def to_dict(self, wall=True):
        d = {"pValue": self.p_value, "verdict": self.verdict, "alpha": self.config.alpha,
             "iters": self.config.iters, "trainN": self.config.trainN,
             "testN": self.config.testN, "seed": self.config.seed,
             "pairs": [[p.real, p.ideal] for p in self.pairs]}
        if wall:
            d["wallSeconds"] = self.wall_seconds
        return d

    def to_json(self, wall=True) -> str:
        return json.dumps(self.to_dict(wall), indent=2) + "\n"


class ProgramSource:
    """Fresh view rows from executing a program; each draw has its own seed."""

    def __init__(self, program, corrupt, seed=0):
        self.program, self.analysis = prepare(program)
        self.corrupt = corrupt
        self.seeds = np.random.SeedSequence(seed)

    def draw(self, n: int) -> ViewTable:
        rng = np.random.default_rng(self.seeds.spawn(1)[0])
        trace = run_batch(self.program, runs=n, rng=rng, analysis=self.analysis)
        return extract_views(trace, self.corrupt)


class TableSource:
    """Serve consecutive, never-repeated rows of an in-memory view table."""

    def __init__(self, table: ViewTable):
        self.table = table
        self.next = 0

    def draw(self, n: int) -> ViewTable:
        if self.next + n > len(self.table):
            raise InsufficientData(f"needed {n} more rows, only "
                                   f"{len(self.table) - self.next} left")
        out = self.table.rows(self.next, self.next + n)
        self.next += n
        return out


def _errors(trees, X, Y) -> float:
    pred = Forest(tuple(trees)).predict(X)
    return float(np.count_nonzero(pred != Y)) + SCORE_EPSILON


def score_block(tables, trainN):
    """ScorePairs for a list of per-iteration tables (train rows first)."""
    jobs, shapes = [], []
    for t in tables:
        train = t.rows(0, trainN)
        width = train.L.shape[1]
        for j in range(width):
            jobs.append((train.real, train.L[:, j]))
        for j in range(width):
            jobs.append((train.ideal, train.L[:, j]))
        shapes.append(width)
    trees = train_trees(jobs)
    pairs, k = [], 0
    for t, width in zip(tables, shapes):
        test = t.rows(trainN, len(t))
        real, ideal = trees[k:k + width], trees[k + width:k + 2 * width]
        k += 2 * width
        pairs.append(ScorePair(_errors(real, test.real, test.L),
                               _errors(ideal, test.ideal, test.L)))
    return pairs


def run_test(source, cfg: TestConfig) -> TestReport:
    """Run ``cfg.iters`` train/test iterations on fresh rows and decide."""
    start = time.perf_counter()
    pairs: list[ScorePair] = []
    widths = (0, 0, 0)
    for first in range(0, cfg.iters, cfg.block):
        count = min(cfg.block, cfg.iters - first)
        tables = [source.draw(cfg.trainN + cfg.testN) for _ in range(count)]
        widths = tables[0].widths
        pairs.extend(score_block(tables, cfg.trainN))
    p = wilcoxon_less([q.real for q in pairs], [q.ideal for q in pairs])
    verdict = INSECURE if p <= cfg.alpha else MAYBE_SECURE
    return TestReport(p, verdict, pairs, cfg, time.perf_counter() - start, widths)


def test_program(program, corrupt, cfg: TestConfig) -> TestReport:
    """Convenience: run the test on a program, seeding its runs from ``cfg.seed``."""
    return run_test(ProgramSource(program, corrupt, cfg.seed), cfg)


test_program.__test__ = False
