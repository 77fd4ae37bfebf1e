"""View tables and their CSV encoding.

CSV layout: a header of ``L<i>``, ``I<i>`` and ``R<i>`` names (indices dense
and zero-based within each prefix, any order), then one row of ``0``/``1``
tokens per protocol run.  Columns are regrouped by prefix on read.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import HeaderMismatch, InsufficientData, NonBitValue, RaggedRow

_HEADER_RE = re.compile(r"([LIR])(0|[1-9][0-9]*)\Z")


def _matrix(m):
    m = np.asarray(m, dtype=np.uint8)
    return m if m.ndim == 2 else m.reshape(len(m), -1 if m.size else 0)


@dataclass
class ViewTable:
    """Rows are runs; ``L`` labels, ``I`` ideal-view and ``R`` real-only columns."""
    L: np.ndarray
    I: np.ndarray
    R: np.ndarray
    descriptions: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        n = {len(self.L), len(self.I), len(self.R)}
        if len(n) != 1:
            raise RaggedRow(f"column groups disagree on the number of rows: {sorted(n)}")
        self.L, self.I, self.R = (_matrix(m) for m in (self.L, self.I, self.R))

    def __len__(self):
        return len(self.L)

    def __eq__(self, other):
        if not isinstance(other, ViewTable):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in
                   ((self.L, other.L), (self.I, other.I), (self.R, other.R)))

    @property
    def widths(self):
        return self.L.shape[1], self.I.shape[1], self.R.shape[1]

    @property
    def real(self):
        """Features available to the real-world model: I then R."""
        return np.hstack([self.I, self.R])

    @property
    def ideal(self):
        return self.I

    def rows(self, start, stop):
        return ViewTable(self.L[start:stop], self.I[start:stop], self.R[start:stop],
                         self.descriptions)

    @classmethod
    def concat(cls, tables):
        tables = list(tables)
        return cls(np.vstack([t.L for t in tables]), np.vstack([t.I for t in tables]),
                   np.vstack([t.R for t in tables]), tables[0].descriptions)


def csv_header(widths) -> str:
    return ",".join(f"{p}{i}" for p, w in zip("LIR", widths) for i in range(w))


def emit_csv(v: ViewTable, sink) -> None:
    """Write ``v`` to a text stream."""
    sink.write(csv_header(v.widths) + "\n")
    data = np.hstack([v.L, v.I, v.R])
    if data.shape[1] == 0:
        sink.write("\n" * len(v))
        return
    # tokens are single characters, so the row can be built byte-wise
    chars = np.full((len(data), 2 * data.shape[1]), ord(","), np.uint8)
    chars[:, 0::2] = data + ord("0")
    chars[:, -1] = ord("\n")
    sink.write(chars.tobytes().decode("ascii"))


def _parse_header(line):
    names = [t.strip() for t in line.rstrip("\n").split(",")] if line.strip() else []
    index = {p: {} for p in "LIR"}
    for col, name in enumerate(names):
        m = _HEADER_RE.match(name)
        if m is None:
            raise HeaderMismatch(f"bad column name {name!r}")
        prefix, k = m.group(1), int(m.group(2))
        if k in index[prefix]:
            raise HeaderMismatch(f"duplicate column {name!r}")
        index[prefix][k] = col
    order = {}
    for p in "LIR":
        ks = sorted(index[p])
        if ks != list(range(len(ks))):
            raise HeaderMismatch(f"{p} columns are not dense from 0: {ks}")
        order[p] = [index[p][k] for k in ks]
    return len(names), order


def _parse_rows(lines, ncols, first_line):
    rows = []
    for lineno, line in enumerate(lines, start=first_line):
        line = line.rstrip("\n").rstrip("\r")
        if not line and ncols:
            continue
        tokens = line.split(",") if ncols else []
        if len(tokens) != ncols:
            raise RaggedRow(f"line {lineno}: expected {ncols} values, got {len(tokens)}")
        for t in tokens:
            if t not in ("0", "1"):
                raise NonBitValue(f"line {lineno}: {t!r} is not a bit")
        rows.append([t == "1" for t in tokens])
    return np.array(rows, dtype=np.uint8).reshape(len(rows), ncols)


def _assemble(data, order):
    return ViewTable(data[:, order["L"]], data[:, order["I"]], data[:, order["R"]])


def parse_csv(source) -> ViewTable:
    """Read a whole CSV view table from a text stream or string."""
    if isinstance(source, str):
        lines = source.splitlines(keepends=True)
    else:
        lines = list(source)
    if not lines:
        raise HeaderMismatch("missing header line")
    ncols, order = _parse_header(lines[0])
    return _assemble(_parse_rows(lines[1:], ncols, 2), order)


class CsvStreamSource:
    """Serve fresh rows from a CSV stream, reading only as many as requested."""

    def __init__(self, stream):
        self.stream = stream
        self.ncols, self.order = _parse_header(stream.readline())
        self.lineno = 2

    def draw(self, n: int) -> ViewTable:
        lines = []
        while len(lines) < n:
            line = self.stream.readline()
            if not line:
                raise InsufficientData(f"CSV stream ended after {self.lineno - 2} rows")
            if line.strip() or not self.ncols:
                lines.append(line)
            self.lineno += 1
        return _assemble(_parse_rows(lines, self.ncols, self.lineno - len(lines)), self.order)
