"""Labeled distance matrices and their text formats.

The ``matrix-v1`` format::

    simdist-matrix v1 n=<n>
    <label>\\t<label>...
    <value>\\t<value>...      (n rows)

Values are printed with 9 significant digits (``%.9g``); ``inf`` marks an
infinite entry. CSV and JSON renderings are provided for other tools.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

HEADER = "simdist-matrix v1"


class MatrixFormatError(ValueError):
    pass


def format_value(v: float) -> str:
    if math.isinf(v) and v > 0:
        return "inf"
    if not math.isfinite(v):
        raise ValueError(f"cannot serialize matrix entry {v!r}")
    return "%.9g" % v


def parse_value(s: str) -> float:
    if s == "inf":
        return math.inf
    v = float(s)
    if not math.isfinite(v):
        raise MatrixFormatError(f"bad matrix entry {s!r}")
    return v


@dataclass(frozen=True)
class DistanceMatrix:
    labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        values = np.array(self.values, dtype=float)
        n = len(labels)
        if values.shape != (n, n):
            raise ValueError(f"matrix shape {values.shape} does not match {n} labels")
        if len(set(labels)) != n:
            raise ValueError(f"duplicate labels: {sorted(_duplicates(labels))}")
        for lab in labels:
            if not lab or any(ch in lab for ch in "\t\r\n"):
                raise ValueError(f"label {lab!r} must be non-empty without tabs or newlines")
        if np.isnan(values).any():
            raise ValueError("matrix contains NaN")
        if (values == -np.inf).any():
            raise ValueError("matrix contains -inf")
        values.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def __getitem__(self, key: tuple[str, str]) -> float:
        a, b = key
        return float(self.values[self.index(a), self.index(b)])

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.values, self.values.T))

    def infinite_pairs(self) -> list[tuple[str, str]]:
        rows, cols = np.nonzero(np.isinf(self.values))
        return [(self.labels[i], self.labels[j]) for i, j in zip(rows, cols) if i <= j]

    def clamped(self, lo: float = 0.0, hi: float = 1.0) -> "DistanceMatrix":
        return DistanceMatrix(self.labels, np.clip(self.values, lo, hi))

    def submatrix(self, labels: Sequence[str]) -> "DistanceMatrix":
        idx = [self.index(lab) for lab in labels]
        return DistanceMatrix(tuple(labels), self.values[np.ix_(idx, idx)])

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{HEADER} n={len(self)}", "\t".join(self.labels)]
        for row in self.values:
            lines.append("\t".join(format_value(float(v)) for v in row))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([""] + list(self.labels))
        for lab, row in zip(self.labels, self.values):
            w.writerow([lab] + [format_value(float(v)) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [[format_value(float(v)) if math.isinf(v) else float(format_value(float(v)))
                 for v in row] for row in self.values]
        return json.dumps({"format": "simdist-matrix", "version": 1,
                           "labels": list(self.labels), "values": rows}, indent=1) + "\n"

    def render(self, fmt: str) -> str:
        if fmt in ("matrix", "matrix-v1"):
            return self.to_text()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown matrix format {fmt!r}")

    @classmethod
    def from_text(cls, text: str) -> "DistanceMatrix":
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines or not lines[0].startswith(HEADER + " n="):
            raise MatrixFormatError(f"missing '{HEADER} n=<n>' header")
        try:
            n = int(lines[0][len(HEADER) + 3:])
        except ValueError:
            raise MatrixFormatError(f"bad header {lines[0]!r}") from None
        if len(lines) != n + 2:
            raise MatrixFormatError(f"expected {n + 2} lines, found {len(lines)}")
        labels = lines[1].split("\t")
        if len(labels) != n:
            raise MatrixFormatError(f"expected {n} labels, found {len(labels)}")
        rows = []
        for k, line in enumerate(lines[2:], start=3):
            fields = line.split("\t")
            if len(fields) != n:
                raise MatrixFormatError(f"line {k}: expected {n} values, found {len(fields)}")
            try:
                rows.append([parse_value(f) for f in fields])
            except ValueError as exc:
                raise MatrixFormatError(f"line {k}: {exc}") from None
        try:
            return cls(tuple(labels), np.array(rows, dtype=float).reshape(n, n))
        except ValueError as exc:
            raise MatrixFormatError(str(exc)) from None

    @classmethod
    def read(cls, path) -> "DistanceMatrix":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def _duplicates(items):
    seen, dup = set(), set()
    for it in items:
        (dup if it in seen else seen).add(it)
    return dup
