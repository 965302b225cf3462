"""Normalized Google distance and the distances leading up to it.

Frequency form, with normalizer M (or any N >= every f)::

    NGD(x, y) = (max(log f(x), log f(y)) - log f(x, y)) / (log M - min(log f(x), log f(y)))

Case split: undefined when f(x) = f(y) = 0; +inf when f(x, y) = 0 and some
marginal is positive; otherwise a finite value >= 0.

Logs of count ratios are used throughout the frequency form, so scaling every
count by the same integer gives bitwise-identical results.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .matrix import DistanceMatrix
from .termindex import CountProvider, Normalizer, normalize_term


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "undefined"

    __str__ = __repr__

    def __reduce__(self):
        return (_Undefined, ())


UNDEFINED = _Undefined()
NgdValue = Union[float, _Undefined]


class NormalizerError(ValueError):
    pass


def _log(v: float, base: float) -> float:
    if base == math.e:
        return math.log(v)
    return math.log(v) / math.log(base)


# --------------------------------------------------------------------------
# Probabilities and the D1 -> D2 -> D3 chain
# --------------------------------------------------------------------------

def probability(p: CountProvider, x: str) -> float:
    return p.freq(x) / p.page_total()


def joint_probability(p: CountProvider, x: str, y: str) -> float:
    return p.joint_freq(x, y) / p.page_total()


def conditional(p: CountProvider, x: str, given: str) -> float:
    """p(x | given) = f(x, given) / f(given)."""
    fy = p.freq(given)
    if fy == 0:
        raise ZeroDivisionError(f"p({x} | {given}) is undefined: f({given}) = 0")
    return p.joint_freq(x, given) / fy


def _require_marginals(p, x, y):
    for t in (x, y):
        if p.freq(t) == 0:
            raise ValueError(f"f({t}) = 0; the distance needs positive marginals")


def d1(p: CountProvider, x: str, y: str) -> float:
    _require_marginals(p, x, y)
    return min(conditional(p, x, y), conditional(p, y, x))


def d2(p: CountProvider, x: str, y: str, base: float = 2) -> float:
    _require_marginals(p, x, y)
    pxy, pyx = conditional(p, x, y), conditional(p, y, x)
    if pxy == 0:
        return math.inf
    return max(-_log(pxy, base), -_log(pyx, base))


def d3(p: CountProvider, x: str, y: str, base: float = 2) -> NgdValue:
    fx, fy = p.freq(x), p.freq(y)
    if fx == 0 and fy == 0:
        return UNDEFINED
    if p.joint_freq(x, y) == 0:
        return math.inf
    numer = d2(p, x, y, base)
    denom = max(-_log(probability(p, x), base), -_log(probability(p, y), base))
    if denom == 0:
        return _zero_denominator(numer)
    return numer / denom


# --------------------------------------------------------------------------
# NGD
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NgdParts:
    """Everything that enters one NGD evaluation; ``value`` is numerator / denominator."""

    x: str
    y: str
    fx: int
    fy: int
    fxy: int
    M: int
    normalizer: float
    numerator: float
    denominator: float
    value: NgdValue


def _zero_denominator(numer: float) -> float:
    # both terms on every page: identical events are at distance 0
    if numer == 0:
        return 0.0
    warnings.warn("NGD denominator is zero but the numerator is not; returning inf",
                  RuntimeWarning, stacklevel=3)
    return math.inf


def ngd_parts_from_counts(fx: int, fy: int, fxy: int, normalizer: float,
                          base: float = 2) -> tuple[float, float, NgdValue]:
    """Numerator, denominator and value for raw counts."""
    hi, lo = (fx, fy) if fx >= fy else (fy, fx)
    if hi == 0:
        return math.nan, math.nan, UNDEFINED
    if normalizer < hi:
        raise NormalizerError(
            f"normalizing factor {normalizer} must not be smaller than any f(x) (max {hi})")
    if fxy == 0:
        return math.inf, _log(normalizer / lo, base) if lo else math.inf, math.inf
    numer = _log(hi / fxy, base)
    denom = _log(normalizer / lo, base)
    if denom == 0:
        return numer, denom, _zero_denominator(numer)
    return numer, denom, numer / denom


def ngd_from_counts(fx: int, fy: int, fxy: int, normalizer: float, base: float = 2) -> NgdValue:
    return ngd_parts_from_counts(fx, fy, fxy, normalizer, base)[2]


def explain(p: CountProvider, x: str, y: str, normalizer: Normalizer = "M",
            base: float = 2) -> NgdParts:
    x, y = sorted((normalize_term(x), normalize_term(y)))
    fx, fy, fxy = p.freq(x), p.freq(y), p.joint_freq(x, y)
    n = p.normalizer(normalizer)
    numer, denom, value = ngd_parts_from_counts(fx, fy, fxy, n, base)
    return NgdParts(x, y, fx, fy, fxy, p.M, n, numer, denom, value)


def ngd(p: CountProvider, x: str, y: str, normalizer: Normalizer = "M", base: float = 2) -> NgdValue:
    """NGD of two terms; ``normalizer`` is ``"M"``, ``"N"`` or a number."""
    return explain(p, x, y, normalizer, base).value


# --------------------------------------------------------------------------
# Google code
# --------------------------------------------------------------------------

def google_code(p: CountProvider, x: str, y: str | None = None,
                normalizer: Normalizer = "N", base: float = 2) -> float:
    """Code length log 1/g of the singleton or doubleton event; +inf for g = 0."""
    n = p.normalizer(normalizer)
    f = p.freq(x) if y is None else p.joint_freq(x, y)
    if f == 0:
        return math.inf
    return _log(n / f, base)


def ngd_from_codes(gx: float, gy: float, gxy: float) -> NgdValue:
    """The compression-distance shape applied to Google code lengths."""
    if math.isinf(gx) and math.isinf(gy):
        return UNDEFINED
    if math.isinf(gxy):
        return math.inf
    hi = max(gx, gy)
    if hi == 0:
        return _zero_denominator(gxy - min(gx, gy))
    return (gxy - min(gx, gy)) / hi


def ngd_via_code(p: CountProvider, x: str, y: str, normalizer: Normalizer = "N",
                 base: float = 2) -> NgdValue:
    x, y = sorted((normalize_term(x), normalize_term(y)))
    n = p.normalizer(normalizer)
    top = max(p.freq(x), p.freq(y))
    if n < top:
        raise NormalizerError(f"normalizing factor {n} must not be smaller than any f(x) (max {top})")
    return ngd_from_codes(google_code(p, x, None, n, base), google_code(p, y, None, n, base),
                          google_code(p, x, y, n, base))


# --------------------------------------------------------------------------
# Matrices
# --------------------------------------------------------------------------

def ngd_matrix(p: CountProvider, terms: Sequence[str], normalizer: Normalizer = "M",
               base: float = 2) -> DistanceMatrix:
    terms = [normalize_term(t) for t in terms]
    if len(terms) < 2:
        raise ValueError("ngd_matrix needs at least 2 terms")
    if len(set(terms)) != len(terms):
        raise ValueError(f"duplicate terms in {terms}")
    n = len(terms)
    values = np.zeros((n, n))
    undefined = []
    for i in range(n):
        for j in range(i, n):
            v = ngd(p, terms[i], terms[j], normalizer, base)
            if v is UNDEFINED:
                undefined.append((terms[i], terms[j]))
                continue
            values[i, j] = values[j, i] = v
    if undefined:
        raise ValueError("NGD undefined (both frequencies zero) for: "
                         + ", ".join(f"({a}, {b})" for a, b in undefined))
    return DistanceMatrix(tuple(terms), values)


def format_ngd(v: NgdValue, digits: int = 3) -> str:
    if v is UNDEFINED:
        return "undefined"
    if math.isinf(v):
        return "inf"
    return f"{v:.{digits}f}"
