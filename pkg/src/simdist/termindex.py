"""Page-count providers: a local inverted index and static count snapshots.

A provider answers four questions: how many pages contain a term, how many
contain both of two terms, how many pages there are (M), and optionally the
normalizer N that sums every singleton and doubleton event once.

Snapshot files are line-oriented UTF-8::

    simdist-counts v1 M=<int> N=<int|same-as-M>
    t <term> <count>
    p <termA> <termB> <count>        (termA < termB)
"""
from __future__ import annotations

import itertools
import math
import re
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

_TOKEN = re.compile(r"[^\W_]+")

SNAPSHOT_HEADER = "simdist-counts v1"
DEFAULT_VOCAB_CAP = 5000

Normalizer = Union[str, float, int]


class DegenerateProviderError(ValueError):
    """The provider indexes no pages, so no frequency is meaningful."""


class NormalizerUnknownError(ValueError):
    pass


class SnapshotError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercase, then split on anything that is not a letter or digit."""
    return _TOKEN.findall(text.lower())


def normalize_term(term: str) -> str:
    tokens = tokenize(term)
    if len(tokens) != 1:
        raise ValueError(f"{term!r} does not normalize to a single term (got {tokens})")
    return tokens[0]


class CountProvider(ABC):
    """Singleton and doubleton page frequencies plus the totals M and N."""

    @property
    @abstractmethod
    def M(self) -> int:
        ...

    @property
    def N(self) -> int | None:
        """The singleton-plus-doubleton total, when the provider knows it."""
        return None

    @abstractmethod
    def _freq(self, x: str) -> int:
        ...

    @abstractmethod
    def _joint(self, x: str, y: str) -> int:
        ...

    def _check(self):
        if self.M < 1:
            raise DegenerateProviderError("provider indexes no pages (M = 0)")

    def freq(self, x: str) -> int:
        self._check()
        return self._freq(normalize_term(x))

    def joint_freq(self, x: str, y: str) -> int:
        self._check()
        x, y = sorted((normalize_term(x), normalize_term(y)))
        if x == y:
            return self._freq(x)
        return self._joint(x, y)

    def page_total(self) -> int:
        self._check()
        return self.M

    def normalizer(self, choice: Normalizer = "N") -> float:
        """Resolve a normalizer choice: ``"M"``, ``"N"`` or an explicit number."""
        self._check()
        if choice == "M":
            return self.M
        if choice == "N":
            if self.N is None:
                raise NormalizerUnknownError(
                    "N is unknown for this provider; use normalizer 'M' "
                    "(CLI: --normalizer M) to take N := M")
            return self.N
        if isinstance(choice, str):
            try:
                choice = float(choice)
            except ValueError:
                raise ValueError(f"normalizer must be 'M', 'N' or a number, got {choice!r}") from None
        if not math.isfinite(choice) or choice <= 0:
            raise ValueError(f"normalizer must be positive and finite, got {choice!r}")
        return choice

    def vocabulary(self) -> list[str] | None:
        """Every term with nonzero frequency, if the provider can enumerate them."""
        return None


def freq(p: CountProvider, x: str) -> int:
    return p.freq(x)


def joint_freq(p: CountProvider, x: str, y: str) -> int:
    return p.joint_freq(x, y)


def page_total(p: CountProvider) -> int:
    return p.page_total()


def normalizer(p: CountProvider, choice: Normalizer = "N") -> float:
    return p.normalizer(choice)


def g_mass(p: CountProvider, x: str, y: str | None = None, normalizer: Normalizer = "N") -> float:
    """Google-distribution mass f(x)/N, or f(x, y)/N for a pair."""
    n = p.normalizer(normalizer)
    f = p.freq(x) if y is None else p.joint_freq(x, y)
    return f / n


# --------------------------------------------------------------------------
# Inverted index
# --------------------------------------------------------------------------

class TermIndex(CountProvider):
    """Inverted index term -> set of page ids, built once and never mutated."""

    def __init__(self, postings: Mapping[str, frozenset], page_ids: Sequence[str],
                 vocab_cap: int = DEFAULT_VOCAB_CAP):
        self._postings = dict(postings)
        self._page_ids = tuple(page_ids)
        self.vocab_cap = vocab_cap
        self._N: int | None = None

    @property
    def M(self) -> int:
        return len(self._page_ids)

    @property
    def N(self) -> int | None:
        if self._N is None and len(self._postings) <= self.vocab_cap:
            self._N = exact_N(self)
        return self._N

    @property
    def page_ids(self) -> tuple[str, ...]:
        return self._page_ids

    def pages(self, term: str) -> frozenset:
        return self._postings.get(normalize_term(term), frozenset())

    def _freq(self, x):
        return len(self._postings.get(x, ()))

    def _joint(self, x, y):
        a = self._postings.get(x)
        b = self._postings.get(y)
        if not a or not b:
            return 0
        if len(a) > len(b):
            a, b = b, a
        return sum(1 for w in a if w in b)

    def vocabulary(self) -> list[str]:
        return sorted(self._postings)

    def terms_per_page(self) -> dict[str, int]:
        counts = Counter()
        for pages in self._postings.values():
            counts.update(pages)
        return {pid: counts.get(pid, 0) for pid in self._page_ids}

    def max_terms_per_page(self) -> int:
        return max(self.terms_per_page().values(), default=0)

    def alpha(self) -> int:
        """Most singleton-plus-doubleton events any one page falls into.

        A page with k distinct terms is counted k + k(k-1)/2 times in N, so
        M <= N <= alpha * M always holds with this alpha.
        """
        k = self.max_terms_per_page()
        return k + k * (k - 1) // 2


def ingest(documents: Iterable[tuple[str, str]], vocab_cap: int = DEFAULT_VOCAB_CAP) -> TermIndex:
    postings: dict[str, set] = {}
    page_ids: list[str] = []
    seen = set()
    for pid, text in documents:
        if pid in seen:
            raise ValueError(f"duplicate page id {pid!r}")
        seen.add(pid)
        page_ids.append(pid)
        for term in set(tokenize(text)):
            postings.setdefault(term, set()).add(pid)
    return TermIndex({t: frozenset(p) for t, p in postings.items()}, page_ids, vocab_cap)


def ingest_dir(path, vocab_cap: int = DEFAULT_VOCAB_CAP, encoding: str = "utf-8") -> TermIndex:
    """Index every regular file in ``path``; the page id is the file name."""
    files = sorted(f for f in Path(path).iterdir() if f.is_file())
    return ingest(((f.name, f.read_text(encoding=encoding)) for f in files), vocab_cap)


def exact_N(index: TermIndex, cap: int | None = None) -> int:
    """Sum of |x| over terms plus |x & y| over unordered term pairs.

    A page with k distinct terms lies in k singleton events and k(k-1)/2
    doubleton events, so the sum is accumulated page by page.
    """
    cap = index.vocab_cap if cap is None else cap
    vocab = index.vocabulary()
    if len(vocab) > cap:
        raise ValueError(f"vocabulary of {len(vocab)} terms exceeds the cap of {cap}; "
                         "use normalizer 'M' (N := M) instead")
    return sum(k + k * (k - 1) // 2 for k in index.terms_per_page().values())


# --------------------------------------------------------------------------
# Snapshots
# --------------------------------------------------------------------------

@dataclass
class CountSnapshot(CountProvider):
    """Static counts, validated against the cardinality inequalities on creation."""

    declared_M: int
    terms: dict[str, int]
    pairs: dict[tuple[str, str], int]
    declared_N: int | None = None

    def __post_init__(self):
        self.pairs = {tuple(sorted(k)): v for k, v in self.pairs.items()}
        validate_counts(self.declared_M, self.declared_N, self.terms, self.pairs)

    @property
    def M(self) -> int:
        return self.declared_M

    @property
    def N(self) -> int | None:
        return self.declared_N

    def _freq(self, x):
        return self.terms.get(x, 0)

    def _joint(self, x, y):
        return self.pairs.get((x, y), 0)

    def vocabulary(self) -> list[str]:
        return sorted(t for t, c in self.terms.items() if c > 0)

    def scaled(self, k: int) -> "CountSnapshot":
        return CountSnapshot(k * self.declared_M, {t: k * c for t, c in self.terms.items()},
                             {p: k * c for p, c in self.pairs.items()},
                             None if self.declared_N is None else k * self.declared_N)


def validate_counts(M: int, N: int | None, terms: Mapping[str, int],
                    pairs: Mapping[tuple[str, str], int]) -> None:
    if M < 0:
        raise SnapshotError(f"M must be >= 0, got {M}")
    for t, c in terms.items():
        if normalize_term(t) != t:
            raise SnapshotError(f"term {t!r} is not normalized")
        if not 0 <= c <= M:
            raise SnapshotError(f"violation: 0 <= f({t}) <= M fails with f={c}, M={M}")
    for (a, b), c in pairs.items():
        if a >= b:
            raise SnapshotError(f"pair ({a}, {b}) must name two distinct terms")
        fa, fb = terms.get(a, 0), terms.get(b, 0)
        if not 0 <= c <= min(fa, fb):
            raise SnapshotError(
                f"violation: f({a},{b}) <= min(f({a}), f({b})) fails with ({c}, {fa}, {fb})")
        if c < fa + fb - M:
            raise SnapshotError(
                f"violation: f({a},{b}) >= f({a}) + f({b}) - M fails with ({c}, {fa}, {fb}), M={M}")
    if N is not None:
        top = max(terms.values(), default=0)
        if N < 1 or N < top:
            raise SnapshotError(f"N={N} must be >= 1 and >= every f(x) (max {top})")


def snapshot_from_provider(p: CountProvider, terms: Sequence[str] | None = None,
                           include_N: bool = True) -> CountSnapshot:
    """Freeze the counts of ``terms`` (default: the provider's vocabulary)."""
    if terms is None:
        terms = p.vocabulary()
        if terms is None:
            raise ValueError("provider cannot enumerate its vocabulary; pass an explicit term list")
    terms = sorted({normalize_term(t) for t in terms})
    tf = {t: p.freq(t) for t in terms}
    if isinstance(p, TermIndex):
        pf = _index_pairs(p, set(terms))
    else:
        pf = {}
        for a, b in itertools.combinations(terms, 2):
            c = p.joint_freq(a, b)
            if c:
                pf[(a, b)] = c
    N = None
    if include_N:
        try:
            N = p.N
        except ValueError:
            N = None
    return CountSnapshot(p.M, tf, pf, N)


def _index_pairs(index: TermIndex, keep: set) -> dict[tuple[str, str], int]:
    by_page: dict[str, list[str]] = {}
    for t in keep:
        for pid in index._postings.get(t, ()):
            by_page.setdefault(pid, []).append(t)
    pairs: Counter = Counter()
    for ts in by_page.values():
        pairs.update(itertools.combinations(sorted(ts), 2))
    return dict(pairs)


def dumps_snapshot(p: CountProvider, terms: Sequence[str] | None = None) -> str:
    snap = p if isinstance(p, CountSnapshot) and terms is None else snapshot_from_provider(p, terms)
    n_field = "same-as-M" if snap.declared_N is None else str(snap.declared_N)
    lines = [f"{SNAPSHOT_HEADER} M={snap.declared_M} N={n_field}"]
    lines += [f"t {t} {snap.terms[t]}" for t in sorted(snap.terms)]
    lines += [f"p {a} {b} {c}" for (a, b), c in sorted(snap.pairs.items()) if c > 0]
    return "\n".join(lines) + "\n"


def loads_snapshot(text: str) -> CountSnapshot:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SnapshotError("empty snapshot")
    m = re.fullmatch(re.escape(SNAPSHOT_HEADER) + r" M=(\d+) N=(\d+|same-as-M)", lines[0])
    if not m:
        raise SnapshotError(f"bad header {lines[0]!r}; expected '{SNAPSHOT_HEADER} M=<int> N=<int|same-as-M>'")
    M = int(m.group(1))
    N = None if m.group(2) == "same-as-M" else int(m.group(2))
    terms: dict[str, int] = {}
    pairs: dict[tuple[str, str], int] = {}
    for k, line in enumerate(lines[1:], start=2):
        parts = line.split(" ")
        try:
            if parts[0] == "t" and len(parts) == 3:
                t, c = parts[1], _count(parts[2])
                if t in terms:
                    raise SnapshotError(f"duplicate term {t!r}")
                terms[t] = c
            elif parts[0] == "p" and len(parts) == 4:
                a, b, c = parts[1], parts[2], _count(parts[3])
                if not a < b:
                    raise SnapshotError(f"pair terms must satisfy termA < termB, got {a!r} {b!r}")
                if (a, b) in pairs:
                    raise SnapshotError(f"duplicate pair ({a}, {b})")
                pairs[(a, b)] = c
            else:
                raise SnapshotError(f"unrecognised record {line!r}")
        except SnapshotError as exc:
            raise SnapshotError(f"line {k}: {exc}") from None
    return CountSnapshot(M, terms, pairs, N)


def _count(s: str) -> int:
    if not s.isdigit():
        raise SnapshotError(f"count {s!r} is not a non-negative integer")
    return int(s)


def save_snapshot(p: CountProvider, path, terms: Sequence[str] | None = None) -> None:
    Path(path).write_text(dumps_snapshot(p, terms), encoding="utf-8")


def load_snapshot(path) -> CountSnapshot:
    return loads_snapshot(Path(path).read_text(encoding="utf-8"))
