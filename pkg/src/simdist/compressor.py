"""Compressors used as stand-ins for Kolmogorov complexity.

Every compressor exposes ``compress(bytes) -> bytes``; only the length of the
output matters to the distances built on top. The built-in ``LZSSCompressor``
is dependency-free so the test suite runs hermetically; zlib, bz2, lzma and
PPMd (via the optional ``pyppmd`` package) attach as adapters.
"""
from __future__ import annotations

import bz2
import itertools
import lzma
import statistics
import zlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union


class CompressorError(RuntimeError):
    """A compression backend failed or produced an impossible result."""


@dataclass(frozen=True)
class Blob:
    """A labeled, immutable byte sequence."""

    label: str
    data: bytes = field(repr=False)

    def __post_init__(self):
        if not isinstance(self.data, (bytes, bytearray, memoryview)):
            raise TypeError(f"blob {self.label!r}: data must be bytes-like")
        object.__setattr__(self, "data", bytes(self.data))

    def __len__(self):
        return len(self.data)


BytesLike = Union[Blob, bytes, bytearray, memoryview]


def as_bytes(x: BytesLike) -> bytes:
    if isinstance(x, Blob):
        return x.data
    return bytes(x)


class Compressor(ABC):
    """Base class. Configuration is fixed at construction time."""

    name: str = "abstract"

    @abstractmethod
    def compress(self, data: bytes) -> bytes:
        ...

    @property
    def window(self) -> int | None:
        """Largest back-reference distance, or None when not window-limited."""
        return None

    def describe(self) -> dict:
        return {"name": self.name}

    def compressed_length(self, data: bytes) -> int:
        try:
            out = self.compress(data)
        except CompressorError:
            raise
        except Exception as exc:  # backend failure
            raise CompressorError(f"{self.name} failed: {exc}") from exc
        if not out:
            raise CompressorError(f"{self.name} returned empty output")
        return len(out)

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.describe().items() if k != "name")
        return f"{type(self).__name__}({args})"


# --------------------------------------------------------------------------
# Built-in LZSS codec
# --------------------------------------------------------------------------

_MAGIC = b"SL\x01"
_MIN_MATCH = 4
_MAX_MATCH = _MIN_MATCH + 255
_HEADER_SIZE = len(_MAGIC) + 4


def _match_length(data: bytes, cand: int, pos: int, limit: int) -> int:
    n = 0
    while n + 16 <= limit and data[cand + n:cand + n + 16] == data[pos + n:pos + n + 16]:
        n += 16
    while n < limit and data[cand + n] == data[pos + n]:
        n += 1
    return n


class LZSSCompressor(Compressor):
    """Greedy LZSS with hash chains.

    Stream layout: ``b"SL\\x01"``, the uncompressed length as a 4-byte
    big-endian integer, then groups of one flag byte followed by up to eight
    tokens. A clear flag bit is a literal byte; a set bit is a 3-byte match
    ``(offset:16, length-4:8)``. Offsets reach back at most ``window`` bytes
    (65535 by default), match lengths run from 4 to 259.

    ``level`` (1-9) bounds how many previous positions are tried per byte.
    """

    name = "builtin"

    def __init__(self, level: int = 6, window: int = 65535):
        if not 1 <= level <= 9:
            raise ValueError("level must be in 1..9")
        if not _MIN_MATCH < window <= 65535:
            raise ValueError("window must be in 5..65535")
        self._level = level
        self._window = window
        self._chain = 4 * level

    @property
    def window(self) -> int:
        return self._window

    @property
    def level(self) -> int:
        return self._level

    def describe(self) -> dict:
        return {"name": self.name, "level": self._level, "window": self._window}

    def compress(self, data: bytes) -> bytes:
        data = bytes(data)
        n = len(data)
        if n >= 1 << 32:
            raise CompressorError("input too large for the builtin codec")
        out = bytearray(_MAGIC)
        out += n.to_bytes(4, "big")
        heads: dict[bytes, list[int]] = {}
        window, chain = self._window, self._chain
        pos = 0
        flag_at = -1
        bit = 8
        while pos < n:
            if bit == 8:
                flag_at = len(out)
                out.append(0)
                bit = 0
            best_len = 0
            best_off = 0
            if pos + _MIN_MATCH <= n:
                key = data[pos:pos + _MIN_MATCH]
                cands = heads.get(key)
                if cands:
                    limit = min(_MAX_MATCH, n - pos)
                    tried = 0
                    for cand in reversed(cands):
                        off = pos - cand
                        if off > window or tried >= chain:
                            break
                        tried += 1
                        length = _match_length(data, cand, pos, limit)
                        if length > best_len:
                            best_len, best_off = length, off
                            if length == limit:
                                break
            if best_len >= _MIN_MATCH:
                out[flag_at] |= 1 << bit
                out += best_off.to_bytes(2, "big")
                out.append(best_len - _MIN_MATCH)
                step = best_len
            else:
                out.append(data[pos])
                step = 1
            stop = min(pos + step, n - _MIN_MATCH + 1)
            for p in range(pos, stop):
                heads.setdefault(data[p:p + _MIN_MATCH], []).append(p)
            pos += step
            bit += 1
        return bytes(out)

    @staticmethod
    def decompress(stream: bytes) -> bytes:
        if stream[:len(_MAGIC)] != _MAGIC:
            raise CompressorError("not a builtin LZSS stream")
        size = int.from_bytes(stream[len(_MAGIC):_HEADER_SIZE], "big")
        out = bytearray()
        i = _HEADER_SIZE
        while len(out) < size:
            flags = stream[i]
            i += 1
            for bit in range(8):
                if len(out) >= size:
                    break
                if flags >> bit & 1:
                    off = int.from_bytes(stream[i:i + 2], "big")
                    length = stream[i + 2] + _MIN_MATCH
                    i += 3
                    start = len(out) - off
                    for k in range(length):
                        out.append(out[start + k])
                else:
                    out.append(stream[i])
                    i += 1
        return bytes(out)


# --------------------------------------------------------------------------
# Adapters for external codecs
# --------------------------------------------------------------------------

class ZlibCompressor(Compressor):
    """Deflate (the gzip family); 32 KiB window."""

    name = "gzip"

    def __init__(self, level: int = 9):
        self._level = level

    @property
    def window(self) -> int:
        return 32768

    def describe(self):
        return {"name": self.name, "level": self._level}

    def compress(self, data):
        return zlib.compress(data, self._level)


class Bz2Compressor(Compressor):
    """Burrows-Wheeler block sorting; block size is ``level * 100 kB``."""

    name = "bzip2"

    def __init__(self, level: int = 9):
        self._level = level

    @property
    def window(self) -> int:
        return self._level * 100_000

    def describe(self):
        return {"name": self.name, "level": self._level}

    def compress(self, data):
        return bz2.compress(data, self._level)


class LzmaCompressor(Compressor):
    name = "lzma"

    def __init__(self, level: int = 9):
        self._level = level

    def describe(self):
        return {"name": self.name, "level": self._level}

    def compress(self, data):
        return lzma.compress(data, format=lzma.FORMAT_XZ, preset=self._level)


class PPMCompressor(Compressor):
    """PPMd variant H through the optional ``pyppmd`` package."""

    name = "ppm"

    def __init__(self, order: int = 6, mem_mb: int = 16):
        try:
            import pyppmd
        except ImportError as exc:
            raise CompressorError("the ppm codec needs the 'pyppmd' package") from exc
        self._ppmd = pyppmd
        self._order = order
        self._mem = mem_mb << 20

    def describe(self):
        return {"name": self.name, "order": self._order, "mem_mb": self._mem >> 20}

    def compress(self, data):
        # one-shot API keeps model state per call
        return self._ppmd.compress(data, max_order=self._order, mem_size=self._mem)


COMPRESSORS = {
    "builtin": LZSSCompressor,
    "gzip": ZlibCompressor,
    "bzip2": Bz2Compressor,
    "lzma": LzmaCompressor,
    "ppm": PPMCompressor,
}


def get_compressor(name: str, **kwargs) -> Compressor:
    try:
        cls = COMPRESSORS[name]
    except KeyError:
        raise ValueError(f"unknown compressor {name!r}; choose from {sorted(COMPRESSORS)}") from None
    return cls(**kwargs)


def compressed_length(c: Compressor, x: BytesLike) -> int:
    """Length in bytes of the compressed form of ``x``."""
    return c.compressed_length(as_bytes(x))


def concat_length(c: Compressor, x: BytesLike, y: BytesLike) -> int:
    """Compressed length of ``x`` followed by ``y``."""
    return c.compressed_length(as_bytes(x) + as_bytes(y))


# --------------------------------------------------------------------------
# Empirical normality check
# --------------------------------------------------------------------------

@dataclass
class Deviation:
    """Max and mean of a deviation, in bytes and relative to max(C(x), C(y))."""

    max_bytes: float
    mean_bytes: float
    max_fraction: float
    mean_fraction: float

    @classmethod
    def from_pairs(cls, values: Sequence[tuple[float, float]]) -> "Deviation":
        abs_ = [v for v, _ in values]
        rel = [v / s for v, s in values]
        return cls(max(abs_), statistics.fmean(abs_), max(rel), statistics.fmean(rel))


@dataclass
class NormalityReport:
    compressor: dict
    n_samples: int
    idempotency: Deviation
    monotonicity: Deviation
    symmetry: Deviation
    monotonicity_violations: list[tuple[str, str, int]]
    oversize_labels: list[str]

    def rows(self) -> list[tuple[str, Deviation]]:
        return [("idempotency", self.idempotency),
                ("monotonicity", self.monotonicity),
                ("symmetry", self.symmetry)]

    def format_table(self) -> str:
        lines = [f"compressor: {self.compressor}", f"samples: {self.n_samples}",
                 f"{'property':<14}{'max_bytes':>12}{'mean_bytes':>12}{'max_frac':>12}{'mean_frac':>12}"]
        for name, d in self.rows():
            lines.append(f"{name:<14}{d.max_bytes:>12.1f}{d.mean_bytes:>12.2f}"
                         f"{d.max_fraction:>12.5f}{d.mean_fraction:>12.5f}")
        lines.append(f"monotonicity violations: {len(self.monotonicity_violations)}")
        for x, y, amount in self.monotonicity_violations:
            lines.append(f"  C({x}+{y}) < C({x}) by {amount} bytes")
        if self.oversize_labels:
            lines.append("samples larger than the codec window (idempotency degrades): "
                         + ", ".join(self.oversize_labels))
        return "\n".join(lines)


def check_normality(c: Compressor, samples: Iterable[Blob]) -> NormalityReport:
    """Measure how far ``c`` is from an ideal compressor on ``samples``.

    Idempotency is |C(xx) - C(x)| per sample; monotonicity is the shortfall
    max(0, C(x) - C(xy)) per ordered pair, with every strict violation also
    listed; symmetry is |C(xy) - C(yx)| per unordered pair.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("check_normality needs at least 2 samples")
    single = [compressed_length(c, s) for s in samples]

    idem = []
    for s, cs in zip(samples, single):
        idem.append((abs(concat_length(c, s, s) - cs), cs))

    mono, sym, violations = [], [], []
    for i, j in itertools.combinations(range(len(samples)), 2):
        x, y = samples[i], samples[j]
        cxy = concat_length(c, x, y)
        cyx = concat_length(c, y, x)
        scale = max(single[i], single[j])
        for (a, ca), (b, cab) in (((x, single[i]), (y, cxy)), ((y, single[j]), (x, cyx))):
            short = ca - cab
            if short > 0:
                violations.append((a.label, b.label, short))
            mono.append((max(0, short), scale))
        sym.append((abs(cxy - cyx), scale))

    window = c.window
    oversize = [s.label for s in samples if window is not None and len(s) > window]
    return NormalityReport(
        compressor=c.describe(),
        n_samples=len(samples),
        idempotency=Deviation.from_pairs(idem),
        monotonicity=Deviation.from_pairs(mono),
        symmetry=Deviation.from_pairs(sym),
        monotonicity_violations=violations,
        oversize_labels=oversize,
    )
