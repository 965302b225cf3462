"""Normalized compression distance.

    NCD(x, y) = (C(xy) - min(C(x), C(y))) / max(C(x), C(y))

Real compressors are not symmetric in the concatenation order, so by default
C(xy) is taken as the smaller of the two orders (``symmetrization="min"``);
``"raw"`` uses the argument order as given. Values are not clamped unless
asked: excursions slightly outside [0, 1] are a property of the codec.
"""
from __future__ import annotations

import codecs
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from .compressor import Blob, BytesLike, Compressor, as_bytes, compressed_length, concat_length
from .matrix import DistanceMatrix

POLICIES = ("min", "raw")


def _check_policy(symmetrization):
    if symmetrization not in POLICIES:
        raise ValueError(f"symmetrization must be one of {POLICIES}, got {symmetrization!r}")


def ncd_from_lengths(cx: int, cy: int, cxy: int) -> float:
    hi = max(cx, cy)
    if hi <= 0:
        raise ValueError("compressed lengths must be positive")
    return (cxy - min(cx, cy)) / hi


def joint_length(c: Compressor, x: BytesLike, y: BytesLike, symmetrization: str = "min") -> int:
    _check_policy(symmetrization)
    xy = concat_length(c, x, y)
    if symmetrization == "raw":
        return xy
    if as_bytes(x) == as_bytes(y):
        return xy
    return min(xy, concat_length(c, y, x))


def ncd(c: Compressor, x: BytesLike, y: BytesLike, symmetrization: str = "min") -> float:
    return ncd_from_lengths(compressed_length(c, x), compressed_length(c, y),
                            joint_length(c, x, y, symmetrization))


def ncd_matrix(c: Compressor, objects: Sequence[Blob], symmetrization: str = "min",
               workers: int = 1, clamp: bool = False) -> DistanceMatrix:
    """All pairwise NCDs, diagonal included.

    Every C(x) is computed once up front, so entries equal what ``ncd`` returns
    for the same pair. With ``workers > 1`` pairs are compressed on a thread
    pool; results are placed by index so evaluation order does not matter.
    """
    _check_policy(symmetrization)
    objects = list(objects)
    if len(objects) < 2:
        raise ValueError("ncd_matrix needs at least 2 objects")
    labels = [o.label for o in objects]
    if len(set(labels)) != len(labels):
        dup = sorted({lab for lab in labels if labels.count(lab) > 1})
        raise ValueError(f"duplicate labels: {dup}")

    n = len(objects)
    if symmetrization == "min":
        pairs = [(i, j) for i in range(n) for j in range(i, n)]
    else:
        pairs = [(i, j) for i in range(n) for j in range(n)]

    def joint(ij):
        i, j = ij
        return joint_length(c, objects[i], objects[j], symmetrization)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            single = list(pool.map(lambda o: compressed_length(c, o), objects))
            joints = list(pool.map(joint, pairs))
    else:
        single = [compressed_length(c, o) for o in objects]
        joints = [joint(p) for p in pairs]

    values = np.empty((n, n))
    for (i, j), cij in zip(pairs, joints):
        values[i, j] = ncd_from_lengths(single[i], single[j], cij)
        if symmetrization == "min":
            values[j, i] = values[i, j]
    dm = DistanceMatrix(tuple(labels), values)
    return dm.clamped() if clamp else dm


def normalize_text_encoding(data: bytes, label: str = "") -> bytes:
    """Transcode text to NFC UTF-8 so differently encoded copies compare equal.

    UTF-8 (with or without BOM), UTF-16 and UTF-32 with a BOM are recognised.
    Anything else raises ``ValueError`` rather than being guessed at.
    """
    for bom, enc in ((codecs.BOM_UTF32_LE, "utf-32"), (codecs.BOM_UTF32_BE, "utf-32"),
                     (codecs.BOM_UTF8, "utf-8-sig"), (codecs.BOM_UTF16_LE, "utf-16"),
                     (codecs.BOM_UTF16_BE, "utf-16")):
        if data.startswith(bom):
            break
    else:
        enc = "utf-8"
    try:
        text = data.decode(enc)
    except UnicodeDecodeError as exc:
        raise ValueError(f"{label or 'input'}: cannot normalize encoding ({exc.reason})") from None
    return unicodedata.normalize("NFC", text).encode("utf-8")
