import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from simdist.matrix import DistanceMatrix, MatrixFormatError, format_value


def test_text_format_exact():
    dm = DistanceMatrix(("a", "b"), np.array([[0.0, 1 / 3], [1 / 3, math.inf]]))
    assert dm.to_text() == "simdist-matrix v1 n=2\na\tb\n0\t0.333333333\n0.333333333\tinf\n"


def test_nine_significant_digits():
    assert format_value(0.123456789012) == "0.123456789"
    assert format_value(1234.56789012) == "1234.56789"
    assert format_value(math.inf) == "inf"
    with pytest.raises(ValueError):
        format_value(math.nan)


finite = st.floats(min_value=-2, max_value=1e6, allow_nan=False, allow_infinity=False)


@given(st.integers(2, 6).flatmap(lambda n: st.lists(st.one_of(finite, st.just(math.inf)),
                                                    min_size=n * n, max_size=n * n)))
def test_text_roundtrip_is_bit_exact(vals):
    n = int(round(len(vals) ** 0.5))
    dm = DistanceMatrix(tuple(f"l{i}" for i in range(n)), np.array(vals).reshape(n, n))
    text = dm.to_text()
    again = DistanceMatrix.from_text(text)
    assert again.to_text() == text
    assert again.labels == dm.labels


def test_reader_rejects_bad_input():
    with pytest.raises(MatrixFormatError):
        DistanceMatrix.from_text("nope\n")
    with pytest.raises(MatrixFormatError):
        DistanceMatrix.from_text("simdist-matrix v1 n=2\na\tb\n0\t1\n")
    with pytest.raises(MatrixFormatError):
        DistanceMatrix.from_text("simdist-matrix v1 n=2\na\ta\n0\t1\n1\t0\n")
    with pytest.raises(MatrixFormatError):
        DistanceMatrix.from_text("simdist-matrix v1 n=2\na\tb\n0\tnan\n1\t0\n")


def test_csv_and_json():
    dm = DistanceMatrix(("a", "b"), np.array([[0.0, math.inf], [math.inf, 0.0]]))
    assert dm.to_csv().splitlines()[1] == "a,0,inf"
    data = json.loads(dm.to_json())
    assert data["labels"] == ["a", "b"] and data["values"][0] == [0.0, "inf"]


def test_validation():
    with pytest.raises(ValueError):
        DistanceMatrix(("a", "b"), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        DistanceMatrix(("a\tb", "c"), np.zeros((2, 2)))
    dm = DistanceMatrix(("a", "b"), np.zeros((2, 2)))
    with pytest.raises(ValueError):
        dm.values[0, 0] = 1.0


def test_infinite_pairs_and_submatrix():
    v = np.array([[0, 1, math.inf], [1, 0, 2], [math.inf, 2, 0]], dtype=float)
    dm = DistanceMatrix(("a", "b", "c"), v)
    assert dm.infinite_pairs() == [("a", "c")]
    assert dm.submatrix(["c", "b"]).values.tolist() == [[0, 2], [2, 0]]
