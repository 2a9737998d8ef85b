import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabi_spectra.xreal import ExtendedReal, relative_difference

finite = st.floats(-1e150, 1e150, allow_nan=False, allow_infinity=False)
offsets = st.integers(-20000, 20000)


def shifted(x: float, k: int) -> ExtendedReal:
    return ExtendedReal(x, k)


@given(finite)
def test_float_round_trip(x):
    assert float(ExtendedReal.from_float(x)) == x


@given(finite)
def test_normalized_mantissa(x):
    v = ExtendedReal.from_float(x)
    if x == 0:
        assert v.mant == 0 and v.exp == 0
    else:
        assert 1 <= abs(v.mant) < 2


@given(finite, finite)
def test_arithmetic_matches_float(a, b):
    ea, eb = ExtendedReal.from_float(a), ExtendedReal.from_float(b)
    assert float(ea * eb) == pytest.approx(a * b, rel=1e-15)
    assert float(ea + eb) == pytest.approx(a + b, rel=1e-15, abs=1e-300)
    assert float(ea - eb) == pytest.approx(a - b, rel=1e-15, abs=1e-300)
    if b != 0:
        assert float(ea / eb) == pytest.approx(a / b, rel=1e-15)


@given(finite, finite, offsets)
def test_common_exponent_shift_is_exact(a, b, k):
    # values far outside float range behave like scaled floats
    s = shifted(a, k) + shifted(b, k)
    ref = ExtendedReal.from_float(a + b)
    assert s.sign() == np.sign(a + b)
    if a + b != 0:
        assert s.exp - k == ref.exp
        assert s.mant == pytest.approx(ref.mant, rel=1e-15)


@given(finite.filter(lambda v: v != 0), offsets, finite.filter(lambda v: v != 0), offsets)
def test_log2_of_product(a, ka, b, kb):
    p = shifted(a, ka) * shifted(b, kb)
    expected = math.log2(abs(a)) + ka + math.log2(abs(b)) + kb
    assert p.log2abs() == pytest.approx(expected, abs=1e-9)


@given(st.lists(finite, min_size=1, max_size=30), offsets)
def test_sum_matches_math_fsum(values, k):
    arr = ExtendedReal(np.array(values), k)
    total = arr.sum()
    ref = math.fsum(values)
    scale = max(abs(v) for v in values)
    got = float(ExtendedReal(total.mant, total.exp - k))
    assert abs(got - ref) <= 1e-13 * max(scale, 1e-300) * len(values)


def test_zero_handling():
    z = ExtendedReal.zeros(3)
    assert np.all(z.iszero())
    assert np.all(np.isneginf(z.log2abs()))
    assert float((z + ExtendedReal.from_float(np.ones(3)))[1]) == 1.0
    assert float(ExtendedReal.from_float(np.zeros(4)).sum()) == 0.0


def test_saturation_and_relative_difference():
    huge = ExtendedReal(1.5, 5000)
    assert float(huge) == math.inf
    assert float(ExtendedReal(1.5, -5000)) == 0.0
    a = ExtendedReal(np.array([1.0, 3.0]), 4000)
    b = ExtendedReal(np.array([1.0, 3.0 * (1 + 1e-12)]), 4000)
    d = relative_difference(a, b)
    assert d[0] == 0.0
    assert d[1] == pytest.approx(1e-12, rel=1e-3)


def test_stack_and_index():
    rows = ExtendedReal.stack([ExtendedReal.from_float(np.array([1.0, 2.0])),
                               ExtendedReal.from_float(np.array([3.0, 4.0]))])
    assert rows.shape == (2, 2)
    np.testing.assert_array_equal(rows.sum(axis=0).to_float(), [4.0, 6.0])
    np.testing.assert_array_equal(rows.sum(axis=1).to_float(), [3.0, 7.0])
    assert float(rows[1, 0]) == 3.0
