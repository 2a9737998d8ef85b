"""Extended-range reals: float64 mantissa with a separate int64 power-of-two exponent.

Values are kept normalized as ``mant * 2**exp`` with ``1 <= |mant| < 2`` (or
``mant == exp == 0``), so products of factorial-sized and factorially-small
factors never overflow or underflow. Precision is plain float64; only the
range is extended. Everything is vectorized over numpy arrays; a scalar is a
0-d array.
"""
from __future__ import annotations

import numpy as np


def _normalize(mant, exp):
    mant = np.asarray(mant, dtype=float)
    exp = np.asarray(exp, dtype=np.int64)
    m, e = np.frexp(mant)  # m in [0.5, 1)
    zero = m == 0
    m = np.where(zero, 0.0, m * 2.0)
    e = np.where(zero, 0, exp + e.astype(np.int64) - 1)
    return m, e.astype(np.int64)


class ExtendedReal:
    __slots__ = ("mant", "exp")
    __array_priority__ = 100  # so ndarray * ExtendedReal defers to __rmul__

    def __init__(self, mant, exp=0, *, normalized: bool = False):
        if normalized:
            self.mant = np.asarray(mant, dtype=float)
            self.exp = np.asarray(exp, dtype=np.int64)
        else:
            self.mant, self.exp = _normalize(mant, np.broadcast_to(exp, np.shape(mant)))

    # construction -----------------------------------------------------
    @classmethod
    def from_float(cls, x) -> "ExtendedReal":
        return cls(x, 0)

    @classmethod
    def zeros(cls, shape) -> "ExtendedReal":
        return cls(np.zeros(shape), np.zeros(shape, dtype=np.int64), normalized=True)

    @classmethod
    def stack(cls, items, axis: int = 0) -> "ExtendedReal":
        items = list(items)
        return cls(
            np.stack([i.mant for i in items], axis=axis),
            np.stack([i.exp for i in items], axis=axis),
            normalized=True,
        )

    # array protocol ---------------------------------------------------
    @property
    def shape(self):
        return self.mant.shape

    def __len__(self):
        return len(self.mant)

    def __getitem__(self, idx) -> "ExtendedReal":
        return ExtendedReal(self.mant[idx], self.exp[idx], normalized=True)

    def __repr__(self):
        if self.mant.ndim == 0:
            return f"ExtendedReal({float(self.mant)!r} * 2**{int(self.exp)})"
        return f"ExtendedReal(shape={self.shape})"

    # arithmetic -------------------------------------------------------
    def __neg__(self):
        return ExtendedReal(-self.mant, self.exp, normalized=True)

    def __abs__(self):
        return ExtendedReal(np.abs(self.mant), self.exp, normalized=True)

    def __mul__(self, other):
        if isinstance(other, ExtendedReal):
            return ExtendedReal(self.mant * other.mant, self.exp + other.exp)
        return ExtendedReal(self.mant * np.asarray(other, dtype=float), self.exp)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ExtendedReal):
            return ExtendedReal(self.mant / other.mant, self.exp - other.exp)
        return ExtendedReal(self.mant / np.asarray(other, dtype=float), self.exp)

    def __add__(self, other):
        if not isinstance(other, ExtendedReal):
            other = ExtendedReal.from_float(other)
        a_zero = self.mant == 0
        b_zero = other.mant == 0
        e = np.maximum(np.where(a_zero, other.exp, self.exp), np.where(b_zero, self.exp, other.exp))
        m = _shift(self.mant, self.exp - e) + _shift(other.mant, other.exp - e)
        return ExtendedReal(m, e)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, ExtendedReal):
            other = ExtendedReal.from_float(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def sum(self, axis: int = 0) -> "ExtendedReal":
        """Sum along an axis, aligning every term to the largest exponent."""
        exp = np.where(self.mant == 0, np.iinfo(np.int64).min // 2, self.exp)
        top = np.max(exp, axis=axis, keepdims=True)
        top = np.where(top == np.iinfo(np.int64).min // 2, 0, top)
        m = _shift(self.mant, exp - top).sum(axis=axis)
        return ExtendedReal(m, np.squeeze(top, axis=axis))

    # inspection -------------------------------------------------------
    def sign(self) -> np.ndarray:
        return np.sign(self.mant)

    def log2abs(self) -> np.ndarray:
        """log2 |value|; -inf for zero."""
        with np.errstate(divide="ignore"):
            return np.log2(np.abs(self.mant)) + self.exp

    def to_float(self) -> np.ndarray:
        """Plain float64 value; saturates to +-inf / 0 outside the float range."""
        e = np.clip(self.exp, -2000, 2000).astype(np.int64)
        with np.errstate(over="ignore", under="ignore"):
            return np.ldexp(self.mant, e)

    def __float__(self):
        return float(self.to_float())

    def iszero(self) -> np.ndarray:
        return self.mant == 0


def _shift(mant, delta):
    """mant * 2**delta for delta <= 0, flushing very large shifts to zero."""
    delta = np.maximum(np.asarray(delta), -1100).astype(np.int64)
    return np.ldexp(mant, delta)


def relative_difference(a: ExtendedReal, b: ExtendedReal) -> np.ndarray:
    """|a - b| / max(|a|, |b|), computed without leaving extended range."""
    diff = (a - b).log2abs()
    scale = np.maximum(a.log2abs(), b.log2abs())
    with np.errstate(invalid="ignore"):
        out = np.exp2(diff - scale)
    return np.where(np.isneginf(scale), 0.0, out)
