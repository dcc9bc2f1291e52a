"""Coefficient values for truncated series: complex scalars, vectors and matrices.

Two numeric modes share one interface: double-precision complex (the default)
and exact rational-complex (used by golden tests and the Tauberian decisions,
where verdicts must not depend on floating-point ties).  A value is a plain
``complex``/:class:`RationalComplex` scalar, or a numpy array of those with
ndim 1 (vector) or 2 (matrix).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

import numpy as np

Shape = tuple[int, ...]

_SCALAR = (int, float, complex, Fraction)


class RationalComplex:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, value) -> "RationalComplex":
        if isinstance(value, RationalComplex):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        return cls(Fraction(value))

    def __add__(self, other):
        if isinstance(other, RationalComplex):
            return RationalComplex(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return RationalComplex(self.re + other, self.im)
        if isinstance(other, (float, complex)):
            return complex(self) + other
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, RationalComplex):
            return RationalComplex(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, (int, Fraction)):
            return RationalComplex(self.re * other, self.im * other)
        if isinstance(other, (float, complex)):
            return complex(self) * other
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalComplex(self.re / other, self.im / other)
        if isinstance(other, RationalComplex):
            den = other.re * other.re + other.im * other.im
            if den == 0:
                raise ZeroDivisionError("division by zero RationalComplex")
            return self * RationalComplex(other.re / den, -other.im / den)
        if isinstance(other, (float, complex)):
            return complex(self) / other
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, RationalComplex):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, (float, complex)):
            return complex(self) == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __abs__(self) -> float:
        return math.hypot(float(self.re), float(self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def __repr__(self) -> str:
        if self.im == 0:
            return f"RationalComplex({self.re})"
        return f"RationalComplex({self.re}, {self.im})"


Value = Union[complex, RationalComplex, np.ndarray]


def is_scalar_shape(shape: Shape) -> bool:
    return shape == ()


def _coerce_scalar(raw, exact: bool):
    if exact:
        return RationalComplex.coerce(raw)
    if isinstance(raw, RationalComplex):
        return complex(raw)
    return complex(raw)


def as_value(raw, shape: Shape, exact: bool = False) -> Value:
    """Coerce ``raw`` (number, nested list or array) to a canonical value."""
    if shape == ():
        if isinstance(raw, np.ndarray):
            if raw.shape != ():
                raise ValueError(f"expected scalar, got array of shape {raw.shape}")
            raw = raw.item()
        if not isinstance(raw, _SCALAR + (RationalComplex,)):
            raise TypeError(f"cannot coerce {type(raw).__name__} to scalar value")
        return _coerce_scalar(raw, exact)
    arr = np.asarray(raw, dtype=object)
    if arr.shape != shape:
        raise ValueError(f"value shape {arr.shape} does not match declared {shape}")
    flat = [_coerce_scalar(x, exact) for x in arr.ravel()]
    if exact:
        out = np.empty(shape, dtype=object)
        out.ravel()[:] = flat
        return out
    return np.array(flat, dtype=complex).reshape(shape)


def value_zero(shape: Shape, exact: bool = False) -> Value:
    if shape == ():
        return RationalComplex() if exact else 0j
    if exact:
        out = np.empty(shape, dtype=object)
        out.ravel()[:] = [RationalComplex() for _ in range(out.size)]
        return out
    return np.zeros(shape, dtype=complex)


def value_eye(n: int, exact: bool = False) -> Value:
    out = value_zero((n, n), exact)
    one = RationalComplex(1) if exact else 1 + 0j
    for i in range(n):
        out[i, i] = one
    return out


def value_shape(v: Value) -> Shape:
    return v.shape if isinstance(v, np.ndarray) else ()


def value_is_zero(v: Value) -> bool:
    if isinstance(v, np.ndarray):
        return all(not bool(x) if isinstance(x, RationalComplex) else x == 0 for x in v.ravel())
    if isinstance(v, RationalComplex):
        return not bool(v)
    return v == 0


def value_eq(a: Value, b: Value) -> bool:
    sa, sb = value_shape(a), value_shape(b)
    if sa != sb:
        return False
    if sa == ():
        return a == b
    return all(x == y for x, y in zip(np.asarray(a).ravel(), np.asarray(b).ravel()))


def value_add(a: Value, b: Value) -> Value:
    return a + b


def value_neg(a: Value) -> Value:
    return -a


def value_scale(c, v: Value) -> Value:
    if isinstance(v, np.ndarray) and v.dtype == object:
        out = np.empty(v.shape, dtype=object)
        out.ravel()[:] = [c * x for x in v.ravel()]
        return out
    return c * v


def mul_shape(sa: Shape, sb: Shape) -> Shape:
    """Result shape of a coefficient product; raises on incompatible kinds."""
    if sa == ():
        return sb
    if sb == ():
        return sa
    if len(sa) == 2 and len(sb) == 2 and sa[1] == sb[0]:
        return (sa[0], sb[1])
    if len(sa) == 2 and len(sb) == 1 and sa[1] == sb[0]:
        return (sa[0],)
    raise ValueError(f"incompatible value shapes for product: {sa} x {sb}")


def value_mul(a: Value, b: Value) -> Value:
    sa, sb = value_shape(a), value_shape(b)
    if sa == ():
        return value_scale(a, b) if sb != () else a * b
    if sb == ():
        return value_scale(b, a)
    return np.asarray(a).dot(np.asarray(b))


def value_norm(v: Value) -> float:
    """Euclidean/Frobenius norm as a float (exact values are rounded)."""
    if isinstance(v, np.ndarray):
        return math.sqrt(sum(abs(complex(x)) ** 2 for x in v.ravel()))
    return abs(complex(v))


def to_complex(v: Value) -> Union[complex, np.ndarray]:
    if isinstance(v, np.ndarray):
        return np.array([complex(x) for x in v.ravel()], dtype=complex).reshape(v.shape)
    return complex(v)


def solve_linear(mat: Value, rhs: Value, exact: bool):
    """Solve mat @ x = rhs for a square matrix value and vector value."""
    n = value_shape(mat)[0]
    if not exact:
        m = np.asarray(mat, dtype=complex)
        if n > 0:
            cond = np.linalg.cond(m)
            if not np.isfinite(cond) or cond > 1e12:
                raise np.linalg.LinAlgError("matrix is singular or near-singular")
        return np.linalg.solve(m, np.asarray(rhs, dtype=complex))
    # exact Gaussian elimination over RationalComplex
    a = [[RationalComplex.coerce(mat[i, j]) for j in range(n)] for i in range(n)]
    b = [RationalComplex.coerce(rhs[i]) for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if bool(a[r][col])), None)
        if pivot is None:
            raise np.linalg.LinAlgError("matrix is singular (exact mode)")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        inv = RationalComplex(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        b[col] = b[col] * inv
        for r in range(n):
            if r != col and bool(a[r][col]):
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
                b[r] = b[r] - factor * b[col]
    out = np.empty(n, dtype=object)
    out[:] = b
    return out


def matrix_power_is_zero(mat: Value, power: int) -> bool:
    """Exact nilpotency check: mat**power == 0 (works in both modes)."""
    acc = np.asarray(mat)
    for _ in range(power - 1):
        acc = acc.dot(np.asarray(mat))
    return all(not bool(x) if isinstance(x, RationalComplex) else x == 0 for x in acc.ravel())
