"""Truncated bivariate formal power series with scalar/vector/matrix coefficients.

A series stores a sparse map from bidegree ``(n, m)`` to a coefficient value.
``trunc`` is a *total-degree knowledge bound*: coefficients with
``n + m > trunc`` are unknown, never implicitly zero, and every operation
reports results only up to the minimum trunc of its inputs.  Series are
immutable after construction and all operations are pure, so values can be
shared across threads freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .values import (
    RationalComplex,
    Shape,
    Value,
    as_value,
    mul_shape,
    to_complex,
    value_add,
    value_eq,
    value_is_zero,
    value_mul,
    value_neg,
    value_norm,
    value_scale,
    value_zero,
)

Bidegree = tuple[int, int]


@dataclass(frozen=True)
class MonomialIndex:
    """The distinguished monomial x1^p x2^q, p and q positive integers."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"monomial exponents must be >= 1, got ({self.p}, {self.q})")


@dataclass(frozen=True)
class BlowupMap:
    """Monomial substitution from the point blow-up of the origin.

    ``pi1`` with power N maps (x1, x2) -> (x1*x2**N, x2); ``pi2`` with power M
    maps (x1, x2) -> (x1, x1**M*x2).
    """

    axis: str
    power: int = 1

    def __post_init__(self):
        if self.axis not in ("pi1", "pi2"):
            raise ValueError(f"axis must be 'pi1' or 'pi2', got {self.axis!r}")
        if self.power < 1:
            raise ValueError(f"power must be >= 1, got {self.power}")


class BivariateSeries:
    """Sparse truncated series sum a_{n,m} x1^n x2^m with one value kind."""

    __slots__ = ("coeffs", "trunc", "shape", "exact")

    def __init__(self, coeffs: dict, trunc: int, shape: Shape = (), exact: bool = False):
        if trunc < -1:
            raise ValueError(f"trunc must be >= -1, got {trunc}")
        clean = {}
        for (n, m), v in coeffs.items():
            if n < 0 or m < 0:
                raise ValueError(f"negative bidegree ({n}, {m})")
            if n + m > trunc:
                raise ValueError(f"bidegree ({n}, {m}) exceeds trunc {trunc}")
            if not value_is_zero(v):
                clean[(n, m)] = v
        self.coeffs = clean
        self.trunc = trunc
        self.shape = shape
        self.exact = exact

    # ---------------------------------------------------------------- build

    @classmethod
    def zero(cls, trunc: int, shape: Shape = (), exact: bool = False) -> "BivariateSeries":
        return cls({}, trunc, shape, exact)

    @classmethod
    def constant(cls, value, trunc: int, shape: Shape = (), exact: bool = False) -> "BivariateSeries":
        v = as_value(value, shape, exact)
        return cls({(0, 0): v}, trunc, shape, exact)

    @classmethod
    def monomial(cls, n: int, m: int, value, trunc: int, shape: Shape = (), exact: bool = False) -> "BivariateSeries":
        v = as_value(value, shape, exact)
        return cls({(n, m): v}, trunc, shape, exact)

    # ------------------------------------------------------------- accessors

    def coefficient(self, n: int, m: int) -> Value:
        """Coefficient at (n, m); raises beyond trunc where it is unknown."""
        if n + m > self.trunc:
            raise ValueError(f"coefficient ({n}, {m}) is beyond trunc {self.trunc}")
        return self.coeffs.get((n, m), value_zero(self.shape, self.exact))

    def support(self) -> list[Bidegree]:
        return sorted(self.coeffs)

    def component(self, i: int) -> "BivariateSeries":
        """Scalar series of component i of a vector-valued series."""
        if len(self.shape) != 1:
            raise ValueError("component() requires a vector-valued series")
        return BivariateSeries(
            {k: v[i] for k, v in self.coeffs.items()}, self.trunc, (), self.exact
        )

    def entry(self, i: int, j: int) -> "BivariateSeries":
        """Scalar series of entry (i, j) of a matrix-valued series."""
        if len(self.shape) != 2:
            raise ValueError("entry() requires a matrix-valued series")
        return BivariateSeries(
            {k: v[i, j] for k, v in self.coeffs.items()}, self.trunc, (), self.exact
        )

    def column(self, j: int) -> "BivariateSeries":
        """Vector series of column j of a matrix-valued series."""
        if len(self.shape) != 2:
            raise ValueError("column() requires a matrix-valued series")
        return BivariateSeries(
            {k: v[:, j] for k, v in self.coeffs.items()},
            self.trunc,
            (self.shape[0],),
            self.exact,
        )

    def norms(self) -> dict[Bidegree, float]:
        return {k: value_norm(v) for k, v in self.coeffs.items()}

    def valuation(self, tol: float = 0.0) -> int | None:
        """Lowest total degree carrying a coefficient of norm > tol, or None."""
        degs = [n + m for (n, m), v in self.coeffs.items() if value_norm(v) > tol]
        return min(degs) if degs else None

    def is_zero(self) -> bool:
        return not self.coeffs

    # ------------------------------------------------------------ arithmetic

    def _binary_trunc(self, other: "BivariateSeries") -> int:
        return min(self.trunc, other.trunc)

    def __add__(self, other: "BivariateSeries") -> "BivariateSeries":
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch in add: {self.shape} vs {other.shape}")
        t = self._binary_trunc(other)
        out: dict[Bidegree, Value] = {}
        for k, v in self.coeffs.items():
            if k[0] + k[1] <= t:
                out[k] = v
        for k, v in other.coeffs.items():
            if k[0] + k[1] <= t:
                out[k] = value_add(out[k], v) if k in out else v
        return BivariateSeries(out, t, self.shape, self.exact and other.exact)

    def __sub__(self, other: "BivariateSeries") -> "BivariateSeries":
        return self + (-other)

    def __neg__(self) -> "BivariateSeries":
        return BivariateSeries(
            {k: value_neg(v) for k, v in self.coeffs.items()}, self.trunc, self.shape, self.exact
        )

    def scale(self, c) -> "BivariateSeries":
        exact = self.exact and isinstance(c, (int, Fraction, RationalComplex))
        return BivariateSeries(
            {k: value_scale(c, v) for k, v in self.coeffs.items()}, self.trunc, self.shape, exact
        )

    def __mul__(self, other):
        if isinstance(other, BivariateSeries):
            return series_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def shift(self, a: int, b: int) -> "BivariateSeries":
        """Multiply by the exact monomial x1^a x2^b; knowledge extends to trunc+a+b."""
        if a < 0 or b < 0:
            raise ValueError("shift exponents must be >= 0")
        return BivariateSeries(
            {(n + a, m + b): v for (n, m), v in self.coeffs.items()},
            self.trunc + a + b,
            self.shape,
            self.exact,
        )

    def divide_monomial(self, a: int, b: int) -> "BivariateSeries":
        """Exact division by x1^a x2^b; raises if some term is not divisible."""
        for (n, m) in self.coeffs:
            if n < a or m < b:
                raise ValueError(f"term ({n}, {m}) not divisible by x1^{a} x2^{b}")
        return BivariateSeries(
            {(n - a, m - b): v for (n, m), v in self.coeffs.items()},
            self.trunc - a - b,
            self.shape,
            self.exact,
        )

    def truncate(self, new_trunc: int) -> "BivariateSeries":
        if new_trunc > self.trunc:
            raise ValueError(f"cannot extend trunc {self.trunc} to {new_trunc}")
        return BivariateSeries(
            {k: v for k, v in self.coeffs.items() if k[0] + k[1] <= new_trunc},
            new_trunc,
            self.shape,
            self.exact,
        )

    def homogeneous_part(self, degree: int) -> dict[Bidegree, Value]:
        return {k: v for k, v in self.coeffs.items() if k[0] + k[1] == degree}

    def to_float(self) -> "BivariateSeries":
        if not self.exact:
            return self
        return BivariateSeries(
            {k: to_complex(v) for k, v in self.coeffs.items()}, self.trunc, self.shape, False
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        if self.shape != other.shape or self.trunc != other.trunc:
            return False
        if set(self.coeffs) != set(other.coeffs):
            return False
        return all(value_eq(v, other.coeffs[k]) for k, v in self.coeffs.items())

    def __repr__(self) -> str:
        kind = {0: "scalar", 1: "vector", 2: "matrix"}[len(self.shape)]
        return (
            f"BivariateSeries({kind}{list(self.shape) or ''}, trunc={self.trunc}, "
            f"{len(self.coeffs)} terms)"
        )


# -------------------------------------------------------------- module ops


def build_series(entries, trunc: int, shape: Shape = (), exact: bool = False) -> BivariateSeries:
    """Build a series from ((n, m), value) pairs; duplicate bidegrees are summed."""
    acc: dict[Bidegree, Value] = {}
    for (n, m), raw in entries:
        if n + m > trunc:
            raise ValueError(f"bidegree ({n}, {m}) exceeds trunc {trunc}")
        v = as_value(raw, shape, exact)
        acc[(n, m)] = value_add(acc[(n, m)], v) if (n, m) in acc else v
    return BivariateSeries(acc, trunc, shape, exact)


def series_mul(f: BivariateSeries, g: BivariateSeries) -> BivariateSeries:
    """Cauchy product truncated at min(f.trunc, g.trunc)."""
    shape = mul_shape(f.shape, g.shape)
    t = min(f.trunc, g.trunc)
    out: dict[Bidegree, Value] = {}
    for (n1, m1), v1 in f.coeffs.items():
        if n1 + m1 > t:
            continue
        for (n2, m2), v2 in g.coeffs.items():
            n, m = n1 + n2, m1 + m2
            if n + m > t:
                continue
            prod = value_mul(v1, v2)
            out[(n, m)] = value_add(out[(n, m)], prod) if (n, m) in out else prod
    return BivariateSeries(out, t, shape, f.exact and g.exact)


def partial_derivative(f: BivariateSeries, var: str) -> BivariateSeries:
    """Term-wise d/dx1 or d/dx2; the knowledge bound drops by one."""
    if var not in ("x1", "x2"):
        raise ValueError(f"var must be 'x1' or 'x2', got {var!r}")
    out: dict[Bidegree, Value] = {}
    for (n, m), v in f.coeffs.items():
        if var == "x1" and n > 0:
            out[(n - 1, m)] = value_scale(n, v)
        elif var == "x2" and m > 0:
            out[(n, m - 1)] = value_scale(m, v)
    return BivariateSeries(out, f.trunc - 1, f.shape, f.exact)


def euler_derivative(f: BivariateSeries, var: str) -> BivariateSeries:
    """x1*d/dx1 (resp. x2*d/dx2); degree-preserving, trunc unchanged."""
    idx = 0 if var == "x1" else 1
    if var not in ("x1", "x2"):
        raise ValueError(f"var must be 'x1' or 'x2', got {var!r}")
    out = {
        k: value_scale(k[idx], v) for k, v in f.coeffs.items() if k[idx] > 0
    }
    return BivariateSeries(out, f.trunc, f.shape, f.exact)


def pullback_blowup(f: BivariateSeries, bmap: BlowupMap) -> BivariateSeries:
    """Compose with a blow-up substitution; images beyond trunc are dropped."""
    out: dict[Bidegree, Value] = {}
    n_pow = bmap.power
    for (n, m), v in f.coeffs.items():
        if bmap.axis == "pi1":
            tgt = (n, m + n_pow * n)
        else:
            tgt = (n + n_pow * m, m)
        if tgt[0] + tgt[1] <= f.trunc:
            out[tgt] = v
    return BivariateSeries(out, f.trunc, f.shape, f.exact)


def evaluate_truncated(f: BivariateSeries, point: tuple[complex, complex]):
    """Plain evaluation of the stored terms at a point (float complex)."""
    x1, x2 = complex(point[0]), complex(point[1])
    total = value_zero(f.shape, False)
    for (n, m), v in f.coeffs.items():
        total = total + to_complex(v) * (x1**n) * (x2**m)
    return total


def bracket(a: BivariateSeries, b: BivariateSeries) -> BivariateSeries:
    """Matrix commutator a*b - b*a, truncated."""
    if len(a.shape) != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"bracket needs square matrix series, got shape {a.shape}")
    if a.shape != b.shape:
        raise ValueError(f"bracket dimension mismatch: {a.shape} vs {b.shape}")
    return series_mul(a, b) - series_mul(b, a)


def matrix_from_columns(cols: list[BivariateSeries]) -> BivariateSeries:
    """Assemble an (l x l) matrix series whose j-th column is the vector series cols[j]."""
    l = len(cols)
    trunc = min(c.trunc for c in cols)
    exact = all(c.exact for c in cols)
    keys = set()
    for c in cols:
        keys.update(k for k in c.coeffs if k[0] + k[1] <= trunc)
    out: dict[Bidegree, Value] = {}
    for k in keys:
        mat = value_zero((l, l), exact)
        for j, c in enumerate(cols):
            if k in c.coeffs:
                col = c.coeffs[k]
                for i in range(l):
                    mat[i, j] = col[i]
        out[k] = mat
    return BivariateSeries(out, trunc, (l, l), exact)
