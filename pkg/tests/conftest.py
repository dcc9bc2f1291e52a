"""Shared fixtures: benchmark series generators and random series factories."""

from __future__ import annotations

import math

import numpy as np
import pytest

from summtool.series import BivariateSeries, build_series


def poincare_series(trunc: int) -> BivariateSeries:
    """a_{n,m} = (-|n-m|)^min(n,m), a_{0,0} = 0."""
    entries = []
    for n in range(trunc + 1):
        for m in range(trunc + 1 - n):
            if n == 0 and m == 0:
                continue
            a = (-abs(n - m)) ** min(n, m)
            if a != 0:
                entries.append(((n, m), a))
    return build_series(entries, trunc)


def euler_series(trunc: int, sign: int = 1) -> BivariateSeries:
    """sum n! (sign * x1 x2)^n."""
    return build_series(
        [((n, n), math.factorial(n) * sign**n) for n in range(trunc // 2 + 1)], trunc
    )


def geometric_series(trunc: int) -> BivariateSeries:
    return build_series([((n, n), 1.0) for n in range(trunc // 2 + 1)], trunc)


def random_series(
    rng: np.random.Generator,
    trunc: int,
    shape=(),
    n_terms: int = 12,
    exact: bool = False,
) -> BivariateSeries:
    """Sparse series with small Gaussian-integer coefficients (exact in floats)."""
    entries = []
    for _ in range(n_terms):
        n = int(rng.integers(0, trunc + 1))
        m = int(rng.integers(0, trunc + 1 - n))
        if shape == ():
            val = complex(int(rng.integers(-5, 6)), int(rng.integers(-5, 6)))
        else:
            re = rng.integers(-5, 6, size=shape)
            im = rng.integers(-5, 6, size=shape)
            val = re + 1j * im
        entries.append(((n, m), val))
    return build_series(entries, trunc, shape, exact)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


# ------------------------------------------------------- Pfaffian system kits


def constant_rhs_system(p, q, pp, qp, c=2.5, dim=1, trunc=10, exact=False):
    """f1 = f2 = y - c: integrable exactly when p = q = p' = q'."""
    from summtool.pfaffian import PfaffianSystem, YPolynomial

    cvec = [-c] * dim if dim > 1 else [-c]
    const = BivariateSeries.constant(cvec, trunc, (dim,), exact)
    terms = {tuple([0] * dim): const}
    for j in range(dim):
        e_j = tuple(1 if i == j else 0 for i in range(dim))
        unit = [1 if i == j else 0 for i in range(dim)]
        terms[e_j] = BivariateSeries.constant(unit, trunc, (dim,), exact)
    f = YPolynomial(dim, terms)
    return PfaffianSystem(p, q, pp, qp, dim, 1, f, f)


def diagonal_integrable_system(rng, r=1, dim=2, trunc=10, n_extra=3):
    """f1 = f2 = y - c + sum u^a M_a y with u = x1 x2 and p = q = p' = q' = r.

    Diagonal-supported coefficients make both sides commute exactly, so the
    integrability residual vanishes identically.
    """
    from summtool.pfaffian import PfaffianSystem, YPolynomial

    c = rng.integers(-3, 4, size=dim) + 1j * rng.integers(-3, 4, size=dim)
    terms = {tuple([0] * dim): BivariateSeries.constant(list(-c), trunc, (dim,))}
    cols = {}
    for j in range(dim):
        col = {(0, 0): np.eye(dim, dtype=complex)[:, j]}
        for _ in range(n_extra):
            a = int(rng.integers(1, trunc // 2 + 1))
            vec = rng.integers(-2, 3, size=dim).astype(complex)
            key = (a, a)
            col[key] = col.get(key, np.zeros(dim, dtype=complex)) + vec
        cols[j] = col
    for j, col in cols.items():
        e_j = tuple(1 if i == j else 0 for i in range(dim))
        terms[e_j] = BivariateSeries(
            {k: v for k, v in col.items() if not np.all(v == 0)}, trunc, (dim,), False
        )
    f = YPolynomial(dim, terms)
    return PfaffianSystem(r, r, r, r, dim, 1, f, f)


def random_invertible_system(rng, dim, y_degree, trunc, exact=False):
    """Random system with f(0,0,0) = 0 and well-conditioned df/dy(0,0,0)."""
    from summtool.pfaffian import PfaffianSystem, YPolynomial
    import itertools

    def rand_vec_series(zero_at_origin):
        entries = []
        for _ in range(6):
            n = int(rng.integers(0, trunc + 1))
            m = int(rng.integers(0, trunc + 1 - n))
            if zero_at_origin and n == 0 and m == 0:
                continue
            vec = rng.integers(-3, 4, size=dim) + 1j * rng.integers(-3, 4, size=dim)
            entries.append(((n, m), vec))
        return build_series(entries, trunc, (dim,), exact)

    def rand_rhs():
        terms = {tuple([0] * dim): rand_vec_series(zero_at_origin=True)}
        for j in range(dim):
            e_j = tuple(1 if i == j else 0 for i in range(dim))
            base = rand_vec_series(zero_at_origin=False)
            anchor = np.zeros(dim, dtype=complex)
            anchor[j] = 4.0 + float(rng.integers(0, 3))
            anchor_series = BivariateSeries.constant(list(anchor), trunc, (dim,), exact)
            terms[e_j] = base + anchor_series
        if y_degree >= 2:
            for combo in itertools.combinations_with_replacement(range(dim), 2):
                alpha = [0] * dim
                for i in combo:
                    alpha[i] += 1
                if rng.random() < 0.5:
                    terms[tuple(alpha)] = rand_vec_series(zero_at_origin=False)
        return YPolynomial(dim, terms)

    exps = [int(rng.integers(1, 3)) for _ in range(4)]
    return PfaffianSystem(*exps, dim, y_degree, rand_rhs(), rand_rhs())
