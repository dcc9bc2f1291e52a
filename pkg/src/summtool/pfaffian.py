"""Pfaffian systems with normal crossings: the coupled pair

    x2^q  x1^(p+1)  dy/dx1 = f1(x1, x2, y)
    x1^p' x2^(q'+1) dy/dx2 = f2(x1, x2, y)

with y in C^l and polynomial right-hand sides over truncated series
coefficients.  This module computes formal solutions degree by degree, the
complete-integrability residual and its linear-part specialization, the
spectral constraints that integrability forces on the linear parts at the
origin, rank reduction for p = p', and blow-up pull-backs of whole systems.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularLinearPartError
from .series import (
    BivariateSeries,
    BlowupMap,
    bracket,
    euler_derivative,
    matrix_from_columns,
    partial_derivative,
    pullback_blowup,
    series_mul,
)
from .values import (
    matrix_power_is_zero,
    solve_linear,
    to_complex,
    value_add,
    value_is_zero,
    value_norm,
    value_scale,
    value_zero,
)

Alpha = tuple[int, ...]


@dataclass
class YPolynomial:
    """Polynomial in the unknown y with BivariateSeries coefficients."""

    nvars: int
    terms: dict[Alpha, BivariateSeries]

    def __post_init__(self):
        self.terms = {a: s for a, s in self.terms.items() if not s.is_zero()}
        for a in self.terms:
            if len(a) != self.nvars:
                raise ValueError(f"multi-index {a} has wrong arity (expected {self.nvars})")

    @property
    def y_degree(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    @property
    def trunc(self):
        """Shared knowledge bound; the zero polynomial is known to all orders."""
        return min((s.trunc for s in self.terms.values()), default=math.inf)

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.terms.values())

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "YPolynomial") -> "YPolynomial":
        out = dict(self.terms)
        for a, s in other.terms.items():
            out[a] = out[a] + s if a in out else s
        return YPolynomial(self.nvars, out)

    def __sub__(self, other: "YPolynomial") -> "YPolynomial":
        return self + other.scale(-1)

    def scale(self, c) -> "YPolynomial":
        return YPolynomial(self.nvars, {a: s.scale(c) for a, s in self.terms.items()})

    def shift_x(self, a: int, b: int) -> "YPolynomial":
        return YPolynomial(self.nvars, {al: s.shift(a, b) for al, s in self.terms.items()})

    def derivative_x(self, var: str) -> "YPolynomial":
        return YPolynomial(
            self.nvars, {a: partial_derivative(s, var) for a, s in self.terms.items()}
        )

    def truncate_x(self, order: int) -> "YPolynomial":
        return YPolynomial(self.nvars, {a: s.truncate(order) for a, s in self.terms.items()})

    def pullback(self, bmap: BlowupMap) -> "YPolynomial":
        return YPolynomial(
            self.nvars, {a: pullback_blowup(s, bmap) for a, s in self.terms.items()}
        )

    def map_series(self, fn) -> "YPolynomial":
        return YPolynomial(self.nvars, {a: fn(s) for a, s in self.terms.items()})

    def max_norm(self) -> float:
        return max(
            (value_norm(v) for s in self.terms.values() for v in s.coeffs.values()),
            default=0.0,
        )


def jacobian(f: YPolynomial, dim: int, trunc: int, exact: bool) -> YPolynomial:
    """d f / d y as a matrix-valued polynomial in y."""
    cols_by_alpha: dict[Alpha, list[BivariateSeries]] = {}
    zero_col = BivariateSeries.zero(trunc, (dim,), exact)
    for a, s in f.terms.items():
        for j in range(f.nvars):
            if a[j] == 0:
                continue
            base = list(a)
            base[j] -= 1
            key = tuple(base)
            if key not in cols_by_alpha:
                cols_by_alpha[key] = [zero_col] * f.nvars
            cols_by_alpha[key] = list(cols_by_alpha[key])
            cols_by_alpha[key][j] = cols_by_alpha[key][j] + s.scale(a[j])
    return YPolynomial(
        f.nvars, {a: matrix_from_columns(cols) for a, cols in cols_by_alpha.items()}
    )


def ypoly_matvec(jac_poly: YPolynomial, g: YPolynomial, y_cap: int) -> YPolynomial:
    """Product (matrix polynomial) . (vector polynomial), y-degree capped."""
    out: dict[Alpha, BivariateSeries] = {}
    for a, ms in jac_poly.terms.items():
        for b, vs in g.terms.items():
            alpha = tuple(x + y for x, y in zip(a, b))
            if sum(alpha) > y_cap:
                continue
            prod = series_mul(ms, vs)
            out[alpha] = out[alpha] + prod if alpha in out else prod
    return YPolynomial(jac_poly.nvars, out)


def substitute(f: YPolynomial, yhat: BivariateSeries) -> BivariateSeries:
    """Evaluate f(x1, x2, yhat(x1, x2)) for a vector series yhat."""
    comps = [yhat.component(i) for i in range(f.nvars)]
    one = BivariateSeries.constant(1, yhat.trunc, (), yhat.exact)
    memo: dict[Alpha, BivariateSeries] = {tuple([0] * f.nvars): one}

    def monomial(alpha: Alpha) -> BivariateSeries:
        if alpha in memo:
            return memo[alpha]
        i = next(j for j, e in enumerate(alpha) if e > 0)
        prev = list(alpha)
        prev[i] -= 1
        memo[alpha] = series_mul(monomial(tuple(prev)), comps[i])
        return memo[alpha]

    total = None
    for alpha, c in f.terms.items():
        term = series_mul(monomial(alpha), c)
        total = term if total is None else total + term
    if total is None:
        shape = next(iter(f.terms.values())).shape if f.terms else ()
        return BivariateSeries.zero(yhat.trunc, shape, yhat.exact)
    return total


def recenter(f: YPolynomial, y0, exact: bool) -> YPolynomial:
    """Shift the unknown: returns g with g(x, z) = f(x, z + y0)."""
    if value_is_zero(y0):
        return f
    out: dict[Alpha, BivariateSeries] = {}
    for alpha, c in f.terms.items():
        ranges = [range(e + 1) for e in alpha]
        for beta in itertools.product(*ranges):
            coeff = 1 if exact else 1.0 + 0.0j
            for i, (ai, bi) in enumerate(zip(alpha, beta)):
                coeff = coeff * math.comb(ai, bi)
                for _ in range(ai - bi):
                    coeff = coeff * y0[i]
            if isinstance(coeff, (int, float)) and coeff == 0:
                continue
            piece = c.scale(coeff)
            key = tuple(beta)
            out[key] = out[key] + piece if key in out else piece
    return YPolynomial(f.nvars, out)


@dataclass
class PfaffianSystem:
    """Exponents, dimension and the two polynomial right-hand sides."""

    p: int
    q: int
    p_prime: int
    q_prime: int
    dim: int
    y_degree: int
    f1: YPolynomial
    f2: YPolynomial

    def __post_init__(self):
        for name, v in (("p", self.p), ("q", self.q), ("p'", self.p_prime), ("q'", self.q_prime)):
            if v < 1:
                raise ValueError(f"exponent {name} must be >= 1, got {v}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        truncs = set()
        for fp in (self.f1, self.f2):
            if fp.nvars != self.dim:
                raise ValueError("right-hand side arity does not match dim")
            if fp.y_degree > self.y_degree:
                raise ValueError(
                    f"y-degree {fp.y_degree} exceeds declared cap {self.y_degree}"
                )
            for s in fp.terms.values():
                if s.shape != (self.dim,):
                    raise ValueError(
                        f"coefficient series must be vectors of length {self.dim}, got {s.shape}"
                    )
                truncs.add(s.trunc)
        if len(truncs) > 1:
            raise ValueError(f"all coefficient series must share one trunc, got {sorted(truncs)}")

    @property
    def trunc(self):
        return min(self.f1.trunc, self.f2.trunc)

    @property
    def finite_trunc(self) -> int:
        t = self.trunc
        return int(t) if t != math.inf else 0

    @property
    def exact(self) -> bool:
        return self.f1.exact and self.f2.exact


def linear_parts(sys: PfaffianSystem) -> tuple[BivariateSeries, BivariateSeries]:
    """(A, B) with A = df1/dy(x, 0) and B = df2/dy(x, 0) as l x l matrix series."""
    out = []
    for fp in (sys.f1, sys.f2):
        zero_col = BivariateSeries.zero(sys.finite_trunc, (sys.dim,), sys.exact)
        cols = []
        for j in range(sys.dim):
            e_j = tuple(1 if i == j else 0 for i in range(sys.dim))
            cols.append(fp.terms.get(e_j, zero_col))
        out.append(matrix_from_columns(cols))
    return out[0], out[1]


def integrability_residual(sys: PfaffianSystem, order: int) -> YPolynomial:
    """Left minus right side of the complete-integrability identity.

    Zero through x-degree `order` (and y-degree up to the cap) certifies
    complete integrability at this truncation.
    """
    if order > sys.trunc:
        raise ValueError(f"order {order} exceeds shared trunc {sys.trunc}")
    p, q, pp, qp = sys.p, sys.q, sys.p_prime, sys.q_prime
    j1 = jacobian(sys.f1, sys.dim, sys.finite_trunc, sys.exact)
    j2 = jacobian(sys.f2, sys.dim, sys.finite_trunc, sys.exact)
    lhs = (
        sys.f1.shift_x(pp, qp).scale(-q)
        + sys.f1.derivative_x("x2").shift_x(pp, qp + 1)
        + ypoly_matvec(j1, sys.f2, sys.y_degree)
    )
    rhs = (
        sys.f2.shift_x(p, q).scale(-pp)
        + sys.f2.derivative_x("x1").shift_x(p + 1, q)
        + ypoly_matvec(j2, sys.f1, sys.y_degree)
    )
    return (lhs - rhs).truncate_x(order)


def linear_integrability_residual(
    a: BivariateSeries,
    b: BivariateSeries,
    exponents: tuple[int, int, int, int],
) -> BivariateSeries:
    """Matrix identity satisfied by the linear parts of an integrable system.

    Equals the degree-1 block of :func:`integrability_residual` when the
    right-hand sides are purely linear with zero constant term.
    """
    p, q, pp, qp = exponents
    if len(a.shape) != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise ValueError(f"need square matrix series of equal dimension, got {a.shape}, {b.shape}")
    term_a = (euler_derivative(a, "x2") - a.scale(q)).shift(pp, qp)
    term_b = (euler_derivative(b, "x1") - b.scale(pp)).shift(p, q)
    return term_a - term_b + bracket(a, b)


# ------------------------------------------------------------- formal solving


def _constant_term(f: YPolynomial, dim: int, exact: bool):
    zero_alpha = tuple([0] * dim)
    if zero_alpha not in f.terms:
        return value_zero((dim,), exact)
    s = f.terms[zero_alpha]
    return s.coeffs.get((0, 0), value_zero((dim,), exact))


def _linear_matrix_at_origin(f: YPolynomial, dim: int, exact: bool):
    mat = value_zero((dim, dim), exact)
    for j in range(dim):
        e_j = tuple(1 if i == j else 0 for i in range(dim))
        if e_j in f.terms:
            col = f.terms[e_j].coeffs.get((0, 0))
            if col is not None:
                for i in range(dim):
                    mat[i, j] = col[i]
    return mat


def _eval_origin(f: YPolynomial, y0, dim: int, exact: bool):
    """f(0, 0, y0) for a constant vector y0."""
    total = value_zero((dim,), exact)
    for alpha, c in f.terms.items():
        v = c.coeffs.get((0, 0))
        if v is None:
            continue
        factor = 1 if exact else 1.0 + 0.0j
        for i, e in enumerate(alpha):
            for _ in range(e):
                factor = factor * y0[i]
        total = value_add(total, value_scale(factor, v))
    return total


def _solve_constant_term(f: YPolynomial, dim: int, exact: bool):
    """Constant y0 with f(0, 0, y0) = 0, solving the linear part first."""
    c0 = _constant_term(f, dim, exact)
    if value_is_zero(c0) or (not exact and value_norm(c0) < 1e-14 * max(1.0, f.max_norm())):
        return value_zero((dim,), exact)
    a0 = _linear_matrix_at_origin(f, dim, exact)
    try:
        y0 = solve_linear(a0, value_scale(-1, c0), exact)
    except np.linalg.LinAlgError as err:
        raise SingularLinearPartError(
            "constant term is nonzero and the linear part at the origin is singular"
        ) from err
    residual = _eval_origin(f, y0, dim, exact)
    if value_is_zero(residual):
        return y0
    if exact:
        raise DomainError(
            "nonlinear constant-term equation has no exact solution from the linear step"
        )
    # Newton refinement for nonlinear constant-term equations (float mode)
    scale = max(1.0, f.max_norm())
    for _ in range(50):
        if value_norm(residual) <= 1e-13 * scale:
            return y0
        jac_at = _jacobian_at_constant(f, y0, dim)
        try:
            step = solve_linear(jac_at, -np.asarray(residual, dtype=complex), False)
        except np.linalg.LinAlgError as err:
            raise DomainError("Newton step for the constant term is singular") from err
        y0 = np.asarray(y0, dtype=complex) + step
        residual = _eval_origin(f, y0, dim, exact)
    raise DomainError("constant-term Newton iteration did not converge")


def _jacobian_at_constant(f: YPolynomial, y0, dim: int):
    mat = np.zeros((dim, dim), dtype=complex)
    for alpha, c in f.terms.items():
        v = c.coeffs.get((0, 0))
        if v is None:
            continue
        for j in range(dim):
            if alpha[j] == 0:
                continue
            factor = complex(alpha[j])
            for i, e in enumerate(alpha):
                e_eff = e - 1 if i == j else e
                for _ in range(e_eff):
                    factor *= complex(y0[i])
            mat[:, j] += factor * np.asarray(to_complex(v))
    return mat


def formal_solve(sys: PfaffianSystem, side: int, order: int) -> BivariateSeries:
    """Unique formal solution of one side, computed degree by degree.

    The derivative side maps total degree d to d + p + q (resp. d + p' + q'),
    so each homogeneous slice solves one linear system with the invertible
    matrix df/dy(0, 0, y0).  The constant term y0 is solved first when
    f(0, 0, 0) is nonzero.
    """
    if side not in (1, 2):
        raise ValueError(f"side must be 1 or 2, got {side}")
    if order > sys.trunc:
        raise ValueError(f"order {order} exceeds shared trunc {sys.trunc}")
    f = sys.f1 if side == 1 else sys.f2
    shift = (sys.p + 1, sys.q) if side == 1 else (sys.p_prime, sys.q_prime + 1)
    var = "x1" if side == 1 else "x2"
    dim, exact = sys.dim, sys.exact

    y0 = _solve_constant_term(f, dim, exact)
    fc = recenter(f, y0, exact)
    a0 = _linear_matrix_at_origin(fc, dim, exact)
    if not exact:
        a0c = np.asarray(to_complex(a0))
        if np.linalg.cond(a0c) > 1e12:
            raise SingularLinearPartError("linear part at the origin is singular")

    coeffs: dict[tuple[int, int], object] = {}
    for d in range(1, order + 1):
        y_known = BivariateSeries(dict(coeffs), d, (dim,), exact)
        lhs = partial_derivative(y_known, var).shift(*shift)
        fval = substitute(fc, y_known)
        lhs_d = lhs.homogeneous_part(d)
        f_d = fval.homogeneous_part(d)
        for key in set(lhs_d) | set(f_d):
            rhs = value_add(
                lhs_d.get(key, value_zero((dim,), exact)),
                value_scale(-1, f_d.get(key, value_zero((dim,), exact))),
            )
            if value_is_zero(rhs):
                continue
            try:
                sol = solve_linear(a0, rhs, exact)
            except np.linalg.LinAlgError as err:
                raise SingularLinearPartError(
                    "linear part at the origin is singular"
                ) from err
            coeffs[key] = sol
    if not value_is_zero(y0):
        coeffs[(0, 0)] = y0
    return BivariateSeries(coeffs, order, (dim,), exact)


def cross_check_other_side(
    sys: PfaffianSystem, y: BivariateSeries, side_checked: int, order: int
) -> BivariateSeries:
    """Residual of the equation `side_checked` on a candidate solution y."""
    if side_checked not in (1, 2):
        raise ValueError(f"side_checked must be 1 or 2, got {side_checked}")
    if order > min(sys.trunc, y.trunc):
        raise ValueError(
            f"order {order} exceeds available knowledge "
            f"(system trunc {sys.trunc}, solution trunc {y.trunc})"
        )
    f = sys.f1 if side_checked == 1 else sys.f2
    shift = (sys.p + 1, sys.q) if side_checked == 1 else (sys.p_prime, sys.q_prime + 1)
    var = "x1" if side_checked == 1 else "x2"
    lhs = partial_derivative(y, var).shift(*shift)
    rhs = substitute(f, y)
    return (lhs - rhs).truncate(order)


# ------------------------------------------------------- spectral constraints


@dataclass
class SpectralDiagnosis:
    """Verdict of the integrability spectral theorem for given exponents."""

    case: str
    violated: bool
    details: dict = field(default_factory=dict)


def _is_nilpotent(mat, dim: int, exact: bool) -> bool:
    if exact:
        return matrix_power_is_zero(mat, max(dim, 1))
    m = np.asarray(to_complex(mat))
    norm = float(np.linalg.norm(m))
    eigs = np.linalg.eigvals(m)
    return bool(np.all(np.abs(eigs) <= 1e-9 * norm))


def _generalized_eigenspace(mat: np.ndarray, mu: complex, dim: int) -> np.ndarray:
    """Orthonormal basis of ker (mat - mu I)^dim via SVD."""
    power = np.linalg.matrix_power(mat - mu * np.eye(dim), dim)
    _, s, vh = np.linalg.svd(power)
    tol = max(s[0], 1.0) * dim * np.finfo(float).eps * 1e3 if len(s) else 0.0
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T  # (dim, r) basis of the null space


def classify_spectra(
    exponents: tuple[int, int, int, int], a00, b00
) -> SpectralDiagnosis:
    """Which linear part integrability forces to be nilpotent, or the pairing.

    The case is a function of the exponents alone; the matrices only decide
    `violated`.  With equal exponent pairs, every eigenvalue mu of B(0,0)
    must match an eigenvalue lambda of A(0,0) with q*lambda = p*mu, searched
    inside the generalized eigenspace of mu whenever A(0,0) leaves it
    invariant.
    """
    p, q, pp, qp = exponents
    a_arr = np.asarray(a00)
    b_arr = np.asarray(b00)
    if a_arr.ndim != 2 or a_arr.shape[0] != a_arr.shape[1] or a_arr.shape != b_arr.shape:
        raise ValueError(f"need square matrices of equal dimension, got {a_arr.shape}, {b_arr.shape}")
    dim = a_arr.shape[0]
    exact = a_arr.dtype == object
    a_required = pp < p or qp < q
    b_required = p < pp or q < qp

    if p == pp and q == qp:
        ac = np.asarray([complex(x) for x in a_arr.ravel()]).reshape(a_arr.shape)
        bc = np.asarray([complex(x) for x in b_arr.ravel()]).reshape(b_arr.shape)
        eigs_a = np.linalg.eigvals(ac)
        eigs_b = np.linalg.eigvals(bc)
        comm_ok = float(np.linalg.norm(ac @ bc - bc @ ac)) <= 1e-9 * max(
            1.0, float(np.linalg.norm(ac)) * float(np.linalg.norm(bc))
        )
        mus: list[complex] = []
        for mu in eigs_b:
            if not any(abs(mu - m) <= 1e-8 * (1.0 + abs(mu)) for m in mus):
                mus.append(complex(mu))
        pairs = []
        violated = False
        for mu in mus:
            candidates = eigs_a
            restricted = False
            if comm_ok:
                basis = _generalized_eigenspace(bc, mu, dim)
                if basis.shape[1] > 0:
                    restriction = np.linalg.pinv(basis) @ ac @ basis
                    invariance = float(
                        np.linalg.norm(ac @ basis - basis @ restriction)
                    )
                    if invariance <= 1e-8 * max(1.0, float(np.linalg.norm(ac))):
                        candidates = np.linalg.eigvals(restriction)
                        restricted = True
            best = min(candidates, key=lambda lam: abs(q * lam - p * mu))
            ok = abs(q * best - p * mu) <= 1e-9 * (1.0 + abs(q * best))
            pairs.append(
                {
                    "mu": complex(mu),
                    "lambda": complex(best),
                    "satisfied": bool(ok),
                    "restricted": restricted,
                }
            )
            violated = violated or not ok
        return SpectralDiagnosis(
            case="EigenPairing",
            violated=violated,
            details={
                "eigenvalues_a": [complex(x) for x in eigs_a],
                "eigenvalues_b": [complex(x) for x in eigs_b],
                "pairs": pairs,
            },
        )

    a_nil = _is_nilpotent(a_arr, dim, exact)
    b_nil = _is_nilpotent(b_arr, dim, exact)
    if a_required and b_required:
        return SpectralDiagnosis(
            case="Both_nilpotent_required",
            violated=not (a_nil and b_nil),
            details={"a_nilpotent": a_nil, "b_nilpotent": b_nil},
        )
    if a_required:
        return SpectralDiagnosis(
            case="A_nilpotent_required",
            violated=not a_nil,
            details={"a_nilpotent": a_nil},
        )
    return SpectralDiagnosis(
        case="B_nilpotent_required",
        violated=not b_nil,
        details={"b_nilpotent": b_nil},
    )


# --------------------------------------------------------------- rank reduction


@dataclass
class RankReducedPair:
    """p*l-dimensional linear parts in the ramified variables (z1, x2)."""

    atilde: BivariateSeries
    btilde: BivariateSeries
    residual: BivariateSeries


def _ramified_components(mat: BivariateSeries, p: int) -> list[BivariateSeries]:
    """Split A(x1, x2) = sum_{i<p} x1^i A_i(x1^p, x2) into the A_i."""
    comps: list[dict] = [{} for _ in range(p)]
    for (n, m), v in mat.coeffs.items():
        comps[n % p][(n // p, m)] = v
    out = []
    for i in range(p):
        t_i = (mat.trunc - i) // p
        comps_i = {k: v for k, v in comps[i].items() if k[0] + k[1] <= t_i}
        out.append(BivariateSeries(comps_i, t_i, mat.shape, mat.exact))
    return out


def _place_block(acc: dict, block: BivariateSeries, r: int, c: int, l: int, size: int, exact: bool):
    for key, v in block.coeffs.items():
        if key not in acc:
            acc[key] = value_zero((size, size), exact)
        tgt = acc[key]
        for i in range(l):
            for j in range(l):
                tgt[r * l + i, c * l + j] = value_add(tgt[r * l + i, c * l + j], v[i, j])


def rank_reduce(
    a: BivariateSeries,
    b: BivariateSeries,
    exponents: tuple[int, int, int, int],
) -> RankReducedPair:
    """Ramification z1 = x1^p turning a rank-p pair into a rank-1 block pair.

    Requires p = p'.  Returns the block matrices together with the residual of
    the integrability identity they satisfy in the ramified variables,

        z1 x2^q' (x2 dA~/dx2 - q A~) - p z1 x2^q (z1 dB~/dz1 - B~) + [A~, B~].
    """
    p, q, pp, qp = exponents
    if p != pp:
        raise ValueError(f"rank reduction requires p = p', got p={p}, p'={pp}")
    if len(a.shape) != 2 or a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"need square matrix series of equal dimension, got {a.shape}, {b.shape}")
    l = a.shape[0]
    exact = a.exact and b.exact
    size = p * l
    a_parts = _ramified_components(a, p)
    b_parts = _ramified_components(b, p)
    common = min(s.trunc for s in a_parts + b_parts)
    eye = BivariateSeries.constant(
        [[1 if i == j else 0 for j in range(l)] for i in range(l)], common, (l, l), exact
    )

    acc_a: dict = {}
    acc_b: dict = {}
    for r in range(p):
        for c in range(p):
            if r >= c:
                blk_a = a_parts[r - c].truncate(common)
                blk_b = b_parts[r - c].truncate(common)
            else:
                blk_a = a_parts[p + r - c].shift(1, 0).truncate(common)
                blk_b = b_parts[p + r - c].shift(1, 0).truncate(common)
            if r == c and r > 0:
                blk_a = blk_a - eye.scale(r).shift(1, q).truncate(common)
            _place_block(acc_a, blk_a, r, c, l, size, exact)
            _place_block(acc_b, blk_b, r, c, l, size, exact)
    atilde = BivariateSeries(acc_a, common, (size, size), exact)
    btilde = BivariateSeries(acc_b, common, (size, size), exact)

    term_a = (euler_derivative(atilde, "x2") - atilde.scale(q)).shift(1, qp)
    term_b = (euler_derivative(btilde, "x1") - btilde).shift(1, q).scale(p)
    residual = term_a - term_b + bracket(atilde, btilde)
    return RankReducedPair(atilde=atilde, btilde=btilde, residual=residual)


# ---------------------------------------------------------------- pull-backs


def _corrected_side(
    base: YPolynomial, correction: YPolynomial, factor: int, a: int, b: int
) -> YPolynomial:
    """base + factor * x1^a x2^b * correction, with negative exponents divided out."""
    neg_a, neg_b = max(0, -a), max(0, -b)
    pos_a, pos_b = max(0, a), max(0, b)

    def transform(s: BivariateSeries) -> BivariateSeries:
        try:
            out = s.divide_monomial(neg_a, neg_b)
        except ValueError as err:
            raise DomainError(
                f"pull-back correction needs division by x1^{neg_a} x2^{neg_b} "
                f"but the right-hand side is not divisible: {err}"
            ) from err
        return out.shift(pos_a, pos_b)

    return base + correction.map_series(transform).scale(factor)


def pullback_system(sys: PfaffianSystem, bmap: BlowupMap) -> PfaffianSystem:
    """Pull back the whole system under a blow-up map.

    For pi1^N the exponents become (p, N p + q, p', N p' + q') and the second
    right-hand side acquires the chain-rule correction
    N * x1^(p'-p) x2^(N(p'-p)+q'-q) * f1; pi2^M is symmetric on the first.
    Complete integrability is preserved.
    """
    n = bmap.power
    f1p = sys.f1.pullback(bmap)
    f2p = sys.f2.pullback(bmap)
    if bmap.axis == "pi1":
        exponents = (sys.p, n * sys.p + sys.q, sys.p_prime, n * sys.p_prime + sys.q_prime)
        a = sys.p_prime - sys.p
        b = n * (sys.p_prime - sys.p) + sys.q_prime - sys.q
        f2p = _corrected_side(f2p, f1p, n, a, b)
    else:
        exponents = (sys.p + n * sys.q, sys.q, sys.p_prime + n * sys.q_prime, sys.q_prime)
        a = sys.p - sys.p_prime + n * (sys.q - sys.q_prime)
        b = sys.q - sys.q_prime
        f1p = _corrected_side(f1p, f2p, n, a, b)
    common = min(f1p.trunc, f2p.trunc)
    return PfaffianSystem(
        p=exponents[0],
        q=exponents[1],
        p_prime=exponents[2],
        q_prime=exponents[3],
        dim=sys.dim,
        y_degree=sys.y_degree,
        f1=f1p.truncate_x(common),
        f2=f2p.truncate_x(common),
    )
