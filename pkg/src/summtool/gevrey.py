"""Monomial decomposition and Gevrey-order machinery.

The decomposition rewrites a series uniquely as sum f_n * (x1^p x2^q)^n where
every layer f_n omits bidegrees (m, j) with both m >= p and j >= q.  Gevrey
growth in the monomial is witnessed against the coefficient bound
``|a_{n,m}| <= C * A^(n+m) * min(n!^(s/p), m!^(s/q))``: the certificate finds
explicit (C, A) on a degree window or refuses, the estimator fits the order s
by constrained least squares on logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .series import BivariateSeries, MonomialIndex

# --------------------------------------------------------------- decomposition


@dataclass
class MonomialDecomposition:
    """Layer list f_0..f_K of a series along the monomial x1^p x2^q."""

    monomial: MonomialIndex
    layers: list[BivariateSeries]
    source_trunc: int


def layer_index(n: int, m: int, monomial: MonomialIndex) -> tuple[int, int, int]:
    """Unique (layer, residual bidegree) with n = layer*p + m', m = layer*q + j'."""
    k = min(n // monomial.p, m // monomial.q)
    return k, n - k * monomial.p, m - k * monomial.q


def monomial_decompose(f: BivariateSeries, monomial: MonomialIndex) -> MonomialDecomposition:
    p, q = monomial.p, monomial.q
    n_layers = f.trunc // (p + q) + 1 if f.trunc >= 0 else 1
    buckets: list[dict] = [{} for _ in range(n_layers)]
    for (n, m), v in f.coeffs.items():
        k, rn, rm = layer_index(n, m, monomial)
        buckets[k][(rn, rm)] = v
    layers = [
        BivariateSeries(bucket, f.trunc - k * (p + q), f.shape, f.exact)
        for k, bucket in enumerate(buckets)
    ]
    return MonomialDecomposition(monomial, layers, f.trunc)


def monomial_recompose(d: MonomialDecomposition) -> BivariateSeries:
    p, q = d.monomial.p, d.monomial.q
    shape = d.layers[0].shape if d.layers else ()
    exact = all(layer.exact for layer in d.layers)
    out: dict = {}
    for k, layer in enumerate(d.layers):
        for (rn, rm), v in layer.coeffs.items():
            if rn >= p and rm >= q:
                raise ValueError(
                    f"layer {k} term ({rn}, {rm}) violates support (needs m<p or j<q)"
                )
            n, m = rn + k * p, rm + k * q
            if n + m <= d.source_trunc:
                out[(n, m)] = v
    return BivariateSeries(out, d.source_trunc, shape, exact)


# ------------------------------------------------------------ Gevrey growth


def _log_min_factorial(n: int, m: int, monomial: MonomialIndex, s: float) -> float:
    """log of min(n!^(s/p), m!^(s/q)); axis terms (0! = 1) force the other factor."""
    return s * min(
        math.lgamma(n + 1) / monomial.p,
        math.lgamma(m + 1) / monomial.q,
    )


def gevrey_certificate(
    f: BivariateSeries,
    monomial: MonomialIndex,
    s: float,
    degree_floor: int = 1,
) -> tuple[float, float] | None:
    """Smallest A (with matching C) bounding the window, or None on refusal.

    Refusal means the per-term ratios (|a|/min{...})^(1/(n+m)) grow strictly
    across every total degree in the window, so no finite A is plausible at
    this truncation.  A zero window returns (0.0, 1.0).
    """
    if s < 0:
        raise ValueError(f"Gevrey order s must be >= 0, got {s}")
    if degree_floor > f.trunc:
        raise ValueError(f"degree_floor {degree_floor} is beyond trunc {f.trunc}")
    norms = f.norms()
    window = [
        (n, m, w) for (n, m), w in norms.items() if n + m >= degree_floor and w > 0.0
    ]
    if not window:
        return (0.0, 1.0)

    per_degree: dict[int, float] = {}
    log_ratios = []
    for n, m, w in window:
        if n + m == 0:
            continue
        r = (math.log(w) - _log_min_factorial(n, m, monomial, s)) / (n + m)
        log_ratios.append(r)
        d = n + m
        per_degree[d] = max(per_degree.get(d, -math.inf), r)
    if log_ratios:
        degrees = sorted(per_degree)
        if len(degrees) >= 2 and all(
            per_degree[b] > per_degree[a] + 1e-12 for a, b in zip(degrees, degrees[1:])
        ):
            return None
        log_a = max(log_ratios)
    else:
        log_a = 0.0
    log_c = max(
        math.log(w) - _log_min_factorial(n, m, monomial, s) - (n + m) * log_a
        for n, m, w in window
    )
    return (math.exp(log_c), math.exp(log_a))


@dataclass
class GevreyEstimate:
    """Fitted growth model log|a| ~ log C + (n+m) log A + s * log(min factorial)."""

    monomial: MonomialIndex
    s_hat: float
    c_hat: float
    a_hat: float
    window: tuple[int, int]
    residual: float


def gevrey_window_rows(
    f: BivariateSeries, monomial: MonomialIndex
) -> list[tuple[int, int, float, float]]:
    """(n, m, log norm, log min-factorial at s=1) for the fit window, sorted."""
    lo = math.ceil(f.trunc / 3)
    rows = []
    for (n, m), w in sorted(f.norms().items()):
        if lo <= n + m <= f.trunc and w > 0.0:
            rows.append((n, m, math.log(w), _log_min_factorial(n, m, monomial, 1.0)))
    return rows


def _lstsq_growth(rows: list[tuple[int, int, float, float]]) -> np.ndarray:
    """Fit [log C, log A, s] with s clamped to >= 0."""
    design = np.array([[1.0, n + m, g] for n, m, _, g in rows])
    target = np.array([ln for _, _, ln, _ in rows])
    sol, *_ = np.linalg.lstsq(design, target, rcond=None)
    if sol[2] < 0.0:
        sol2, *_ = np.linalg.lstsq(design[:, :2], target, rcond=None)
        sol = np.array([sol2[0], sol2[1], 0.0])
    return sol


def _envelope_rows(
    rows: list[tuple[int, int, float, float]], s_ref: float
) -> list[tuple[int, int, float, float]]:
    """Per total degree, keep the term binding the bound at reference order s_ref.

    The Gevrey characterization is an upper envelope, so sub-maximal terms on
    an antidiagonal carry no information about (C, A, s); fitting them biases
    s downward.  Ties prefer the larger factorial weight (the informative term).
    """
    per: dict[int, tuple] = {}
    for n, m, ln, g in rows:
        d = n + m
        key = (ln - s_ref * g, g, n)
        if d not in per or key > per[d][0]:
            per[d] = (key, (n, m, ln, g))
    return [v[1] for _, v in sorted(per.items())]


def gevrey_estimate(f: BivariateSeries, monomial: MonomialIndex) -> GevreyEstimate:
    rows = gevrey_window_rows(f, monomial)
    degrees = sorted({n + m for n, m, _, _ in rows})
    if len(degrees) < 3:
        raise ValueError(
            f"degenerate window: only {len(degrees)} distinct total degrees with "
            f"nonzero terms in [{math.ceil(f.trunc / 3)}, {f.trunc}]"
        )
    # iterate envelope selection and fit to a fixed point in s
    s_ref = 1.0
    sol = None
    selected = rows
    for _ in range(6):
        selected = _envelope_rows(rows, s_ref)
        sol = _lstsq_growth(selected)
        if abs(float(sol[2]) - s_ref) < 1e-9:
            break
        s_ref = max(0.0, float(sol[2]))
    design = np.array([[1.0, n + m, g] for n, m, _, g in selected])
    target = np.array([ln for _, _, ln, _ in selected])
    residual = float(np.max(np.abs(design @ sol - target)))
    return GevreyEstimate(
        monomial=monomial,
        s_hat=float(sol[2]),
        c_hat=math.exp(min(float(sol[0]), 700.0)),
        a_hat=math.exp(min(float(sol[1]), 700.0)),
        window=(degrees[0], degrees[-1]),
        residual=residual,
    )


# -------------------------------------------------------- summability levels


@dataclass(frozen=True)
class SummabilityLevel:
    """k-summability in the monomial x1^p x2^q; k kept as an exact rational."""

    p: int
    q: int
    k: Fraction

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError(f"monomial exponents must be >= 1, got ({self.p}, {self.q})")
        object.__setattr__(self, "k", Fraction(self.k))
        if self.k <= 0:
            raise ValueError(f"summability order k must be > 0, got {self.k}")

    @property
    def monomial(self) -> MonomialIndex:
        return MonomialIndex(self.p, self.q)

    @property
    def gevrey_order(self) -> Fraction:
        return 1 / self.k


def canonical_level(level: SummabilityLevel) -> tuple[Fraction, Fraction]:
    """Invariant (k*p, k*q); two levels name the same class iff these agree."""
    return (level.k * level.p, level.k * level.q)


def cross_monomial_order(s: float, frm: MonomialIndex, to: MonomialIndex) -> float:
    """Upper bound max(p/p', q/q')*s on the order in `to` given order s in `frm`."""
    if s < 0:
        raise ValueError(f"Gevrey order s must be >= 0, got {s}")
    ratio = max(Fraction(to.p, frm.p), Fraction(to.q, frm.q))
    return float(ratio) * s
