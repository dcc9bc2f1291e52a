"""Numeric k-summation of one-variable series by Borel transform, Pade
continuation and truncated Laplace quadrature along a ray.

The conventions invert each other term by term: the order-k Borel transform
divides coefficient n by Gamma(1 + n/k), and the Laplace integral

    (k / t^k) * integral_0^{e^(i d) ximax}  F(xi) e^{-(xi/t)^k} xi^(k-1) dxi

restores Gamma(1 + n/k) on xi^n.  Applied to the layer series of a monomial
decomposition evaluated at a point, this computes the k-sum in x1^p x2^q.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularDirectionError
from .gevrey import SummabilityLevel, monomial_decompose
from .series import BivariateSeries, evaluate_truncated


@dataclass
class UnivariateSeries:
    """Finite coefficient list a_0..a_K in the tagged variable ('t' or 'xi')."""

    coeffs: np.ndarray
    variable: str = "t"

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 1:
            raise ValueError("UnivariateSeries expects a 1-d coefficient list")
        if self.variable not in ("t", "xi"):
            raise ValueError(f"variable must be 't' or 'xi', got {self.variable!r}")

    def __len__(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class SectorSpec:
    """Sector in the summation plane: bisecting direction, opening, radius."""

    direction: float
    opening: float
    radius: float

    def __post_init__(self):
        if self.opening <= 0:
            raise ValueError("sector opening must be > 0")
        if self.radius <= 0:
            raise ValueError("sector radius must be > 0")


def formal_borel(u: UnivariateSeries, k: float) -> UnivariateSeries:
    """Order-k Borel transform: coefficient n becomes a_n / Gamma(1 + n/k)."""
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    out = np.array(
        [a / math.gamma(1.0 + n / k) for n, a in enumerate(u.coeffs)], dtype=complex
    )
    return UnivariateSeries(out, "xi")


@dataclass
class PadeApproximant:
    """Rational function numer/denom with denom(0) = 1, ascending coefficients."""

    numer: np.ndarray
    denom: np.ndarray

    def __post_init__(self):
        self.numer = np.asarray(self.numer, dtype=complex)
        self.denom = np.asarray(self.denom, dtype=complex)
        if abs(self.denom[0] - 1.0) > 1e-12:
            raise ValueError("Pade denominator must be normalized to denom(0) = 1")

    @property
    def degrees(self) -> tuple[int, int]:
        return (len(self.numer) - 1, len(self.denom) - 1)

    def __call__(self, xi):
        num = np.polynomial.polynomial.polyval(xi, self.numer)
        den = np.polynomial.polynomial.polyval(xi, self.denom)
        return num / den

    def poles(self) -> np.ndarray:
        d = np.trim_zeros(self.denom, "b")
        if len(d) <= 1:
            return np.array([], dtype=complex)
        return np.roots(d[::-1])

    def poles_with_residues(self) -> list[tuple[complex, complex]]:
        """(pole, residue) pairs; residue via numer(z)/denom'(z)."""
        dprime = np.polynomial.polynomial.polyder(self.denom)
        out = []
        for z in self.poles():
            num = np.polynomial.polynomial.polyval(z, self.numer)
            den = np.polynomial.polynomial.polyval(z, dprime)
            res = num / den if den != 0 else complex("inf")
            out.append((complex(z), complex(res)))
        return out

    def significant_poles(self, residue_tol: float = 1e-5) -> list[complex]:
        """Poles after dropping Froissart doublets.

        Spurious Pade poles carry residues orders of magnitude below the
        genuine ones; poles with |residue| < residue_tol * max|residue| are
        treated as numerical artifacts.
        """
        pairs = self.poles_with_residues()
        if not pairs:
            return []
        top = max(abs(r) for _, r in pairs)
        if top == 0.0:
            return []
        return [z for z, r in pairs if abs(r) >= residue_tol * top]


def pade_continue(u: UnivariateSeries, L: int, M: int) -> PadeApproximant:
    """Pade approximant of type (L, M) matching u through degree L + M.

    Requested degrees are clamped to the available coefficient count; a
    degenerate denominator system is retried with M decremented, down to the
    truncated polynomial itself at M = 0.
    """
    if L < 0 or M < 0:
        raise ValueError("Pade degrees must be >= 0")
    a = np.asarray(u.coeffs, dtype=complex)
    n_avail = len(a)
    if n_avail == 0:
        raise ValueError("cannot continue an empty series")
    if L + M + 1 > n_avail:
        M = min(M, (n_avail - 1) // 2)
        L = min(L, n_avail - 1 - M)
    while M > 0:
        # Toeplitz system for denominator coefficients b_1..b_M:
        # sum_{j=0}^M b_j a_{L+i-j} = 0 for i = 1..M, with b_0 = 1
        T = np.empty((M, M), dtype=complex)
        rhs = np.empty(M, dtype=complex)
        for i in range(1, M + 1):
            rhs[i - 1] = -a[L + i]
            for j in range(1, M + 1):
                idx = L + i - j
                T[i - 1, j - 1] = a[idx] if idx >= 0 else 0.0
        if np.linalg.matrix_rank(T) == M:
            b = np.concatenate(([1.0], np.linalg.solve(T, rhs)))
            break
        M -= 1
    else:
        b = np.array([1.0], dtype=complex)
    numer = np.array(
        [sum(b[j] * a[n - j] for j in range(min(n, M) + 1)) for n in range(L + 1)],
        dtype=complex,
    )
    # exact-zero top coefficients (from triangular solves) carry no content
    while len(b) > 1 and b[-1] == 0:
        b = b[:-1]
    while len(numer) > 1 and numer[-1] == 0:
        numer = numer[:-1]
    return PadeApproximant(numer, b)


def _angle_distance(a: float, b: float) -> float:
    d = (a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


@dataclass
class LaplaceResult:
    value: complex
    tail_bound: float


def laplace_sum(
    approx: PadeApproximant,
    k: float,
    t: complex,
    d: float,
    xi_max: float,
    nodes: int = 64,
    panels: int | None = None,
    pole_margin: float = 0.1,
    residue_tol: float = 1e-5,
) -> LaplaceResult:
    """Truncated order-k Laplace integral of `approx` along the ray arg = d.

    Composite Gauss-Legendre quadrature on [0, xi_max]; the reported tail
    bound is exp(-(xi_max/|t|)^k) times the sup of |approx| sampled on the
    ray.  Rays passing within `pole_margin` radians of a significant
    denominator root (inside radius xi_max, after Froissart filtering at
    `residue_tol`) are rejected as singular directions.
    """
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    if t == 0:
        raise ValueError("t must be nonzero")
    if nodes < 2:
        raise ValueError("nodes must be >= 2")
    if xi_max <= 0:
        raise ValueError("xi_max must be > 0")
    ray = cmath.exp(1j * d)
    decay = (ray / t) ** k
    if decay.real <= 0.0:
        raise DomainError(
            f"decay condition violated: Re((e^(i d)/t)^k) = {decay.real:.3g} <= 0"
        )
    for pole in approx.significant_poles(residue_tol):
        if abs(pole) <= xi_max and (
            abs(pole) < 1e-12 * xi_max
            or _angle_distance(cmath.phase(pole), d) < pole_margin
        ):
            raise SingularDirectionError(
                f"pole at xi = {pole:.6g} obstructs the ray in direction {d:.6g}",
                pole=complex(pole),
            )
    if panels is None:
        panels = max(8, min(200, math.ceil(xi_max / abs(t))))
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, xi_max, panels + 1)
    value = 0.0 + 0.0j
    sup_f = 0.0
    prefactor = k / t**k
    for a, b in zip(edges[:-1], edges[1:]):
        r = 0.5 * (b - a) * gl_x + 0.5 * (a + b)
        xi = ray * r
        fvals = approx(xi)
        sup_f = max(sup_f, float(np.max(np.abs(fvals))))
        integrand = fvals * np.exp(-((xi / t) ** k)) * xi ** (k - 1.0) * ray
        value += 0.5 * (b - a) * np.sum(gl_w * integrand)
    tail = math.exp(-min((xi_max / abs(t)) ** k, 700.0)) * sup_f
    return LaplaceResult(value=complex(prefactor * value), tail_bound=tail)


# ----------------------------------------------------------- monomial k-sum


@dataclass
class MonomialSumPoint:
    point: tuple[complex, complex]
    t: complex
    value: complex
    tail_bound: float


def _point_t_series(
    f: BivariateSeries, level: SummabilityLevel, point: tuple[complex, complex]
) -> tuple[complex, UnivariateSeries]:
    if f.shape != ():
        raise ValueError("monomial summation requires a scalar series")
    x1, x2 = complex(point[0]), complex(point[1])
    t = x1**level.p * x2**level.q
    layers = monomial_decompose(f, level.monomial).layers
    coeffs = np.array([evaluate_truncated(layer, (x1, x2)) for layer in layers])
    return t, UnivariateSeries(coeffs, "t")


def summation_sector(level: SummabilityLevel, d: float, radius: float | None = None) -> SectorSpec:
    """Sector in the t = x1^p x2^q plane on which the k-sum in direction d lives."""
    return SectorSpec(
        direction=d,
        opening=math.pi / float(level.k),
        radius=radius if radius is not None else math.inf,
    )


def _check_sector(t: complex, sector: SectorSpec):
    if t == 0:
        raise ValueError("point lies on the singular locus x1*x2 = 0")
    if abs(t) >= sector.radius:
        raise ValueError(
            f"|x1^p x2^q| = {abs(t):.3g} is outside radius {sector.radius:.3g}"
        )
    half_opening = sector.opening / 2.0
    if _angle_distance(cmath.phase(t), sector.direction) >= half_opening:
        raise ValueError(
            f"arg(x1^p x2^q) = {cmath.phase(t):.3g} is outside the summation "
            f"sector of half-opening {half_opening:.3g} around direction "
            f"{sector.direction:.3g}"
        )


def sum_in_monomial(
    f: BivariateSeries,
    level: SummabilityLevel,
    d: float,
    points: list[tuple[complex, complex]],
    pade_degrees: tuple[int, int] = (18, 18),
    xi_max_factor: float = 40.0,
    nodes: int = 64,
    panels: int | None = None,
    pole_margin: float = 0.1,
    residue_tol: float = 1e-5,
    radius: float | None = None,
) -> list[MonomialSumPoint]:
    """k-sum of f in its monomial along direction d, evaluated at each point.

    Pipeline per point: decompose along the monomial, evaluate the layers to a
    scalar t-series, Borel transform, Pade continuation, truncated Laplace
    integral at t = x1^p x2^q.
    """
    k = float(level.k)
    sector = summation_sector(level, d, radius)
    results = []
    for point in points:
        t, u = _point_t_series(f, level, point)
        _check_sector(t, sector)
        phi = pade_continue(formal_borel(u, k), *pade_degrees)
        res = laplace_sum(
            phi,
            k,
            t,
            d,
            xi_max=xi_max_factor * abs(t),
            nodes=nodes,
            panels=panels,
            pole_margin=pole_margin,
            residue_tol=residue_tol,
        )
        results.append(
            MonomialSumPoint(
                point=(complex(point[0]), complex(point[1])),
                t=t,
                value=res.value,
                tail_bound=res.tail_bound,
            )
        )
    return results


def estimate_singular_directions(
    f: BivariateSeries,
    level: SummabilityLevel,
    point: tuple[complex, complex],
    pade_degrees: tuple[int, int] = (18, 18),
    radius: float = 10.0,
    cluster_tol: float = 0.05,
    residue_tol: float = 1e-5,
) -> list[float]:
    """Directions of Borel-plane poles at the point, clustered by angle.

    Returns one representative angle per cluster (that of the closest pole),
    sorted; clusters merge poles whose arguments differ by < cluster_tol rad.
    Froissart doublets are dropped by the relative residue test first.
    """
    _, u = _point_t_series(f, level, point)
    phi = pade_continue(formal_borel(u, float(level.k)), *pade_degrees)
    poles = [z for z in phi.significant_poles(residue_tol) if 0 < abs(z) <= radius]
    poles.sort(key=lambda z: abs(z))
    reps: list[float] = []
    for z in poles:
        ang = cmath.phase(z)
        if not any(_angle_distance(ang, r) < cluster_tol for r in reps):
            reps.append(ang)
    return sorted(reps)
