"""Borel transform, Pade continuation, Laplace quadrature, monomial sums.

Frozen oracle values come from mpmath: the truncated Euler-function integral
(1/t) e^(1/t) E1(1/t) at t = 0.1 was computed at 30 digits.
"""

import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from summtool.borel import (
    SectorSpec,
    UnivariateSeries,
    estimate_singular_directions,
    formal_borel,
    laplace_sum,
    pade_continue,
    sum_in_monomial,
    summation_sector,
)
from summtool.errors import DomainError, SingularDirectionError
from summtool.gevrey import SummabilityLevel
from summtool.series import build_series, evaluate_truncated

from conftest import euler_series, poincare_series

# (1/t) e^(1/t) E1(1/t) at t = 0.1, mpmath.mp.dps = 30
EULER_SUM_AT_T_TENTH = 0.9156333393978808


def lv(p, q, k):
    return SummabilityLevel(p, q, Fraction(k))


class TestFormalBorel:
    def test_factorials_flatten_to_geometric(self):
        u = UnivariateSeries([math.factorial(n) for n in range(12)], "t")
        b = formal_borel(u, 1.0)
        assert b.variable == "xi"
        assert np.allclose(b.coeffs, np.ones(12))

    def test_constant(self):
        b = formal_borel(UnivariateSeries([3 - 2j], "t"), 2.0)
        assert b.coeffs[0] == 3 - 2j

    def test_poincare_borel_matches_closed_form(self):
        # The order-1 transform of the layer series at (x1, x2) continues to
        # 1/(1 - x1 e^-xi) + 1/(1 - x2 e^-xi) - 2.
        from summtool.gevrey import monomial_decompose
        from summtool.series import MonomialIndex

        x1, x2 = 0.2, 0.3
        layers = monomial_decompose(poincare_series(40), MonomialIndex(1, 1)).layers
        u = UnivariateSeries([evaluate_truncated(l, (x1, x2)) for l in layers], "t")
        b = formal_borel(u, 1.0)
        for xi in (0.0, 0.2, 0.5j, -0.3):
            partial = sum(c * xi**n for n, c in enumerate(b.coeffs[:12]))
            closed = (
                1 / (1 - x1 * cmath.exp(-xi)) + 1 / (1 - x2 * cmath.exp(-xi)) - 2
            )
            assert abs(partial - closed) < 1e-4

    def test_linearity(self):
        u = UnivariateSeries([1.0, 2.0, 3.0], "t")
        v = UnivariateSeries([1j, -1j, 0.5], "t")
        a, b = 2.0 - 1j, 0.25
        lhs = formal_borel(UnivariateSeries(a * u.coeffs + b * v.coeffs, "t"), 1.5)
        rhs = a * formal_borel(u, 1.5).coeffs + b * formal_borel(v, 1.5).coeffs
        assert np.allclose(lhs.coeffs, rhs)


class TestPade:
    def test_geometric_is_exact(self):
        u = UnivariateSeries(np.ones(11), "xi")
        approx = pade_continue(u, 0, 1)
        assert approx.degrees == (0, 1)
        assert np.allclose(approx.denom, [1.0, -1.0])
        for xi in (0.3, -2.0, 1j):
            assert approx(xi) == pytest.approx(1 / (1 - xi))

    def test_polynomial_passthrough(self):
        u = UnivariateSeries([1.0, 1.0], "xi")
        approx = pade_continue(u, 1, 0)
        assert np.allclose(approx.numer, [1.0, 1.0])
        assert approx.degrees == (1, 0)

    def test_alternating_geometric(self):
        u = UnivariateSeries([(-1.0) ** n for n in range(11)], "xi")
        approx = pade_continue(u, 0, 1)
        assert approx(0.5) == pytest.approx(1 / 1.5)
        assert np.allclose(approx.poles(), [-1.0])

    def test_degenerate_system_reduces_m(self):
        # geometric data with excess denominator degree is rank-deficient and
        # falls back to the smallest solvable M
        u = UnivariateSeries(np.ones(9), "xi")
        approx = pade_continue(u, 0, 3)
        assert approx.degrees == (0, 1)
        assert approx(0.4) == pytest.approx(1 / 0.6)

    def test_degrees_clamped_to_data(self):
        u = UnivariateSeries(np.ones(5), "xi")
        approx = pade_continue(u, 18, 18)
        l_deg, m_deg = approx.degrees
        assert l_deg + m_deg + 1 <= 5


class TestLaplace:
    def test_euler_function_value(self):
        u = UnivariateSeries([(-1.0) ** n * math.factorial(n) for n in range(16)], "t")
        approx = pade_continue(formal_borel(u, 1.0), 7, 7)
        res = laplace_sum(approx, 1.0, 0.1, 0.0, xi_max=4.0)
        assert res.value.real == pytest.approx(EULER_SUM_AT_T_TENTH, abs=1e-9)
        assert abs(res.value.imag) < 1e-12

    def test_mpmath_oracle_agrees(self):
        mpmath.mp.dps = 30
        oracle = float(10 * mpmath.e ** 10 * mpmath.e1(10))
        assert oracle == pytest.approx(EULER_SUM_AT_T_TENTH, abs=1e-13)

    def test_constant_normalization(self):
        approx = pade_continue(UnivariateSeries([2.5 + 0.5j], "xi"), 0, 0)
        for t, d in [(0.1, 0.0), (0.05 + 0.02j, 0.3)]:
            res = laplace_sum(approx, 1.0, t, d, xi_max=40 * abs(t))
            assert res.value == pytest.approx(2.5 + 0.5j, abs=1e-8)

    def test_pole_on_ray_is_singular_direction(self):
        approx = pade_continue(UnivariateSeries(np.ones(11), "xi"), 0, 1)
        with pytest.raises(SingularDirectionError):
            laplace_sum(approx, 1.0, 0.1, 0.0, xi_max=4.0)

    def test_decay_condition(self):
        approx = pade_continue(UnivariateSeries([1.0], "xi"), 0, 0)
        with pytest.raises(DomainError):
            laplace_sum(approx, 1.0, 0.1, math.pi, xi_max=4.0)

    def test_direction_continuity_on_euler_witness(self):
        u = UnivariateSeries([(-1.0) ** n * math.factorial(n) for n in range(16)], "t")
        approx = pade_continue(formal_borel(u, 1.0), 7, 7)
        a = laplace_sum(approx, 1.0, 0.1, 0.10, xi_max=4.0).value
        b = laplace_sum(approx, 1.0, 0.1, 0.11, xi_max=4.0).value
        assert abs(a - b) < 1e-3


class TestSumInMonomial:
    def test_poincare_benchmark(self):
        x1, x2 = 0.2, 0.3
        closed = sum((x1**n + x2**n) / (1 + n * x1 * x2) for n in range(1, 201))
        res = sum_in_monomial(poincare_series(40), lv(1, 1, 1), 0.0, [(x1, x2)])
        assert abs(res[0].value - closed) < 1e-4

    def test_polynomial_is_exact(self):
        f = build_series([((0, 0), 1.0), ((1, 1), 2.0), ((3, 2), -0.5)], trunc=10)
        point = (0.3, 0.4)
        res = sum_in_monomial(f, lv(1, 1, 1), 0.0, [point])
        assert abs(res[0].value - evaluate_truncated(f, point)) < 1e-8

    def test_euler_witness_at_shifted_point(self):
        f = euler_series(30, sign=-1)
        res = sum_in_monomial(f, lv(1, 1, 1), 0.0, [(0.2, 0.5)], pade_degrees=(7, 7))
        assert res[0].value.real == pytest.approx(EULER_SUM_AT_T_TENTH, abs=1e-7)

    def test_vector_series_rejected(self):
        f = build_series([((0, 0), [1, 2])], trunc=8, shape=(2,))
        with pytest.raises(ValueError):
            sum_in_monomial(f, lv(1, 1, 1), 0.0, [(0.1, 0.1)])

    def test_point_outside_sector_rejected(self):
        f = euler_series(20)
        with pytest.raises(ValueError):
            sum_in_monomial(f, lv(1, 1, 1), 0.0, [(0.2j, 0.3j)])

    def test_point_outside_radius_rejected(self):
        f = euler_series(20, sign=-1)
        with pytest.raises(ValueError):
            sum_in_monomial(f, lv(1, 1, 1), 0.0, [(0.5, 0.5)], radius=0.1)

    def test_summation_sector_shape(self):
        sector = summation_sector(lv(1, 1, 2), 0.25, radius=0.5)
        assert sector.opening == pytest.approx(math.pi / 2)
        assert sector.direction == 0.25 and sector.radius == 0.5
        with pytest.raises(ValueError):
            SectorSpec(direction=0.0, opening=-1.0, radius=1.0)

    def test_doubling_nodes_is_stable(self):
        f = poincare_series(40)
        a = sum_in_monomial(f, lv(1, 1, 1), 0.0, [(0.2, 0.3)], nodes=64)[0].value
        b = sum_in_monomial(f, lv(1, 1, 1), 0.0, [(0.2, 0.3)], nodes=128)[0].value
        assert abs(a - b) < 1e-6


class TestSingularDirections:
    def test_poincare_reports_pi(self):
        dirs = estimate_singular_directions(poincare_series(40), lv(1, 1, 1), (0.2, 0.3))
        assert any(abs(d - math.pi) < 0.1 for d in dirs)

    def test_euler_witness_reports_pi(self):
        f = euler_series(30, sign=-1)
        dirs = estimate_singular_directions(
            f, lv(1, 1, 1), (0.2, 0.5), pade_degrees=(7, 7)
        )
        assert any(abs(abs(d) - math.pi) < 0.05 for d in dirs)

    def test_polynomial_has_none(self):
        f = build_series([((0, 0), 1.0), ((2, 2), 3.0)], trunc=10)
        dirs = estimate_singular_directions(f, lv(1, 1, 1), (0.2, 0.3))
        assert dirs == []
