"""Pfaffian systems: solver, integrability residuals, spectra, rank reduction."""

import math
from fractions import Fraction

import numpy as np
import pytest

from summtool.errors import DomainError, SingularLinearPartError
from summtool.pfaffian import (
    PfaffianSystem,
    YPolynomial,
    classify_spectra,
    cross_check_other_side,
    formal_solve,
    integrability_residual,
    linear_integrability_residual,
    linear_parts,
    pullback_system,
    rank_reduce,
)
from summtool.series import (
    BivariateSeries,
    BlowupMap,
    build_series,
)
from summtool.values import value_eq, value_norm

from conftest import (
    constant_rhs_system,
    random_invertible_system,
    random_series,
)


def max_norm(residual: YPolynomial) -> float:
    return residual.max_norm()


class TestLinearParts:
    def test_identity_for_constant_shift(self):
        sys = constant_rhs_system(1, 1, 1, 1, c=3.0, dim=2)
        a, b = linear_parts(sys)
        assert value_eq(a.coefficient(0, 0), np.eye(2, dtype=complex))
        assert len(a.coeffs) == 1

    def test_monomial_linear_part(self):
        lin = build_series([((1, 1), [1.0])], trunc=6, shape=(1,))
        f = YPolynomial(1, {(1,): lin})
        sys = PfaffianSystem(1, 1, 1, 1, 1, 1, f, f)
        a, _ = linear_parts(sys)
        assert value_eq(a.coefficient(1, 1), np.array([[1.0 + 0j]]))
        assert len(a.coeffs) == 1

    def test_quadratic_terms_do_not_leak(self):
        lin = BivariateSeries.constant([1.0], 6, (1,))
        quad = BivariateSeries.constant([5.0], 6, (1,))
        f = YPolynomial(1, {(1,): lin, (2,): quad})
        sys = PfaffianSystem(1, 1, 1, 1, 1, 2, f, f)
        a, _ = linear_parts(sys)
        assert value_eq(a.coefficient(0, 0), np.array([[1.0 + 0j]]))
        assert len(a.coeffs) == 1


class TestIntegrabilityResidual:
    def test_closing_example_integrable_case(self):
        sys = constant_rhs_system(1, 1, 1, 1)
        assert integrability_residual(sys, 10).is_zero()

    def test_closing_example_residual_formula(self):
        # for (p,q,p',q') = (1,2,1,1): residual = (x1 x2^2 - 2 x1 x2)(y - c)
        sys = constant_rhs_system(1, 2, 1, 1, c=2.5)
        res = integrability_residual(sys, 10)
        lin = res.terms[(1,)]
        assert value_eq(lin.coefficient(1, 2), np.array([1.0 + 0j]))
        assert value_eq(lin.coefficient(1, 1), np.array([-2.0 + 0j]))
        const = res.terms[(0,)]
        assert value_eq(const.coefficient(1, 2), np.array([-2.5 + 0j]))

    def test_zero_rhs(self):
        zero = BivariateSeries.zero(8, (1,))
        f = YPolynomial(1, {(0,): zero})
        sys = PfaffianSystem(1, 1, 2, 2, 1, 1, f, f)
        assert integrability_residual(sys, 8).is_zero()

    def test_order_beyond_trunc_rejected(self):
        sys = constant_rhs_system(1, 1, 1, 1, trunc=5)
        with pytest.raises(ValueError):
            integrability_residual(sys, 6)


class TestLinearResidual:
    def test_proportional_constant_pair_vanishes(self, rng):
        p, q = 2, 3
        a = build_series(
            [((0, 0), rng.integers(-4, 5, size=(3, 3)).astype(complex))],
            trunc=10,
            shape=(3, 3),
        )
        b = a.scale(q / p)
        assert linear_integrability_residual(a, b, (p, q, p, q)).is_zero()

    def test_identity_and_zero(self):
        a = BivariateSeries.constant(np.eye(2, dtype=complex), 8, (2, 2))
        b = BivariateSeries.zero(8, (2, 2))
        res = linear_integrability_residual(a, b, (1, 1, 1, 1))
        assert value_eq(res.coefficient(1, 1), -np.eye(2, dtype=complex))
        assert len(res.coeffs) == 1

    def test_zero_pair(self):
        z = BivariateSeries.zero(8, (2, 2))
        assert linear_integrability_residual(z, z, (1, 2, 2, 1)).is_zero()

    def test_matches_nonlinear_residual_on_linear_systems(self, rng):
        for _ in range(5):
            exps = tuple(int(rng.integers(1, 3)) for _ in range(4))
            a = random_series(rng, 8, shape=(2, 2), n_terms=6)
            b = random_series(rng, 8, shape=(2, 2), n_terms=6)
            f1 = YPolynomial(2, {(1, 0): a.column(0), (0, 1): a.column(1)})
            f2 = YPolynomial(2, {(1, 0): b.column(0), (0, 1): b.column(1)})
            sys = PfaffianSystem(*exps, 2, 1, f1, f2)
            res = integrability_residual(sys, 8)
            lin = linear_integrability_residual(a, b, exps).truncate(8)
            for j, alpha in enumerate([(1, 0), (0, 1)]):
                got = res.terms.get(alpha, BivariateSeries.zero(8, (2,)))
                for key in set(got.coeffs) | set(lin.coeffs):
                    want = lin.coeffs.get(key)
                    want_col = (
                        np.zeros(2, dtype=complex) if want is None else np.asarray(want)[:, j]
                    )
                    got_v = got.coeffs.get(key, np.zeros(2, dtype=complex))
                    assert np.allclose(np.asarray(got_v, dtype=complex), want_col)


class TestFormalSolve:
    def test_factorial_coefficients_exact(self):
        sys = constant_rhs_system(1, 1, 1, 1, c=0.0, dim=1, trunc=31, exact=True)
        minus_x1 = BivariateSeries.monomial(1, 0, [-1], 31, (1,), exact=True)
        f = YPolynomial(1, {(0,): minus_x1, (1,): sys.f1.terms[(1,)]})
        sys = PfaffianSystem(1, 1, 1, 1, 1, 1, f, f)
        y = formal_solve(sys, 1, 31)
        for n in range(16):
            assert y.coefficient(n + 1, n)[0] == math.factorial(n)

    def test_constant_solution(self):
        sys = constant_rhs_system(1, 1, 1, 1, c=2.5)
        y = formal_solve(sys, 1, 10)
        assert value_eq(y.coefficient(0, 0), np.array([2.5 + 0j]))
        assert len(y.coeffs) == 1

    def test_zero_solution(self):
        sys = constant_rhs_system(1, 1, 1, 1, c=0.0)
        assert formal_solve(sys, 1, 10).is_zero()

    def test_singular_linear_part_rejected(self):
        zero_lin = BivariateSeries.zero(8, (1,))
        c = BivariateSeries.monomial(1, 0, [1.0], 8, (1,))
        f = YPolynomial(1, {(0,): c, (1,): zero_lin})
        sys = PfaffianSystem(1, 1, 1, 1, 1, 1, f, f)
        with pytest.raises(SingularLinearPartError):
            formal_solve(sys, 1, 8)

    def test_side_two_symmetry(self):
        # x1 x2^2 dy/dx2 = y - x2 has the mirrored factorial solution
        minus_x2 = BivariateSeries.monomial(0, 1, [-1], 25, (1,), exact=True)
        lin = BivariateSeries.constant([1], 25, (1,), exact=True)
        f = YPolynomial(1, {(0,): minus_x2, (1,): lin})
        sys = PfaffianSystem(1, 1, 1, 1, 1, 1, f, f)
        y = formal_solve(sys, 2, 25)
        for n in range(12):
            assert y.coefficient(n, n + 1)[0] == math.factorial(n)

    def test_nonlinear_constant_term_newton(self):
        # y + y^2 - 0.3 = 0 at the origin: y0 = (-1 + sqrt(2.2)) / 2
        trunc = 8
        c = BivariateSeries.constant([-0.3], trunc, (1,))
        lin = BivariateSeries.constant([1.0], trunc, (1,))
        quad = BivariateSeries.constant([1.0], trunc, (1,))
        f = YPolynomial(1, {(0,): c, (1,): lin, (2,): quad})
        sys = PfaffianSystem(1, 1, 1, 1, 1, 2, f, f)
        y = formal_solve(sys, 1, trunc)
        y0 = complex(y.coefficient(0, 0)[0])
        assert y0.real == pytest.approx((-1 + math.sqrt(2.2)) / 2, abs=1e-12)
        assert y0 + y0**2 == pytest.approx(0.3, abs=1e-12)
        assert cross_check_other_side(sys, y, 1, trunc).valuation(tol=1e-10) is None

    def test_nonlinear_constant_term_rational_mode_rejected(self):
        # the linear step alone cannot satisfy y + y^2 = 0.3 exactly
        trunc = 6
        c = BivariateSeries.constant([Fraction(-3, 10)], trunc, (1,), exact=True)
        lin = BivariateSeries.constant([1], trunc, (1,), exact=True)
        quad = BivariateSeries.constant([1], trunc, (1,), exact=True)
        f = YPolynomial(1, {(0,): c, (1,): lin, (2,): quad})
        sys = PfaffianSystem(1, 1, 1, 1, 1, 2, f, f)
        with pytest.raises(DomainError):
            formal_solve(sys, 1, trunc)

    def test_random_systems_solve_to_order(self, rng):
        for _ in range(10):
            dim = int(rng.integers(1, 4))
            sys = random_invertible_system(rng, dim, 2, 12)
            y = formal_solve(sys, 1, 12)
            res = cross_check_other_side(sys, y, 1, 12)
            scale = max((value_norm(v) for v in y.coeffs.values()), default=1.0)
            worst = max((value_norm(v) for v in res.coeffs.values()), default=0.0)
            assert worst <= 1e-7 * max(1.0, scale)


class TestCrossCheck:
    def test_integrable_closing_example(self):
        sys = constant_rhs_system(1, 1, 1, 1, c=1.5)
        y = formal_solve(sys, 1, 10)
        assert cross_check_other_side(sys, y, 2, 9).is_zero()

    def test_constant_solves_both_sides_even_without_integrability(self):
        sys = constant_rhs_system(1, 2, 1, 1, c=1.5)
        y = formal_solve(sys, 1, 10)
        assert cross_check_other_side(sys, y, 2, 9).is_zero()

    def test_zero_on_linear_homogeneous(self):
        lin = BivariateSeries.constant([1.0], 8, (1,))
        f = YPolynomial(1, {(1,): lin})
        sys = PfaffianSystem(1, 1, 1, 1, 1, 1, f, f)
        y = BivariateSeries.zero(8, (1,))
        assert cross_check_other_side(sys, y, 2, 8).is_zero()


def spectral_case_oracle(p, q, pp, qp):
    """Independent restatement of the trichotomy for the acceptance table."""
    if p == pp and q == qp:
        return "EigenPairing"
    a_req = pp < p or qp < q
    b_req = p < pp or q < qp
    if a_req and b_req:
        return "Both_nilpotent_required"
    return "A_nilpotent_required" if a_req else "B_nilpotent_required"


class TestClassifySpectra:
    def test_identity_is_flagged(self):
        d = classify_spectra((1, 2, 1, 1), np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex))
        assert d.case == "A_nilpotent_required"
        assert d.violated

    def test_pairing_example(self):
        d = classify_spectra(
            (2, 3, 2, 3), np.diag([2.0, 4.0]).astype(complex), np.diag([3.0, 6.0]).astype(complex)
        )
        assert d.case == "EigenPairing"
        assert not d.violated
        assert all(pair["satisfied"] for pair in d.details["pairs"])

    def test_strictly_upper_triangular_is_nilpotent(self):
        b = np.array([[0, 1], [0, 0]], dtype=complex)
        d = classify_spectra((1, 1, 2, 2), np.eye(2, dtype=complex), b)
        assert d.case == "B_nilpotent_required"
        assert not d.violated

    def test_case_table(self):
        for p in range(1, 4):
            for q in range(1, 4):
                for pp in range(1, 4):
                    for qp in range(1, 4):
                        d = classify_spectra(
                            (p, q, pp, qp),
                            np.zeros((2, 2), dtype=complex),
                            np.zeros((2, 2), dtype=complex),
                        )
                        assert d.case == spectral_case_oracle(p, q, pp, qp)

    def test_scaling_invariance_of_nilpotency_verdict(self, rng):
        n = np.triu(rng.normal(size=(3, 3)), 1).astype(complex)
        for scale in (2.0, -0.5j, 137.0):
            d = classify_spectra((2, 1, 1, 1), scale * n, scale * np.eye(3, dtype=complex))
            assert d.case == "A_nilpotent_required"
            assert not d.violated

    def test_pairing_similarity_invariance(self, rng):
        a = np.diag([2.0, 4.0]).astype(complex)
        b = np.diag([3.0, 6.0]).astype(complex)
        pmat = np.array([[1.0, 0.3], [-0.2, 1.1]], dtype=complex)
        pinv = np.linalg.inv(pmat)
        d = classify_spectra((2, 3, 2, 3), pmat @ a @ pinv, pmat @ b @ pinv)
        assert d.case == "EigenPairing"
        assert not d.violated

    def test_pairing_violation_detected(self):
        d = classify_spectra(
            (1, 1, 1, 1), np.diag([1.0, 2.0]).astype(complex), np.diag([1.0, 5.0]).astype(complex)
        )
        assert d.case == "EigenPairing"
        assert d.violated


class TestRankReduce:
    def test_p_equal_one_is_identity(self, rng):
        a = random_series(rng, 8, shape=(2, 2), n_terms=5)
        b = random_series(rng, 8, shape=(2, 2), n_terms=5)
        pair = rank_reduce(a, b, (1, 2, 1, 2))
        assert pair.atilde == a and pair.btilde == b

    def test_constant_pair_block_structure(self):
        q = 2
        a0 = np.array([[1.0, 2.0], [0.5, -1.0]], dtype=complex)
        b0 = np.array([[3.0, 0.0], [1.0, 1.0]], dtype=complex)
        a = BivariateSeries.constant(a0, 10, (2, 2))
        b = BivariateSeries.constant(b0, 10, (2, 2))
        pair = rank_reduce(a, b, (2, q, 2, q))
        at = pair.atilde
        # constant block: blockdiag(A0, A0); shift -z1 x2^q I on the second block
        c00 = np.asarray(at.coefficient(0, 0), dtype=complex)
        assert np.allclose(c00[:2, :2], a0) and np.allclose(c00[2:, 2:], a0)
        assert np.allclose(c00[:2, 2:], 0) and np.allclose(c00[2:, :2], 0)
        shift = np.asarray(at.coefficient(1, q), dtype=complex)
        assert np.allclose(shift[2:, 2:], -np.eye(2))
        assert np.allclose(shift[:2, :2], 0)
        bt = np.asarray(pair.btilde.coefficient(0, 0), dtype=complex)
        assert np.allclose(bt[:2, :2], b0) and np.allclose(bt[2:, 2:], b0)
        assert len(pair.btilde.coeffs) == 1

    def test_proportional_pairs_reduce_to_zero_residual(self, rng):
        for _ in range(10):
            p = int(rng.integers(1, 4))
            q = int(rng.integers(1, 4))
            a0 = [[int(x) for x in row] for row in rng.integers(-4, 5, size=(2, 2))]
            a = BivariateSeries.constant(a0, 10, (2, 2), exact=True)
            b = a.scale(Fraction(q, p))
            assert linear_integrability_residual(a, b, (p, q, p, q)).is_zero()
            pair = rank_reduce(a, b, (p, q, p, q))
            assert pair.residual.is_zero()

    def test_non_commuting_pair_fails_linear_identity(self, rng):
        a0 = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        b0 = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
        a = BivariateSeries.constant(a0, 10, (2, 2))
        b = BivariateSeries.constant(b0, 10, (2, 2))
        assert not linear_integrability_residual(a, b, (2, 2, 2, 2)).is_zero()

    def test_requires_equal_p(self, rng):
        a = random_series(rng, 6, shape=(2, 2))
        with pytest.raises(ValueError):
            rank_reduce(a, a, (2, 1, 3, 1))


class TestPullbackSystem:
    def test_exponent_transport_pi1(self):
        sys = constant_rhs_system(1, 1, 1, 1)
        out = pullback_system(sys, BlowupMap("pi1", 1))
        assert (out.p, out.q, out.p_prime, out.q_prime) == (1, 2, 1, 2)

    def test_correction_term_with_trivial_factor(self):
        # p=q=p'=q'=1, N=1: second side becomes f2ppi1 + f1opi1
        sys = constant_rhs_system(1, 1, 1, 1, c=2.0)
        out = pullback_system(sys, BlowupMap("pi1", 1))
        const = out.f2.terms[(0,)]
        assert value_eq(const.coefficient(0, 0), np.array([-4.0 + 0j]))

    def test_integrability_preserved(self):
        sys = constant_rhs_system(2, 2, 2, 2, c=1.0)
        assert integrability_residual(sys, 10).is_zero()
        for bmap in (BlowupMap("pi1", 1), BlowupMap("pi2", 1), BlowupMap("pi1", 2)):
            out = pullback_system(sys, bmap)
            assert integrability_residual(out, 10).is_zero()

    def test_integrability_preserved_at_unequal_exponents(self):
        # with f1 = f2 and (p, q) = (p', q') = (2, 1), integrability needs every
        # coefficient series supported on n - m = p - q = 1
        trunc = 10
        c0 = BivariateSeries.monomial(1, 0, [-3.0], trunc, (1,))
        c1 = build_series([((1, 0), [1.0]), ((2, 1), [1.0])], trunc, (1,))
        f = YPolynomial(1, {(0,): c0, (1,): c1})
        sys = PfaffianSystem(2, 1, 2, 1, 1, 1, f, f)
        assert integrability_residual(sys, 10).is_zero()
        for bmap in (BlowupMap("pi1", 1), BlowupMap("pi2", 1)):
            out = pullback_system(sys, bmap)
            assert integrability_residual(out, 10).is_zero()

    def test_non_divisible_correction_rejected(self):
        # p' < p under pi1 needs division of f1 by x1^(p-p'), impossible for y - c
        sys = constant_rhs_system(2, 1, 1, 1, c=1.0)
        with pytest.raises(DomainError):
            pullback_system(sys, BlowupMap("pi1", 1))

    def test_divisible_correction_accepted(self):
        # f1 divisible by the missing power: f1 = x1 * (y - c), p = 2, p' = 1
        trunc = 8
        c = BivariateSeries.monomial(1, 0, [-3.0], trunc, (1,))
        lin = BivariateSeries.monomial(1, 0, [1.0], trunc, (1,))
        f1 = YPolynomial(1, {(0,): c, (1,): lin})
        zero = BivariateSeries.zero(trunc, (1,))
        f2 = YPolynomial(1, {(0,): zero})
        sys = PfaffianSystem(2, 1, 1, 1, 1, 1, f1, f2)
        out = pullback_system(sys, BlowupMap("pi1", 1))
        assert (out.p, out.q, out.p_prime, out.q_prime) == (2, 3, 1, 2)
