#!/usr/bin/env python3
"""
Tests for the spectral engine module
"""

import math
import os
import sys
from fractions import Fraction

import pytest

# Add parent directory to path for importing modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from modules.errors import ExitCode, InvalidToleranceError, OddTermPresentError, ZeroLeadingCoefficientError
from modules.gaussian_rational import GaussianRational, I, ONE, ZERO
from modules.operator_algebra import AdjointMatrix, CanonicalPolynomial, adjoint_matrix
from modules.spectral_engine import (
    RESIDUAL_BOUND, CharacteristicPolynomial, Tolerances, Verdict, analyze_hamiltonian, characteristic_polynomial,
    classify_spectrum, evaluate, exact_roots, merge_close_roots, polynomial_roots, reduce_to_xi, square_free_factors,
)
from tests.factories import make_space, random_quadratic

SQRT13 = math.sqrt(13)


def assert_roots(actual, expected, tol):
    """Match two root multisets within an absolute tolerance."""
    remaining = list(actual)
    assert len(remaining) == len(expected)
    for target in expected:
        best = min(remaining, key=lambda r: abs(r - target))
        assert abs(best - target) <= tol, f"{target} not found in {actual}"
        remaining.remove(best)


def oscillator(space, omega):
    q = CanonicalPolynomial.variable(space, 'q')
    p = CanonicalPolynomial.variable(space, 'p')
    return (p * p).scale(Fraction(1, 2)) + (q * q).scale(Fraction(omega) ** 2 / 2)


def uncoupled_oscillators(omega_squares):
    """Sum of p_a^2/2 + w_a q_a^2/2, one pair per entry."""
    space = make_space(len(omega_squares))
    H = CanonicalPolynomial.zero(space)
    for a, w in enumerate(omega_squares, start=1):
        q = CanonicalPolynomial.variable(space, f"q{a}")
        p = CanonicalPolynomial.variable(space, f"p{a}")
        H = H + (p * p).scale(Fraction(1, 2)) + (q * q).scale(Fraction(w) / 2)
    return H


class TestCharacteristicPolynomial:
    """Tests for characteristic_polynomial and reduce_to_xi."""

    def test_two_by_two(self, qp_space):
        """[[0, i], [-i, 0]] -> lambda^2 - 1."""
        M = AdjointMatrix(space=qp_space, entries=((ZERO, I), (-I, ZERO)))
        poly = characteristic_polynomial(M)
        assert poly.lambda_coeffs == (-ONE, ZERO, ONE)
        assert reduce_to_xi(poly) == (-ONE, ONE)

    def test_monic_and_even(self, rng):
        """Random quadratic adjoints: monic, no odd powers."""
        for _ in range(30):
            space = make_space(rng.randint(1, 3))
            poly = characteristic_polynomial(adjoint_matrix(random_quadratic(rng, space)))
            assert poly.lambda_coeffs[-1] == 1
            assert poly.degree == space.size
            assert poly.odd_indices() == []
            assert poly.xi_coeffs == reduce_to_xi(poly)

    def test_matches_determinant(self, qp_space):
        """2x2 check against lambda^2 - tr*lambda + det with a fractional matrix."""
        a, b = GaussianRational(Fraction(1, 3), 2), GaussianRational(0, Fraction(-5, 7))
        c, d = GaussianRational(Fraction(3, 2)), GaussianRational(-1, Fraction(1, 4))
        poly = characteristic_polynomial(AdjointMatrix(space=qp_space, entries=((a, b), (c, d))))
        assert poly.lambda_coeffs == (a * d - b * c, -(a + d), ONE)

    def test_odd_term(self, qp_space):
        """lambda^3-type input reports the largest odd index."""
        poly = CharacteristicPolynomial(lambda_coeffs=(ZERO, ONE, ZERO, ONE))
        with pytest.raises(OddTermPresentError) as excinfo:
            reduce_to_xi(poly)
        assert excinfo.value.index == 3


class TestPolynomialRoots:
    """Tests for polynomial_roots."""

    def test_cubic_integer_roots(self):
        assert_roots(polynomial_roots([1, -6, 11, -6]), [1, 2, 3], 1e-10)

    def test_cubic_complex_pair(self):
        """xi^3 - 3 xi^2 + 3 xi - 3/4 = (xi - 1)^3 + 1/4."""
        roots = polynomial_roots([1, -3, 3, Fraction(-3, 4)])
        assert_roots(roots, [0.370039, complex(1.314980, 0.545562), complex(1.314980, -0.545562)], 1e-6)

    def test_cubic_with_quadratic_factor(self):
        roots = polynomial_roots([1, -8, 18, -9])
        assert_roots(roots, [3, (5 + SQRT13) / 2, (5 - SQRT13) / 2], 1e-10)

    @pytest.mark.parametrize("coeffs, expected", [
        ([2, -4], [2]),
        ([1, 0, 1], [1j, -1j]),
        ([1, -2, 1], [1, 1]),
        ([1, 0, 0, 0, -1], [1, -1, 1j, -1j]),
        ([1, -10, 35, -50, 24], [1, 2, 3, 4]),
        ([1, 0, -5, 0, 4], [1, -1, 2, -2]),
        ([1, -15, 85, -225, 274, -120], [1, 2, 3, 4, 5]),
    ])
    def test_known_roots(self, coeffs, expected):
        assert_roots(polynomial_roots(coeffs), expected, 1e-6)

    def test_gaussian_coefficients(self):
        """(x - i)(x + 2) with exact complex coefficients."""
        roots = polynomial_roots([ONE, GaussianRational(2, -1), GaussianRational(0, -2)])
        assert_roots(roots, [1j, -2], 1e-12)

    def test_residual_bound(self, rng):
        """|p(r)| <= 1e-8 * max|coeff| after monic scaling."""
        for _ in range(50):
            degree = rng.randint(1, 6)
            coeffs = [complex(rng.uniform(-5, 5), rng.uniform(-5, 5)) for _ in range(degree + 1)]
            coeffs[0] = complex(rng.choice([1, -2, 3]), 0)
            roots = polynomial_roots(coeffs)
            assert len(roots) == degree
            monic = [c / coeffs[0] for c in coeffs]
            bound = 1.0 + max(abs(c) for c in monic[1:])
            scaled = [monic[k] / bound ** k for k in range(degree + 1)]
            for r in roots:
                assert abs(evaluate(scaled, r / bound)) <= RESIDUAL_BOUND * max(abs(c) for c in scaled)

    def test_zero_leading(self):
        with pytest.raises(ZeroLeadingCoefficientError):
            polynomial_roots([0, 1, 2])
        with pytest.raises(ZeroLeadingCoefficientError):
            polynomial_roots([5])


class TestExactRoots:
    """Tests for square_free_factors and exact_roots."""

    def test_double_and_simple(self):
        """(x - 1)^2 (x - 2)."""
        assert square_free_factors([-2, 5, -4, 1]) == [((-2, 1), 1), ((-1, 1), 2)]

    def test_pure_power(self):
        assert square_free_factors([0, 0, 0, 1]) == [((0, 1), 3)]

    def test_square_free_input(self):
        assert square_free_factors([1, 0, 1]) == [((1, 0, 1), 1)]

    def test_non_monic(self):
        """2 (x - 3)^2 comes back monic."""
        assert square_free_factors([18, -12, 2]) == [((-3, 1), 2)]

    def test_gaussian_double_root(self):
        """(x - i)^2 = x^2 - 2i x - 1."""
        assert square_free_factors([-ONE, I * -2, ONE]) == [((-I, ONE), 2)]

    def test_constant(self):
        with pytest.raises(ZeroLeadingCoefficientError):
            square_free_factors([5])

    def test_exact_roots_repeat(self):
        roots, repeated = exact_roots([-2, 5, -4, 1])
        assert repeated
        assert_roots(roots, [2, 1, 1], 1e-12)

    def test_exact_roots_simple(self):
        roots, repeated = exact_roots([Fraction(-3, 4), 3, -3, 1])
        assert not repeated
        assert_roots(roots, [0.370039, complex(1.314980, 0.545562), complex(1.314980, -0.545562)], 1e-6)


class TestClassifySpectrum:
    """Tests for classify_spectrum and merge_close_roots."""

    def test_unbroken(self):
        result = classify_spectrum([8, 3, 4.302776, 0.697224])
        assert result.verdict == Verdict.UNBROKEN
        assert len(result.lambdas) == 8
        assert not result.degenerate

    def test_broken(self):
        result = classify_spectrum([-1, 0.5, complex(1, 2), complex(1, -2)])
        assert result.verdict == Verdict.BROKEN
        assert result.min_re_xi == -1

    def test_boundary(self):
        assert classify_spectrum([0, 1, 2, 3]).verdict == Verdict.BOUNDARY

    def test_negation_symmetry(self):
        result = classify_spectrum([4, complex(1, 1)])
        for lam in result.lambdas:
            assert min(abs(lam + other) for other in result.lambdas) < 1e-12

    def test_degenerate_forces_boundary(self):
        """Coinciding positive roots are not Unbroken."""
        result = classify_spectrum([2, 2 + 1e-12, 5])
        assert result.degenerate
        assert result.verdict == Verdict.BOUNDARY

    @pytest.mark.parametrize("xis", [[-3, -3, 1], [-1, -1, 2], [complex(1, 2), complex(1, 2), 4]])
    def test_degenerate_overrides_broken(self, xis):
        result = classify_spectrum(xis)
        assert result.degenerate
        assert result.verdict == Verdict.BOUNDARY

    def test_merge_close_roots(self):
        merged, degenerate = merge_close_roots([1.0, 1.0 + 1e-9, 3.0])
        assert degenerate
        assert merged[0] == merged[1]
        assert merged[2] == 3.0
        merged, degenerate = merge_close_roots([1.0, 2.0])
        assert not degenerate
        assert merged == [1.0, 2.0]

    @pytest.mark.parametrize("tol_im, tol_boundary", [(0, 1e-9), (1e-9, -1), (float('nan'), 1e-9)])
    def test_invalid_tolerances(self, tol_im, tol_boundary):
        with pytest.raises(InvalidToleranceError):
            classify_spectrum([1], tol_im, tol_boundary)

    def test_verdict_exit_codes(self):
        assert Verdict.UNBROKEN.exit_code == ExitCode.UNBROKEN == 0
        assert Verdict.BROKEN.exit_code == 1
        assert Verdict.BOUNDARY.exit_code == 2


class TestAnalyzeHamiltonian:
    """End-to-end generic pipeline."""

    def test_unit_oscillator(self, qp_space):
        report = analyze_hamiltonian(oscillator(qp_space, 1))
        assert report.classification.verdict == Verdict.UNBROKEN
        assert_roots(report.classification.lambdas, [1, -1], 1e-12)

    @pytest.mark.parametrize("omega", [Fraction(1, 2), Fraction(2), Fraction(7, 3)])
    def test_oscillator_frequency(self, qp_space, omega):
        report = analyze_hamiltonian(oscillator(qp_space, omega))
        assert_roots(report.classification.lambdas, [float(omega), -float(omega)], 1e-10)

    def test_scaling_covariance(self, rng):
        """c*H scales lambda by c and keeps the verdict."""
        space = make_space(2)
        for _ in range(5):
            H = random_quadratic(rng, space, real=True)
            c = Fraction(rng.randint(1, 9), rng.randint(1, 9))
            base = analyze_hamiltonian(H)
            scaled = analyze_hamiltonian(H.scale(c))
            assert scaled.classification.verdict == base.classification.verdict
            expected = [lam * float(c) for lam in base.classification.lambdas]
            assert_roots(scaled.classification.lambdas, expected, 1e-6 * (1 + max(abs(z) for z in expected)))

    def test_report_document(self, qp_space):
        document = analyze_hamiltonian(oscillator(qp_space, 1)).to_dict()
        assert document['adjoint_matrix'] == [['0', 'i'], ['-i', '0']]
        assert document['characteristic_polynomial'] == ['-1', '0', '1']
        assert document['xi_polynomial'] == ['-1', '1']
        assert document['classification']['verdict'] == 'Unbroken'

    def test_tolerances_validated(self):
        with pytest.raises(InvalidToleranceError):
            Tolerances(tol_im=-1)

    @pytest.mark.parametrize("count, omega_squared", [
        (2, Fraction(5, 3)),
        (3, Fraction(5, 3)),
        (3, Fraction(2, 7)),
        (4, Fraction(1, 3)),
    ])
    def test_identical_oscillators(self, count, omega_squared):
        """A k-fold real frequency is Boundary, never split into a complex pair."""
        report = analyze_hamiltonian(uncoupled_oscillators([omega_squared] * count))
        classification = report.classification
        assert classification.degenerate
        assert classification.verdict == Verdict.BOUNDARY
        assert len(classification.xis) == count
        for xi in classification.xis:
            assert abs(xi.imag) < 1e-15
            assert abs(xi.real - float(omega_squared)) < 1e-12

    def test_partly_repeated(self):
        report = analyze_hamiltonian(uncoupled_oscillators([1, 4, 4]))
        assert report.classification.degenerate
        assert report.classification.verdict == Verdict.BOUNDARY
        assert_roots(report.classification.xis, [1, 4, 4], 1e-12)

    def test_distinct_oscillators(self):
        report = analyze_hamiltonian(uncoupled_oscillators([1, 4, Fraction(9, 4)]))
        assert not report.classification.degenerate
        assert report.classification.verdict == Verdict.UNBROKEN
