#!/usr/bin/env python3
"""
Tests for the self-force model module
"""

import math
import os
import pickle
import sys
from fractions import Fraction

import pytest

# Add parent directory to path for importing modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from modules.errors import DegenerateParameterError, MissingParameterError, UnknownParameterError
from modules.gaussian_rational import I
from modules.operator_algebra import adjoint_matrix, is_formally_symmetric
from modules.spectral_engine import Tolerances, Verdict, characteristic_polynomial
from modules.selfforce_model import (
    PT_CANDIDATES, SelfForceParams, adjoint_closed_form, analytic_predicate, build_hamiltonian, classify_params,
    cubic_coefficients, cubic_discriminant, expected_xi_polynomial, hamiltonian_c, symmetry_checks,
    xi_linear_root,
)
from tests.factories import random_params

SQRT13 = math.sqrt(13)


def assert_roots(actual, expected, rel):
    remaining = list(actual)
    assert len(remaining) == len(expected)
    for target in expected:
        best = min(remaining, key=lambda r: abs(r - target))
        assert abs(best - target) <= rel * max(1.0, abs(target)), f"{target} not found in {actual}"
        remaining.remove(best)


class TestSelfForceParams:
    """Tests for SelfForceParams."""

    def test_coercion(self):
        params = SelfForceParams('1/2', 1, '0.25', -3, Fraction(2, 3))
        assert params.m == Fraction(1, 2)
        assert params.k == Fraction(1, 4)
        assert params.to_dict() == {'m': '1/2', 'tau': '1', 'k': '1/4', 'A': '-3', 'B': '2/3'}

    @pytest.mark.parametrize("m, tau", [(0, 1), (1, 0), (-1, 1), (1, '-1/2')])
    def test_degenerate(self, m, tau):
        with pytest.raises(DegenerateParameterError):
            SelfForceParams(m, tau, 0, 0, 0)

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            SelfForceParams(0.5, 1, 0, 0, 0)

    def test_from_binding(self):
        params = SelfForceParams.from_binding({'m': 1, 'tau': 2, 'k': 3, 'A': 4, 'B': 5})
        assert params == SelfForceParams(1, 2, 3, 4, 5)
        with pytest.raises(MissingParameterError):
            SelfForceParams.from_binding({'m': 1, 'tau': 2, 'k': 3, 'A': 4})
        with pytest.raises(UnknownParameterError):
            SelfForceParams.from_binding({'m': 1, 'tau': 2, 'k': 3, 'A': 4, 'B': 5, 'C': 6})

    def test_picklable(self, disagreement_point):
        assert pickle.loads(pickle.dumps(disagreement_point)) == disagreement_point


class TestHamiltonian:
    """Tests for build_hamiltonian."""

    def test_hc_terms(self, hc_point):
        """A = B = 0 leaves only the original terms."""
        H = build_hamiltonian(hc_point)
        assert H == hamiltonian_c(1, 1, 1)
        assert H.coefficient_of('x', 'x') == 0
        assert H.coefficient_of('w', 'p_z') == 0
        assert H.coefficient_of('p_z', 'p_w') == 2
        assert H.coefficient_of('z', 'p_x') == Fraction(1, 2)

    def test_read_off_terms(self):
        H = build_hamiltonian(SelfForceParams(1, 1, 1, 1, 1))
        assert H.coefficient_of('z', 'w') == Fraction(-1, 2)
        assert H.coefficient_of('x', 'x') == Fraction(1, 2)
        assert H.coefficient_of('z', 'p_w') == -1

    def test_formally_symmetric(self, rng):
        for _ in range(10):
            assert is_formally_symmetric(build_hamiltonian(random_params(rng)))


class TestClosedForms:
    """Closed-form matrix, roots and factorization against the generic pipeline."""

    def test_adjoint_entries(self):
        params = SelfForceParams(2, 3, 5, 7, 11)
        M = adjoint_closed_form(params)
        assert M.entry(0, 4) == I * 7
        assert M.entry(0, 5) == I * 5
        assert M.entry(2, 0) == I * Fraction(-1, 2)
        assert M.entry(7, 0) == I * Fraction(-1, 6)
        assert M.entry(6, 3) == I * Fraction(-2, 18)

    def test_closed_form_identity(self, rng):
        """adjoint_matrix(build_hamiltonian(p)) equals the hard-coded matrix at 100 points."""
        for trial in range(100):
            params = random_params(rng)
            assert adjoint_matrix(build_hamiltonian(params)) == adjoint_closed_form(params), f"trial {trial}: {params}"

    def test_factorization_identity(self, rng):
        """The characteristic polynomial is the monic linear-times-cubic product in xi."""
        for trial in range(100):
            params = random_params(rng)
            poly = characteristic_polynomial(adjoint_closed_form(params))
            assert poly.odd_indices() == []
            assert tuple(poly.xi_coeffs) == expected_xi_polynomial(params), f"trial {trial}: {params}"

    @pytest.mark.parametrize("point, expected", [
        ((1, 1, 0, 3, 3), 8),
        ((2, 5, 0, 0, 2), 0),
        ((1, 1, 1, 0, 0), -1),
    ])
    def test_xi_linear_root(self, point, expected):
        assert xi_linear_root(SelfForceParams(*point)) == expected

    @pytest.mark.parametrize("point, expected", [
        ((1, 1, 0, 3, 3), (1, -8, 18, -9)),
        ((1, 1, '1/2', 1, 2), (1, -3, 3, Fraction(-3, 4))),
        ((1, 1, 1, 0, 0), (1, 1, -2, 1)),
    ])
    def test_cubic_coefficients(self, point, expected):
        assert cubic_coefficients(SelfForceParams(*point)) == expected

    def test_discriminant(self, unbroken_point, disagreement_point):
        """Three distinct real roots give a positive discriminant."""
        assert cubic_discriminant(unbroken_point) > 0
        assert cubic_discriminant(disagreement_point) < 0

    @pytest.mark.parametrize("point, expected", [
        ((1, 1, 1, 0, 0), False),
        ((1, 1, 0, 3, 3), True),
        ((1, 1, '1/2', 1, 2), True),
        ((1, 1, 0, 3, 1), False),
        ((1, 1, 1, -3, 3), False),
        ((1, 1, 1, -3, -3), True),
    ])
    def test_analytic_predicate(self, point, expected):
        assert analytic_predicate(SelfForceParams(*point)) is expected


class TestClassifyParams:
    """Tests for classify_params."""

    def test_hc_broken(self, hc_point):
        report = classify_params(hc_point)
        assert report.verdict == Verdict.BROKEN
        assert not report.predicate
        assert report.agreement
        assert report.xi_linear == -1
        xis = report.classification.xis
        assert any(abs(z.imag) > 1e-3 for z in xis)
        assert any(abs(z.imag) < 1e-12 and z.real < 0 for z in xis)

    def test_unbroken_point(self, unbroken_point):
        report = classify_params(unbroken_point)
        assert report.verdict == Verdict.UNBROKEN
        assert report.predicate
        assert report.agreement
        assert_roots(report.classification.xis, [8, 3, (5 + SQRT13) / 2, (5 - SQRT13) / 2], 1e-9)

    def test_predicate_insufficiency(self, disagreement_point):
        report = classify_params(disagreement_point)
        assert report.predicate
        assert report.verdict == Verdict.BROKEN
        assert not report.agreement
        cubic_roots = [z for z in report.classification.xis if abs(z - 3) > 1e-6]
        assert_roots(cubic_roots, [0.370039, complex(1.314980, 0.545562), complex(1.314980, -0.545562)], 1e-6)

    @pytest.mark.parametrize("point, min_re", [
        ((1, 1, 0, 0, 2), 0.0),
        ((1, 1, 0, 0, '1/2'), -0.75),
    ])
    def test_repeated_roots_are_boundary(self, point, min_re):
        """A = k = 0 gives xi^2 in the cubic; B = 2 also repeats the linear root."""
        report = classify_params(SelfForceParams(*point))
        assert report.classification.degenerate
        assert report.verdict == Verdict.BOUNDARY
        assert not report.predicate
        assert report.agreement
        assert len(report.classification.xis) == 4
        assert abs(report.classification.min_re_xi - min_re) < 1e-12

    def test_linear_root_membership(self, rng):
        for _ in range(20):
            report = classify_params(random_params(rng))
            assert len(report.classification.xis) == 4
            target = float(report.xi_linear)
            assert min(abs(z - target) for z in report.classification.xis) <= 1e-6 * (1 + abs(target))

    def test_predicate_necessity(self, rng):
        """Unbroken always implies the predicate."""
        for _ in range(60):
            report = classify_params(random_params(rng))
            if report.verdict == Verdict.UNBROKEN:
                assert report.predicate

    @pytest.mark.parametrize("factor", [10.0, 0.1])
    def test_verdict_stable_under_tolerances(self, factor, hc_point, unbroken_point, disagreement_point):
        for point in (hc_point, unbroken_point, disagreement_point):
            base = classify_params(point)
            tolerances = Tolerances(tol_im=1e-9 * factor, tol_boundary=1e-9 * factor)
            assert classify_params(point, tolerances=tolerances).verdict == base.verdict

    def test_tolerance_overrides(self, unbroken_point):
        report = classify_params(unbroken_point, tol_im=1e-6, tol_boundary=1e-5)
        assert report.classification.tol_im == 1e-6
        assert report.classification.tol_boundary == 1e-5

    def test_report_document(self, disagreement_point):
        document = classify_params(disagreement_point, with_symmetries=True).to_dict()
        assert document['params']['k'] == '1/2'
        assert document['xi_linear'] == '3'
        assert document['cubic_coefficients'] == ['1', '-3', '3', '-3/4']
        assert document['predicate'] is True
        assert document['agreement'] is False
        assert document['classification']['verdict'] == 'Broken'
        assert len(document['adjoint_matrix']) == 8
        assert set(document['symmetry_checks']) == set(PT_CANDIDATES)


class TestSymmetryCandidates:
    """Tests for the candidate PT maps."""

    def test_candidates_on_hc(self):
        results = symmetry_checks(SelfForceParams(1, 1, 1, 0, 0))
        assert results['standard_pt'] is False
        assert results['partial_parity'] is True

    def test_candidates_on_modified(self, rng):
        for _ in range(5):
            results = symmetry_checks(random_params(rng))
            assert results['partial_parity'] is True
