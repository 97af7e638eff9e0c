#!/usr/bin/env python3
"""
Spectral Engine Module

From an adjoint matrix to a verdict:

    adjoint matrix -> exact det(lambda*I - M) -> exact polynomial in xi = lambda^2
                   -> exact square-free split -> floating-point roots -> Unbroken / Broken / Boundary

Everything up to the xi polynomial is exact; floats appear only in root finding.
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ExitCode, InvalidToleranceError, OddTermPresentError, ZeroLeadingCoefficientError
from .gaussian_rational import GaussianRational
from .logger import get_logger
from .operator_algebra import AdjointMatrix, CanonicalPolynomial, adjoint_matrix

logger = get_logger('spectral_engine')

DEFAULT_TOL_IM = 1e-9
DEFAULT_TOL_BOUNDARY = 1e-9
MULTIPLICITY_TOL = 1e-7
RESIDUAL_BOUND = 1e-8
EPS = 1e-14


class Verdict(Enum):
    """Spectrum classification."""
    UNBROKEN = "Unbroken"     # all xi real and positive: real frequencies
    BROKEN = "Broken"         # some xi complex or negative
    BOUNDARY = "Boundary"     # xi near zero, sign ambiguous, or degenerate

    @property
    def exit_code(self) -> ExitCode:
        return {
            Verdict.UNBROKEN: ExitCode.UNBROKEN,
            Verdict.BROKEN: ExitCode.BROKEN,
            Verdict.BOUNDARY: ExitCode.BOUNDARY,
        }[self]


@dataclass(frozen=True)
class Tolerances:
    tol_im: float = DEFAULT_TOL_IM
    tol_boundary: float = DEFAULT_TOL_BOUNDARY
    multiplicity_tol: float = MULTIPLICITY_TOL

    def __post_init__(self):
        for name in ('tol_im', 'tol_boundary', 'multiplicity_tol'):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise InvalidToleranceError(f"{name} must be a positive number, got {value!r}")


@dataclass(frozen=True)
class CharacteristicPolynomial:
    """
    det(lambda*I - M) with exact ascending coefficients c_0..c_2n, plus the
    reduced polynomial in xi = lambda^2 when every odd coefficient vanishes.
    """
    lambda_coeffs: Tuple[GaussianRational, ...]
    xi_coeffs: Optional[Tuple[GaussianRational, ...]] = None

    @property
    def degree(self) -> int:
        return len(self.lambda_coeffs) - 1

    def odd_indices(self) -> List[int]:
        return [k for k in range(1, len(self.lambda_coeffs), 2) if self.lambda_coeffs[k]]


def _common_denominator(M: AdjointMatrix) -> int:
    D = 1
    for row in M.entries:
        for e in row:
            D = math.lcm(D, e.real.denominator, e.imag.denominator)
    return D


def _gaussian_matmul(ar, ai, br, bi):
    """Product of Gaussian-integer matrices given as (real, imag) row lists; skips zeros."""
    size = len(ar)
    cr = [[0] * size for _ in range(size)]
    ci = [[0] * size for _ in range(size)]
    for j in range(size):
        out_r, out_i = cr[j], ci[j]
        for l in range(size):
            x, y = ar[j][l], ai[j][l]
            if not x and not y:
                continue
            row_r, row_i = br[l], bi[l]
            for k in range(size):
                u, v = row_r[k], row_i[k]
                if u or v:
                    out_r[k] += x * u - y * v
                    out_i[k] += x * v + y * u
    return cr, ci


def characteristic_polynomial(M: AdjointMatrix) -> CharacteristicPolynomial:
    """
    Exact characteristic polynomial by the Faddeev-LeVerrier recurrence.

    The recurrence runs on the Gaussian-integer matrix A = D*M (D = common
    denominator of the entries), where every trace division is exact, and the
    coefficients are rescaled by D^(N-j) at the end.

    Args:
        M: Adjoint matrix

    Returns:
        Monic CharacteristicPolynomial
    """
    size = M.size
    D = _common_denominator(M)
    ar = [[int(e.real * D) for e in row] for row in M.entries]
    ai = [[int(e.imag * D) for e in row] for row in M.entries]

    # coeffs[k] holds c_k of det(lambda*I - A) as (real, imag)
    coeffs: List[Tuple[int, int]] = [(0, 0)] * (size + 1)
    coeffs[size] = (1, 0)
    mr = [[1 if j == k else 0 for k in range(size)] for j in range(size)]
    mi = [[0] * size for _ in range(size)]
    for k in range(1, size + 1):
        amr, ami = _gaussian_matmul(ar, ai, mr, mi)
        tr_r = sum(amr[j][j] for j in range(size))
        tr_i = sum(ami[j][j] for j in range(size))
        if tr_r % k or tr_i % k:
            raise ArithmeticError("Faddeev-LeVerrier trace is not divisible; integer scaling is broken")
        c = (-tr_r // k, -tr_i // k)
        coeffs[size - k] = c
        for j in range(size):
            amr[j][j] += c[0]
            ami[j][j] += c[1]
        mr, mi = amr, ami

    lambda_coeffs = tuple(
        GaussianRational(Fraction(re, D ** (size - j)), Fraction(im, D ** (size - j)))
        for j, (re, im) in enumerate(coeffs)
    )
    poly = CharacteristicPolynomial(lambda_coeffs=lambda_coeffs)
    xi_coeffs = tuple(lambda_coeffs[0::2]) if not poly.odd_indices() else None
    logger.debug(f"Characteristic polynomial of degree {size} (common denominator {D})")
    return CharacteristicPolynomial(lambda_coeffs=lambda_coeffs, xi_coeffs=xi_coeffs)


def reduce_to_xi(p: CharacteristicPolynomial) -> Tuple[GaussianRational, ...]:
    """
    Ascending coefficients of the polynomial in xi = lambda^2.

    Raises:
        OddTermPresentError: If an odd lambda power has a nonzero coefficient
    """
    odd = p.odd_indices()
    if odd:
        raise OddTermPresentError(max(odd))
    return tuple(p.lambda_coeffs[0::2])


# Closed-form solvers. The cube root branch fix (v = -p/(3u)) keeps u*v = -p/3.

def _cbrt(z: complex) -> complex:
    r = abs(z)
    theta = cmath.phase(z)
    return (r ** (1.0 / 3.0)) * complex(math.cos(theta / 3.0), math.sin(theta / 3.0))


def _solve_linear(a1: complex, a0: complex) -> List[complex]:
    return [-a0 / a1]


def _solve_quadratic(a2: complex, a1: complex, a0: complex) -> List[complex]:
    disc = cmath.sqrt(a1 * a1 - 4 * a2 * a0)
    # Pick the sign that avoids cancellation, then use Vieta for the partner
    q = -0.5 * (a1 + disc) if (a1.conjugate() * disc).real >= 0 else -0.5 * (a1 - disc)
    if abs(q) < EPS:
        return [0j, 0j]
    return [q / a2, a0 / q]


def _solve_cubic(a3: complex, a2: complex, a1: complex, a0: complex) -> List[complex]:
    A, B, C = a2 / a3, a1 / a3, a0 / a3
    # Depress: x = t - A/3 => t^3 + p t + q = 0
    shift = A / 3.0
    p = B - A * A / 3.0
    q = 2.0 * A * A * A / 27.0 - A * B / 3.0 + C
    sqrt_delta = cmath.sqrt((q / 2.0) ** 2 + (p / 3.0) ** 3)
    u3 = -q / 2.0 + sqrt_delta
    v3 = -q / 2.0 - sqrt_delta
    if abs(v3) > abs(u3):
        u3, v3 = v3, u3
    u = _cbrt(u3)
    v = _cbrt(v3) if abs(u) < EPS else -p / (3.0 * u)
    omega = complex(-0.5, math.sqrt(3) / 2.0)
    omega2 = omega.conjugate()
    return [u + v - shift, omega * u + omega2 * v - shift, omega2 * u + omega * v - shift]


def _solve_quartic(a4: complex, a3: complex, a2: complex, a1: complex, a0: complex) -> List[complex]:
    A, B, C, Dc = a3 / a4, a2 / a4, a1 / a4, a0 / a4
    # Depress: x = y - A/4 => y^4 + p y^2 + q y + r = 0
    shift = A / 4.0
    p = B - 3.0 * A * A / 8.0
    q = C + A * A * A / 8.0 - A * B / 2.0
    r = Dc - 3.0 * A ** 4 / 256.0 + A * A * B / 16.0 - A * C / 4.0

    if abs(q) < EPS:
        out: List[complex] = []
        for z in _solve_quadratic(1.0 + 0j, p, r):
            y = cmath.sqrt(z)
            out.extend([y - shift, -y - shift])
        return out

    # Resolvent cubic m^3 - (p/2) m^2 - r m + (p r)/2 - q^2/8 = 0; take the m with the largest sqrt(2m - p)
    m_roots = _solve_cubic(1.0 + 0j, -p / 2.0, -r, p * r / 2.0 - q * q / 8.0)
    m = max(m_roots, key=lambda root: abs(cmath.sqrt(2.0 * root - p)))
    alpha = cmath.sqrt(2.0 * m - p)
    beta = -q / (2.0 * alpha)
    r1 = _solve_quadratic(1.0 + 0j, -alpha, m - beta)
    r2 = _solve_quadratic(1.0 + 0j, alpha, m + beta)
    return [root - shift for root in r1 + r2]


def _companion_roots(coeffs: Sequence[complex]) -> List[complex]:
    """Eigenvalues of the companion matrix of a monic descending coefficient list."""
    degree = len(coeffs) - 1
    companion = np.zeros((degree, degree), dtype=complex)
    companion[0, :] = -np.asarray(coeffs[1:], dtype=complex)
    if degree > 1:
        companion[1:, :-1] = np.eye(degree - 1)
    return [complex(z) for z in np.linalg.eigvals(companion)]


def evaluate(coeffs: Sequence[complex], x: complex) -> complex:
    """Horner evaluation for descending coefficients."""
    acc = 0j
    for a in coeffs:
        acc = acc * x + a
    return acc


def _evaluate_with_derivative(coeffs: Sequence[complex], x: complex) -> Tuple[complex, complex]:
    b = complex(coeffs[0])
    c = 0j
    for a in coeffs[1:]:
        c = c * x + b
        b = b * x + a
    return b, c


def _residuals_ok(coeffs: Sequence[complex], roots: Sequence[complex]) -> bool:
    bound = RESIDUAL_BOUND * max(abs(c) for c in coeffs)
    return all(math.isfinite(abs(r)) and abs(evaluate(coeffs, r)) <= bound for r in roots)


def _polish(coeffs: Sequence[complex], root: complex) -> complex:
    """One Newton step, kept only if it lowers the residual."""
    value, slope = _evaluate_with_derivative(coeffs, root)
    if abs(slope) < EPS or value == 0:
        return root
    candidate = root - value / slope
    if abs(evaluate(coeffs, candidate)) < abs(value):
        return candidate
    return root


def polynomial_roots(coeffs: Sequence[Any]) -> List[complex]:
    """
    All complex roots of a polynomial, with multiplicity.

    Degree <= 2 uses closed forms, 3 and 4 Cardano/Ferrari with a
    companion-matrix fallback when a residual check fails, and higher degrees
    the companion matrix. The polynomial is made monic and its variable is
    scaled by the Cauchy bound before solving; every root gets one Newton step.

    Args:
        coeffs: Coefficients in degree-descending order (numbers, Fractions or GaussianRationals)

    Returns:
        List of roots (length = degree)

    Raises:
        ZeroLeadingCoefficientError: If the leading coefficient is zero or the degree is < 1
    """
    values = [complex(c) for c in coeffs]
    if not values or values[0] == 0:
        raise ZeroLeadingCoefficientError("leading coefficient is zero")
    degree = len(values) - 1
    if degree < 1:
        raise ZeroLeadingCoefficientError("root finding needs a polynomial of degree >= 1")

    monic = [c / values[0] for c in values]
    bound = 1.0 + max(abs(c) for c in monic[1:])
    scaled = [monic[k] / bound ** k for k in range(degree + 1)]

    if degree == 1:
        ys = _solve_linear(*scaled)
    elif degree == 2:
        ys = _solve_quadratic(*scaled)
    elif degree == 3:
        ys = _solve_cubic(*scaled)
    elif degree == 4:
        ys = _solve_quartic(*scaled)
    else:
        ys = _companion_roots(scaled)
    if degree in (3, 4) and not _residuals_ok(scaled, ys):
        logger.debug(f"Closed-form degree-{degree} roots failed the residual check; using companion matrix")
        ys = _companion_roots(scaled)

    ys = [_polish(scaled, y) for y in ys]
    if not _residuals_ok(scaled, ys):
        logger.warning(f"Root residuals above {RESIDUAL_BOUND} for degree-{degree} polynomial")
    return [bound * y for y in ys]


def merge_close_roots(roots: Sequence[complex], tol: float = MULTIPLICITY_TOL) -> Tuple[List[complex], bool]:
    """
    Merge roots closer than tol*(1 + max|r|) into their mean.

    Returns:
        Tuple of (roots with merged members replaced by the cluster mean, whether anything merged)
    """
    clusters: List[List[int]] = []
    for index, root in enumerate(roots):
        for cluster in clusters:
            other = roots[cluster[0]]
            if abs(root - other) <= tol * (1.0 + max(abs(root), abs(other))):
                cluster.append(index)
                break
        else:
            clusters.append([index])
    merged = list(roots)
    degenerate = False
    for cluster in clusters:
        if len(cluster) > 1:
            degenerate = True
            mean = sum(roots[i] for i in cluster) / len(cluster)
            for i in cluster:
                merged[i] = mean
    return merged, degenerate


# Exact polynomial arithmetic on ascending GaussianRational lists; [] is the zero polynomial.

def _trim(p: List[GaussianRational]) -> List[GaussianRational]:
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def _derivative(p: List[GaussianRational]) -> List[GaussianRational]:
    return _trim([c * k for k, c in enumerate(p)][1:])


def _subtract(a: List[GaussianRational], b: List[GaussianRational]) -> List[GaussianRational]:
    zero = GaussianRational(0)
    width = max(len(a), len(b))
    return _trim([(a[k] if k < len(a) else zero) - (b[k] if k < len(b) else zero) for k in range(width)])


def _monic(p: List[GaussianRational]) -> List[GaussianRational]:
    lead = p[-1]
    return [c / lead for c in p]


def _divmod(a: List[GaussianRational], b: List[GaussianRational]) -> Tuple[List[GaussianRational], List[GaussianRational]]:
    remainder = _trim(a)
    quotient = [GaussianRational(0)] * max(len(remainder) - len(b) + 1, 0)
    while len(remainder) >= len(b):
        factor = remainder[-1] / b[-1]
        shift = len(remainder) - len(b)
        quotient[shift] = factor
        for k, c in enumerate(b):
            remainder[shift + k] = remainder[shift + k] - factor * c
        remainder = _trim(remainder)
    return _trim(quotient), remainder


def _gcd(a: List[GaussianRational], b: List[GaussianRational]) -> List[GaussianRational]:
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _divmod(a, b)[1]
    return _monic(a)


def square_free_factors(coeffs: Sequence[Any]) -> List[Tuple[Tuple[GaussianRational, ...], int]]:
    """
    Yun's square-free decomposition over the Gaussian rationals.

    Args:
        coeffs: Exact coefficients in degree-ascending order (ints, Fractions or GaussianRationals)

    Returns:
        List of (monic ascending factor, multiplicity) with the product of factor^multiplicity
        equal to the monic input; factors of degree 0 are left out

    Raises:
        ZeroLeadingCoefficientError: If the polynomial is constant
    """
    f = _trim([GaussianRational.coerce(c) for c in coeffs])
    if len(f) < 2:
        raise ZeroLeadingCoefficientError("square-free decomposition needs a polynomial of degree >= 1")
    f = _monic(f)
    df = _derivative(f)
    a = _gcd(f, df)
    b = _divmod(f, a)[0]
    c = _divmod(df, a)[0]
    d = _subtract(c, _derivative(b))
    factors: List[Tuple[Tuple[GaussianRational, ...], int]] = []
    multiplicity = 1
    while len(b) > 1:
        a = _gcd(b, d)
        b = _divmod(b, a)[0]
        c = _divmod(d, a)[0]
        d = _subtract(c, _derivative(b))
        if len(a) > 1:
            factors.append((tuple(a), multiplicity))
        multiplicity += 1
    return factors


def exact_roots(coeffs: Sequence[Any]) -> Tuple[List[complex], bool]:
    """
    Roots of an exact polynomial, with repeated roots found before any float appears.

    Each square-free factor goes through polynomial_roots once and its roots are
    repeated by multiplicity, so a k-fold root comes back as k identical values.

    Args:
        coeffs: Exact coefficients in degree-ascending order

    Returns:
        Tuple of (roots with multiplicity, whether any root is repeated)
    """
    roots: List[complex] = []
    repeated = False
    for factor, multiplicity in square_free_factors(coeffs):
        factor_roots = polynomial_roots(list(reversed(factor)))
        roots.extend(factor_roots * multiplicity)
        if multiplicity > 1:
            repeated = True
            logger.debug(f"Exact root of multiplicity {multiplicity} near {factor_roots}")
    return roots, repeated


@dataclass(frozen=True)
class SpectrumClassification:
    lambdas: Tuple[complex, ...]
    xis: Tuple[complex, ...]
    verdict: Verdict
    tol_im: float
    tol_boundary: float
    degenerate: bool = False
    min_abs_im_xi: float = 0.0
    min_re_xi: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'verdict': self.verdict.value,
            'xis': [[z.real, z.imag] for z in self.xis],
            'lambdas': [[z.real, z.imag] for z in self.lambdas],
            'degenerate': self.degenerate,
            'min_abs_im_xi': self.min_abs_im_xi,
            'min_re_xi': self.min_re_xi,
            'tol_im': self.tol_im,
            'tol_boundary': self.tol_boundary,
        }


def classify_spectrum(xis: Sequence[complex], tol_im: float = DEFAULT_TOL_IM,
                      tol_boundary: float = DEFAULT_TOL_BOUNDARY,
                      multiplicity_tol: float = MULTIPLICITY_TOL) -> SpectrumClassification:
    """
    Classify the spectrum from the xi = lambda^2 roots.

    Boundary whenever two xi coincide. Otherwise Unbroken: every xi real within
    tol_im*(1+|xi|) with real part > tol_boundary; Broken: some xi non-real
    beyond tolerance or with real part < -tol_boundary; Boundary: everything else.

    Args:
        xis: Roots of the xi polynomial
        tol_im: Relative tolerance on imaginary parts
        tol_boundary: Absolute band around xi = 0
        multiplicity_tol: Relative distance below which roots are merged

    Returns:
        SpectrumClassification with lambda = +/- sqrt(xi)
    """
    Tolerances(tol_im, tol_boundary, multiplicity_tol)
    merged, degenerate = merge_close_roots([complex(z) for z in xis], multiplicity_tol)

    def is_real(z: complex) -> bool:
        return abs(z.imag) <= tol_im * (1.0 + abs(z))

    broken = any(not is_real(z) or z.real < -tol_boundary for z in merged)
    unbroken = all(is_real(z) and z.real > tol_boundary for z in merged)
    if degenerate:
        verdict = Verdict.BOUNDARY
    elif unbroken:
        verdict = Verdict.UNBROKEN
    elif broken:
        verdict = Verdict.BROKEN
    else:
        verdict = Verdict.BOUNDARY

    lambdas: List[complex] = []
    for z in merged:
        root = cmath.sqrt(z)
        lambdas.extend([root, -root])
    return SpectrumClassification(
        lambdas=tuple(lambdas),
        xis=tuple(merged),
        verdict=verdict,
        tol_im=tol_im,
        tol_boundary=tol_boundary,
        degenerate=degenerate,
        min_abs_im_xi=min((abs(z.imag) for z in merged), default=0.0),
        min_re_xi=min((z.real for z in merged), default=0.0),
    )


@dataclass(frozen=True)
class SpectralReport:
    """Every stage of the generic pipeline for one Hamiltonian."""
    hamiltonian: CanonicalPolynomial
    matrix: AdjointMatrix
    characteristic: CharacteristicPolynomial
    xi_coeffs: Tuple[GaussianRational, ...]
    classification: SpectrumClassification

    def to_dict(self) -> Dict[str, Any]:
        return {
            'hamiltonian': str(self.hamiltonian),
            'basis': list(self.matrix.space.basis),
            'adjoint_matrix': self.matrix.to_strings(),
            'characteristic_polynomial': [str(c) for c in self.characteristic.lambda_coeffs],
            'xi_polynomial': [str(c) for c in self.xi_coeffs],
            'classification': self.classification.to_dict(),
        }


def analyze_hamiltonian(H: CanonicalPolynomial, tolerances: Optional[Tolerances] = None) -> SpectralReport:
    """
    Run adjoint matrix -> characteristic polynomial -> xi roots -> classification.
    """
    tolerances = tolerances or Tolerances()
    M = adjoint_matrix(H)
    characteristic = characteristic_polynomial(M)
    xi_coeffs = reduce_to_xi(characteristic)
    xis, _ = exact_roots(xi_coeffs)
    classification = classify_spectrum(xis, tolerances.tol_im, tolerances.tol_boundary,
                                       tolerances.multiplicity_tol)
    logger.debug(f"Spectrum verdict {classification.verdict.value} for xis {xis}")
    return SpectralReport(
        hamiltonian=H,
        matrix=M,
        characteristic=characteristic,
        xi_coeffs=xi_coeffs,
        classification=classification,
    )
