#!/usr/bin/env python3
"""
Self-Force Model Module

The quadratic electromagnetic self-force Hamiltonian on four canonical pairs
(x, y, z, w with momenta p_x .. p_w):

    H = B(w p_z - z p_w)/(m tau) + 2 p_z p_w/(m tau^2) + (p_x p_w - p_y p_z)/(m tau)
        - m z w/2 + (w p_y + z p_x)/2 + k x y + A(x^2 + y^2)/2

A = B = 0 gives the original (always broken) Hamiltonian. The module holds
the closed forms for its adjoint matrix and xi roots and checks them against
the generic pipeline.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from .errors import DegenerateParameterError, MissingParameterError, PtscanError, UnknownParameterError
from .gaussian_rational import GaussianRational, I, ZERO, format_rational, parse_rational
from .logger import get_logger
from .operator_algebra import (
    AdjointMatrix, CanonicalPolynomial, PhaseSpace, SignedPermutation, adjoint_matrix, check_linear_symmetry,
)
from .spectral_engine import (
    CharacteristicPolynomial, SpectrumClassification, Tolerances, Verdict, characteristic_polynomial,
    classify_spectrum, exact_roots, reduce_to_xi,
)

logger = get_logger('selfforce_model')

PARAMETER_NAMES = ('m', 'tau', 'k', 'A', 'B')
SELFFORCE_SPACE = PhaseSpace.from_pairs([('x', 'p_x'), ('y', 'p_y'), ('z', 'p_z'), ('w', 'p_w')])

SELFFORCE_MODEL_TEXT = """\
pairs: x/p_x, y/p_y, z/p_z, w/p_w
params: m, tau, k, A, B
H = B*(w*p_z - z*p_w)/(m*tau) + 2*p_z*p_w/(m*tau^2) + (p_x*p_w - p_y*p_z)/(m*tau)
    - m*z*w/2 + (w*p_y + z*p_x)/2 + k*x*y + A*(x^2 + y^2)/2
"""

# Candidate symmetry maps: (substitution, antilinear). None is claimed to be
# the intended PT operation; check_linear_symmetry reports which ones hold.
PT_CANDIDATES: Dict[str, Tuple[Dict[str, str], bool]] = {
    # q -> -q, p -> p, with complex conjugation
    'standard_pt': ({'x': '-x', 'y': '-y', 'z': '-z', 'w': '-w'}, True),
    # flips z, w and every momentum; x, y fixed
    'partial_parity': ({'z': '-z', 'w': '-w', 'p_x': '-p_x', 'p_y': '-p_y',
                        'p_z': '-p_z', 'p_w': '-p_w'}, False),
    'partial_parity_conjugation': ({'z': '-z', 'w': '-w', 'p_x': '-p_x', 'p_y': '-p_y',
                                    'p_z': '-p_z', 'p_w': '-p_w'}, True),
    # x <-> y and p_x <-> p_y only
    'xy_exchange': ({'x': 'y', 'y': 'x', 'p_x': 'p_y', 'p_y': 'p_x'}, False),
}


def _rational(value: Union[Fraction, int, str]) -> Fraction:
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, float):
        raise TypeError("self-force parameters must be exact (use Fraction or a string)")
    return Fraction(value)


@dataclass(frozen=True)
class SelfForceParams:
    """
    The five model parameters as exact rationals; m and tau strictly positive.
    """
    m: Fraction
    tau: Fraction
    k: Fraction
    A: Fraction
    B: Fraction

    def __post_init__(self):
        for name in PARAMETER_NAMES:
            object.__setattr__(self, name, _rational(getattr(self, name)))
        if self.m <= 0:
            raise DegenerateParameterError(f"mass m must be positive, got {format_rational(self.m)}")
        if self.tau <= 0:
            raise DegenerateParameterError(f"time constant tau must be positive, got {format_rational(self.tau)}")

    @classmethod
    def from_binding(cls, binding: Mapping[str, Any]) -> 'SelfForceParams':
        """
        Build from a name -> value mapping using the names m, tau, k, A, B.

        Raises:
            UnknownParameterError: On a name outside the five parameters
            MissingParameterError: If one of the five is missing
        """
        for name in binding:
            if name not in PARAMETER_NAMES:
                raise UnknownParameterError(f"self-force model has no parameter '{name}'")
        for name in PARAMETER_NAMES:
            if name not in binding:
                raise MissingParameterError(name)
        return cls(**{name: binding[name] for name in PARAMETER_NAMES})

    def as_binding(self) -> Dict[str, Fraction]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    def to_dict(self) -> Dict[str, str]:
        return {name: format_rational(value) for name, value in self.as_binding().items()}


def build_hamiltonian(p: SelfForceParams) -> CanonicalPolynomial:
    """
    Construct the self-force Hamiltonian term by term with exact coefficients.
    """
    space = SELFFORCE_SPACE
    v = {name: CanonicalPolynomial.variable(space, name) for name in space.basis}
    m, tau, k, A, B = p.m, p.tau, p.k, p.A, p.B
    mt = m * tau
    H = (v['w'] * v['p_z'] - v['z'] * v['p_w']).scale(B / mt)
    H = H + (v['p_z'] * v['p_w']).scale(2 / (m * tau ** 2))
    H = H + (v['p_x'] * v['p_w'] - v['p_y'] * v['p_z']).scale(1 / mt)
    H = H + (v['z'] * v['w']).scale(-m / 2)
    H = H + (v['w'] * v['p_y'] + v['z'] * v['p_x']).scale(Fraction(1, 2))
    H = H + (v['x'] * v['y']).scale(k)
    H = H + (v['x'] * v['x'] + v['y'] * v['y']).scale(A / 2)
    return H


def hamiltonian_c(m: Union[Fraction, int, str], tau: Union[Fraction, int, str],
                  k: Union[Fraction, int, str]) -> CanonicalPolynomial:
    """The A = B = 0 Hamiltonian."""
    return build_hamiltonian(SelfForceParams(m, tau, k, 0, 0))


def adjoint_closed_form(p: SelfForceParams) -> AdjointMatrix:
    """
    Hard-coded 8x8 adjoint matrix, rows and columns ordered x, y, z, w, p_x, p_y, p_z, p_w.
    """
    m, tau, k, A, B = p.m, p.tau, p.k, p.A, p.B
    mt = m * tau
    half = Fraction(1, 2)
    O = ZERO

    def im(value: Fraction) -> GaussianRational:
        return I * value

    rows = (
        (O, O, O, O, im(A), im(k), O, O),
        (O, O, O, O, im(k), im(A), O, O),
        (im(-half), O, O, im(B / mt), O, O, O, im(-m / 2)),
        (O, im(-half), im(-B / mt), O, O, O, im(-m / 2), O),
        (O, O, O, im(-1 / mt), O, O, im(half), O),
        (O, O, im(1 / mt), O, O, O, O, im(half)),
        (O, im(1 / mt), O, im(-2 / (m * tau ** 2)), O, O, O, im(B / mt)),
        (im(-1 / mt), O, im(-2 / (m * tau ** 2)), O, O, O, im(-B / mt), O),
    )
    return AdjointMatrix(space=SELFFORCE_SPACE, entries=rows)


def xi_linear_root(p: SelfForceParams) -> Fraction:
    """The linear-factor root xi = (B^2 - m^2)/(m^2 tau^2)."""
    return (p.B ** 2 - p.m ** 2) / (p.m ** 2 * p.tau ** 2)


def cubic_coefficients(p: SelfForceParams) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    """
    Degree-descending coefficients of
    m^2 tau^2 xi^3 + (m^2 - B^2) xi^2 + 2(AB - km) xi - A^2 + k^2.
    """
    m, tau, k, A, B = p.m, p.tau, p.k, p.A, p.B
    return (m ** 2 * tau ** 2, m ** 2 - B ** 2, 2 * (A * B - k * m), k ** 2 - A ** 2)


def cubic_discriminant(p: SelfForceParams) -> Fraction:
    """Exact discriminant of the cubic; > 0 means three distinct real roots."""
    a, b, c, d = cubic_coefficients(p)
    return 18 * a * b * c * d - 4 * b ** 3 * d + b ** 2 * c ** 2 - 4 * a * c ** 3 - 27 * a ** 2 * d ** 2


def expected_xi_polynomial(p: SelfForceParams) -> Tuple[Fraction, ...]:
    """
    Ascending coefficients of the monic normalization of
    (m^2 tau^2 xi - B^2 + m^2) * cubic(xi).
    """
    m, tau, B = p.m, p.tau, p.B
    linear = (m ** 2 - B ** 2, m ** 2 * tau ** 2)
    cubic = tuple(reversed(cubic_coefficients(p)))
    product = [Fraction(0)] * 5
    for i, a in enumerate(linear):
        for j, b in enumerate(cubic):
            product[i + j] += a * b
    lead = product[-1]
    return tuple(c / lead for c in product)


def analytic_predicate(p: SelfForceParams) -> bool:
    """{B^2 > m^2, A^2 > k^2, AB > km}, exact and strict."""
    return p.B ** 2 > p.m ** 2 and p.A ** 2 > p.k ** 2 and p.A * p.B > p.k * p.m


def symmetry_checks(p: SelfForceParams) -> Dict[str, bool]:
    """Which PT_CANDIDATES leave the Hamiltonian invariant."""
    H = build_hamiltonian(p)
    results = {}
    for name, (mapping, antilinear) in PT_CANDIDATES.items():
        permutation = SignedPermutation.from_mapping(SELFFORCE_SPACE, mapping)
        results[name] = check_linear_symmetry(H, permutation, antilinear=antilinear)
    return results


def _divide_by_root(coeffs_desc: List[Fraction], root: Fraction) -> Tuple[List[Fraction], Fraction]:
    """Synthetic division of a descending polynomial by (xi - root)."""
    quotient = [coeffs_desc[0]]
    for c in coeffs_desc[1:]:
        quotient.append(c + root * quotient[-1])
    return quotient[:-1], quotient[-1]


@dataclass(frozen=True)
class ModelReport:
    params: SelfForceParams
    xi_linear: Fraction
    cubic: Tuple[Fraction, Fraction, Fraction, Fraction]
    classification: SpectrumClassification
    predicate: bool
    agreement: bool
    discriminant: Fraction
    matrix: Optional[AdjointMatrix] = None
    characteristic: Optional[CharacteristicPolynomial] = None
    symmetries: Dict[str, bool] = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        return self.classification.verdict

    def to_dict(self) -> Dict[str, Any]:
        report = {
            'params': self.params.to_dict(),
            'xi_linear': format_rational(self.xi_linear),
            'cubic_coefficients': [format_rational(c) for c in self.cubic],
            'cubic_discriminant': format_rational(self.discriminant),
            'predicate': self.predicate,
            'agreement': self.agreement,
            'classification': self.classification.to_dict(),
        }
        if self.matrix is not None:
            report['basis'] = list(self.matrix.space.basis)
            report['adjoint_matrix'] = self.matrix.to_strings()
        if self.characteristic is not None:
            report['characteristic_polynomial'] = [str(c) for c in self.characteristic.lambda_coeffs]
            report['xi_polynomial'] = [str(c) for c in self.characteristic.xi_coeffs or ()]
        if self.symmetries:
            report['symmetry_checks'] = dict(self.symmetries)
        return report


def classify_params(p: SelfForceParams, tol_im: Optional[float] = None, tol_boundary: Optional[float] = None,
                    tolerances: Optional[Tolerances] = None, with_symmetries: bool = False) -> ModelReport:
    """
    Run the full pipeline for one parameter point and compare with the predicate.

    build -> adjoint -> characteristic polynomial -> xi polynomial, which is
    divided exactly by (xi - xi_linear); the quotient cubic is split into
    square-free factors and solved numerically.

    Args:
        p: Parameter point
        tol_im: Relative imaginary-part tolerance (overrides tolerances.tol_im)
        tol_boundary: Band around xi = 0 (overrides tolerances.tol_boundary)
        tolerances: Full tolerance set
        with_symmetries: Whether to also evaluate the PT candidate maps

    Returns:
        ModelReport with agreement = (predicate <=> verdict Unbroken)
    """
    tolerances = tolerances or Tolerances()
    tolerances = Tolerances(
        tol_im=tolerances.tol_im if tol_im is None else tol_im,
        tol_boundary=tolerances.tol_boundary if tol_boundary is None else tol_boundary,
        multiplicity_tol=tolerances.multiplicity_tol,
    )
    M = adjoint_matrix(build_hamiltonian(p))
    characteristic = characteristic_polynomial(M)
    xi_coeffs = [c.real for c in reversed(reduce_to_xi(characteristic))]

    linear = xi_linear_root(p)
    quotient, remainder = _divide_by_root(xi_coeffs, linear)
    if remainder != 0:
        raise PtscanError(f"xi polynomial is not divisible by (xi - {format_rational(linear)})")
    cubic_roots, _ = exact_roots(list(reversed(quotient)))
    xis = [complex(float(linear), 0.0)] + cubic_roots
    classification = classify_spectrum(xis, tolerances.tol_im, tolerances.tol_boundary,
                                       tolerances.multiplicity_tol)
    predicate = analytic_predicate(p)
    agreement = predicate == (classification.verdict == Verdict.UNBROKEN)
    if not agreement:
        logger.info(f"Predicate {predicate} disagrees with verdict {classification.verdict.value} at {p.to_dict()}")
    return ModelReport(
        params=p,
        xi_linear=linear,
        cubic=cubic_coefficients(p),
        classification=classification,
        predicate=predicate,
        agreement=agreement,
        discriminant=cubic_discriminant(p),
        matrix=M,
        characteristic=characteristic,
        symmetries=symmetry_checks(p) if with_symmetries else {},
    )
