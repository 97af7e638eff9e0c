#!/usr/bin/env python3
"""
Operator Algebra Module

Exact algebra of polynomial operators in canonical coordinates and momenta.
Products are rewritten to normal order (coordinates left of momenta) with
the commutation relation [q_a, p_a] = i, so every operator expression has a
unique canonical form. On top of that the module builds the adjoint matrix
representation of a quadratic Hamiltonian:

    [H, O_i] = sum_j M[j][i] * O_j

over the basis (q_1..q_n, p_1..p_n).
"""

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import NotQuadraticError, StructuralError, UnsupportedLinearTermError
from .gaussian_rational import GaussianRational, Scalar, ZERO, ONE, I
from .logger import get_logger

logger = get_logger('operator_algebra')

# (-i)^k for k mod 4
_MINUS_I_POWERS = (ONE, -I, -ONE, I)


@dataclass(frozen=True)
class PhaseSpace:
    """
    Named canonical pairs; the operator basis is (q_1..q_n, p_1..p_n).
    """
    coordinate_names: Tuple[str, ...]
    momentum_names: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, 'coordinate_names', tuple(self.coordinate_names))
        object.__setattr__(self, 'momentum_names', tuple(self.momentum_names))
        if len(self.coordinate_names) != len(self.momentum_names):
            raise StructuralError("phase space needs one momentum per coordinate")
        if not self.coordinate_names:
            raise StructuralError("phase space needs at least one canonical pair")
        names = self.basis
        for name in names:
            if not isinstance(name, str) or not name:
                raise StructuralError("operator names must be nonempty strings")
        if len(set(names)) != len(names):
            raise StructuralError(f"operator names are not unique: {', '.join(names)}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, str]]) -> 'PhaseSpace':
        """Build a phase space from (coordinate, momentum) name pairs."""
        pairs = list(pairs)
        return cls(tuple(q for q, _ in pairs), tuple(p for _, p in pairs))

    @property
    def n(self) -> int:
        return len(self.coordinate_names)

    @property
    def basis(self) -> Tuple[str, ...]:
        return self.coordinate_names + self.momentum_names

    @property
    def size(self) -> int:
        return 2 * self.n

    def index_of(self, name: str) -> int:
        """
        Get the basis index of an operator name.

        Raises:
            StructuralError: If the name is not a basis operator
        """
        try:
            return self.basis.index(name)
        except ValueError:
            raise StructuralError(f"'{name}' is not an operator of this phase space") from None

    def symplectic_form(self) -> List[List[int]]:
        """J with J[a][n+a] = 1 and J[n+a][a] = -1."""
        n = self.n
        J = [[0] * (2 * n) for _ in range(2 * n)]
        for a in range(n):
            J[a][n + a] = 1
            J[n + a][a] = -1
        return J


@dataclass(frozen=True, order=True)
class Monomial:
    """
    Exponent vector over the basis, read in normal order
    (all coordinate factors to the left of all momentum factors).
    """
    exponents: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'exponents', tuple(int(e) for e in self.exponents))
        if any(e < 0 for e in self.exponents):
            raise StructuralError("monomial exponents must be non-negative")

    @classmethod
    def scalar(cls, size: int) -> 'Monomial':
        return cls((0,) * size)

    @classmethod
    def unit(cls, size: int, index: int, power: int = 1) -> 'Monomial':
        exponents = [0] * size
        exponents[index] = power
        return cls(tuple(exponents))

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def support(self) -> List[int]:
        """Basis indices with a nonzero exponent, ascending."""
        return [i for i, e in enumerate(self.exponents) if e]

    def format(self, space: PhaseSpace) -> str:
        factors = []
        for name, e in zip(space.basis, self.exponents):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        return '*'.join(factors) if factors else '1'


@lru_cache(maxsize=65536)
def _monomial_product(n: int, left: Tuple[int, ...], right: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], GaussianRational], ...]:
    """
    Normal-order q^alpha p^beta * q^gamma p^delta.

    Pairs with different indices commute, and for a single pair
    p^b q^c = sum_k k! C(b,k) C(c,k) (-i)^k q^(c-k) p^(b-k).
    """
    alpha, beta = left[:n], left[n:]
    gamma, delta = right[:n], right[n:]
    ranges = [range(min(beta[a], gamma[a]) + 1) for a in range(n)]
    result = []
    for ks in itertools.product(*ranges):
        weight = 1
        for a, k in enumerate(ks):
            if k:
                weight *= factorial(k) * comb(beta[a], k) * comb(gamma[a], k)
        coeff = _MINUS_I_POWERS[sum(ks) % 4] * weight
        exponents = tuple(alpha[a] + gamma[a] - ks[a] for a in range(n)) + \
            tuple(beta[a] + delta[a] - ks[a] for a in range(n))
        result.append((exponents, coeff))
    return tuple(result)


class CanonicalPolynomial:
    """
    Normal-ordered polynomial in the canonical operators of a phase space,
    with nonzero Gaussian-rational coefficients. Immutable.
    """

    __slots__ = ('_space', '_terms')

    def __init__(self, space: PhaseSpace, terms: Optional[Mapping[Monomial, Scalar]] = None):
        clean: Dict[Monomial, GaussianRational] = {}
        for monomial, coeff in (terms or {}).items():
            if not isinstance(monomial, Monomial):
                monomial = Monomial(tuple(monomial))
            if len(monomial.exponents) != space.size:
                raise StructuralError(
                    f"monomial has {len(monomial.exponents)} exponents, phase space has {space.size} operators")
            coeff = GaussianRational.coerce(coeff)
            if coeff:
                clean[monomial] = coeff
        self._space = space
        self._terms = clean

    @classmethod
    def zero(cls, space: PhaseSpace) -> 'CanonicalPolynomial':
        return cls(space)

    @classmethod
    def constant(cls, space: PhaseSpace, value: Scalar) -> 'CanonicalPolynomial':
        return cls(space, {Monomial.scalar(space.size): value})

    @classmethod
    def variable(cls, space: PhaseSpace, name_or_index: Union[str, int]) -> 'CanonicalPolynomial':
        index = name_or_index if isinstance(name_or_index, int) else space.index_of(name_or_index)
        return cls(space, {Monomial.unit(space.size, index): ONE})

    @property
    def space(self) -> PhaseSpace:
        return self._space

    @property
    def terms(self) -> Mapping[Monomial, GaussianRational]:
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        """Total degree; 0 for scalars and for the zero polynomial."""
        return max((m.degree for m in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, monomial: Union[Monomial, Sequence[int]]) -> GaussianRational:
        if not isinstance(monomial, Monomial):
            monomial = Monomial(tuple(monomial))
        return self._terms.get(monomial, ZERO)

    def coefficient_of(self, *names: str) -> GaussianRational:
        """Coefficient of the normal-ordered monomial with the given factors, e.g. ('z', 'w')."""
        exponents = [0] * self._space.size
        for name in names:
            exponents[self._space.index_of(name)] += 1
        return self.coefficient(exponents)

    @property
    def scalar_part(self) -> GaussianRational:
        return self._terms.get(Monomial.scalar(self._space.size), ZERO)

    def homogeneous_part(self, degree: int) -> 'CanonicalPolynomial':
        return CanonicalPolynomial(self._space, {m: c for m, c in self._terms.items() if m.degree == degree})

    def conjugate(self) -> 'CanonicalPolynomial':
        """Conjugate every coefficient (operators untouched)."""
        return CanonicalPolynomial(self._space, {m: c.conjugate() for m, c in self._terms.items()})

    def _check_space(self, other: 'CanonicalPolynomial') -> None:
        if other._space is not self._space and other._space != self._space:
            raise StructuralError("operands live in different phase spaces")

    def _coerce(self, other) -> 'CanonicalPolynomial':
        if isinstance(other, CanonicalPolynomial):
            self._check_space(other)
            return other
        return CanonicalPolynomial.constant(self._space, other)

    def __add__(self, other) -> 'CanonicalPolynomial':
        other = self._coerce(other)
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, ZERO) + c
        return CanonicalPolynomial(self._space, terms)

    __radd__ = __add__

    def __neg__(self) -> 'CanonicalPolynomial':
        return CanonicalPolynomial(self._space, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> 'CanonicalPolynomial':
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> 'CanonicalPolynomial':
        return self._coerce(other) - self

    def scale(self, factor: Scalar) -> 'CanonicalPolynomial':
        factor = GaussianRational.coerce(factor)
        return CanonicalPolynomial(self._space, {m: c * factor for m, c in self._terms.items()})

    def __mul__(self, other) -> 'CanonicalPolynomial':
        if isinstance(other, CanonicalPolynomial):
            return multiply(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other) -> 'CanonicalPolynomial':
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, exponent: int) -> 'CanonicalPolynomial':
        if not isinstance(exponent, int) or exponent < 0:
            raise StructuralError("operator powers need a non-negative integer exponent")
        result = CanonicalPolynomial.constant(self._space, ONE)
        for _ in range(exponent):
            result = multiply(result, self)
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, CanonicalPolynomial):
            return NotImplemented
        return self._space == other._space and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self._space, frozenset(self._terms.items())))

    def sorted_terms(self) -> List[Tuple[Monomial, GaussianRational]]:
        """Terms ordered by descending degree, then by exponent vector."""
        return sorted(self._terms.items(), key=lambda item: (-item[0].degree, tuple(-e for e in item[0].exponents)))

    def __str__(self) -> str:
        if not self._terms:
            return '0'
        parts = []
        for monomial, coeff in self.sorted_terms():
            text = monomial.format(self._space)
            if monomial.degree == 0:
                parts.append(f"({coeff})" if coeff.real and coeff.imag else str(coeff))
            elif coeff == 1:
                parts.append(text)
            elif coeff == -1:
                parts.append(f"-{text}")
            elif coeff.real and coeff.imag:
                parts.append(f"({coeff})*{text}")
            else:
                parts.append(f"{coeff}*{text}")
        return ' + '.join(parts).replace('+ -', '- ')

    def __repr__(self) -> str:
        return f"CanonicalPolynomial({self})"


def multiply(a: CanonicalPolynomial, b: CanonicalPolynomial) -> CanonicalPolynomial:
    """
    Operator product a*b rewritten to normal order.

    Args:
        a: Left factor
        b: Right factor

    Returns:
        Canonical form of the product

    Raises:
        StructuralError: If the factors live in different phase spaces
    """
    a._check_space(b)
    n = a.space.n
    terms: Dict[Tuple[int, ...], GaussianRational] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            base = ca * cb
            for exponents, weight in _monomial_product(n, ma.exponents, mb.exponents):
                terms[exponents] = terms.get(exponents, ZERO) + base * weight
    return CanonicalPolynomial(a.space, {Monomial(e): c for e, c in terms.items()})


def commutator(a: CanonicalPolynomial, b: CanonicalPolynomial) -> CanonicalPolynomial:
    """[a, b] = a*b - b*a in canonical form."""
    return multiply(a, b) - multiply(b, a)


def _check_degree(H: CanonicalPolynomial) -> None:
    for monomial, _ in H.sorted_terms():
        if monomial.degree > 2:
            text = monomial.format(H.space)
            raise NotQuadraticError(f"term '{text}' has degree {monomial.degree} > 2", monomial=text)


@dataclass(frozen=True)
class AdjointMatrix:
    """
    2n x 2n commutator-coefficient matrix with [H, O_i] = sum_j entries[j][i] * O_j.
    """
    space: PhaseSpace
    entries: Tuple[Tuple[GaussianRational, ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def entry(self, row: int, column: int) -> GaussianRational:
        return self.entries[row][column]

    def trace(self) -> GaussianRational:
        total = ZERO
        for k in range(self.size):
            total = total + self.entries[k][k]
        return total

    def is_purely_imaginary(self) -> bool:
        return all(e.real == 0 for row in self.entries for e in row)

    def to_strings(self) -> List[List[str]]:
        """Exact entries as decimal-free strings, row by row."""
        return [[str(e) for e in row] for row in self.entries]


@dataclass(frozen=True)
class SymmetricCoefficientMatrix:
    """
    Weyl-symmetric split of a Hamiltonian of degree <= 2:

        H = 1/2 * z^T S z + linear . z + offset
    """
    space: PhaseSpace
    entries: Tuple[Tuple[GaussianRational, ...], ...]
    offset: GaussianRational = ZERO
    linear: Tuple[GaussianRational, ...] = field(default=())

    def is_real(self) -> bool:
        return all(e.is_real for row in self.entries for e in row)

    def reconstruct(self, include_offset: bool = False) -> CanonicalPolynomial:
        """Normal-ordered 1/2 z^T S z (plus the linear part and, optionally, the offset)."""
        space = self.space
        result = CanonicalPolynomial.zero(space)
        variables = [CanonicalPolynomial.variable(space, k) for k in range(space.size)]
        for j, row in enumerate(self.entries):
            for k, s in enumerate(row):
                if s:
                    result = result + multiply(variables[j], variables[k]).scale(s / 2)
        for k, c in enumerate(self.linear):
            if c:
                result = result + variables[k].scale(c)
        if include_offset:
            result = result + self.offset
        return result


def symmetrized_coefficients(H: CanonicalPolynomial) -> SymmetricCoefficientMatrix:
    """
    Read off the symmetric matrix S of H's quadratic part.

    A normal-ordered cross term c*q_a*p_a equals c*(q_a p_a + p_a q_a)/2 + i*c/2,
    so those terms also feed the scalar offset.

    Raises:
        NotQuadraticError: If H has degree > 2
    """
    _check_degree(H)
    space = H.space
    size = space.size
    S = [[ZERO] * size for _ in range(size)]
    linear = [ZERO] * size
    offset = H.scalar_part
    for monomial, coeff in H.terms.items():
        support = monomial.support()
        if monomial.degree == 2 and len(support) == 1:
            a = support[0]
            S[a][a] = S[a][a] + coeff * 2
        elif monomial.degree == 2:
            a, b = support
            S[a][b] = S[a][b] + coeff
            S[b][a] = S[b][a] + coeff
            if b == a + space.n:
                offset = offset + I * coeff / 2
        elif monomial.degree == 1:
            linear[support[0]] = coeff
    return SymmetricCoefficientMatrix(
        space=space,
        entries=tuple(tuple(row) for row in S),
        offset=offset,
        linear=tuple(linear),
    )


def symplectic_adjoint(S: SymmetricCoefficientMatrix) -> AdjointMatrix:
    """
    Independent construction i*S*J of the adjoint matrix.

    J only has the entries J[a][n+a] = 1 and J[n+a][a] = -1, so (S J)[j][k]
    is S[j][k-n] for momentum columns and -S[j][k+n] for coordinate columns.
    """
    n = S.space.n
    rows = []
    for row in S.entries:
        out = []
        for k in range(2 * n):
            sj = row[k - n] if k >= n else -row[k + n]
            out.append(I * sj)
        rows.append(tuple(out))
    return AdjointMatrix(space=S.space, entries=tuple(rows))


def adjoint_matrix(H: CanonicalPolynomial) -> AdjointMatrix:
    """
    Adjoint (regular) matrix representation of a quadratic Hamiltonian.

    Column i holds the expansion of [H, O_i] over the basis. Scalar terms of
    H commute with everything and are ignored.

    Args:
        H: Hamiltonian of degree <= 2 with no linear part

    Returns:
        Exact adjoint matrix

    Raises:
        NotQuadraticError: If H has a term of degree > 2 or no quadratic part
        UnsupportedLinearTermError: If H has a nonzero linear part
    """
    _check_degree(H)
    linear = H.homogeneous_part(1)
    if not linear.is_zero():
        raise UnsupportedLinearTermError(f"Hamiltonian has linear terms: {linear}")
    if H.homogeneous_part(2).is_zero():
        raise NotQuadraticError("Hamiltonian has no quadratic part")

    space = H.space
    size = space.size
    columns = []
    for i in range(size):
        result = commutator(H, CanonicalPolynomial.variable(space, i))
        column = [ZERO] * size
        for monomial, coeff in result.terms.items():
            # [quadratic, linear] is linear; the commutator never leaves the basis
            column[monomial.support()[0]] = coeff
        columns.append(column)
    entries = tuple(tuple(columns[i][j] for i in range(size)) for j in range(size))
    logger.debug(f"Built {size}x{size} adjoint matrix for {len(H.terms)}-term Hamiltonian")
    return AdjointMatrix(space=space, entries=entries)


def is_formally_symmetric(H: CanonicalPolynomial) -> bool:
    """
    Whether H is a symmetric operator at the coefficient level:
    real S, real linear part and real offset in H = 1/2 z^T S z + l.z + c.
    """
    S = symmetrized_coefficients(H)
    return S.is_real() and S.offset.is_real and all(c.is_real for c in S.linear)


@dataclass(frozen=True)
class SignedPermutation:
    """
    Substitution O_i -> sign_i * O_target_i over the basis of a phase space.
    """
    space: PhaseSpace
    images: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        images = tuple((int(t), int(s)) for t, s in self.images)
        object.__setattr__(self, 'images', images)
        size = self.space.size
        if len(images) != size:
            raise StructuralError(f"signed permutation needs {size} images, got {len(images)}")
        targets = sorted(t for t, _ in images)
        if targets != list(range(size)):
            raise StructuralError("map is not a permutation of the basis operators")
        if any(s not in (1, -1) for _, s in images):
            raise StructuralError("map signs must be +1 or -1")

    @classmethod
    def from_mapping(cls, space: PhaseSpace, mapping: Mapping[str, str]) -> 'SignedPermutation':
        """
        Build from {"x": "-x", "p_x": "p_y", ...}; unmapped operators map to themselves.
        """
        images = [(k, 1) for k in range(space.size)]
        for source, target in mapping.items():
            text = target.strip()
            sign = 1
            if text.startswith('-'):
                sign, text = -1, text[1:].strip()
            elif text.startswith('+'):
                text = text[1:].strip()
            images[space.index_of(source)] = (space.index_of(text), sign)
        return cls(space, tuple(images))

    def apply(self, H: CanonicalPolynomial, antilinear: bool = False) -> CanonicalPolynomial:
        """Substitute every operator (conjugating coefficients when antilinear)."""
        if H.space != self.space:
            raise StructuralError("map and Hamiltonian live in different phase spaces")
        space = self.space
        images = [CanonicalPolynomial.variable(space, t).scale(s) for t, s in self.images]
        result = CanonicalPolynomial.zero(space)
        for monomial, coeff in H.terms.items():
            term = CanonicalPolynomial.constant(space, coeff.conjugate() if antilinear else coeff)
            for index, power in enumerate(monomial.exponents):
                for _ in range(power):
                    term = multiply(term, images[index])
            result = result + term
        return result


def check_linear_symmetry(H: CanonicalPolynomial, mapping: SignedPermutation, antilinear: bool = False) -> bool:
    """
    Whether H is invariant under a signed basis permutation.

    Args:
        H: Hamiltonian
        mapping: Signed permutation of the basis operators
        antilinear: Whether the map also conjugates coefficients (time-reversal type)

    Raises:
        StructuralError: If the map is not a SignedPermutation of H's phase space
    """
    if not isinstance(mapping, SignedPermutation):
        raise StructuralError("map is not a signed permutation")
    return mapping.apply(H, antilinear=antilinear) == H
