#!/usr/bin/env python3
"""
Model Parser Module

Parses plain-text model definitions into exact canonical polynomials.

Model file format (UTF-8):

    pairs: x/p_x, y/p_y          # canonical pairs, coordinate/momentum
    params: m, tau=1/2           # optional defaults, exact rationals
    H = (p_x^2 + p_y^2)/(2*m) + x*y

Header sections may also be separated by ';'. The Hamiltonian expression
runs to the end of the document and may span lines. Comments start with '#'.
Products need an explicit '*', '^' binds tighter than unary minus, and the
identifier 'i' is the imaginary unit.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Set, Tuple, Union

from .errors import (
    DegenerateParameterError, MissingParameterError, ModelIOError, ModelSyntaxError,
    UnknownParameterError,
)
from .gaussian_rational import GaussianRational, I, format_rational
from .logger import get_logger
from .operator_algebra import CanonicalPolynomial, PhaseSpace, multiply

logger = get_logger('model_parser')

IMAGINARY_UNIT = 'i'

# Binary operators in groups of increasing precedence. Unary minus and '^'
# are handled in atom() so that '^' binds tighter than negation.
OPERATORS = [
    [('+', 'left'), ('-', 'left')],
    [('*', 'left'), ('/', 'left')],
]
OPERATOR_PREC = {info[0]: idx + 1 for idx, group in enumerate(OPERATORS) for info in group}
NEG_PREC = 3
POW_PREC = 4
ATOM_PREC = 5

PUNCTUATION = set('+-*/^(),:;=')

_NUMBER_RE = re.compile(r'(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?')
_IDENT_RE = re.compile(r'[A-Za-z_][A-Za-z0-9_]*')


@dataclass(frozen=True)
class Token:
    kind: str            # NUMBER, IDENT, OP, NEWLINE, EOF
    text: str
    line: int
    column: int
    value: Optional[Fraction] = None


# Expression tree. Source positions are kept for messages but do not take
# part in equality, so a reparse of the pretty-printed form compares equal.

@dataclass(frozen=True)
class Number:
    value: Fraction
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ImaginaryUnit:
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Name:
    """Identifier before resolution."""
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ParamRef:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class OperatorRef:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: 'Node'
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: 'Node'
    right: 'Node'
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Pow:
    base: 'Node'
    exponent: int
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


Node = Union[Number, ImaginaryUnit, Name, ParamRef, OperatorRef, Neg, BinOp, Pow]

ParameterBinding = Dict[str, Fraction]


@dataclass(frozen=True)
class ModelDefinition:
    """
    Parsed model: phase space, declared parameters and the resolved Hamiltonian tree.
    """
    phase_space: PhaseSpace
    parameters: Tuple[Tuple[str, Optional[Fraction]], ...]
    hamiltonian_ast: Node

    @property
    def parameter_names(self) -> List[str]:
        return [name for name, _ in self.parameters]

    @property
    def defaults(self) -> ParameterBinding:
        return {name: value for name, value in self.parameters if value is not None}


def tokenize(source: str) -> List[Token]:
    """
    Turn a model document into tokens with 1-based line/column positions.

    Decimal literals become exact Fractions here, so no binary float ever
    reaches the algebra.

    Raises:
        ModelSyntaxError: On a character that starts no token
    """
    tokens: List[Token] = []
    line, col, idx = 1, 1, 0
    while idx < len(source):
        c = source[idx]
        if c == '\n':
            tokens.append(Token('NEWLINE', '\n', line, col))
            idx += 1
            line, col = line + 1, 1
            continue
        if c.isspace():
            idx += 1
            col += 1
            continue
        # Skip line comments
        if c == '#':
            while idx < len(source) and source[idx] != '\n':
                idx += 1
            continue
        match = _NUMBER_RE.match(source, idx)
        if match and (c.isdigit() or c == '.'):
            text = match.group(0)
            tokens.append(Token('NUMBER', text, line, col, Fraction(text)))
            idx += len(text)
            col += len(text)
            continue
        match = _IDENT_RE.match(source, idx)
        if match:
            text = match.group(0)
            tokens.append(Token('IDENT', text, line, col))
            idx += len(text)
            col += len(text)
            continue
        if c in PUNCTUATION:
            tokens.append(Token('OP', c, line, col))
            idx += 1
            col += 1
            continue
        raise ModelSyntaxError(f"unexpected character {c!r}", line, col)
    tokens.append(Token('EOF', '', line, col))
    return tokens


class _Parser:
    """Recursive-descent document parser with precedence climbing for expressions."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        self.pos += 1
        return token

    def at_op(self, text: str) -> bool:
        token = self.peek()
        return token.kind == 'OP' and token.text == text

    def error(self, message: str, token: Optional[Token] = None) -> ModelSyntaxError:
        token = token or self.peek()
        return ModelSyntaxError(message, token.line, token.column)

    def expect_op(self, text: str) -> Token:
        if not self.at_op(text):
            raise self.error(f"expected '{text}', found {describe(self.peek())}")
        return self.advance()

    def expect_ident(self) -> Token:
        token = self.peek()
        if token.kind != 'IDENT':
            raise self.error(f"expected a name, found {describe(token)}")
        return self.advance()

    def skip_separators(self) -> None:
        while self.peek().kind == 'NEWLINE' or self.at_op(';'):
            self.advance()

    def at_section(self, keyword: str, separator: str) -> bool:
        token, nxt = self.peek(), self.peek(1)
        return token.kind == 'IDENT' and token.text == keyword and nxt.kind == 'OP' and nxt.text == separator

    def end_of_header_line(self) -> None:
        token = self.peek()
        if token.kind == 'NEWLINE' or self.at_op(';') or token.kind == 'EOF':
            return
        raise self.error(f"unexpected {describe(token)}")

    # Header sections

    def parse_pairs(self) -> List[Tuple[Token, Token]]:
        self.advance()
        self.advance()
        pairs = []
        while True:
            coordinate = self.expect_ident()
            self.expect_op('/')
            momentum = self.expect_ident()
            pairs.append((coordinate, momentum))
            if not self.at_op(','):
                break
            self.advance()
        self.end_of_header_line()
        return pairs

    def parse_params(self) -> List[Tuple[Token, Optional[Fraction]]]:
        self.advance()
        self.advance()
        params = []
        if self.peek().kind == 'IDENT':
            while True:
                name = self.expect_ident()
                value = None
                if self.at_op('='):
                    self.advance()
                    value = self.parse_signed_rational()
                params.append((name, value))
                if not self.at_op(','):
                    break
                self.advance()
        self.end_of_header_line()
        return params

    def parse_signed_rational(self) -> Fraction:
        sign = 1
        if self.at_op('-') or self.at_op('+'):
            sign = -1 if self.advance().text == '-' else 1
        token = self.peek()
        if token.kind != 'NUMBER':
            raise self.error(f"expected a number, found {describe(token)}")
        value = self.advance().value
        if self.at_op('/'):
            self.advance()
            den = self.peek()
            if den.kind != 'NUMBER' or den.value == 0:
                raise self.error("expected a nonzero denominator", den)
            value = value / self.advance().value
        return sign * value

    # Expressions

    def parse_expression(self, min_prec: int = 1) -> Node:
        lhs = self.parse_unary()
        while self.peek().kind == 'OP' and self.peek().text in OPERATOR_PREC:
            token = self.peek()
            op_prec = OPERATOR_PREC[token.text]
            if op_prec < min_prec:
                return lhs
            self.advance()
            # All binary operators are left-associative
            rhs = self.parse_expression(op_prec + 1)
            lhs = BinOp(token.text, lhs, rhs, token.line, token.column)
        return lhs

    def parse_unary(self) -> Node:
        token = self.peek()
        if self.at_op('-'):
            self.advance()
            return Neg(self.parse_unary(), token.line, token.column)
        if self.at_op('+'):
            self.advance()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        if not self.at_op('^'):
            return base
        caret = self.advance()
        sign = 1
        if self.at_op('-'):
            self.advance()
            sign = -1
        token = self.peek()
        if token.kind != 'NUMBER' or token.value.denominator != 1 or '.' in token.text:
            raise self.error("exponent must be an integer literal", token)
        self.advance()
        if self.at_op('^'):
            raise self.error("chained exponents need parentheses")
        return Pow(base, sign * int(token.value), caret.line, caret.column)

    def parse_atom(self) -> Node:
        token = self.peek()
        if token.kind == 'NUMBER':
            self.advance()
            return Number(token.value, token.line, token.column)
        if token.kind == 'IDENT':
            self.advance()
            return Name(token.text, token.line, token.column)
        if self.at_op('('):
            self.advance()
            inner = self.parse_expression()
            if not self.at_op(')'):
                if self.peek().kind == 'EOF':
                    raise self.error("unbalanced parenthesis: '(' is never closed", token)
                raise self.error(f"expected ')', found {describe(self.peek())}")
            self.advance()
            return inner
        if self.at_op(')'):
            raise self.error("unbalanced parenthesis: unexpected ')'")
        if token.kind == 'EOF':
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {describe(token)}")


def describe(token: Token) -> str:
    if token.kind == 'EOF':
        return 'end of input'
    if token.kind == 'NEWLINE':
        return 'end of line'
    return f"'{token.text}'"


def _contains_operator(node: Node) -> bool:
    if isinstance(node, OperatorRef):
        return True
    if isinstance(node, Neg):
        return _contains_operator(node.operand)
    if isinstance(node, Pow):
        return _contains_operator(node.base)
    if isinstance(node, BinOp):
        return _contains_operator(node.left) or _contains_operator(node.right)
    return False


def _first_operator(node: Node) -> Optional[OperatorRef]:
    if isinstance(node, OperatorRef):
        return node
    children = []
    if isinstance(node, Neg):
        children = [node.operand]
    elif isinstance(node, Pow):
        children = [node.base]
    elif isinstance(node, BinOp):
        children = [node.left, node.right]
    for child in children:
        found = _first_operator(child)
        if found is not None:
            return found
    return None


def _resolve(node: Node, params: Set[str], operators: Set[str]) -> Node:
    """Replace Name nodes by parameter/operator references and check scalar-only positions."""
    if isinstance(node, Name):
        if node.name == IMAGINARY_UNIT:
            return ImaginaryUnit(node.line, node.column)
        if node.name in params:
            return ParamRef(node.name, node.line, node.column)
        if node.name in operators:
            return OperatorRef(node.name, node.line, node.column)
        raise ModelSyntaxError(f"unknown identifier '{node.name}'", node.line, node.column)
    if isinstance(node, Neg):
        return Neg(_resolve(node.operand, params, operators), node.line, node.column)
    if isinstance(node, Pow):
        base = _resolve(node.base, params, operators)
        if node.exponent < 0 and _contains_operator(base):
            raise ModelSyntaxError("negative exponent on an operator expression", node.line, node.column)
        return Pow(base, node.exponent, node.line, node.column)
    if isinstance(node, BinOp):
        left = _resolve(node.left, params, operators)
        right = _resolve(node.right, params, operators)
        if node.op == '/':
            offender = _first_operator(right)
            if offender is not None:
                raise ModelSyntaxError(
                    f"operator '{offender.name}' inside a denominator", offender.line, offender.column)
        return BinOp(node.op, left, right, node.line, node.column)
    return node


def parse_model(text: str) -> ModelDefinition:
    """
    Parse a model document.

    Args:
        text: UTF-8 model text

    Returns:
        ModelDefinition with a resolved expression tree

    Raises:
        ModelSyntaxError: Lexical error, unbalanced parentheses, unknown identifier,
            operator inside a denominator, non-integer exponent, bad declarations
    """
    parser = _Parser(tokenize(text))
    parser.skip_separators()

    pair_tokens: List[Tuple[Token, Token]] = []
    param_tokens: List[Tuple[Token, Optional[Fraction]]] = []
    if parser.at_section('pairs', ':'):
        pair_tokens = parser.parse_pairs()
        parser.skip_separators()
    if parser.at_section('params', ':'):
        param_tokens = parser.parse_params()
        parser.skip_separators()

    head = parser.peek()
    if not (head.kind == 'IDENT' and head.text == 'H'):
        raise parser.error(f"expected 'H = <expression>', found {describe(head)}")
    parser.advance()
    parser.expect_op('=')
    # The expression may span lines
    parser.tokens = parser.tokens[:parser.pos] + [t for t in parser.tokens[parser.pos:] if t.kind != 'NEWLINE']
    try:
        raw = parser.parse_expression()
    except RecursionError:
        raise parser.error("expression is nested too deeply", head) from None
    tail = parser.peek()
    if tail.kind != 'EOF':
        if tail.kind == 'OP' and tail.text == ')':
            raise parser.error("unbalanced parenthesis: unexpected ')'", tail)
        raise parser.error(f"unexpected {describe(tail)} (products need an explicit '*')", tail)

    if not pair_tokens:
        raise ModelSyntaxError("model declares no canonical pairs ('pairs: q/p, ...')", head.line, head.column)

    seen: Dict[str, Token] = {}
    for token in [t for pair in pair_tokens for t in pair] + [name for name, _ in param_tokens]:
        if token.text == IMAGINARY_UNIT:
            raise ModelSyntaxError("'i' is reserved for the imaginary unit", token.line, token.column)
        if token.text in seen:
            raise ModelSyntaxError(f"'{token.text}' is declared twice", token.line, token.column)
        seen[token.text] = token

    space = PhaseSpace.from_pairs((q.text, p.text) for q, p in pair_tokens)
    parameters = tuple((name.text, value) for name, value in param_tokens)
    ast = _resolve(raw, {name for name, _ in parameters}, set(space.basis))
    logger.debug(f"Parsed model with {space.n} pairs and {len(parameters)} parameters")
    return ModelDefinition(phase_space=space, parameters=parameters, hamiltonian_ast=ast)


def load_model(path: str) -> ModelDefinition:
    """
    Read and parse a model file.

    Raises:
        ModelIOError: If the file cannot be read
        ModelSyntaxError: If the text does not parse
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ModelIOError(f"cannot read model file {path}: {e}") from e
    return parse_model(text)


def _decimal_text(value: Fraction) -> str:
    """Exact decimal text for a non-negative terminating Fraction."""
    if value.denominator == 1:
        return str(value.numerator)
    digits = 0
    scaled = value
    while scaled.denominator != 1:
        scaled *= 10
        digits += 1
        if digits > 64:
            # Not a terminating decimal; cannot come from the lexer
            return f"({value.numerator}/{value.denominator})"
    text = str(scaled.numerator).rjust(digits + 1, '0')
    return f"{text[:-digits]}.{text[-digits:]}"


def _precedence(node: Node) -> int:
    if isinstance(node, BinOp):
        return OPERATOR_PREC[node.op]
    if isinstance(node, Neg):
        return NEG_PREC
    if isinstance(node, Pow):
        return POW_PREC
    return ATOM_PREC


def format_expression(node: Node) -> str:
    """
    Canonical pretty-printer with minimal parentheses; reparses to an equal tree.
    """
    if isinstance(node, Number):
        return _decimal_text(node.value)
    if isinstance(node, ImaginaryUnit):
        return IMAGINARY_UNIT
    if isinstance(node, (Name, ParamRef, OperatorRef)):
        return node.name
    if isinstance(node, Neg):
        inner = format_expression(node.operand)
        if _precedence(node.operand) < NEG_PREC:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Pow):
        base = format_expression(node.base)
        if _precedence(node.base) < ATOM_PREC:
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, BinOp):
        prec = OPERATOR_PREC[node.op]
        left = format_expression(node.left)
        right = format_expression(node.right)
        if _precedence(node.left) < prec:
            left = f"({left})"
        if _precedence(node.right) <= prec:
            right = f"({right})"
        sep = f" {node.op} " if node.op in '+-' else node.op
        return f"{left}{sep}{right}"
    raise TypeError(f"not an expression node: {node!r}")


def format_model(definition: ModelDefinition) -> str:
    """Render a ModelDefinition back to model-file text."""
    space = definition.phase_space
    pairs = ', '.join(f"{q}/{p}" for q, p in zip(space.coordinate_names, space.momentum_names))
    params = ', '.join(name if value is None else f"{name}={format_rational(value)}"
                       for name, value in definition.parameters)
    return f"pairs: {pairs}\nparams: {params}\nH = {format_expression(definition.hamiltonian_ast)}\n"


def resolve_binding(definition: ModelDefinition, overrides: Optional[Mapping[str, Fraction]] = None) -> ParameterBinding:
    """
    Merge declared defaults with overrides into a complete binding.

    Raises:
        UnknownParameterError: If an override names an undeclared parameter
        MissingParameterError: If a parameter has no value
    """
    overrides = dict(overrides or {})
    names = definition.parameter_names
    for name in overrides:
        if name not in names:
            raise UnknownParameterError(f"model has no parameter '{name}'")
    binding = definition.defaults
    binding.update({name: Fraction(value) for name, value in overrides.items()})
    for name in names:
        if name not in binding:
            raise MissingParameterError(name)
    return binding


def bind_and_expand(definition: ModelDefinition, binding: Mapping[str, Fraction]) -> CanonicalPolynomial:
    """
    Substitute parameter values and expand to a normal-ordered polynomial.

    Args:
        definition: Parsed model
        binding: Value for every declared parameter

    Returns:
        Exact CanonicalPolynomial

    Raises:
        MissingParameterError: If a parameter is unbound
        DegenerateParameterError: If a denominator evaluates to zero
    """
    for name in definition.parameter_names:
        if name not in binding:
            raise MissingParameterError(name)
    space = definition.phase_space
    values = {name: GaussianRational.coerce(Fraction(binding[name])) for name in definition.parameter_names}

    def expand(node: Node) -> CanonicalPolynomial:
        if isinstance(node, Number):
            return CanonicalPolynomial.constant(space, node.value)
        if isinstance(node, ImaginaryUnit):
            return CanonicalPolynomial.constant(space, I)
        if isinstance(node, ParamRef):
            return CanonicalPolynomial.constant(space, values[node.name])
        if isinstance(node, OperatorRef):
            return CanonicalPolynomial.variable(space, node.name)
        if isinstance(node, Neg):
            return -expand(node.operand)
        if isinstance(node, Pow):
            base = expand(node.base)
            if node.exponent >= 0:
                return base ** node.exponent
            scalar = base.scalar_part
            if not scalar:
                raise DegenerateParameterError(
                    f"'{format_expression(node.base)}' is zero and has a negative exponent "
                    f"(line {node.line}, column {node.column})")
            return CanonicalPolynomial.constant(space, scalar ** node.exponent)
        if isinstance(node, BinOp):
            left = expand(node.left)
            right = expand(node.right)
            if node.op == '+':
                return left + right
            if node.op == '-':
                return left - right
            if node.op == '*':
                return multiply(left, right)
            denominator = right.scalar_part
            if not denominator:
                raise DegenerateParameterError(
                    f"denominator '{format_expression(node.right)}' evaluates to zero "
                    f"(line {node.line}, column {node.column})")
            return left.scale(1 / denominator)
        raise TypeError(f"unresolved expression node: {node!r}")

    return expand(definition.hamiltonian_ast)
