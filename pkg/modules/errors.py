#!/usr/bin/env python3
"""
Errors Module

Exception hierarchy for ptscan and the exit codes each failure maps to.
"""

from enum import IntEnum
from typing import Optional


class ExitCode(IntEnum):
    """Process exit codes shared by every CLI command."""
    UNBROKEN = 0          # Also used for commands that succeed without a verdict
    BROKEN = 1
    BOUNDARY = 2
    INVALID_INPUT = 3
    INCOMPLETE_BINDING = 4
    IO_FAILURE = 5
    INTERRUPTED = 130


class PtscanError(Exception):
    """Base class for every error raised by ptscan."""
    exit_code = ExitCode.INVALID_INPUT


class StructuralError(PtscanError):
    """Operands do not share a phase space, or a map is not a signed permutation."""


class NotQuadraticError(PtscanError):
    """A Hamiltonian has a monomial of degree > 2 (or no quadratic part at all)."""

    def __init__(self, message: str, monomial: Optional[str] = None):
        super().__init__(message)
        self.monomial = monomial


class UnsupportedLinearTermError(PtscanError):
    """A Hamiltonian has a nonzero linear part."""


class ModelSyntaxError(PtscanError):
    """
    A model document could not be parsed.

    Carries the 1-based source location so messages read "line L, column C: ...".
    """

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class MissingParameterError(PtscanError):
    """A parameter has neither a default nor a bound value."""
    exit_code = ExitCode.INCOMPLETE_BINDING

    def __init__(self, name: str):
        super().__init__(f"no value bound for parameter '{name}'")
        self.name = name


class DegenerateParameterError(PtscanError):
    """A parameter value makes the model undefined (zero denominator, m <= 0, ...)."""


class OddTermPresentError(PtscanError):
    """A characteristic polynomial has a nonzero odd-power coefficient."""

    def __init__(self, index: int):
        super().__init__(f"characteristic polynomial has a nonzero coefficient at odd power {index}")
        self.index = index


class ZeroLeadingCoefficientError(PtscanError):
    """Root finding was asked for a polynomial whose leading coefficient is zero."""


class InvalidToleranceError(PtscanError):
    """A classification tolerance is not a positive finite number."""


class InvalidGridError(PtscanError):
    """A scan grid definition is malformed."""


class UsageError(PtscanError):
    """Malformed command-line arguments."""


class UnknownParameterError(PtscanError):
    """A binding names a parameter the model does not declare."""


class ModelIOError(PtscanError):
    """A model, preset, report or image file could not be read or written."""
    exit_code = ExitCode.IO_FAILURE
