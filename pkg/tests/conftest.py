#!/usr/bin/env python3
"""
Pytest configuration for ptscan tests
"""

import os
import random
import sys
import pytest

# Add the parent directory to the path for importing modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from modules.operator_algebra import CanonicalPolynomial, PhaseSpace
from modules.selfforce_model import SelfForceParams

REPO_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(REPO_DIR, 'config')


@pytest.fixture
def rng():
    """Seeded random source for property tests."""
    return random.Random(20240917)


@pytest.fixture
def config_dir():
    """The shipped config directory."""
    return CONFIG_DIR


@pytest.fixture
def qp_space():
    """One canonical pair q/p."""
    return PhaseSpace.from_pairs([('q', 'p')])


@pytest.fixture
def q(qp_space):
    return CanonicalPolynomial.variable(qp_space, 'q')


@pytest.fixture
def p(qp_space):
    return CanonicalPolynomial.variable(qp_space, 'p')


@pytest.fixture
def unbroken_point():
    """(m, tau, k, A, B) = (1, 1, 0, 3, 3): all four xi real and positive."""
    return SelfForceParams(1, 1, 0, 3, 3)


@pytest.fixture
def hc_point():
    """(1, 1, 1, 0, 0): the A = B = 0 Hamiltonian at unit parameters."""
    return SelfForceParams(1, 1, 1, 0, 0)


@pytest.fixture
def disagreement_point():
    """(1, 1, 1/2, 1, 2): predicate true but spectrum broken."""
    return SelfForceParams(1, 1, '1/2', 1, 2)
