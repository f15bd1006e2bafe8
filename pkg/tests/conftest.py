"""
Shared fixtures: a seeded generator, the two-point scenario set and the
small QP instances used across the test modules.
"""
from pathlib import Path

import numpy as np
import pytest

from dc_modules.convex_core import Affine, Domain
from dc_modules.qp_value import QpInstance
from dc_modules.risk import RandomDcFunctional, ScenarioSet

SAMPLES_DIR = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def samples_dir():
    return SAMPLES_DIR


@pytest.fixture
def line():
    """[-1, 1] as a one-dimensional box."""
    return Domain.box([-1.0], [1.0])


@pytest.fixture
def zero_one():
    """Z in {0, 1} with equal probability, constant over x in [0, 1]."""
    domain = Domain.box([0.0], [1.0])
    return RandomDcFunctional(
        ScenarioSet([0.5, 0.5]),
        [Affine([0.0], 0.0), Affine([0.0], 1.0)],
        [Affine([0.0], 0.0), Affine([0.0], 0.0)],
        domain,
    )


@pytest.fixture
def qp_scalar():
    """min z^2 + q z subject to z >= b."""
    return QpInstance([[2.0]], [[1.0]])


@pytest.fixture
def qp_saddle():
    """min z1 z2 + q.z subject to z >= b."""
    return QpInstance([[0.0, 1.0], [1.0, 0.0]], np.eye(2))
