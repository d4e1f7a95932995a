import numpy as np
import pytest

from hlri.genotype import MixedGenotype, encode
from hlri.problem_model import linear_problem, parabolic_problem, sphere_problem
from hlri.region_zooming import initial_region


@pytest.fixture
def linear2():
    return linear_problem(2, 3.0)


@pytest.fixture
def sphere2():
    return sphere_problem(center=(4.0, 0.0), radius=1.0)


@pytest.fixture
def parabolic2():
    return parabolic_problem(c=5.0, kappa=0.5)


@pytest.fixture
def box2():
    return initial_region(0.0, 8.0, 2)


def make_genotype(direction, beta=0.0, region=None, bits_per_var=5,
                  fitness=None):
    """Genotype with a prescribed (unit) direction; bits quantized to match."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    if region is None:
        region = initial_region(0.0, 8.0, direction.shape[0])
    bits = encode(direction, region, bits_per_var)
    return MixedGenotype(beta=beta, bits=bits, direction=direction,
                         fitness=fitness)
