import numpy as np
import pytest

from orbisol import (
    DiagonalTensor,
    InitialData,
    circle_skeleton,
    sphere_skeleton,
    stiefel_skeleton,
)


@pytest.fixture(scope="session")
def circle():
    return circle_skeleton()


@pytest.fixture(scope="session")
def sphere2():
    return sphere_skeleton(2)


@pytest.fixture(scope="session")
def sphere3():
    return sphere_skeleton(3)


@pytest.fixture(scope="session")
def stiefel4():
    return stiefel_skeleton(2)


def make_data(spec, epsilon, u2, order=12, exact=False, **kw):
    return InitialData(
        epsilon=epsilon,
        L1=DiagonalTensor.zero(spec, exact=exact),
        u2=u2,
        order=order,
        exact=exact,
        **kw,
    )


@pytest.fixture
def cigar_data(circle):
    return make_data(circle, 0.0, -2.0)


@pytest.fixture
def bryant_data(sphere3):
    return make_data(sphere3, 0.0, -1.0)


def rand_tensor(spec, rng, lo=0.5, hi=2.0):
    return DiagonalTensor(rng.uniform(lo, hi, spec.n_summands), spec)
