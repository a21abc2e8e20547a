import pytest

from fuchsian_coding import coding as cd
from fuchsian_coding import oracle as orc
from fuchsian_coding.scheme import load_catalog

FREE, OCTAGON, TRIANGLE = "free-f2-ideal-quad", "genus2-octagon", "triangle-special-case"


@pytest.fixture(scope="session")
def octagon():
    return load_catalog(OCTAGON)


@pytest.fixture(scope="session")
def free():
    return load_catalog(FREE)


@pytest.fixture(scope="session")
def triangle():
    return load_catalog(TRIANGLE)


@pytest.fixture(scope="session")
def octagon_coding(octagon):
    return cd.build_coding(octagon)


@pytest.fixture(scope="session")
def free_coding(free):
    return cd.build_coding(free)


@pytest.fixture(scope="session")
def triangle_coding(triangle):
    return cd.build_coding(triangle)


@pytest.fixture(scope="session")
def oct_real():
    return orc.realize_group(OCTAGON)


@pytest.fixture(scope="session")
def free_real():
    return orc.realize_group(FREE)


@pytest.fixture(scope="session")
def oct_ball(oct_real):
    return orc.cayley_ball(oct_real, 5)
