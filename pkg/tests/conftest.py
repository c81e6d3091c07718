import cmath
import math

import pytest

from expdyn import ExpPoly, ExpPolyTerm, Poly, bundled_function


@pytest.fixture(scope="session")
def cosh3():
    """e^{z^3} + e^{-z^3}: the workhorse two-term d=3 function."""
    return ExpPoly(3, [ExpPolyTerm(Poly([1]), 1 + 0j), ExpPolyTerm(Poly([1]), -1 + 0j)])


@pytest.fixture(scope="session")
def sin3():
    return bundled_function("sin_z3")


@pytest.fixture(scope="session")
def sin2():
    return bundled_function("sin_z2")


@pytest.fixture(scope="session")
def sinz():
    return bundled_function("sin_z")


@pytest.fixture(scope="session")
def h_example():
    """exp(iz) sinh(z^3): the slow-wedge counterexample function."""
    return bundled_function("example_h")


@pytest.fixture(scope="session")
def hemke():
    """Q1 e^{z^3+z^2} + Q2 e^{-z^3-z^2}: a pi-gap pair with shared splitting."""
    return ExpPoly(
        3,
        [
            ExpPolyTerm(Poly([1]), 1 + 0j, Poly([0, 0, 1])),
            ExpPolyTerm(Poly([1]), -1 + 0j, Poly([0, 0, -1])),
        ],
    )


@pytest.fixture(scope="session")
def three_term():
    """Three cube roots of unity as frequencies: strict gaps, spread > pi."""
    return ExpPoly(
        3,
        [
            ExpPolyTerm(Poly([1]), cmath.exp(2j * math.pi * j / 3))
            for j in range(3)
        ],
    )
