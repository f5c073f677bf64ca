import math

import pytest

from halfspec.core import ProblemSpec, Tolerances
from halfspec.spectrum import spectrum_slice


def pi_p(p: float) -> float:
    """Generalized pi constant 2*pi / (p sin(pi/p))."""
    return 2.0 * math.pi / (p * math.sin(math.pi / p))


def plap_eigenvalue(p: float, k: int) -> float:
    """k-th Dirichlet eigenvalue of the constant-coefficient problem."""
    return (p - 1.0) * ((k + 1) * pi_p(p)) ** p


@pytest.fixture(scope="session")
def tol():
    return Tolerances()


@pytest.fixture(scope="session")
def case_a_spec():
    """p=2, a=pi^2, resonant at lambda=0, k=0 with f_pm = +-1."""
    return ProblemSpec.from_strings(
        p=2.0, a_plus="pi^2", a_minus="pi^2",
        f="tanh(xi)", f_plus="1", f_minus="-1")


@pytest.fixture(scope="session")
def case_a_slice(case_a_spec, tol):
    return spectrum_slice(case_a_spec, 2, tol)


@pytest.fixture(scope="session")
def case_a3_spec():
    """p=3 analogue of the case-A spec (a = 2 pi_3^3)."""
    a3 = plap_eigenvalue(3.0, 0)
    return ProblemSpec.from_strings(
        p=3.0, a_plus=repr(a3), a_minus=repr(a3),
        f="tanh(xi)", f_plus="1", f_minus="-1")


@pytest.fixture(scope="session")
def case_a3_slice(case_a3_spec, tol):
    return spectrum_slice(case_a3_spec, 1, tol)


@pytest.fixture(scope="session")
def jump_spec():
    """p=2, a+=1, a-=0: lambda_{0,+} = pi^2 - 1, lambda_{0,-} = pi^2."""
    return ProblemSpec.from_strings(p=2.0, a_plus="1", a_minus="0")


@pytest.fixture(scope="session")
def jump_slice(jump_spec, tol):
    return spectrum_slice(jump_spec, 1, tol)


@pytest.fixture(scope="session")
def b1_spec():
    """Resonant at lambda_{0,min} = pi^2 - 1 with f_pm = -1 (case B1, solvable)."""
    return ProblemSpec.from_strings(
        p=2.0, a_plus="1", a_minus="0", lam=math.pi ** 2 - 1.0,
        f="-tanh(xi)^2", f_plus="-1", f_minus="-1")
