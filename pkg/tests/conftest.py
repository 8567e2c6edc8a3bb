import pytest

from summand_lab import BernoulliPoisson, FiniteDiscrete, StandardizedIid, Uniform


@pytest.fixture
def rademacher():
    return FiniteDiscrete(((-1.0, 0.5), (1.0, 0.5)))


@pytest.fixture
def rademacher_gen(rademacher):
    return StandardizedIid(rademacher)


@pytest.fixture
def uniform_gen():
    return StandardizedIid(Uniform(-1.0, 1.0))


@pytest.fixture
def bernoulli_gen():
    return BernoulliPoisson(1.0)
