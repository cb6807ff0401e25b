import pytest

from hetcache.model import (
    Budget,
    FixedMemories,
    ProblemInstance,
    make_rate_profile,
)


@pytest.fixture
def figure_profile():
    """The three-user rate profile used throughout the worked examples."""
    return make_rate_profile([0.5, 0.7, 1.0])


@pytest.fixture
def example_one():
    """Three users with fixed caches m=[0.1, 0.2, 0.6] and r=[0.2, 0.3, 0.8]."""
    return ProblemInstance(
        K=3,
        N=3,
        rates=make_rate_profile([0.2, 0.3, 0.8]),
        constraint=FixedMemories(m=(0.1, 0.2, 0.6)),
    )


def budget_instance(rates, m_tot, N=None, q=2):
    profile = make_rate_profile(rates)
    return ProblemInstance(
        K=profile.K,
        N=N if N is not None else profile.K,
        rates=profile,
        constraint=Budget(m_tot=m_tot),
        q=q,
    )


@pytest.fixture
def budget_instance_factory():
    return budget_instance
