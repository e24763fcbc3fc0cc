"""Shared fixtures: the small reference models used across the test suite."""

import pytest

from jointtails.dependence import Independence, JointModel, PairwiseFGM
from jointtails.marginals import Pareto
from jointtails.rng import StreamKey
from jointtails.weights import Degenerate, UniformWeight, WeightModel


@pytest.fixture
def fgm_pair_model():
    """n=m=2, Pareto(2,1) x-side, Pareto(1.5,1) y-side, FGM theta=1 pairs."""
    return JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0), Pareto(alpha=2.0, scale=1.0)),
        y_marginals=(Pareto(alpha=1.5, scale=1.0), Pareto(alpha=1.5, scale=1.0)),
        copula=PairwiseFGM(thetas=(1.0, 1.0)),
    )


@pytest.fixture
def indep_pair_model():
    """n=m=1, independent Pareto(2,1) / Pareto(1.5,1)."""
    return JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=1.5, scale=1.0),),
        copula=Independence(),
    )


def unit_weights(n, m):
    return WeightModel(
        thetas=tuple(Degenerate(c=1.0) for _ in range(n)),
        deltas=tuple(Degenerate(c=1.0) for _ in range(m)),
    )


def uniform_weights(n, m):
    return WeightModel(
        thetas=tuple(UniformWeight(a=0.0, b=1.0) for _ in range(n)),
        deltas=tuple(UniformWeight(a=0.0, b=1.0) for _ in range(m)),
    )


@pytest.fixture
def key():
    return StreamKey(seed=20260825)
