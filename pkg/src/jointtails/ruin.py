"""Two-dimensional discrete-time risk model with stochastic discounts.

Two business lines start from surpluses (x, y). In period i line one pays
claim X_i and line two pays Y_j, each brought back to present value by the
accumulated discount factors Theta_i and Delta_j. Both lines are ruined by
period n when both discounted running maxima exceed the surpluses:

    psi_and(x, y, n) = P[ max_k sum_{i<=k} Theta_i X_i > x,
                          max_l sum_{j<=l} Delta_j Y_j > y ],   k, l <= n.

Ruin of each line at the first crossing time (infimum over an empty set
= +infinity) makes the event above exactly "both lines ruined by n", not
simultaneous ruin. Premium income is not modeled: the surplus process is
the initial capital minus discounted claims. A deterministic premium
stream would enter as a per-period deduction from the claims before
weighting; the hooks are the claim marginals' ``shift`` field.

``psi_and_mc`` shares its implementation with the joint-running-max
variant of the sums module, so weighted-sum experiments and ruin
experiments can never drift apart.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .dependence import JointModel
from .errors import ModelValidationError
from .montecarlo import MCEstimate
from .rng import StreamKey
from .sums import (
    PredictorKind,
    RatioReport,
    Variant,
    estimate_lhs,
    predictor_S,
    predictor_S_weighted,
    predictor_breiman,
    ratio_experiment,
)
from .weights import Degenerate, WeightModel


@dataclass(frozen=True, eq=False)
class RiskScenario:
    """Finite-horizon two-line risk model.

    ``claims`` holds the joint law of the n + n per-period claims and
    ``discounts`` the accumulated stochastic discount factors; both lines
    share the horizon (the asymptotic theory needs equal period counts).
    """

    horizon: int
    claims: JointModel
    discounts: WeightModel
    surplus_grid: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if not (isinstance(self.horizon, (int, np.integer))
                and self.horizon >= 1):
            raise ModelValidationError("horizon must be a positive integer")
        if self.claims.n != self.horizon or self.claims.m != self.horizon:
            raise ModelValidationError(
                "claims model is %dx%d; both lines must have %d periods"
                % (self.claims.n, self.claims.m, self.horizon))
        if self.discounts.n != self.horizon or self.discounts.m != self.horizon:
            raise ModelValidationError(
                "discount model is %dx%d; both lines must have %d periods"
                % (self.discounts.n, self.discounts.m, self.horizon))
        grid = tuple(
            (float(x), float(y)) for x, y in self.surplus_grid)
        if not grid:
            raise ModelValidationError("surplus grid must be non-empty")
        for x, y in grid:
            if not (np.isfinite(x) and np.isfinite(y) and x > 0 and y > 0):
                raise ModelValidationError(
                    "initial surpluses must be strictly positive")
        object.__setattr__(self, "surplus_grid", grid)


def psi_and_mc(rs: RiskScenario, x: float, y: float, n_samples: int,
               key: StreamKey, workers: int = 1) -> MCEstimate:
    """MC estimate of psi_and(x, y, horizon).

    Delegates to the joint-running-max estimator of the sums module: one
    implementation, one draw order, identical bits for identical keys.
    """
    return estimate_lhs(rs.claims, rs.discounts, x, y,
                        Variant.JOINT_RUNNING_MAX, n_samples, key, workers)


def _unit_degenerate(wm: WeightModel) -> bool:
    return all(isinstance(s, Degenerate) and s.c == 1.0
               for s in wm.thetas + wm.deltas)


def psi_and_asym(rs: RiskScenario, x: float, y: float,
                 predictor_kind=None, n_samples: int = 1_000_000,
                 key: Optional[StreamKey] = None,
                 workers: int = 1) -> Tuple[float, float]:
    """(value, se): double-sum asymptotic approximation of psi_and.

    Dispatch: unit degenerate discounts reduce to the plain pair-tail sum;
    an explicit ``predictor_kind`` forces that form (the moment-multiplier
    form raises outside the regularly-varying regime); otherwise the
    weighted pair-term sum is used.
    """
    if predictor_kind is not None:
        kind = PredictorKind(predictor_kind)
    elif _unit_degenerate(rs.discounts):
        kind = PredictorKind.S_PLAIN
    else:
        kind = PredictorKind.S_WEIGHTED
    if kind is PredictorKind.S_PLAIN:
        return predictor_S(rs.claims, x, y), 0.0
    if kind is PredictorKind.S_BREIMAN:
        return predictor_breiman(rs.claims, rs.discounts, x, y), 0.0
    return predictor_S_weighted(rs.claims, rs.discounts, x, y,
                                n_samples, key, workers)


def ruin_report(rs: RiskScenario, n_samples: int, key: StreamKey,
                predictor_kind=None, workers: int = 1,
                band: Optional[float] = None) -> RatioReport:
    """psi_and_mc vs psi_and_asym over the scenario's surplus grid.

    The joint-running-max rows are the ruin probabilities; the joint-sum
    and joint-component-max rows come along from the shared kernel and
    bound psi_and from below per draw.
    """
    if predictor_kind is not None:
        kind = PredictorKind(predictor_kind)
    elif _unit_degenerate(rs.discounts):
        kind = PredictorKind.S_PLAIN
    else:
        kind = PredictorKind.S_WEIGHTED
    return ratio_experiment(rs.claims, rs.discounts, rs.surplus_grid,
                            n_samples, key, kind, workers, band)
