"""Simulation lab for joint tail asymptotics of randomly weighted sums.

The package verifies, by Monte Carlo ratio experiments against exact or
Rao-Blackwellized predictors, the asymptotic equivalence of joint exceedance
probabilities of (weighted) sums, running maxima and componentwise maxima of
two dependent heavy-tailed sequences, including the two-dimensional
finite-horizon ruin probability.
"""

from .errors import (
    InfiniteMomentError,
    JointTailsError,
    ModelValidationError,
    RegimeError,
    ScenarioError,
)
from .marginals import (
    Exponential,
    HeavyWeibull,
    Lognormal,
    Marginal,
    MixtureSpec,
    Pareto,
)
from .dependence import (
    DiagnosticCurve,
    DiagnosticKind,
    GaussianCopula,
    Independence,
    JointModel,
    PairwiseFGM,
    log_pair_tail,
    pair_diagnostic,
    pair_tail,
    pair_tail_vec,
    sai_constant,
    sample_joint,
    slow_variation_probe,
    triple_diagnostic,
)
from .weights import (
    Bernoulli,
    Comonotone,
    Degenerate,
    IndependentWeights,
    LognormalWeight,
    ProbeFunctions,
    UniformWeight,
    WeightModel,
    assumption_a_check,
    mixed_moment,
    sample_weights,
    weighted_pair_term,
)
from .montecarlo import CHUNK, MCEstimate, pool, run_parallel
from .rng import BACKEND, RandomStream, StreamKey, stream_for
from .sums import (
    PathSample,
    PredictorKind,
    RatioProbe,
    RatioReport,
    Variant,
    estimate_lhs,
    maxsum_experiment,
    predictor_S,
    predictor_S_weighted,
    predictor_breiman,
    product_dependence_check,
    ratio_experiment,
    simulate_paths,
    sum_closure_check,
    sum_scale_ratio,
    threshold_grid,
)
from .ruin import RiskScenario, psi_and_asym, psi_and_mc, ruin_report
from .scenario import (
    Experiment,
    ScenarioFile,
    canonical_form,
    parse_scenario,
    parse_scenario_file,
    scenario_hash,
)
from .tail_classes import (
    ClassReport,
    MatuszewskaResult,
    class_report_1d,
    class_report_2d,
    matuszewska,
    mixture_closure_check,
    s2_ratio_check,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
