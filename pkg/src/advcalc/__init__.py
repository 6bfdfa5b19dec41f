"""Exact adversarial set calculus: norm-ball morphology, adversarial risk,
minimizer search, convex gauges and swap perturbations of strings."""

from .geometry import (
    GeometryError,
    GridSet,
    Interval,
    IntervalSet,
    Norm,
    ball_membership,
    canonicalize,
    distance_to_set,
    frac,
    load_set,
    dump_set,
    meets_ball,
    parse_norm,
    set_algebra,
)
from .morphology import (
    MorphContext,
    MorphError,
    closing,
    compose_radii_check,
    dilate,
    erode,
    finite_family_identities,
    fringe,
    is_certifiably_robust_at,
    is_pseudo_certifiably_robust,
    midpoint_harness,
    mollify,
    opening,
    tail_unions,
)
from .risk import LabeledDistribution, RiskError, adversarial_risk, bayes_classifier, standard_risk
from .optimize import (
    SearchError,
    SearchInstance,
    SearchResult,
    gray_code_search,
    greedy_flip_descent,
    minimizing_sequence_harness,
    mollified_optimality_check,
    oracle_search,
)
from .gauge import Ball, GaugeError, HalfspacePolytope, approximate_by_polytope, concavity_probe, lam
from .strings import StringUniverse, perturb, string_adversarial_risk, string_oracle_search, swap_apply

__version__ = "0.1.0"
