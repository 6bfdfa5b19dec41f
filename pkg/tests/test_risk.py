import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advcalc.geometry import GridSet, IntervalSet, parse_norm
from advcalc.morphology import MorphContext, closing, mollify, opening
from advcalc.risk import (
    LabeledDistribution,
    RiskError,
    adversarial_risk,
    adversarial_risk_sup,
    bayes_classifier,
    standard_risk,
)

from oracles import ball_inside_raw, ball_meets_raw, brute_dilate, lattice_ball, radii, raw_intervals, raw_to_set

ABS = parse_norm("l1", 1)
TWO = LabeledDistribution([((0,), F(1, 2), 1), ((1,), F(1, 2), 0)])


def ctx1(eps, domain=None):
    return MorphContext(ABS, F(eps), domain)


def oracle_risk_1d(raw, D, eps):
    """Each atom pays 1 - eta if its ball meets A and eta if its ball leaves A."""
    total = F(0)
    for a in D:
        (x,) = a.x
        total += a.p * ((1 - a.eta) * ball_meets_raw(raw, x, eps) + a.eta * (not ball_inside_raw(raw, x, eps)))
    return total


@st.composite
def distributions(draw, max_atoms=10):
    n = draw(st.integers(1, max_atoms))
    xs = draw(st.lists(st.fractions(-5, 5, max_denominator=4), min_size=n, max_size=n, unique=True))
    w = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    etas = draw(st.lists(st.fractions(0, 1, max_denominator=10), min_size=n, max_size=n))
    tot = sum(w)
    return LabeledDistribution([((x,), F(wi, tot), e) for x, wi, e in zip(xs, w, etas)])


# -- worked examples -----------------------------------------------------------


def test_standard_risk_examples():
    assert standard_risk(IntervalSet(), TWO) == F(1, 2)
    assert standard_risk(IntervalSet([(F(-1, 4), F(1, 4))]), TWO) == 0
    assert standard_risk(IntervalSet([(-5, 5)]), TWO) == F(1, 2)


def test_standard_risk_outside_domain():
    with pytest.raises(RiskError):
        standard_risk(IntervalSet(), TWO, domain=IntervalSet([(F(1, 2), 2)]))


def test_bayes_classifier_examples():
    assert bayes_classifier(TWO) == IntervalSet.points([0])
    half = LabeledDistribution([((0,), F(1, 2), F(1, 2)), ((1,), F(1, 2), F(1, 2))])
    assert bayes_classifier(half).is_empty()


def test_three_atom_bayes_value():
    D = LabeledDistribution([((0,), F(1, 3), F(3, 4)), ((1,), F(1, 3), F(1, 4)), ((2,), F(1, 3), F(9, 10))])
    A = bayes_classifier(D)
    assert A == IntervalSet.points([0, 2])
    # the terms 1/12 + 1/12 + 1/30 add up to 1/5
    assert F(1, 3) * F(1, 4) + F(1, 3) * F(1, 4) + F(1, 3) * F(1, 10) == F(1, 5)
    assert standard_risk(A, D) == F(1, 5)
    assert D.bayes_risk() == F(1, 5)


def test_adversarial_risk_examples():
    ctx = ctx1(F(3, 5))
    for mode in ("morphology", "distance"):
        assert adversarial_risk(IntervalSet([(-10, F(1, 2))]), TWO, ctx, mode) == 1
        assert adversarial_risk(IntervalSet([(-10, 10)]), TWO, ctx, mode) == F(1, 2)


def test_distribution_validation():
    with pytest.raises(RiskError):
        LabeledDistribution([((0,), F(1, 2), 1)])
    with pytest.raises(RiskError):
        LabeledDistribution([((0,), 1, F(3, 2))])
    with pytest.raises(RiskError):
        LabeledDistribution([((0,), F(1, 2), 1), ((0,), F(1, 2), 0)])
    with pytest.raises(RiskError):
        LabeledDistribution([((0,), 0, 1), ((1,), 1, 0)])


def test_distribution_json_round_trip(tmp_path):
    p = tmp_path / "d.json"
    import json

    p.write_text(json.dumps(TWO.to_json()))
    D = LabeledDistribution.load(str(p))
    assert [(a.x, a.p, a.eta) for a in D] == [(a.x, a.p, a.eta) for a in TWO]


def test_distance_mode_needs_closed_sets():
    from advcalc.geometry import Interval

    A = IntervalSet([Interval(0, 1, False, True)])
    with pytest.raises(RiskError):
        adversarial_risk(A, TWO, ctx1(1), mode="distance")


def test_grid_atom_off_lattice():
    G = GridSet.from_indices([(0, 0)], dim=2)
    D = LabeledDistribution([((F(1, 2), 0), 1, 1)])
    with pytest.raises(RiskError):
        adversarial_risk(G, D, MorphContext(parse_norm("l1", 2), 1))


# -- against the brute-force ball oracle ------------------------------------------


@settings(max_examples=300, deadline=None)
@given(raw_intervals(), distributions(), radii)
def test_adversarial_risk_matches_ball_oracle(raw, D, eps):
    A = raw_to_set(raw)
    want = oracle_risk_1d(raw, D, eps)
    assert adversarial_risk(A, D, ctx1(eps)) == want
    assert adversarial_risk_sup(A, D, ctx1(eps)) == want
    if A.is_closed():
        assert adversarial_risk(A, D, ctx1(eps), mode="distance") == want


def test_zero_radius_equals_standard_risk_on_200_cases():
    rng = random.Random(200)
    for _ in range(200):
        n = rng.randint(1, 8)
        xs = rng.sample(range(-20, 20), n)
        w = [rng.randint(1, 5) for _ in range(n)]
        D = LabeledDistribution([((F(x, 4),), F(wi, sum(w)), F(rng.randint(0, 10), 10)) for x, wi in zip(xs, w)])
        parts = []
        for _ in range(rng.randint(0, 4)):
            a, b = sorted(F(rng.randint(-24, 24), 4) for _ in range(2))
            parts.append((a, b))
        A = IntervalSet(parts)
        assert adversarial_risk(A, D, ctx1(0)) == standard_risk(A, D)


@pytest.mark.parametrize("kind", ["l1", "l2", "linf"])
@pytest.mark.parametrize("seed", range(10))
def test_grid_risk_matches_python_sets(kind, seed):
    rng = random.Random(seed)
    pts = {(rng.randrange(0, 8), rng.randrange(0, 8)) for _ in range(20)}
    A = GridSet.from_indices(sorted(pts), dim=2)
    eps = F(rng.choice([1, 2, 3]), rng.choice([1, 2]))
    atoms = rng.sample([(i, j) for i in range(-2, 10) for j in range(-2, 10)], 6)
    w = [rng.randint(1, 4) for _ in atoms]
    D = LabeledDistribution([(x, F(wi, sum(w)), F(rng.randint(0, 4), 4)) for x, wi in zip(atoms, w)])
    ball = lattice_ball(kind, eps)
    want = F(0)
    for a in D:
        x = tuple(int(c) for c in a.x)
        near = brute_dilate({x}, ball)
        want += a.p * ((1 - a.eta) * bool(near & pts) + a.eta * bool(near - pts))
    ctx = MorphContext(parse_norm(kind, 2), eps)
    assert adversarial_risk(A, D, ctx) == want
    assert adversarial_risk(A, D, ctx, mode="distance") == want


# -- inequalities ------------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(raw_intervals(), distributions(), radii, radii)
def test_risk_inequalities(raw, D, e1, e2):
    A = raw_to_set(raw)
    ctx = ctx1(e1)
    r = adversarial_risk(A, D, ctx)
    assert adversarial_risk(closing(A, ctx), D, ctx) <= r
    assert adversarial_risk(opening(A, ctx), D, ctx) <= r
    assert adversarial_risk(mollify(A, ctx), D, ctx) <= r
    lo, hi = sorted((e1, e2))
    assert adversarial_risk(A, D, ctx1(lo)) <= adversarial_risk(A, D, ctx1(hi))
    assert r >= D.bayes_risk()
