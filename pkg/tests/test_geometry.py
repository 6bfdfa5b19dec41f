import json
import random
from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from advcalc.geometry import (
    GeometryError,
    GridSet,
    Interval,
    IntervalSet,
    Norm,
    ball_membership,
    canonicalize,
    distance_to_set,
    dump_set,
    load_set,
    meets_ball,
    parse_norm,
    set_algebra,
)

from oracles import grid_points, lattice_ball, probe_points, raw_endpoints, raw_intervals, raw_member, raw_to_set

L1, L2, LINF = parse_norm("l1", 2), parse_norm("l2", 2), parse_norm("linf", 2)
ABS = parse_norm("l1", 1)


# -- worked examples -----------------------------------------------------------


def test_ball_membership_examples():
    assert ball_membership((0, 0), 1, L2, (1, 0))
    assert not ball_membership((0, 0), 2, L1, (1, 2))
    assert ball_membership((1, 1), F(1, 2), LINF, (F(3, 2), F(5, 4)))


def test_ball_membership_dimension_mismatch():
    with pytest.raises(GeometryError):
        ball_membership((0, 0), 1, L2, (1, 0, 0))


def test_distance_examples():
    assert distance_to_set(2, IntervalSet([(0, 1)]), ABS) == 1
    assert distance_to_set(F(1, 2), IntervalSet([(0, 1)]), ABS) == 0
    diamond = GridSet.from_indices(lattice_ball("l1", 2), dim=2)
    assert distance_to_set((3, 0), diamond, L1) == 1


def test_distance_of_empty_set_is_an_error():
    with pytest.raises(GeometryError, match="empty set has no distance"):
        distance_to_set(0, IntervalSet(), ABS)
    with pytest.raises(GeometryError, match="empty set has no distance"):
        distance_to_set((0, 0), GridSet.from_indices([], dim=2), L1)


def test_canonicalize_examples():
    assert canonicalize([[0, 1], [1, 2]]) == IntervalSet([(0, 2)])
    assert canonicalize([[3, 4], [0, 1]]) == IntervalSet([(0, 1), (3, 4)])
    assert canonicalize([[0, 2], [1, 3]]) == IntervalSet([(0, 3)])
    with pytest.raises(GeometryError):
        canonicalize([[1, 0]])


def test_set_algebra_examples():
    A = IntervalSet([(0, 1)])
    assert set_algebra("union", A, IntervalSet([(2, 3)])) == IntervalSet([(0, 1), (2, 3)])
    comp = set_algebra("complement", A, domain=IntervalSet([(-2, 2)]))
    # exact half-open pieces; the closure is the closed-hull form
    assert comp == IntervalSet([Interval(-2, 0, True, False), Interval(1, 2, False, True)])
    assert comp.closure() == IntervalSet([(-2, 0), (1, 2)])
    assert set_algebra("symmetric-difference", A, A).is_empty()


def test_set_algebra_errors():
    g1 = GridSet.from_indices([(0, 0)], dim=2)
    g2 = GridSet.from_indices([(0, 0)], cell=F(1, 2), dim=2)
    with pytest.raises(GeometryError, match="incompatible lattices"):
        set_algebra("union", g1, g2)
    with pytest.raises(GeometryError):
        set_algebra("complement", IntervalSet([(0, 1)]))
    with pytest.raises(GeometryError):
        set_algebra("union", IntervalSet([(0, 1)]), g1)


# -- interval sets against raw-interval membership ------------------------------


def _agree(S, pred, raws):
    pts = probe_points([v for r in raws for v in raw_endpoints(r)])
    return all(S.contains(x) == pred(x) for x in pts)


@settings(max_examples=300, deadline=None)
@given(raw_intervals(), raw_intervals())
def test_interval_algebra_matches_pointwise_logic(ra, rb):
    A, B = raw_to_set(ra), raw_to_set(rb)
    ma = lambda x: raw_member(ra, x)  # noqa: E731
    mb = lambda x: raw_member(rb, x)  # noqa: E731
    assert _agree(A, ma, [ra, rb])
    assert _agree(A.union(B), lambda x: ma(x) or mb(x), [ra, rb])
    assert _agree(A.intersection(B), lambda x: ma(x) and mb(x), [ra, rb])
    assert _agree(A.difference(B), lambda x: ma(x) and not mb(x), [ra, rb])
    assert _agree(A.symmetric_difference(B), lambda x: ma(x) != mb(x), [ra, rb])
    assert _agree(A.complement(), lambda x: not ma(x), [ra, rb])
    assert A.issubset(B) == all(mb(x) for x in probe_points(raw_endpoints(ra) + raw_endpoints(rb)) if ma(x))


@settings(max_examples=200, deadline=None)
@given(raw_intervals())
def test_canonical_form_is_sorted_disjoint_and_idempotent(ra):
    A = raw_to_set(ra)
    ivs = list(A)
    for a, b in zip(ivs, ivs[1:]):
        # separated by a gap, or touching at a point neither side contains
        assert a.hi < b.lo or (a.hi == b.lo and not a.hi_closed and not b.lo_closed)
    assert IntervalSet(ivs) == A
    assert A.complement().complement() == A


@settings(max_examples=200, deadline=None)
@given(raw_intervals(closed=True).filter(bool), st.fractions(-6, 6, max_denominator=8))
def test_interval_distance_matches_brute_force(ra, x):
    want = min(max(lo - x, x - hi, F(0)) for lo, hi, _, _ in ra)
    assert distance_to_set(x, raw_to_set(ra), ABS) == want


def test_interval_json_round_trip(tmp_path):
    A = IntervalSet([Interval(F(-1, 3), 0, False, True), (1, 2)])
    p = tmp_path / "a.json"
    dump_set(A, str(p))
    assert load_set(str(p)) == A


# -- grid sets against Python sets ---------------------------------------------


def _random_points(rng, n, span=6):
    return {(rng.randrange(-span, span), rng.randrange(-span, span)) for _ in range(n)}


@pytest.mark.parametrize("seed", range(20))
def test_grid_algebra_matches_python_sets(seed):
    rng = random.Random(seed)
    pa, pb = _random_points(rng, 25), _random_points(rng, 25)
    A = GridSet.from_indices(sorted(pa), dim=2)
    B = GridSet.from_indices(sorted(pb), dim=2)
    assert grid_points(A.union(B)) == pa | pb
    assert grid_points(A.intersection(B)) == pa & pb
    assert grid_points(A.difference(B)) == pa - pb
    assert grid_points(A.symmetric_difference(B)) == pa ^ pb
    box = GridSet.box((-8, -8), (16, 16))
    assert grid_points(A.complement(box)) == set(product(range(-8, 8), repeat=2)) - pa
    C = A.complement()
    assert all(C.contains_index(k) != (k in pa) for k in product(range(-9, 9), repeat=2))
    assert C.complement() == A


@pytest.mark.parametrize("kind", ["l1", "l2", "linf"])
@pytest.mark.parametrize("seed", range(5))
def test_grid_distance_matches_brute_force(kind, seed):
    rng = random.Random(seed)
    pa = _random_points(rng, 10)
    A = GridSet.from_indices(sorted(pa), dim=2)
    norm = parse_norm(kind, 2)
    for _ in range(30):
        x = (rng.randrange(-9, 9), rng.randrange(-9, 9))
        diffs = [(x[0] - a[0], x[1] - a[1]) for a in pa]
        if kind == "l2":
            want = min(d0 * d0 + d1 * d1 for d0, d1 in diffs)
            assert distance_to_set(x, A, norm) ** 2 == pytest.approx(want, rel=1e-12)
        else:
            f = (lambda d: abs(d[0]) + abs(d[1])) if kind == "l1" else (lambda d: max(abs(d[0]), abs(d[1])))
            assert distance_to_set(x, A, norm) == min(f(d) for d in diffs)


@pytest.mark.parametrize("kind", ["l1", "l2", "linf"])
def test_distance_and_ball_agree_on_1000_random_cases(kind):
    rng = random.Random(kind)
    norm = parse_norm(kind, 2)
    for _ in range(1000):
        pa = _random_points(rng, rng.randint(1, 6), span=4)
        A = GridSet.from_indices(sorted(pa), dim=2)
        x = (rng.randrange(-6, 6), rng.randrange(-6, 6))
        eps = F(rng.randint(0, 12), rng.randint(1, 3))
        d = distance_to_set(x, A, norm)
        assert meets_ball(x, eps, A, norm) == (d <= eps if kind != "l2" else d * d <= eps * eps + 1e-9)


@pytest.mark.parametrize("kind", ["l1", "l2", "linf"])
@pytest.mark.parametrize("eps", [F(0), F(1, 2), F(1), F(2), F(5, 2), F(3)])
def test_lattice_ball_matches_enumeration(kind, eps):
    got = {tuple(int(c) for c in v) for v in parse_norm(kind, 2).lattice_ball(eps, 1)}
    assert got == lattice_ball(kind, eps)


def test_polytope_and_weighted_norms():
    # the l1 unit ball in the plane as a polytope norm
    poly = Norm("polytope", 2, halfspaces=[((1, 1), 1), ((1, -1), 1), ((-1, 1), 1), ((-1, -1), 1)])
    w = Norm("wlinf", 2, weights=(2, 1))
    for v in product(range(-3, 4), repeat=2):
        assert poly.value(v) == abs(v[0]) + abs(v[1])
        assert w.value(v) == max(2 * abs(v[0]), abs(v[1]))


def test_pbm_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    G = GridSet((2, -1), 1, rng.random((5, 7)) < 0.5)
    p = tmp_path / "g.pbm"
    dump_set(G, str(p))
    assert load_set(str(p)) == G
    assert json.loads((tmp_path / "g.json").read_text())["extent"] == [5, 7]


def test_grid_json_round_trip_with_outside():
    G = GridSet.from_indices([(0, 0), (1, 2)], cell=F(1, 2), residue=(F(1, 4), 0), dim=2, outside=True)
    assert GridSet.from_json(G.to_json()) == G
    assert G.contains((F(3, 4), 5))
    assert not G.contains((F(1, 4), 0))
