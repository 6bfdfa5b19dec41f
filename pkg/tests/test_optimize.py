import random
from fractions import Fraction as F

import pytest

from advcalc.geometry import GridSet, IntervalSet, parse_norm
from advcalc.morphology import MorphContext, mollify
from advcalc.optimize import (
    SearchError,
    SearchInstance,
    gray_code_search,
    greedy_flip_descent,
    minimizing_sequence_harness,
    mollified_optimality_check,
    oracle_search,
)
from advcalc.risk import LabeledDistribution, adversarial_risk

from oracles import ball_inside_raw, ball_meets_raw, brute_dilate, lattice_ball

ABS = parse_norm("l1", 1)
L1 = parse_norm("l1", 2)
TWO = LabeledDistribution([((0,), F(1, 2), 1), ((1,), F(1, 2), 0)])


def two_atom(eps=F(3, 5)):
    return SearchInstance.intervals(-1, 2, 8, TWO, MorphContext(ABS, eps))


def brute_interval_risk(inst, mask):
    """Risk of a union of closed cells from raw-interval ball tests."""
    raw = [(c.bounds()[0], c.bounds()[1], True, True) for i, c in enumerate(inst.cells) if mask >> i & 1]
    eps = inst.ctx.eps
    total = F(0)
    for a in inst.dist:
        (x,) = a.x
        total += a.p * ((1 - a.eta) * ball_meets_raw(raw, x, eps) + a.eta * (not ball_inside_raw(raw, x, eps)))
    return total


def brute_lattice_risk(points, mask, dist, kind, eps):
    chosen = {p for i, p in enumerate(points) if mask >> i & 1}
    ball = lattice_ball(kind, eps)
    total = F(0)
    for a in dist:
        near = brute_dilate({tuple(int(c) for c in a.x)}, ball)
        total += a.p * ((1 - a.eta) * bool(near & chosen) + a.eta * bool(near - chosen))
    return total


def random_lattice_instance(seed, kind="l1", eps=F(1), max_cells=12):
    rng = random.Random(seed)
    n_atoms = rng.randint(1, 4)
    atoms = rng.sample([(i, j) for i in range(4) for j in range(4)], n_atoms)
    w = [rng.randint(1, 5) for _ in atoms]
    D = LabeledDistribution([(x, F(wi, sum(w)), F(rng.randint(0, 4), 4)) for x, wi in zip(atoms, w)])
    pts = sorted(brute_dilate(set(atoms), lattice_ball(kind, eps)))[:max_cells]
    return pts, SearchInstance.lattice(pts, D, MorphContext(parse_norm(kind, 2), eps))


# -- worked examples -----------------------------------------------------------


def test_two_atom_instance():
    inst = two_atom()
    res = oracle_search(inst)
    assert res.best_risk == F(1, 2)
    # the empty set and the full domain both attain it; ties go to the smallest mask
    assert res.best_mask == 0
    assert inst.risk_of_mask((1 << inst.n) - 1) == F(1, 2)
    assert min(brute_interval_risk(inst, m) for m in range(1 << inst.n)) == F(1, 2)


def test_zero_radius_gives_bayes_risk():
    rng = random.Random(0)
    atoms = [(i, 0) for i in range(6)]
    D = LabeledDistribution([(x, F(1, 6), F(rng.randint(0, 10), 10)) for x in atoms])
    inst = SearchInstance.lattice(atoms, D, MorphContext(L1, 0))
    assert oracle_search(inst).best_risk == D.bayes_risk()


def test_single_certain_atom():
    D = LabeledDistribution([((0, 0), 1, 1)])
    ball = sorted(lattice_ball("l1", 1))
    pts = sorted(brute_dilate(set(ball), lattice_ball("l1", 1)))
    inst = SearchInstance.lattice(pts, D, MorphContext(L1, 1))
    res = oracle_search(inst)
    assert res.best_risk == 0
    chosen = {p for i, p in enumerate(pts) if res.best_mask >> i & 1}
    assert set(ball) <= chosen
    rep = mollified_optimality_check(inst)
    assert rep.ok and rep.mollified_risk == 0


def test_budget_error():
    cells = [(i, 0) for i in range(25)]
    D = LabeledDistribution([((0, 0), 1, 1)])
    inst = SearchInstance.lattice(cells, D, MorphContext(L1, 1))
    with pytest.raises(SearchError, match="exhaustive budget exceeded"):
        oracle_search(inst)


def test_empty_cells_rejected():
    with pytest.raises(SearchError):
        SearchInstance([], TWO, MorphContext(ABS, 1))


def test_greedy_examples():
    inst = two_atom()
    best = oracle_search(inst)
    res = greedy_flip_descent(inst, best.best_mask)
    assert len(res.trace) == 1 and res.best_mask == best.best_mask
    res = greedy_flip_descent(inst, IntervalSet())
    assert res.best_risk == F(1, 2)
    res = greedy_flip_descent(inst, 0b1010, max_iters=0)
    assert res.best_mask == 0b1010 and len(res.trace) == 1


def test_greedy_rejects_non_cell_start():
    with pytest.raises(SearchError):
        greedy_flip_descent(two_atom(), IntervalSet([(0, F(1, 7))]))


def test_all_negative_labels():
    D = LabeledDistribution([((0, 0), F(1, 2), 0), ((2, 0), F(1, 2), 0)])
    pts = sorted(brute_dilate({(0, 0), (2, 0)}, lattice_ball("l1", 1)))
    inst = SearchInstance.lattice(pts, D, MorphContext(L1, 1))
    rep = mollified_optimality_check(inst)
    assert rep.best_risk == 0 and rep.minimizer.is_empty()
    assert rep.mollified.is_empty() and rep.ok


def test_mollified_full_domain_interval():
    ctx = MorphContext(ABS, F(3, 5))
    full = IntervalSet.real_line()
    assert mollify(full, ctx) == full
    assert adversarial_risk(full, TWO, ctx) == F(1, 2)


def test_sequence_harness_examples():
    inst = two_atom()
    A = inst.set_of(0b00111100)
    rep = minimizing_sequence_harness([A, A, A], inst)
    assert rep.tails == [A, A, A] and rep.identities_hold
    dec = [inst.set_of(m) for m in (0b11111111, 0b01111110, 0b00111100)]
    rep = minimizing_sequence_harness(dec, inst)
    assert rep.tails == dec and rep.identities_hold
    with pytest.raises(SearchError):
        minimizing_sequence_harness([], inst)


@pytest.mark.parametrize("seed", range(10))
def test_sequence_harness_random(seed):
    rng = random.Random(seed)
    inst = SearchInstance.intervals(0, 10, 10, TWO, MorphContext(ABS, F(1, 2)))
    seq = [inst.set_of(rng.randrange(1 << 10)) for _ in range(4)]
    rep = minimizing_sequence_harness(seq, inst)
    assert rep.identities_hold
    for k, B in enumerate(rep.tails):
        want = seq[k]
        for s in seq[k + 1:]:
            want = want.union(s)
        assert B == want


# -- enumeration against brute force ---------------------------------------------


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("kind", ["l1", "linf"])
def test_lattice_search_matches_brute_force(seed, kind):
    pts, inst = random_lattice_instance(seed, kind)
    brute = [brute_lattice_risk(pts, m, inst.dist, kind, inst.ctx.eps) for m in range(1 << inst.n)]
    best = min(brute)
    res, gray = oracle_search(inst), gray_code_search(inst)
    assert res.best_risk == gray.best_risk == best
    assert res.best_mask == gray.best_mask == brute.index(best)
    assert adversarial_risk(res.best_set, inst.dist, inst.ctx) == best
    # table lookups agree with the direct risk on a sample of masks
    rng = random.Random(seed)
    for m in rng.sample(range(1 << inst.n), min(20, 1 << inst.n)):
        assert inst.risk_of_mask(m) == brute[m]


@pytest.mark.parametrize("seed", range(8))
def test_interval_search_matches_brute_force(seed):
    rng = random.Random(seed)
    xs = rng.sample(range(1, 20), 3)
    D = LabeledDistribution([((F(x, 2),), F(1, 3), F(rng.randint(0, 4), 4)) for x in xs])
    inst = SearchInstance.intervals(0, 10, 10, D, MorphContext(ABS, F(rng.randint(1, 4), 4)))
    brute = [brute_interval_risk(inst, m) for m in range(1 << inst.n)]
    res = oracle_search(inst)
    assert res.best_risk == min(brute)
    assert res.best_mask == brute.index(min(brute))
    assert gray_code_search(inst).best_mask == res.best_mask


@pytest.mark.parametrize("seed", range(10))
def test_mollified_minimizer_keeps_risk(seed):
    _, inst = random_lattice_instance(seed)
    rep = mollified_optimality_check(inst)
    assert rep.ok
    g = greedy_flip_descent(inst, rep.minimizer)
    assert len(g.trace) == 1


@pytest.mark.parametrize("seed", range(10))
def test_greedy_trace_is_nonincreasing(seed):
    _, inst = random_lattice_instance(seed)
    rng = random.Random(seed)
    res = greedy_flip_descent(inst, rng.randrange(1 << inst.n))
    risks = [r for _, r in res.trace]
    assert all(b < a for a, b in zip(risks, risks[1:]))
    assert res.best_risk >= oracle_search(inst).best_risk
    assert isinstance(res.best_set, GridSet)
