"""Seeded property suites with CSV tables and replayable witness files.

Every case is a named check applied to a JSON payload.  The same payload is
what a witness file stores, so :func:`replay` re-runs exactly the failing
computation through the library.  Cases draw from a per-case RNG seeded by
``(suite, seed, index)``, so case ``k`` is the same whatever the case count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import gauge, strings
from .geometry import GridSet, Interval, IntervalSet, Norm, frac
from .morphology import (
    MorphContext,
    closing,
    compose_radii_check,
    dilate,
    erode,
    erode_in_domain,
    finite_family_identities,
    fringe,
    midpoint_harness,
    mollify,
    opening,
)
from .optimize import SearchInstance, gray_code_search, greedy_flip_descent, mollified_optimality_check, oracle_search
from .risk import LabeledDistribution, adversarial_risk, adversarial_risk_sup, standard_risk


class SuiteError(ValueError):
    pass


@dataclass
class Outcome:
    ok: bool
    lhs: str
    rhs: str
    violation: float = 0.0


@dataclass
class CaseRow:
    suite: str
    case_id: str
    check: str
    status: str
    lhs: str
    rhs: str
    violation: float
    witness_path: str = ""


@dataclass
class SuiteRun:
    suite: str
    seed: int
    rows: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(r.status != "pass" for r in self.rows)

    def summary(self) -> list[tuple]:
        """One (suite.check, cases, failures, max-violation) row per check family."""
        out = {}
        for r in self.rows:
            n, f, v = out.get(r.check, (0, 0, None))
            out[r.check] = (n + 1, f + (r.status != "pass"), r.violation if v is None else max(v, r.violation))
        return [(f"{self.suite}.{k}", n, f, v) for k, (n, f, v) in out.items()]


# --------------------------------------------------------------------------
# payload encoding
# --------------------------------------------------------------------------


def enc_set(A) -> dict:
    if isinstance(A, IntervalSet):
        return {"kind": "interval", "data": A.to_json()}
    return {"kind": "grid", "data": A.to_json()}


def dec_set(d):
    if d["kind"] == "interval":
        return IntervalSet.from_json(d["data"])
    if d["kind"] == "grid":
        return GridSet.from_json(d["data"])
    raise SuiteError(f"unknown set kind {d['kind']!r}")


def describe(A) -> str:
    """Short, deterministic text for a set in a CSV cell."""
    if isinstance(A, IntervalSet):
        return "{}" if A.is_empty() else " U ".join(str(iv) for iv in A)
    if isinstance(A, GridSet):
        blob = json.dumps(A.to_json(), sort_keys=True).encode()
        n = "inf" if A.outside else str(A.count())
        return f"grid[{n} pts {hashlib.sha256(blob).hexdigest()[:12]}]"
    if isinstance(A, frozenset):
        return "{" + ",".join(repr(w) for w in sorted(A)) + "}"
    return str(A)


def _ctx(p) -> MorphContext:
    return MorphContext(Norm.from_json(p["norm"]), frac(p["eps"]))


def _eq(lhs, rhs) -> Outcome:
    ok = lhs == rhs
    return Outcome(ok, describe(lhs), describe(rhs), 0.0 if ok else 1.0)


def _le(lhs: Fraction, rhs: Fraction) -> Outcome:
    return Outcome(lhs <= rhs, str(lhs), str(rhs), max(0.0, float(lhs - rhs)))


# --------------------------------------------------------------------------
# checks: set identities (1-D and grid)
# --------------------------------------------------------------------------


def chk_sum(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    e1, e2 = frac(p["e1"]), frac(p["e2"])
    return _eq(dilate(dilate(A, ctx, e1), ctx, e2), dilate(A, ctx, e1 + e2))


def chk_sum_dual(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    e1, e2 = frac(p["e1"]), frac(p["e2"])
    return _eq(erode(erode(A, ctx, e1), ctx, e2), erode(A, ctx, e1 + e2))


def chk_characterize_open(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    O, F = opening(A, ctx), fringe(A, ctx)
    if not O.intersection(F).is_empty():
        return Outcome(False, describe(O.intersection(F)), "{}", 1.0)
    return _eq(O.union(F), A)


def chk_characterize_close(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    Fc = fringe(A.complement(), ctx)
    if not A.intersection(Fc).is_empty():
        return Outcome(False, describe(A.intersection(Fc)), "{}", 1.0)
    return _eq(closing(A, ctx), A.union(Fc))


def chk_repeat_dilate(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    return _eq(dilate(closing(A, ctx), ctx), dilate(A, ctx))


def chk_repeat_erode(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    return _eq(erode(opening(A, ctx), ctx), erode(A, ctx))


def chk_family_relations(p) -> Outcome:
    fam, ctx = [dec_set(s) for s in p["family"]], _ctx(p)
    rep = finite_family_identities(fam, ctx)
    bad = sorted(k for k, c in rep.checks.items() if not c.ok)
    return Outcome(rep.ok, f"{len(rep.checks) - len(bad)}/{len(rep.checks)} hold", ";".join(bad) or "-", float(len(bad)))


def chk_fringe_vanish(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    parts = [
        fringe(dilate(A, ctx), ctx),
        fringe(erode(A, ctx).complement(), ctx),
        erode(fringe(A, ctx), ctx),
    ]
    bad = [i for i, S in enumerate(parts) if not S.is_empty()]
    return Outcome(not bad, " | ".join(describe(S) for S in parts), "{} | {} | {}", float(len(bad)))


def chk_closing_is_identity(p) -> Outcome:
    """Deliberately false claim used for fault injection: closing(A) == A."""
    A, ctx = dec_set(p["A"]), _ctx(p)
    return _eq(closing(A, ctx), A)


def chk_extensive(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    E, D = erode(A, ctx), dilate(A, ctx)
    ok = E.issubset(A) and A.issubset(D)
    return Outcome(ok, f"{describe(E)} <= A", f"A <= {describe(D)}", 0.0 if ok else 1.0)


def chk_monotone(p) -> Outcome:
    A, B, ctx = dec_set(p["A"]), dec_set(p["B"]), _ctx(p)
    B = A.union(B)
    ok = dilate(A, ctx).issubset(dilate(B, ctx)) and erode(A, ctx).issubset(erode(B, ctx))
    return Outcome(ok, describe(A), describe(B), 0.0 if ok else 1.0)


def chk_duality(p) -> Outcome:
    """Erosion by complement-dilate-complement against the direct
    'every ball offset lands in A' computation."""
    A, ctx = dec_set(p["A"]), _ctx(p)
    direct = A.minkowski_erode(ctx.norm.lattice_ball(ctx.eps, A.cell))
    return _eq(erode(A, ctx), direct)


def chk_padding_invariant(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    outs = []
    for m in p["margins"]:
        dom = MorphContext.around(ctx.norm, ctx.eps, [A], margin=m).domain
        outs.append(erode_in_domain(A, ctx, dom))
    ref = erode(A, ctx)
    ok = all(o == ref for o in outs)
    return Outcome(ok, " / ".join(describe(o) for o in outs), describe(ref), 0.0 if ok else 1.0)


def chk_compose(p) -> Outcome:
    A, ctx = dec_set(p["A"]), _ctx(p)
    c = compose_radii_check(A, ctx, p["e1"], p["e2"])
    return Outcome(c.ok, c.detail or "equal", "equal", 0.0 if c.ok else 1.0)


def chk_l2_counterexample(p) -> Outcome:
    """Lattice l2 balls do not compose; the claim is that the documented
    witness is where they differ."""
    A, ctx = dec_set(p["A"]), _ctx(p)
    c = compose_radii_check(A, ctx, p["e1"], p["e2"], strict=False)
    got = None if c.witness is None else [str(v) for v in c.witness]
    return Outcome(not c.ok and got == p["witness"], str(got), str(p["witness"]), 0.0)


# --------------------------------------------------------------------------
# checks: risk
# --------------------------------------------------------------------------


def _risk_inputs(p):
    return dec_set(p["A"]), LabeledDistribution.from_json(p["dist"]), _ctx(p)


def chk_closing_decrease(p) -> Outcome:
    A, D, ctx = _risk_inputs(p)
    return _le(adversarial_risk(closing(A, ctx), D, ctx), adversarial_risk(A, D, ctx))


def chk_opening_decrease(p) -> Outcome:
    A, D, ctx = _risk_inputs(p)
    return _le(adversarial_risk(opening(A, ctx), D, ctx), adversarial_risk(A, D, ctx))


def chk_mollify_decrease(p) -> Outcome:
    A, D, ctx = _risk_inputs(p)
    return _le(adversarial_risk(mollify(A, ctx), D, ctx), adversarial_risk(A, D, ctx))


def chk_eps_monotone(p) -> Outcome:
    A, D, ctx = _risk_inputs(p)
    return _le(adversarial_risk(A, D, ctx), adversarial_risk(A, D, ctx.with_eps(p["eps2"])))


def chk_zero_radius(p) -> Outcome:
    A, D, ctx = _risk_inputs(p)
    lhs, rhs = adversarial_risk(A, D, ctx.with_eps(0)), standard_risk(A, D)
    return Outcome(lhs == rhs, str(lhs), str(rhs), float(abs(lhs - rhs)))


def chk_bayes_bound(p) -> Outcome:
    A, D, ctx = _risk_inputs(p)
    adv, std, bayes = adversarial_risk(A, D, ctx), standard_risk(A, D), D.bayes_risk()
    ok = adv >= std >= bayes
    return Outcome(ok, f"{adv} >= {std}", f"{bayes}", 0.0 if ok else float(max(std - adv, bayes - std)))


def chk_mode_agree(p) -> Outcome:
    A, D, ctx = _risk_inputs(p)
    lhs, rhs = adversarial_risk(A, D, ctx), adversarial_risk(A, D, ctx, mode="distance")
    return Outcome(lhs == rhs, str(lhs), str(rhs), float(abs(lhs - rhs)))


def chk_sup_form(p) -> Outcome:
    A, D, ctx = _risk_inputs(p)
    lhs, rhs = adversarial_risk(A, D, ctx), adversarial_risk_sup(A, D, ctx)
    return Outcome(lhs == rhs, str(lhs), str(rhs), float(abs(lhs - rhs)))


# --------------------------------------------------------------------------
# checks: optimize
# --------------------------------------------------------------------------


def _instance(p) -> SearchInstance:
    D, ctx = LabeledDistribution.from_json(p["dist"]), _ctx(p)
    c = p["cells"]
    if c["kind"] == "lattice":
        return SearchInstance.lattice(c["indices"], D, ctx, cell=frac(c["cell"]))
    return SearchInstance.intervals(c["lo"], c["hi"], int(c["n"]), D, ctx)


def chk_oracle_vs_gray(p) -> Outcome:
    inst = _instance(p)
    a, b = oracle_search(inst), gray_code_search(inst)
    ok = a.best_risk == b.best_risk and a.best_mask == b.best_mask
    return Outcome(ok, f"{a.best_risk} @{a.best_mask}", f"{b.best_risk} @{b.best_mask}", float(abs(a.best_risk - b.best_risk)))


def chk_table_vs_direct(p) -> Outcome:
    inst = _instance(p)
    rng = random.Random(p["probe_seed"])
    masks = [oracle_search(inst).best_mask] + [rng.randrange(1 << inst.n) for _ in range(4)]
    for m in masks:
        a, b = inst.risk_of_mask(m), adversarial_risk(inst.set_of(m), inst.dist, inst.ctx)
        if a != b:
            return Outcome(False, f"{a} @{m}", str(b), float(abs(a - b)))
    return Outcome(True, "tables", "direct", 0.0)


def chk_mollify_equal(p) -> Outcome:
    rep = mollified_optimality_check(_instance(p))
    return Outcome(rep.ok, str(rep.mollified_risk), str(rep.best_risk), float(abs(rep.mollified_risk - rep.best_risk)))


def chk_greedy_zero_flips(p) -> Outcome:
    inst = _instance(p)
    best = oracle_search(inst)
    g = greedy_flip_descent(inst, best.best_mask)
    flips = len(g.trace) - 1
    return Outcome(flips == 0 and g.best_risk == best.best_risk, f"{flips} flips", "0 flips", float(flips))


def chk_oracle_value(p) -> Outcome:
    res = oracle_search(_instance(p))
    want = frac(p["expected"])
    return Outcome(res.best_risk == want, str(res.best_risk), str(want), float(abs(res.best_risk - want)))


# --------------------------------------------------------------------------
# checks: gauge (doubles)
# --------------------------------------------------------------------------


def _body(p):
    return gauge.body_from_json(p["body"])


def _body_json(C) -> dict:
    if isinstance(C, gauge.Ball):
        return {"kind": "ball", "center": [float(c) for c in C.center], "radius": C.radius}
    return {
        "kind": "polytope",
        "normals": C.A.tolist(),
        "offsets": C.b.tolist(),
        "interior": C.interior.tolist(),
    }


def chk_concavity(p) -> Outcome:
    rep = gauge.concavity_probe(_body(p), int(p["samples"]), int(p["probe_seed"]))
    tol = float(p["tol"])
    return Outcome(rep.ok(tol), repr(rep.max_violation), repr(tol), rep.max_violation)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def chk_translation(p) -> Outcome:
    C = _body(p)
    rng = np.random.default_rng(p["probe_seed"])
    worst = 0.0
    for _ in range(int(p["samples"])):
        x = C.sample(rng, 1)[0]
        v = rng.normal(size=C.dim)
        w = rng.uniform(-3, 3, C.dim)
        worst = max(worst, _rel(gauge.lam(C.translate(w), x + w, v), gauge.lam(C, x, v)))
    return Outcome(worst <= float(p["tol"]), repr(worst), repr(float(p["tol"])), worst)


def chk_scaling(p) -> Outcome:
    C = _body(p)
    rng = np.random.default_rng(p["probe_seed"])
    worst = 0.0
    for _ in range(int(p["samples"])):
        x = C.sample(rng, 1)[0]
        v = rng.normal(size=C.dim)
        s = float(rng.uniform(0.5, 4.0))
        worst = max(worst, _rel(gauge.lam(C.scale(s), s * x, v), s * gauge.lam(C, x, v)))
    return Outcome(worst <= float(p["tol"]), repr(worst), repr(float(p["tol"])), worst)


def chk_polytope_gap(p) -> Outcome:
    """Construct P for delta, then measure lam_P - lam_C at fresh samples."""
    ball = gauge.Ball(p["center"], p["radius"])
    delta, v = float(p["delta"]), np.asarray(p["v"], dtype=float)
    res = gauge.approximate_by_polytope(ball, delta, v, samples=int(p["samples"]), seed=int(p["probe_seed"]))
    X = gauge.gap_samples(ball, v, int(p["samples"]), int(p["probe_seed"]) + 1)
    gap = gauge.lam_batch(res.polytope, X, v) - gauge.lam_batch(ball, X, v)
    lo, hi = float(gap.min()), float(gap.max())
    ok = lo >= -1e-12 and hi < delta
    return Outcome(ok, f"[{lo!r}, {hi!r}] k={res.sides}", f"[-1e-12, {delta!r})", max(0.0, hi - delta, -1e-12 - lo))


def chk_polytope_path(p) -> Outcome:
    C = _body(p)
    rng = np.random.default_rng(p["probe_seed"])
    worst = 0.0
    upper = True
    for _ in range(int(p["paths"])):
        v = rng.normal(size=C.dim)
        # target on the boundary half the time
        x = C.sample(rng, 1)[0]
        if rng.uniform() < 0.5:
            d = rng.normal(size=C.dim)
            x = x + gauge.lam(C, x, d) * d
        path = [x + (C.interior - x) * 0.5 ** k for k in range(1, 61)]
        rep = gauge.semicontinuity_probe(C, path, x, v, tol=float(p["tol"]))
        worst = max(worst, abs(rep.values[-1] - rep.limit_value))
        upper = upper and rep.upper_ok
    ok = upper and worst <= float(p["tol"])
    return Outcome(ok, repr(worst), repr(float(p["tol"])), worst)


def chk_midpoint(p) -> Outcome:
    rep = midpoint_harness(configs=int(p["configs"]), seed=int(p["probe_seed"]), seq_len=int(p["seq_len"]))
    ok = rep.ok and rep.max_index <= rep.seq_len
    return Outcome(ok, f"{rep.failures} failures, N<={rep.max_index}", f"0 failures, N<={rep.seq_len}", float(rep.failures))


# --------------------------------------------------------------------------
# checks: strings
# --------------------------------------------------------------------------


def _str_inputs(p):
    U = strings.StringUniverse(p["alphabet"], int(p["max_len"]))
    B = strings.swap_family(tuple(x) for x in p["swaps"])
    return U, B


def chk_involution(p) -> Outcome:
    U, B = _str_inputs(p)
    bad = [w for b in B for w in U.strings() if strings.swap_apply(b, strings.swap_apply(b, w)) != w]
    return Outcome(not bad, f"{len(bad)} moved", "0 moved", float(len(bad)))


def chk_string_union(p) -> Outcome:
    _, B = _str_inputs(p)
    fam = [frozenset(s) for s in p["family"]]
    lhs = strings.perturb(frozenset().union(*fam), B)
    rhs = frozenset().union(*(strings.perturb(s, B) for s in fam))
    return _eq(lhs, rhs)


def chk_string_chain(p) -> Outcome:
    _, B = _str_inputs(p)
    chain = [frozenset(s) for s in p["chain"]]
    lhs = frozenset.intersection(*(strings.perturb(c, B) for c in chain))
    rhs = strings.perturb(frozenset.intersection(*chain), B)
    ok = strings.decreasing_intersection_check(chain, B)
    return Outcome(ok and lhs == rhs, describe(lhs), describe(rhs), 0.0 if lhs == rhs else 1.0)


def _str_dist(p):
    return LabeledDistribution.from_json(p["dist"])


def chk_string_risk_value(p) -> Outcome:
    U, B = _str_inputs(p)
    r = strings.string_adversarial_risk(frozenset(p["A"]), _str_dist(p), B, U)
    want = frac(p["expected"])
    return Outcome(r == want, str(r), str(want), float(abs(r - want)))


def chk_string_decrease(p) -> Outcome:
    U, B = _str_inputs(p)
    D, A = _str_dist(p), frozenset(p["A"])
    r = strings.string_adversarial_risk(A, D, B, U)
    closed = strings.erode(strings.perturb(A, B), B, U)
    opened = strings.perturb(strings.erode(A, B, U), B)
    rc = strings.string_adversarial_risk(closed, D, B, U)
    ro = strings.string_adversarial_risk(opened, D, B, U)
    return Outcome(rc <= r and ro <= r, f"{rc}, {ro}", str(r), max(0.0, float(rc - r), float(ro - r)))


def chk_string_oracle(p) -> Outcome:
    """Reduced oracle against brute force over every subset of the universe."""
    U, B = _str_inputs(p)
    D = _str_dist(p)
    res = strings.string_oracle_search(D, B, U)
    words = U.strings()
    if len(words) > 10:
        raise SuiteError("brute-force universe too large")
    best = min(
        strings.string_adversarial_risk({w for i, w in enumerate(words) if m >> i & 1}, D, B, U)
        for m in range(1 << len(words))
    )
    again = strings.string_adversarial_risk(res.best_set, D, B, U)
    ok = res.best_risk == best == again
    return Outcome(ok, str(res.best_risk), str(best), float(abs(res.best_risk - best)))


CHECKS: dict[str, Callable[[dict], Outcome]] = {
    "sum": chk_sum,
    "sum_dual": chk_sum_dual,
    "characterize_open": chk_characterize_open,
    "characterize_close": chk_characterize_close,
    "repeat_dilate": chk_repeat_dilate,
    "repeat_erode": chk_repeat_erode,
    "family_relations": chk_family_relations,
    "fringe_vanish": chk_fringe_vanish,
    "closing_is_identity": chk_closing_is_identity,
    "extensive": chk_extensive,
    "monotone": chk_monotone,
    "duality": chk_duality,
    "padding_invariant": chk_padding_invariant,
    "compose": chk_compose,
    "l2_counterexample": chk_l2_counterexample,
    "closing_decrease": chk_closing_decrease,
    "opening_decrease": chk_opening_decrease,
    "mollify_decrease": chk_mollify_decrease,
    "eps_monotone": chk_eps_monotone,
    "zero_radius": chk_zero_radius,
    "bayes_bound": chk_bayes_bound,
    "mode_agree": chk_mode_agree,
    "sup_form": chk_sup_form,
    "oracle_vs_gray": chk_oracle_vs_gray,
    "table_vs_direct": chk_table_vs_direct,
    "mollify_equal": chk_mollify_equal,
    "greedy_zero_flips": chk_greedy_zero_flips,
    "oracle_value": chk_oracle_value,
    "concavity": chk_concavity,
    "translation": chk_translation,
    "scaling": chk_scaling,
    "polytope_gap": chk_polytope_gap,
    "polytope_path": chk_polytope_path,
    "midpoint": chk_midpoint,
    "involution": chk_involution,
    "string_union": chk_string_union,
    "string_chain": chk_string_chain,
    "string_risk_value": chk_string_risk_value,
    "string_decrease": chk_string_decrease,
    "string_oracle": chk_string_oracle,
}


def run_check(check: str, payload: dict) -> Outcome:
    if check not in CHECKS:
        raise SuiteError(f"unknown check {check!r}")
    return CHECKS[check](payload)


# --------------------------------------------------------------------------
# case generators
# --------------------------------------------------------------------------

EPS_1D = ("1/4", "1/3", "1/2", "1")


def _rng(suite: str, seed: int, k: int) -> random.Random:
    return random.Random(f"{suite}/{seed}/{k}")


def random_interval_set(rng: random.Random, max_parts: int = 8, open_ends: bool = True) -> IntervalSet:
    parts = []
    for _ in range(rng.randint(0, max_parts)):
        lo = Fraction(rng.randint(-60, 60), 12)
        hi = lo + Fraction(rng.randint(0, 24), rng.choice((4, 6, 12)))
        lc = hc = True
        if open_ends and lo < hi:
            lc, hc = rng.random() > 0.15, rng.random() > 0.15
        parts.append(Interval(lo, hi, lc, hc))
    return IntervalSet(parts)


def random_grid_set(rng: np.random.Generator, shape=(32, 32), lo=(0, 0)) -> GridSet:
    density = rng.uniform(0.1, 0.9)
    mask = rng.uniform(size=shape) < density
    # a few solid blobs so erosions are not always empty
    for _ in range(rng.integers(0, 4)):
        r0, c0 = rng.integers(0, shape[0]), rng.integers(0, shape[1])
        h, w = rng.integers(3, 12, size=2)
        mask[r0 : r0 + h, c0 : c0 + w] = True
    idx = np.argwhere(mask) + np.asarray(lo)
    return GridSet.from_indices([tuple(k) for k in idx], dim=2)


def _norm_1d() -> dict:
    return Norm("l1", 1).to_json()


def _random_dist(rng: random.Random, xs) -> list:
    w = [rng.randint(1, 6) for _ in xs]
    tot = sum(w)
    etas = ("0", "1/4", "1/3", "1/2", "2/3", "3/4", "1")
    return [{"x": x, "p": str(Fraction(wi, tot)), "eta": rng.choice(etas)} for x, wi in zip(xs, w)]


def gen_identities(seed: int, k: int) -> list[tuple[str, dict]]:
    rng = _rng("identities", seed, k)
    A = random_interval_set(rng)
    eps = rng.choice(EPS_1D)
    base = {"A": enc_set(A), "eps": eps, "norm": _norm_1d()}
    comp = dict(base, e1=rng.choice(EPS_1D), e2=rng.choice(EPS_1D))
    fam = [enc_set(random_interval_set(rng, 4)) for _ in range(rng.randint(1, 5))]
    return [
        ("sum", comp),
        ("sum_dual", comp),
        ("characterize_open", base),
        ("characterize_close", base),
        ("repeat_dilate", base),
        ("repeat_erode", base),
        ("family_relations", {"family": fam, "eps": eps, "norm": _norm_1d()}),
        ("fringe_vanish", base),
    ]


GRID_NORMS = ("l1", "l2", "linf")


def gen_grid(seed: int, k: int) -> list[tuple[str, dict]]:
    rng = _rng("grid", seed, k)
    nrng = np.random.default_rng([seed, k, 2])
    kind = GRID_NORMS[k % 3]
    norm = Norm(kind, 2).to_json()
    eps = rng.choice(("1", "2", "3")) if kind != "l2" else rng.choice(("1", "3/2", "2", "5/2"))
    A, B = random_grid_set(nrng), random_grid_set(nrng)
    base = {"A": enc_set(A), "eps": eps, "norm": norm}
    out = [
        ("extensive", base),
        ("monotone", dict(base, B=enc_set(B))),
        ("duality", base),
        ("padding_invariant", dict(base, margins=[int(Fraction(eps) * 2) + 1, int(Fraction(eps) * 2) + 6])),
    ]
    if kind != "l2":
        out.append(("compose", dict(base, e1=rng.choice(("1", "2")), e2=rng.choice(("1", "2")))))
    return out


def grid_fixed_cases() -> list[tuple[str, str, dict]]:
    point = GridSet.from_indices([(0, 0)], dim=2)
    p = {"A": enc_set(point), "eps": "1", "norm": Norm("l2", 2).to_json(), "e1": "1", "e2": "2", "witness": ["2", "2"]}
    return [("l2_b1_b2", "l2_counterexample", p)]


def gen_risk(seed: int, k: int) -> list[tuple[str, dict]]:
    rng = _rng("risk", seed, k)
    if k % 2 == 0:
        A = random_interval_set(rng, open_ends=False)
        xs = sorted({Fraction(rng.randint(-60, 60), 12) for _ in range(rng.randint(1, 10))})
        dist = _random_dist(rng, [[str(x)] for x in xs])
        eps = rng.choice(EPS_1D)
        eps2 = str(Fraction(eps) + Fraction(rng.randint(0, 4), 4))
        norm = _norm_1d()
    else:
        nrng = np.random.default_rng([seed, k, 3])
        A = random_grid_set(nrng, shape=(16, 16))
        cells = sorted({(rng.randint(-2, 17), rng.randint(-2, 17)) for _ in range(rng.randint(1, 10))})
        dist = _random_dist(rng, [[str(a), str(b)] for a, b in cells])
        kind = rng.choice(GRID_NORMS)
        norm = Norm(kind, 2).to_json()
        eps = rng.choice(("1", "3/2", "2"))
        eps2 = str(Fraction(eps) + rng.randint(0, 2))
    p = {"A": enc_set(A), "dist": dist, "eps": eps, "eps2": eps2, "norm": norm}
    return [
        (c, p)
        for c in (
            "closing_decrease",
            "opening_decrease",
            "mollify_decrease",
            "eps_monotone",
            "zero_radius",
            "bayes_bound",
            "mode_agree",
            "sup_form",
        )
    ]


def gen_optimize(seed: int, k: int) -> list[tuple[str, dict]]:
    """Lattice instances whose cells are every lattice point within eps of an
    atom, so a cell union can express any set's behavior near the atoms."""
    rng = _rng("optimize", seed, k)
    dim = rng.choice((1, 2))
    kind = rng.choice(GRID_NORMS)
    eps = rng.choice(("1", "2")) if dim == 1 else "1"
    norm = Norm(kind, dim)
    ball = norm.lattice_ball(Fraction(eps), 1)
    atoms, cells = [], set()
    span = 6 if dim == 1 else 4
    for _ in range(rng.randint(1, 6)):
        a = tuple(rng.randint(-span, span) for _ in range(dim))
        grown = cells | {tuple(int(c) for c in np.asarray(a) + off) for off in ball}
        if a in atoms or len(grown) > 16:
            continue
        atoms.append(a)
        cells = grown
    dist = _random_dist(rng, [[str(c) for c in a] for a in atoms])
    p = {
        "cells": {"kind": "lattice", "cell": "1", "indices": sorted([list(c) for c in cells])},
        "dist": dist,
        "eps": eps,
        "norm": norm.to_json(),
        "probe_seed": rng.randrange(1 << 30),
    }
    return [(c, p) for c in ("oracle_vs_gray", "table_vs_direct", "mollify_equal", "greedy_zero_flips")]


def two_atom_instance() -> dict:
    """Atoms (0, 1/2, 1) and (1, 1/2, 0), eps = 3/5, eight cells on [-1, 2]."""
    return {
        "cells": {"kind": "intervals", "lo": "-1", "hi": "2", "n": 8},
        "dist": [{"x": ["0"], "p": "1/2", "eta": "1"}, {"x": ["1"], "p": "1/2", "eta": "0"}],
        "eps": "3/5",
        "norm": _norm_1d(),
        "expected": "1/2",
        "probe_seed": 0,
    }


def optimize_fixed_cases() -> list[tuple[str, str, dict]]:
    p = two_atom_instance()
    return [("two_atom", "oracle_value", p), ("two_atom", "oracle_vs_gray", p), ("two_atom", "mollify_equal", p)]


def gauge_cases(seed: int, samples: int) -> list[tuple[str, str, dict]]:
    nrng = np.random.default_rng([seed, 5])
    bodies = [("disc", gauge.Ball([0.0, 0.0], 1.0))]
    bodies += [(f"poly{i}", gauge.random_polytope(nrng)) for i in range(3)]
    out = []
    for i, (name, C) in enumerate(bodies):
        b = _body_json(C)
        out.append((name, "concavity", {"body": b, "samples": samples, "probe_seed": seed * 101 + i, "tol": 1e-9}))
        out.append((name, "translation", {"body": b, "samples": 1000, "probe_seed": seed * 103 + i, "tol": 1e-12}))
        out.append((name, "scaling", {"body": b, "samples": 1000, "probe_seed": seed * 107 + i, "tol": 1e-12}))
        if name != "disc":
            out.append((name, "polytope_path", {"body": b, "paths": 200, "probe_seed": seed * 109 + i, "tol": 1e-9}))
    sq = _body_json(gauge.box([-1, -1], [1, 1]))
    out.append(("square", "polytope_path", {"body": sq, "paths": 200, "probe_seed": seed * 113, "tol": 1e-9}))
    out.append(
        (
            "disc",
            "polytope_gap",
            {"center": [0.0, 0.0], "radius": 1.0, "delta": 1e-3, "v": [1.0, 0.0], "samples": samples, "probe_seed": seed},
        )
    )
    out.append(("l2", "midpoint", {"configs": 100, "probe_seed": seed, "seq_len": 60}))
    return out


def gen_strings(seed: int, k: int) -> list[tuple[str, dict]]:
    rng = _rng("strings", seed, k)
    alphabet = "abc"[: rng.randint(2, 3)]
    max_len = rng.randint(2, 4) if len(alphabet) == 2 else rng.randint(2, 3)
    U = strings.StringUniverse(alphabet, max_len)
    words = U.strings()
    pairs = [(i, j) for i in range(1, max_len + 2) for j in range(i + 1, max_len + 2)]
    swaps = [list(q) for q in rng.sample(pairs, rng.randint(1, min(3, len(pairs))))]
    base = {"alphabet": alphabet, "max_len": max_len, "swaps": swaps}
    fam = [sorted(strings.random_subset(rng, words, rng.uniform(0.1, 0.6))) for _ in range(rng.randint(2, 4))]
    chain = [sorted(strings.random_subset(rng, words, rng.uniform(0.3, 0.9)))]
    for _ in range(rng.randint(1, 4)):
        chain.append(sorted(strings.random_subset(rng, chain[-1], rng.uniform(0.3, 0.9))))
    support = rng.sample(words, rng.randint(1, min(5, len(words))))
    dist = _random_dist(rng, support)
    A = sorted(strings.random_subset(rng, words, 0.4))
    out = [
        ("involution", base),
        ("string_union", dict(base, family=fam)),
        ("string_chain", dict(base, chain=chain)),
        ("string_decrease", dict(base, dist=dist, A=A)),
    ]
    # the brute-force oracle needs a universe of at most 7 words
    small_swaps = [list(q) for q in rng.sample([(1, 2), (1, 3), (2, 3)], rng.randint(1, 3))]
    small_dist = _random_dist(rng, rng.sample(strings.StringUniverse("ab", 2).strings(), rng.randint(1, 4)))
    out.append(("string_oracle", {"alphabet": "ab", "max_len": 2, "swaps": small_swaps, "dist": small_dist}))
    return out


def strings_fixed_cases() -> list[tuple[str, str, dict]]:
    base = {"alphabet": "ab", "max_len": 2, "swaps": [[1, 2]]}
    dist = [{"x": "ab", "p": "1/2", "eta": "1"}, {"x": "ba", "p": "1/2", "eta": "0"}]
    chain = [sorted(strings.StringUniverse("ab", 2).strings()), ["ab", "ba"], ["ab"]]
    return [
        ("ab_ba", "string_risk_value", dict(base, dist=dist, A=["ab"], expected="1")),
        ("ab_ba", "string_oracle", dict(base, dist=dist)),
        ("chain3", "string_chain", dict(base, chain=chain)),
    ]


def injected_case() -> tuple[str, str, dict]:
    """A false claim: closing([0,1] U [3/2,2]) with eps 1/2 fills the gap."""
    A = IntervalSet([(0, 1), (Fraction(3, 2), 2)])
    return ("injected", "closing_is_identity", {"A": enc_set(A), "eps": "1/2", "norm": _norm_1d()})


# --------------------------------------------------------------------------
# runner
# --------------------------------------------------------------------------

SUITES = {
    "identities": 1000,
    "grid": 500,
    "risk": 500,
    "optimize": 50,
    "gauge": 10_000,
    "strings": 200,
}


def suite_cases(suite: str, seed: int, cases: int | None = None) -> list[tuple[str, str, dict]]:
    """(case_id, check, payload) triples for one suite."""
    if suite not in SUITES:
        raise SuiteError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    n = SUITES[suite] if cases is None else int(cases)
    if n < 1:
        raise SuiteError("case count must be positive")
    if suite == "gauge":
        return gauge_cases(seed, n)
    gen = {
        "identities": gen_identities,
        "grid": gen_grid,
        "risk": gen_risk,
        "optimize": gen_optimize,
        "strings": gen_strings,
    }[suite]
    out = []
    width = len(str(n - 1))
    for k in range(n):
        for check, payload in gen(seed, k):
            out.append((f"c{k:0{width}d}", check, payload))
    fixed = {"grid": grid_fixed_cases, "optimize": optimize_fixed_cases, "strings": strings_fixed_cases}.get(suite)
    if fixed:
        out.extend(fixed())
    return out


def run_suite(
    suite: str,
    seed: int = 0,
    cases: int | None = None,
    out_dir: str | None = None,
    inject_failure: bool = False,
) -> SuiteRun:
    """Run a suite; with ``out_dir`` write the case table, the summary and one
    witness file per failing case."""
    todo = suite_cases(suite, seed, cases)
    if inject_failure:
        todo.append(injected_case())
    run = SuiteRun(suite, seed)
    for case_id, check, payload in todo:
        res = run_check(check, payload)
        row = CaseRow(suite, case_id, check, "pass" if res.ok else "fail", res.lhs, res.rhs, float(res.violation))
        if not res.ok:
            name = f"{suite}_{case_id}_{check}.json"
            row.witness_path = os.path.join("witnesses", name)
            run.witnesses[row.witness_path] = {
                "suite": suite,
                "case_id": case_id,
                "check": check,
                "seed": seed,
                "payload": payload,
                "lhs": res.lhs,
                "rhs": res.rhs,
            }
        run.rows.append(row)
    if out_dir is not None:
        write_outputs(run, out_dir)
    return run


CASE_HEADER = ["suite", "case_id", "status", "lhs", "rhs", "witness_path"]
SUMMARY_HEADER = ["suite", "cases", "failures", "max-violation"]


def write_outputs(run: SuiteRun, out_dir: str, fmt: str = "csv") -> dict:
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if fmt == "json":
        paths["cases"] = os.path.join(out_dir, f"{run.suite}_cases.json")
        with open(paths["cases"], "w") as fh:
            rows = [dict(zip(CASE_HEADER, _case_cells(r))) for r in run.rows]
            json.dump(rows, fh, indent=1)
            fh.write("\n")
        paths["summary"] = os.path.join(out_dir, f"{run.suite}_summary.json")
        with open(paths["summary"], "w") as fh:
            json.dump([dict(zip(SUMMARY_HEADER, _summary_cells(s))) for s in run.summary()], fh, indent=1)
            fh.write("\n")
    else:
        paths["cases"] = os.path.join(out_dir, f"{run.suite}_cases.csv")
        with open(paths["cases"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CASE_HEADER)
            w.writerows(_case_cells(r) for r in run.rows)
        paths["summary"] = os.path.join(out_dir, f"{run.suite}_summary.csv")
        with open(paths["summary"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            w.writerows(_summary_cells(s) for s in run.summary())
    for rel, body in run.witnesses.items():
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w") as fh:
            json.dump(body, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return paths


def _case_cells(r: CaseRow) -> list:
    return [r.suite, f"{r.case_id}:{r.check}", r.status, r.lhs, r.rhs, r.witness_path]


def _summary_cells(s: tuple) -> list:
    name, n, f, v = s
    return [name, n, f, repr(float(v))]


def replay(path: str) -> Outcome:
    """Re-run the check stored in a witness file."""
    with open(path) as fh:
        body = json.load(fh)
    for key in ("check", "payload"):
        if key not in body:
            raise SuiteError(f"witness file lacks {key!r}")
    return run_check(body["check"], body["payload"])


def identity_names() -> list[str]:
    return [c for c, _ in gen_identities(0, 0)]


__all__ = [
    "CHECKS",
    "SUITES",
    "Outcome",
    "SuiteRun",
    "identity_names",
    "replay",
    "run_check",
    "run_suite",
    "suite_cases",
    "write_outputs",
]
