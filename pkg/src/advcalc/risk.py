"""Standard and adversarial risk over finite labeled distributions, exactly."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .geometry import GeometryError, GridSet, IntervalSet, distance_to_set, frac, meets_ball, point
from .morphology import MorphContext, dilate, erode


class RiskError(GeometryError):
    pass


@dataclass(frozen=True)
class Atom:
    x: tuple
    p: Fraction
    eta: Fraction


class LabeledDistribution:
    """Finitely many atoms ``(x_i, p_i, eta_i)`` with ``sum p_i == 1``.

    ``eta_i`` is the probability of label +1 at ``x_i``.  Locations are points
    (tuples of Fractions) or, for the string model, plain strings.
    """

    def __init__(self, atoms: Sequence):
        out = []
        for a in atoms:
            x, p, eta = a if not isinstance(a, Atom) else (a.x, a.p, a.eta)
            x = x if isinstance(x, str) else point(x)
            p, eta = frac(p), frac(eta)
            if p <= 0:
                raise RiskError("atom weights must be positive")
            if not 0 <= eta <= 1:
                raise RiskError("eta must lie in [0, 1]")
            out.append(Atom(x, p, eta))
        if sum((a.p for a in out), Fraction(0)) != 1:
            raise RiskError("atom weights must sum to 1")
        if len({a.x for a in out}) != len(out):
            raise RiskError("atom locations must be distinct")
        self.atoms: tuple[Atom, ...] = tuple(out)

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return f"LabeledDistribution({len(self.atoms)} atoms)"

    def bayes_risk(self) -> Fraction:
        return sum((a.p * min(a.eta, 1 - a.eta) for a in self.atoms), Fraction(0))

    def to_json(self) -> list:
        return [
            {"x": a.x if isinstance(a.x, str) else [str(c) for c in a.x], "p": str(a.p), "eta": str(a.eta)}
            for a in self.atoms
        ]

    @classmethod
    def from_json(cls, data) -> "LabeledDistribution":
        return cls([(d["x"], d["p"], d["eta"]) for d in data])

    @classmethod
    def load(cls, path: str) -> "LabeledDistribution":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _member(A, x) -> bool:
    if isinstance(A, GridSet) and A.index_of(x) is None:
        raise RiskError(f"atom {x} is not on the set's lattice")
    return A.contains(x)


def _check_domain(D: LabeledDistribution, domain):
    if domain is None:
        return
    for a in D:
        if not domain.contains(a.x):
            raise RiskError(f"atom {a.x} lies outside the domain")


def standard_risk(A, D: LabeledDistribution, domain=None) -> Fraction:
    """sum p_i [(1 - eta_i) 1{x_i in A} + eta_i 1{x_i not in A}]."""
    _check_domain(D, domain)
    total = Fraction(0)
    for a in D:
        total += a.p * ((1 - a.eta) if _member(A, a.x) else a.eta)
    return total


def bayes_classifier(D: LabeledDistribution, cell=None, residue=None):
    """Atoms with eta > 1/2, as degenerate intervals (1-D) or lattice points."""
    chosen = [a.x for a in D if a.eta > Fraction(1, 2)]
    dim = len(D.atoms[0].x) if D.atoms else 1
    if cell is None and dim == 1:
        return IntervalSet.points([x[0] for x in chosen])
    cell = frac(cell if cell is not None else 1)
    residue = tuple(residue) if residue is not None else (Fraction(0),) * dim
    probe = GridSet.from_indices([], cell=cell, residue=residue, dim=dim)
    idx = []
    for x in chosen:
        k = probe.index_of(x)
        if k is None:
            raise RiskError(f"atom {x} is not on the lattice")
        idx.append(k)
    return GridSet.from_indices(idx, cell=cell, residue=residue, dim=dim)


def _adversarial_terms(A, x, ctx: MorphContext, mode: str, dil=None, cdil=None):
    """(x in A^eps, x in (A^C)^eps)."""
    if mode == "morphology":
        return dil.contains(x), cdil.contains(x)
    if mode != "distance":
        raise RiskError(f"unknown mode {mode!r}")
    in_dil = not A.is_empty() and distance_to_set(x, A, ctx.norm) <= ctx.eps
    comp = A.complement()
    if comp.is_empty():
        return in_dil, False
    if isinstance(A, IntervalSet):
        # A closed, so its complement is open: the ball reaches it iff x is
        # already outside A or the gap is strictly shorter than eps
        in_cdil = not A.contains(x) or distance_to_set(x, comp, ctx.norm) < ctx.eps
    else:
        in_cdil = distance_to_set(x, comp, ctx.norm) <= ctx.eps
    return in_dil, in_cdil


def adversarial_risk(A, D: LabeledDistribution, ctx: MorphContext, mode: str = "morphology") -> Fraction:
    """sum p_i [(1 - eta_i) 1{x_i in A^eps} + eta_i 1{x_i in (A^C)^eps}].

    ``morphology`` builds A^eps and (A^C)^eps = (A^-eps)^C; ``distance``
    tests each atom against A and A^C by exact distances.  The distance mode
    needs a closed interval set.
    """
    _check_domain(D, ctx.domain)
    if isinstance(A, GridSet):
        for a in D:
            if A.index_of(a.x) is None:
                raise RiskError(f"atom {a.x} is not on the set's lattice")
    dil = cdil = None
    if mode == "morphology":
        dil = dilate(A, ctx)
        cdil = erode(A, ctx).complement()
    elif isinstance(A, IntervalSet) and not A.is_closed():
        raise RiskError("distance mode needs a closed interval set")
    total = Fraction(0)
    for a in D:
        in_dil, in_cdil = _adversarial_terms(A, a.x, ctx, mode, dil, cdil)
        total += a.p * ((1 - a.eta) * in_dil + a.eta * in_cdil)
    return total


def adversarial_risk_sup(A, D: LabeledDistribution, ctx: MorphContext) -> Fraction:
    """The sup-over-perturbations form: each atom pays (1 - eta) if some point of
    its ball is in A, and eta if some point of its ball is outside A."""
    total = Fraction(0)
    for a in D:
        hit_a = meets_ball(a.x, ctx.eps, A, ctx.norm)
        hit_c = meets_ball(a.x, ctx.eps, A.complement(), ctx.norm)
        total += a.p * ((1 - a.eta) * hit_a + a.eta * hit_c)
    return total
