"""Exhaustive and greedy search for adversarial-risk minimizers over cell unions.

A search instance is a short list of candidate cells (lattice points or closed
1-D intervals).  A candidate set is the union of the cells picked by a
bitmask, bit ``i`` for cell ``i``.  Each atom only sees the cells that meet
its eps-ball, so the risk of a mask is a sum of per-atom lookups into small
tables built with the exact morphology engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import GeometryError, GridSet, IntervalSet, frac, meets_ball
from .morphology import MorphContext, dilate, erode, is_pseudo_certifiably_robust, mollify, tail_unions
from .risk import LabeledDistribution, adversarial_risk

EXHAUSTIVE_LIMIT = 24
GRAY_LIMIT = 20
TABLE_LIMIT = 16
_CHUNK = 1 << 18


class SearchError(GeometryError):
    pass


@dataclass
class SearchResult:
    best_set: object
    best_risk: Fraction
    optimal: bool
    trace: list = field(default_factory=list)
    best_mask: int = 0

    def to_json(self) -> dict:
        return {
            "best_set": self.best_set.to_json(),
            "best_mask": self.best_mask,
            "best_risk": str(self.best_risk),
            "best_risk_decimal": float(self.best_risk),
            "optimal": self.optimal,
        }


class SearchInstance:
    def __init__(self, cells: Sequence, dist: LabeledDistribution, ctx: MorphContext):
        if not cells:
            raise SearchError("a search instance needs at least one cell")
        kinds = {type(c) for c in cells}
        if len(kinds) != 1:
            raise SearchError("cells must share one representation")
        self.cells = list(cells)
        self.dist = dist
        self.ctx = ctx
        if ctx.domain is not None:
            for a in dist:
                if not ctx.domain.contains(a.x):
                    raise SearchError(f"atom {a.x} lies outside the domain")
        self._tables = None

    @property
    def n(self) -> int:
        return len(self.cells)

    @classmethod
    def lattice(cls, indices, dist, ctx: MorphContext, cell=1, residue=None) -> "SearchInstance":
        indices = [tuple(int(v) for v in k) for k in indices]
        dim = len(indices[0])
        cells = [GridSet.from_indices([k], cell=cell, residue=residue, dim=dim) for k in indices]
        return cls(cells, dist, ctx)

    @classmethod
    def intervals(cls, lo, hi, n: int, dist, ctx: MorphContext) -> "SearchInstance":
        """Split [lo, hi] into n equal closed cells."""
        lo, hi = frac(lo), frac(hi)
        w = (hi - lo) / n
        cells = [IntervalSet([(lo + i * w, lo + (i + 1) * w)]) for i in range(n)]
        return cls(cells, dist, ctx)

    def empty_set(self):
        c = self.cells[0]
        if isinstance(c, IntervalSet):
            return IntervalSet()
        return GridSet.from_indices([], cell=c.cell, residue=c.residue, dim=c.dim)

    def set_of(self, mask: int):
        out = self.empty_set()
        for i, c in enumerate(self.cells):
            if mask >> i & 1:
                out = out.union(c)
        return out

    def mask_of(self, A) -> int:
        """Bitmask of the cells contained in A."""
        return sum(1 << i for i, c in enumerate(self.cells) if c.issubset(A))

    # -- per-atom lookup tables ---------------------------------------------

    def tables(self):
        """(relevant cell lists, integer tables, common denominator)."""
        if self._tables is not None:
            return self._tables
        rels, raw = [], []
        for a in self.dist:
            rel = [i for i, c in enumerate(self.cells) if meets_ball(a.x, self.ctx.eps, c, self.ctx.norm)]
            if len(rel) > TABLE_LIMIT:
                raise SearchError("an eps-ball meets too many cells for exhaustive tables")
            vals = []
            for pat in range(1 << len(rel)):
                S = self.empty_set()
                for j, i in enumerate(rel):
                    if pat >> j & 1:
                        S = S.union(self.cells[i])
                in_dil = dilate(S, self.ctx, self.ctx.eps).contains(a.x)
                in_cdil = not erode(S, self.ctx, self.ctx.eps).contains(a.x)
                vals.append(a.p * ((1 - a.eta) * in_dil + a.eta * in_cdil))
            rels.append(rel)
            raw.append(vals)
        den = math.lcm(*(v.denominator for vals in raw for v in vals)) if raw else 1
        tables = [np.array([int(v * den) for v in vals], dtype=np.int64) for vals in raw]
        self._tables = (rels, tables, den)
        return self._tables

    def risk_of_mask(self, mask: int) -> Fraction:
        rels, tables, den = self.tables()
        total = 0
        for rel, tab in zip(rels, tables):
            pat = sum(1 << j for j, i in enumerate(rel) if mask >> i & 1)
            total += int(tab[pat])
        return Fraction(total, den)


def oracle_search(inst: SearchInstance) -> SearchResult:
    """Enumerate all 2^n cell unions; ties go to the smallest bitmask."""
    n = inst.n
    if n > EXHAUSTIVE_LIMIT:
        raise SearchError("exhaustive budget exceeded")
    rels, tables, den = inst.tables()
    best_val, best_mask = None, 0
    total = 1 << n
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        acc = np.zeros(len(masks), dtype=np.int64)
        for rel, tab in zip(rels, tables):
            pat = np.zeros(len(masks), dtype=np.int64)
            for j, i in enumerate(rel):
                pat |= ((masks >> i) & 1) << j
            acc += tab[pat]
        k = int(np.argmin(acc))
        if best_val is None or acc[k] < best_val:
            best_val, best_mask = int(acc[k]), int(masks[k])
    risk = Fraction(best_val, den)
    return SearchResult(inst.set_of(best_mask), risk, True, [(0, risk)], best_mask)


def gray_code_search(inst: SearchInstance) -> SearchResult:
    """Second enumeration: Gray-code order, one cell flipped per step, per-atom
    patterns updated incrementally.  Same tie-break as :func:`oracle_search`."""
    n = inst.n
    if n > GRAY_LIMIT:
        raise SearchError("exhaustive budget exceeded")
    rels, tables, den = inst.tables()
    touch = [[] for _ in range(n)]
    for a, rel in enumerate(rels):
        for j, i in enumerate(rel):
            touch[i].append((a, 1 << j))
    pats = [0] * len(rels)
    tabs = [t.tolist() for t in tables]
    cur = sum(t[0] for t in tabs)
    mask = 0
    best_val, best_mask = cur, 0
    for g in range(1, 1 << n):
        bit = (g & -g).bit_length() - 1
        mask ^= 1 << bit
        for a, b in touch[bit]:
            old = pats[a]
            new = old ^ b
            cur += tabs[a][new] - tabs[a][old]
            pats[a] = new
        if cur < best_val or (cur == best_val and mask < best_mask):
            best_val, best_mask = cur, mask
    risk = Fraction(best_val, den)
    return SearchResult(inst.set_of(best_mask), risk, True, [(0, risk)], best_mask)


def greedy_flip_descent(inst: SearchInstance, start=0, max_iters: int = 1000) -> SearchResult:
    """Flip the single cell with the largest strict risk decrease until none helps.

    ``start`` is a bitmask or a set (converted to the cells it contains).  A
    local search with no optimality claim.
    """
    if isinstance(start, int):
        mask = start
    else:
        mask = inst.mask_of(start)
        if inst.set_of(mask) != start:
            raise SearchError("start set is not a union of the instance's cells")
    cur = inst.risk_of_mask(mask)
    trace = [(0, cur)]
    for it in range(1, max_iters + 1):
        best_gain, best_bit = 0, None
        for i in range(inst.n):
            r = inst.risk_of_mask(mask ^ (1 << i))
            if cur - r > best_gain:
                best_gain, best_bit = cur - r, i
        if best_bit is None:
            break
        mask ^= 1 << best_bit
        cur -= best_gain
        trace.append((it, cur))
    return SearchResult(inst.set_of(mask), cur, False, trace, mask)


@dataclass
class MollifyReport:
    ok: bool
    best_risk: Fraction
    mollified_risk: Fraction
    minimizer: object
    mollified: object
    robust: bool
    robust_witness: object = None


def mollified_optimality_check(inst: SearchInstance) -> MollifyReport:
    """Mollify the oracle minimizer and compare risks.

    ``ok`` is the exact equality R(mollify(A*)) == R(A*).  Pseudo-certifiable
    robustness of mollify(A*) is reported, not required.
    """
    res = oracle_search(inst)
    ctx = inst.ctx
    M = mollify(res.best_set, ctx)
    r = adversarial_risk(M, inst.dist, ctx)
    rob = is_pseudo_certifiably_robust(M, ctx)
    return MollifyReport(r == res.best_risk, res.best_risk, r, res.best_set, M, rob.ok, rob.witness)


@dataclass
class SequenceReport:
    tails: list
    decreasing: list
    dilation_identity: list
    risks: list
    seq_risks: list

    @property
    def identities_hold(self) -> bool:
        return all(self.decreasing) and all(self.dilation_identity)

    @property
    def first_tail_risk(self) -> Fraction:
        return self.risks[0]

    @property
    def best_sequence_risk(self) -> Fraction:
        return min(self.seq_risks)


def minimizing_sequence_harness(seq: Sequence, inst: SearchInstance) -> SequenceReport:
    """Tail unions of ``seq``: decreasing chain, dilation commutes with the
    tail union, and the risks along the way (reported only)."""
    if not seq:
        raise SearchError("sequence must be nonempty")
    ctx = inst.ctx
    tails = tail_unions(list(seq))
    dec = [tails[k + 1].issubset(tails[k]) for k in range(len(tails) - 1)]
    dils = [dilate(s, ctx) for s in seq]
    ident = []
    for k, B in enumerate(tails):
        rhs = dils[k]
        for d in dils[k + 1:]:
            rhs = rhs.union(d)
        ident.append(dilate(B, ctx) == rhs)
    risks = [adversarial_risk(B, inst.dist, ctx) for B in tails]
    seq_risks = [adversarial_risk(s, inst.dist, ctx) for s in seq]
    return SequenceReport(tails, dec, ident, risks, seq_risks)
