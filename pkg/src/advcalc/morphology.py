"""Dilation, erosion and the operators built from them.

``dilate(A)`` is the Minkowski sum of A with the closed eps-ball and
``erode(A)`` is ``complement(dilate(complement(A)))``.  Complements are exact
(see :mod:`advcalc.geometry`), so every identity below is an exact set
equality.  A bounded ``domain`` on the context is optional: when present,
inputs must sit at least ``2 * eps`` inside it and ``complement`` helpers
restrict to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry import GeometryError, GridSet, IntervalSet, Norm, frac


class MorphError(GeometryError):
    pass


@dataclass(frozen=True)
class MorphContext:
    norm: Norm
    eps: Fraction
    domain: IntervalSet | GridSet | None = None

    def __post_init__(self):
        object.__setattr__(self, "eps", frac(self.eps))
        if self.eps < 0:
            raise MorphError("radius must be nonnegative")

    def with_eps(self, eps) -> "MorphContext":
        return MorphContext(self.norm, eps, self.domain)

    @classmethod
    def around(cls, norm: Norm, eps, sets: Sequence, margin=None) -> "MorphContext":
        """Context whose domain is the bounding box of ``sets`` padded by ``margin``
        (default ``2 * eps`` plus one unit / one cell)."""
        eps = frac(eps)
        bounded = [s for s in sets if not s.is_empty()]
        if not bounded:
            return cls(norm, eps)
        first = bounded[0]
        if isinstance(first, IntervalSet):
            m = frac(margin) if margin is not None else 2 * eps / norm.scale_1d() + 1
            lo = min(s.bounds()[0] for s in bounded)
            hi = max(s.bounds()[1] for s in bounded)
            return cls(norm, eps, IntervalSet([(lo - m, hi + m)]))
        m = margin if margin is not None else math.ceil(2 * eps / first.cell) + 1
        boxes = [s.bbox() for s in bounded]
        lo = [min(b[0][k] for b in boxes) - m for k in range(first.dim)]
        hi = [max(b[1][k] for b in boxes) + m for k in range(first.dim)]
        return cls(norm, eps, GridSet.box(lo, [h - l + 1 for l, h in zip(lo, hi)], first.cell, first.residue))

    def complement(self, A):
        """Complement of A, restricted to the domain when one is set."""
        return A.complement(self.domain)

    def check_fits(self, A) -> None:
        """Error unless A, padded by 2 * eps, lies inside the domain."""
        if self.domain is None or A.is_empty():
            return
        if not A.is_bounded():
            raise MorphError("domain overflow: unbounded set")
        if isinstance(A, IntervalSet):
            pad = 2 * self.eps / self.norm.scale_1d()
            lo, hi = A.bounds()
            dlo, dhi = self.domain.bounds()
            if lo - pad < dlo or hi + pad > dhi:
                raise MorphError("domain overflow: set padded by 2*eps leaves the domain")
            return
        if not A.compatible(self.domain):
            raise MorphError("set and domain use different lattices")
        pad = _ball(A, self).max(axis=0) * 2 if self.eps else np.zeros(A.dim, dtype=np.int64)
        (alo, ahi), (dlo, dhi) = A.bbox(), self.domain.bbox()
        if any(a - p < d for a, p, d in zip(alo, pad, dlo)) or any(a + p > d for a, p, d in zip(ahi, pad, dhi)):
            raise MorphError("domain overflow: set padded by 2*eps leaves the domain")


def _ball(A: GridSet, ctx: MorphContext, eps=None) -> np.ndarray:
    if ctx.norm.dim != A.dim:
        raise MorphError("norm and set dimensions differ")
    return ctx.norm.lattice_ball(ctx.eps if eps is None else eps, A.cell)


def _radius_1d(ctx: MorphContext, eps=None) -> Fraction:
    return frac(ctx.eps if eps is None else eps) / ctx.norm.scale_1d()


def dilate(A, ctx: MorphContext, eps=None):
    """A^eps: every point within eps of A."""
    if eps is None and ctx.domain is not None and A.is_bounded():
        ctx.check_fits(A)
    if isinstance(A, IntervalSet):
        return A.grow(_radius_1d(ctx, eps))
    if isinstance(A, GridSet):
        return A.minkowski(_ball(A, ctx, eps))
    raise MorphError(f"unsupported set type {type(A).__name__}")


def erode(A, ctx: MorphContext, eps=None):
    """A^-eps: points whose whole eps-ball lies in A."""
    return dilate(A.complement(), ctx, eps).complement()


def opening(A, ctx: MorphContext):
    return dilate(erode(A, ctx), ctx)


def closing(A, ctx: MorphContext):
    return erode(dilate(A, ctx), ctx)


def fringe(A, ctx: MorphContext):
    """F(A): points of A that no closed eps-ball inside A covers."""
    return A.difference(opening(A, ctx))


def mollify(A, ctx: MorphContext):
    """((A^-eps)^2eps)^-eps as four single-radius passes."""
    return erode(dilate(dilate(erode(A, ctx), ctx), ctx), ctx)


def erode_in_domain(A, ctx: MorphContext, domain):
    """Erosion by the bounded-window route: domain minus the dilated domain-complement."""
    return domain.difference(dilate(A.complement(domain), ctx))


# --------------------------------------------------------------------------
# checks
# --------------------------------------------------------------------------


@dataclass
class Check:
    ok: bool
    witness: object = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def same(A, B) -> bool:
    """Set equality used by the identity checks (exact for both representations)."""
    return A == B


def witness_point(S):
    """A deterministic member of a nonempty set."""
    if isinstance(S, IntervalSet):
        iv = S.intervals[0]
        if iv.lo_closed:
            return iv.lo
        if iv.hi_closed and iv.lo == -math.inf:
            return iv.hi
        if iv.lo == -math.inf:
            return iv.hi - 1
        if iv.hi == math.inf:
            return iv.lo + 1
        return (iv.lo + iv.hi) / 2
    if S.outside:
        # first lattice point past the stored extent
        return S.point_of(tuple(o - 1 for o in S.offset))
    return S.point_of(tuple(int(v) for v in S.indices()[0]))


def _composition_exact(A, ctx: MorphContext, e1: Fraction, e2: Fraction) -> bool:
    if isinstance(A, IntervalSet):
        return True
    if ctx.norm.kind not in ("l1", "linf"):
        return False
    return (e1 / A.cell).denominator == 1 and (e2 / A.cell).denominator == 1


def compose_radii_check(A, ctx: MorphContext, e1, e2, strict: bool = True) -> Check:
    """(A^e1)^e2 == A^(e1+e2) and the erosion dual.

    Exact for interval sets and for l1/linf lattices with radii that are whole
    cells.  Elsewhere ``strict`` raises; otherwise the result carries a lattice
    point on which the two sides disagree.
    """
    e1, e2 = frac(e1), frac(e2)
    if e1 < 0 or e2 < 0:
        raise MorphError("radius must be nonnegative")
    if strict and not _composition_exact(A, ctx, e1, e2):
        raise MorphError("composition not exact on this lattice")
    lhs = dilate(dilate(A, ctx, e1), ctx, e2)
    rhs = dilate(A, ctx, e1 + e2)
    if lhs != rhs:
        return Check(False, _last_point(lhs.symmetric_difference(rhs)), "dilation")
    lhs = erode(erode(A, ctx, e1), ctx, e2)
    rhs = erode(A, ctx, e1 + e2)
    if lhs != rhs:
        return Check(False, _last_point(lhs.symmetric_difference(rhs)), "erosion")
    return Check(True)


def _last_point(S):
    if isinstance(S, GridSet) and S.is_bounded():
        return S.point_of(tuple(int(v) for v in S.indices()[-1]))
    return witness_point(S)


def is_pseudo_certifiably_robust(A, ctx: MorphContext) -> Check:
    """Both F(A) and F(A^C) empty; otherwise a witness from the nonempty fringe."""
    fa = fringe(A, ctx)
    if not fa.is_empty():
        return Check(False, witness_point(fa), "F(A)")
    fc = fringe(A.complement(), ctx)
    if not fc.is_empty():
        return Check(False, witness_point(fc), "F(A^C)")
    return Check(True)


def is_certifiably_robust_at(A, ctx: MorphContext, x) -> bool:
    if ctx.domain is not None and not ctx.domain.contains(x):
        raise MorphError("point outside the domain")
    if A.contains(x):
        return erode(A, ctx).contains(x)
    return erode(A.complement(), ctx).contains(x)


@dataclass
class FamilyReport:
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks.values())


def _union_all(sets):
    out = sets[0]
    for s in sets[1:]:
        out = out.union(s)
    return out


def _intersect_all(sets):
    out = sets[0]
    for s in sets[1:]:
        out = out.intersection(s)
    return out


def finite_family_identities(sets: Sequence, ctx: MorphContext) -> FamilyReport:
    """The four union/intersection relations for a family of 1..8 sets."""
    if not 1 <= len(sets) <= 8:
        raise MorphError("family size must be between 1 and 8")
    dil = [dilate(s, ctx) for s in sets]
    ero = [erode(s, ctx) for s in sets]
    U, I = _union_all(list(sets)), _intersect_all(list(sets))
    rep = FamilyReport()

    lhs, rhs = dilate(U, ctx), _union_all(dil)
    rep.checks["union_dilate_eq"] = Check(same(lhs, rhs), None if same(lhs, rhs) else lhs.symmetric_difference(rhs))
    lhs, rhs = erode(I, ctx), _intersect_all(ero)
    rep.checks["intersection_erode_eq"] = Check(same(lhs, rhs), None if same(lhs, rhs) else lhs.symmetric_difference(rhs))
    lhs, rhs = dilate(I, ctx), _intersect_all(dil)
    bad = lhs.difference(rhs)
    rep.checks["intersection_dilate_sub"] = Check(bad.is_empty(), None if bad.is_empty() else bad)
    lhs, rhs = _union_all(ero), erode(U, ctx)
    bad = lhs.difference(rhs)
    rep.checks["union_erode_sub"] = Check(bad.is_empty(), None if bad.is_empty() else bad)
    return rep


def tail_unions(seq: Sequence) -> list:
    """B_n = union of A_k for k >= n."""
    if not seq:
        raise MorphError("tail unions need a nonempty sequence")
    out = [seq[-1]]
    for s in reversed(seq[:-1]):
        out.append(s.union(out[-1]))
    return out[::-1]


# --------------------------------------------------------------------------
# midpoint lemma harness (strictly convex norms, doubles)
# --------------------------------------------------------------------------


@dataclass
class MidpointReport:
    configs: int
    failures: int
    max_index: int
    seq_len: int

    @property
    def ok(self) -> bool:
        return self.failures == 0


def midpoint_harness(
    configs: int = 100,
    seed: int = 0,
    dim: int = 2,
    seq_len: int = 60,
    samples: int = 50,
    eps: float = 1.0,
) -> MidpointReport:
    """Sampled check of eventual containment for the l2 midpoint construction.

    Each configuration draws b_n -> b with x in every closed 2eps-ball around
    b_n, sets c = (b + x) / 2 and samples y in the closed eps-ball around c.
    For each y the smallest N with y in B(b_n, 2eps) for all n >= N must exist
    inside the finite sequence.  Membership goes through the gauge of the ball
    along the outward ray, so the check exercises :func:`advcalc.gauge.lam`.
    """
    from .gauge import Ball, lam

    rng = np.random.default_rng(seed)
    failures = 0
    worst = 0
    tol = 1e-12
    for cfg in range(configs):
        b = rng.uniform(-2, 2, dim)
        u = _unit(rng, dim)
        # every fourth configuration puts x on the sphere ||x - b|| = 2 eps
        r = 2 * eps if cfg % 4 == 0 else 2 * eps * rng.uniform(0, 1) ** (1 / dim)
        x = b + r * u
        bn = []
        for n in range(seq_len):
            step = eps * 0.5 ** n
            cand = b + step * _unit(rng, dim)
            if np.linalg.norm(x - cand) > 2 * eps:
                d = x - b
                nd = np.linalg.norm(d)
                cand = b + step * (d / nd if nd > 0 else u)
            bn.append(cand)
        c = (b + x) / 2
        ys = [c + eps * _unit(rng, dim) * rng.uniform(0, 1) ** (1 / dim) for _ in range(samples - samples // 5)]
        ys += [c + eps * _unit(rng, dim) for _ in range(samples // 5)]
        for y in ys:
            inside = []
            for p in bn:
                body = Ball(p, 2 * eps)
                ray = y - p
                if np.linalg.norm(ray) == 0:
                    inside.append(True)
                    continue
                inside.append(lam(body, y, ray) >= -tol * 2 * eps)
            if not inside[-1]:
                failures += 1
                continue
            N = len(inside) - 1
            while N > 0 and inside[N - 1]:
                N -= 1
            worst = max(worst, N + 1)
    return MidpointReport(configs, failures, worst, seq_len)


def _unit(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)
