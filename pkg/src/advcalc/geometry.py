"""Norms, exact 1-D interval sets and lattice grid sets.

Every quantity on the exact paths is a :class:`fractions.Fraction`.  Interval
endpoints may additionally be ``-inf``/``inf`` (always open), which lets
complements be taken in all of R instead of inside a bounded window.  Grid sets
carry an ``outside`` flag saying whether the lattice points beyond the stored
mask belong to the set, so complements are exact on the whole lattice too.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

INF = math.inf

NORM_KINDS = ("l1", "l2", "linf", "wlinf", "polytope")


class GeometryError(ValueError):
    pass


def frac(x) -> Fraction:
    """Parse an exact rational from an int, Fraction, or string like ``"3/2"``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise GeometryError(f"not a rational: {x!r}")
    if isinstance(x, (int, str)):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise GeometryError(f"not a rational: {x!r}") from exc
    if isinstance(x, float):
        if not math.isfinite(x):
            raise GeometryError(f"not a finite rational: {x!r}")
        return Fraction(x)
    raise GeometryError(f"not a rational: {x!r}")


def point(x) -> tuple[Fraction, ...]:
    if isinstance(x, (int, str, Fraction, float)) and not isinstance(x, bool):
        return (frac(x),)
    return tuple(frac(c) for c in x)


def _fmt(x) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return str(x)


def _parse_endpoint(s):
    if isinstance(s, str) and s.strip() in ("inf", "+inf"):
        return INF
    if isinstance(s, str) and s.strip() == "-inf":
        return -INF
    return frac(s)


def _lcm(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _isqrt_exact(q: Fraction):
    """sqrt(q) as a Fraction when q is a perfect rational square, else a float."""
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return math.sqrt(q)


# --------------------------------------------------------------------------
# Norms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Norm:
    """A norm on R^d with exact rational evaluation.

    ``wlinf`` is ``max_k w_k |v_k|``.  ``polytope`` is the gauge of a
    centrally symmetric polytope ``{v : a_i . v <= b_i}`` with ``b_i > 0``,
    i.e. ``max_i (a_i . v) / b_i``.
    """

    kind: str
    dim: int
    weights: tuple[Fraction, ...] = ()
    halfspaces: tuple[tuple[tuple[Fraction, ...], Fraction], ...] = ()
    _rows: tuple[tuple[Fraction, ...], ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise GeometryError(f"unknown norm kind {self.kind!r}")
        if self.dim < 1:
            raise GeometryError("norm dimension must be positive")
        if self.kind == "wlinf":
            w = tuple(frac(x) for x in self.weights)
            if len(w) != self.dim or any(x <= 0 for x in w):
                raise GeometryError("weighted linf needs one positive weight per axis")
            object.__setattr__(self, "weights", w)
        if self.kind == "polytope":
            hs = tuple((tuple(frac(c) for c in a), frac(b)) for a, b in self.halfspaces)
            if not hs:
                raise GeometryError("polytope gauge needs half-spaces")
            for a, b in hs:
                if len(a) != self.dim:
                    raise GeometryError("half-space normal has wrong dimension")
                if b <= 0:
                    raise GeometryError("polytope gauge needs 0 in the interior (b_i > 0)")
            rows = tuple(tuple(c / b for c in a) for a, b in hs)
            rowset = set(rows)
            if any(tuple(-c for c in r) not in rowset for r in rows):
                raise GeometryError("polytope gauge must be centrally symmetric")
            object.__setattr__(self, "halfspaces", hs)
            object.__setattr__(self, "_rows", rows)
            if not np.all(np.isfinite(self._axis_extent())):
                raise GeometryError("polytope gauge unit ball is unbounded")

    # -- exact evaluation ---------------------------------------------------

    def _check(self, v):
        if len(v) != self.dim:
            raise GeometryError(f"dimension mismatch: expected {self.dim}, got {len(v)}")

    def power(self) -> int:
        return 2 if self.kind == "l2" else 1

    def powered(self, v: Sequence[Fraction]) -> Fraction:
        """||v|| for polyhedral norms, ||v||^2 for l2; always rational."""
        self._check(v)
        if self.kind == "l1":
            return sum((abs(c) for c in v), Fraction(0))
        if self.kind == "l2":
            return sum((c * c for c in v), Fraction(0))
        if self.kind == "linf":
            return max((abs(c) for c in v), default=Fraction(0))
        if self.kind == "wlinf":
            return max(w * abs(c) for w, c in zip(self.weights, v))
        return max(sum((r * c for r, c in zip(row, v)), Fraction(0)) for row in self._rows)

    def value(self, v: Sequence[Fraction]):
        """Exact norm; for l2 a Fraction only when the root is rational, else a float."""
        p = self.powered(v)
        return _isqrt_exact(p) if self.kind == "l2" else p

    def within(self, v: Sequence[Fraction], eps) -> bool:
        """||v|| <= eps, exactly (l2 compares squares)."""
        eps = frac(eps)
        if eps < 0:
            return False
        return self.powered(v) <= eps ** self.power()

    def scale_1d(self) -> Fraction:
        """||e_1|| for a 1-D norm: the factor converting coordinates to norm units."""
        if self.dim != 1:
            raise GeometryError("interval sets need a 1-D norm")
        return self.value((Fraction(1),)) if self.kind != "l2" else Fraction(1)

    # -- integer batches (lattice paths) -------------------------------------

    def _int_rows(self):
        """Integer matrix M and denominator q with ||v|| = max(M v) / q (polytope, wlinf)."""
        if self.kind == "wlinf":
            q = _lcm(w.denominator for w in self.weights)
            return [int(w * q) for w in self.weights], q
        q = _lcm(c.denominator for row in self._rows for c in row)
        return [[int(c * q) for c in row] for row in self._rows], q

    def batch_powered(self, V: np.ndarray) -> tuple[np.ndarray, int]:
        """For an integer array V of shape (n, d) return (vals, q) with
        ``||v||^power == vals / q`` row-wise, all integers."""
        V = np.asarray(V)
        if V.ndim != 2 or V.shape[1] != self.dim:
            raise GeometryError("dimension mismatch in batch norm")
        if V.dtype != object and V.size and np.abs(V).max() > 2**20:
            V = V.astype(object)
        if self.kind == "l1":
            return np.abs(V).sum(axis=1), 1
        if self.kind == "l2":
            return (V * V).sum(axis=1), 1
        if self.kind == "linf":
            return (np.abs(V).max(axis=1) if V.shape[0] else np.zeros(0, dtype=np.int64)), 1
        M, q = self._int_rows()
        if self.kind == "wlinf":
            W = np.array(M, dtype=V.dtype)
            return (np.abs(V) * W).max(axis=1), q
        M = np.array(M, dtype=V.dtype)
        return (V @ M.T).max(axis=1), q

    def batch_within(self, V: np.ndarray, denom: int, eps) -> np.ndarray:
        """Row-wise ``||V / denom|| <= eps`` for integer V, exactly."""
        eps = frac(eps)
        if eps < 0:
            return np.zeros(len(V), dtype=bool)
        vals, q = self.batch_powered(V)
        if len(vals) == 0:
            return np.zeros(0, dtype=bool)
        p = self.power()
        mult = eps.denominator ** p
        if vals.dtype != object and int(np.abs(vals).max()) * mult >= 2**62:
            vals = vals.astype(object)
        # ||V/denom||^p = vals / (q * denom^p) <= eps^p
        lhs = vals * mult
        rhs = eps.numerator ** p * q * denom ** p
        if vals.dtype != object and rhs >= 2**62:
            # every lhs is below 2**62 here
            return np.ones(len(vals), dtype=bool)
        return np.asarray(lhs <= rhs, dtype=bool)

    def _axis_extent(self) -> np.ndarray:
        """max |u_k| over the unit ball, per axis (an upper bound is enough)."""
        if self.kind in ("l1", "l2", "linf"):
            return np.ones(self.dim)
        if self.kind == "wlinf":
            return np.array([float(1 / w) for w in self.weights])
        from scipy.optimize import linprog

        A = np.array([[float(c) for c in row] for row in self._rows])
        b = np.ones(len(A))
        out = np.empty(self.dim)
        for k in range(self.dim):
            c = np.zeros(self.dim)
            c[k] = -1.0
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * self.dim, method="highs")
            out[k] = -res.fun if res.status == 0 else np.inf
        return out

    def lattice_ball(self, eps, cell) -> np.ndarray:
        """All integer vectors k with ||cell * k|| <= eps, shape (n, d)."""
        return _lattice_ball(self, frac(eps), frac(cell))

    # -- serialisation --------------------------------------------------------

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "dim": self.dim}
        if self.kind == "wlinf":
            out["weights"] = [str(w) for w in self.weights]
        if self.kind == "polytope":
            out["halfspaces"] = [[[str(c) for c in a], str(b)] for a, b in self.halfspaces]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Norm":
        kind = obj["kind"]
        dim = int(obj["dim"])
        if kind == "wlinf":
            return cls(kind, dim, weights=tuple(frac(w) for w in obj["weights"]))
        if kind == "polytope":
            hs = tuple((tuple(frac(c) for c in a), frac(b)) for a, b in obj["halfspaces"])
            return cls(kind, dim, halfspaces=hs)
        return cls(kind, dim)


def parse_norm(tag: str, dim: int = 1) -> Norm:
    """Parse a CLI norm tag: ``l1``, ``l2``, ``linf``, ``wlinf:1,2`` or a JSON file path."""
    tag = tag.strip()
    if tag in ("l1", "l2", "linf"):
        return Norm(tag, dim)
    if tag.startswith("wlinf:"):
        w = tuple(frac(x) for x in tag[len("wlinf:"):].split(","))
        return Norm("wlinf", len(w), weights=w)
    if tag.endswith(".json"):
        with open(tag) as fh:
            return Norm.from_json(json.load(fh))
    raise GeometryError(f"unknown norm tag {tag!r}")


@lru_cache(maxsize=256)
def _lattice_ball(norm: Norm, eps: Fraction, cell: Fraction) -> np.ndarray:
    if eps < 0:
        raise GeometryError("radius must be nonnegative")
    if cell <= 0:
        raise GeometryError("cell size must be positive")
    ext = norm._axis_extent()
    bounds = [int(math.floor(float(eps / cell) * e)) + 1 for e in ext]
    axes = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    grid = np.array(list(itertools.product(*axes)), dtype=np.int64).reshape(-1, norm.dim)
    # ||cell*k|| <= eps  <=>  ||k|| <= eps / cell
    keep = norm.batch_within(grid, 1, eps / cell)
    out = grid[keep]
    out.setflags(write=False)
    return out


def ball_membership(c, eps, norm: Norm, x) -> bool:
    """True iff ||x - c|| <= eps in ``norm``."""
    c, x = point(c), point(x)
    if len(c) != len(x) or len(x) != norm.dim:
        raise GeometryError("dimension mismatch")
    if frac(eps) < 0:
        raise GeometryError("radius must be nonnegative")
    return norm.within([a - b for a, b in zip(x, c)], eps)


# --------------------------------------------------------------------------
# Interval sets
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Interval:
    """A connected subset of R.  Infinite ends are always open."""

    lo: object
    hi: object
    lo_closed: bool = True
    hi_closed: bool = True

    @staticmethod
    def make(lo, hi, lo_closed=True, hi_closed=True):
        """Return the interval, or None when it is empty."""
        if lo == -INF:
            lo_closed = False
        if hi == INF:
            hi_closed = False
        if lo < hi or (lo == hi and lo_closed and hi_closed):
            return Interval(lo, hi, lo_closed, hi_closed)
        return None

    def contains(self, x) -> bool:
        if self.lo < x < self.hi:
            return True
        return (x == self.lo and self.lo_closed) or (x == self.hi and self.hi_closed)

    @property
    def closed(self) -> bool:
        return self.lo_closed and self.hi_closed

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{_fmt(self.lo)}, {_fmt(self.hi)}{']' if self.hi_closed else ')'}"


def _lo_key(iv: Interval):
    # closed left ends sort first among equal positions
    return (iv.lo, not iv.lo_closed)


def _connected(a: Interval, b: Interval) -> bool:
    """Whether a U b is connected, given a.lo <= b.lo."""
    return b.lo < a.hi or (b.lo == a.hi and (a.hi_closed or b.lo_closed))


def _merge_hi(a: Interval, b: Interval) -> tuple:
    if b.hi > a.hi:
        return b.hi, b.hi_closed
    if b.hi < a.hi:
        return a.hi, a.hi_closed
    return a.hi, a.hi_closed or b.hi_closed


class IntervalSet:
    """A finite union of intervals in canonical (sorted, merged) form."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable = ()):
        raw = []
        for iv in intervals:
            if isinstance(iv, Interval):
                raw.append(iv)
                continue
            lo, hi = iv
            lo, hi = _parse_endpoint(lo), _parse_endpoint(hi)
            if lo > hi:
                raise GeometryError(f"interval has lo > hi: [{lo}, {hi}]")
            made = Interval.make(lo, hi)
            if made is None:
                raise GeometryError(f"invalid interval [{_fmt(lo)}, {_fmt(hi)}]")
            raw.append(made)
        raw.sort(key=_lo_key)
        out: list[Interval] = []
        for iv in raw:
            if out and _connected(out[-1], iv):
                cur = out[-1]
                hi, hc = _merge_hi(cur, iv)
                out[-1] = Interval(cur.lo, hi, cur.lo_closed, hc)
            else:
                out.append(iv)
        self.intervals: tuple[Interval, ...] = tuple(out)

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls()

    @classmethod
    def real_line(cls) -> "IntervalSet":
        return cls([Interval(-INF, INF, False, False)])

    @classmethod
    def points(cls, xs) -> "IntervalSet":
        return cls([(frac(x), frac(x)) for x in xs])

    # -- basic protocol -----------------------------------------------------

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        return "IntervalSet(" + ", ".join(str(iv) for iv in self.intervals) + ")"

    @property
    def dim(self) -> int:
        return 1

    def is_empty(self) -> bool:
        return not self.intervals

    def is_closed(self) -> bool:
        return all(iv.closed for iv in self.intervals)

    def is_bounded(self) -> bool:
        return not self.intervals or (self.intervals[0].lo != -INF and self.intervals[-1].hi != INF)

    def contains(self, x) -> bool:
        if not isinstance(x, (int, Fraction)):
            (x,) = point(x)
        return any(iv.contains(x) for iv in self.intervals)

    def bounds(self):
        if not self.intervals:
            return None
        return self.intervals[0].lo, self.intervals[-1].hi

    def measure(self):
        return sum((iv.hi - iv.lo for iv in self.intervals), Fraction(0))

    # -- algebra -------------------------------------------------------------

    def complement(self, domain: "IntervalSet | None" = None) -> "IntervalSet":
        """Exact complement in R, or within ``domain`` when given."""
        out = []
        lo, lo_closed = -INF, False
        for iv in self.intervals:
            made = Interval.make(lo, iv.lo, lo_closed, not iv.lo_closed)
            if made is not None:
                out.append(made)
            lo, lo_closed = iv.hi, not iv.hi_closed
        made = Interval.make(lo, INF, lo_closed, False)
        if made is not None:
            out.append(made)
        comp = IntervalSet(out)
        return comp if domain is None else comp.intersection(domain)

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for a in self.intervals:
            for b in other.intervals:
                if a.lo > b.lo:
                    lo, lc = a.lo, a.lo_closed
                elif a.lo < b.lo:
                    lo, lc = b.lo, b.lo_closed
                else:
                    lo, lc = a.lo, a.lo_closed and b.lo_closed
                if a.hi < b.hi:
                    hi, hc = a.hi, a.hi_closed
                elif a.hi > b.hi:
                    hi, hc = b.hi, b.hi_closed
                else:
                    hi, hc = a.hi, a.hi_closed and b.hi_closed
                made = Interval.make(lo, hi, lc, hc)
                if made is not None:
                    out.append(made)
        return IntervalSet(out)

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.intervals + other.intervals)

    def difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.intersection(other.complement())

    def symmetric_difference(self, other: "IntervalSet") -> "IntervalSet":
        return self.difference(other).union(other.difference(self))

    def issubset(self, other: "IntervalSet") -> bool:
        return self.difference(other).is_empty()

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference
    __le__ = issubset

    # -- closure-equality -----------------------------------------------------

    def closure(self) -> "IntervalSet":
        return IntervalSet(Interval.make(iv.lo, iv.hi) or iv for iv in self.intervals)

    def interior(self) -> "IntervalSet":
        return IntervalSet(
            iv2 for iv in self.intervals if (iv2 := Interval.make(iv.lo, iv.hi, False, False)) is not None
        )

    def regularized(self) -> "IntervalSet":
        """cl(int(A)): drops isolated points and missing points (measure zero)."""
        return self.interior().closure()

    def closure_equal(self, other: "IntervalSet") -> bool:
        return self.regularized() == other.regularized()

    # -- morphology primitives (radius in coordinate units) ------------------

    def grow(self, r: Fraction) -> "IntervalSet":
        """A + [-r, r]."""
        if r < 0:
            raise GeometryError("radius must be nonnegative")
        return IntervalSet(Interval(iv.lo - r, iv.hi + r, iv.lo_closed, iv.hi_closed) for iv in self.intervals)

    def shrink(self, r: Fraction) -> "IntervalSet":
        """{x : [x-r, x+r] inside A}, component by component."""
        if r < 0:
            raise GeometryError("radius must be nonnegative")
        out = []
        for iv in self.intervals:
            made = Interval.make(iv.lo + r, iv.hi - r, iv.lo_closed, iv.hi_closed)
            if made is not None:
                out.append(made)
        return IntervalSet(out)

    def distance(self, x) -> Fraction:
        """inf |x - a| over a in A, in coordinate units."""
        if not self.intervals:
            raise GeometryError("empty set has no distance")
        if not isinstance(x, (int, Fraction)):
            (x,) = point(x)
        best = None
        for iv in self.intervals:
            if iv.lo <= x <= iv.hi:
                return Fraction(0)
            d = iv.lo - x if x < iv.lo else x - iv.hi
            best = d if best is None or d < best else best
        return best

    def meets_ball(self, x, r) -> bool:
        """Whether [x - r, x + r] intersects A."""
        if not isinstance(x, (int, Fraction)):
            (x,) = point(x)
        return not self.intersection(IntervalSet([(x - r, x + r)])).is_empty()

    # -- serialisation ----------------------------------------------------------

    def to_json(self) -> list:
        out = []
        for iv in self.intervals:
            if iv.closed:
                out.append([_fmt(iv.lo), _fmt(iv.hi)])
            else:
                out.append({"lo": _fmt(iv.lo), "hi": _fmt(iv.hi), "lo_closed": iv.lo_closed, "hi_closed": iv.hi_closed})
        return out

    @classmethod
    def from_json(cls, data) -> "IntervalSet":
        ivs = []
        for item in data:
            if isinstance(item, dict):
                made = Interval.make(
                    _parse_endpoint(item["lo"]),
                    _parse_endpoint(item["hi"]),
                    bool(item.get("lo_closed", True)),
                    bool(item.get("hi_closed", True)),
                )
                if made is None:
                    raise GeometryError(f"empty interval in input: {item}")
                ivs.append(made)
            else:
                if len(item) != 2:
                    raise GeometryError("intervals must be two-element arrays")
                ivs.append(tuple(item))
        return cls(ivs)


def canonicalize(raw) -> IntervalSet:
    """Sort and merge raw ``[lo, hi]`` pairs into canonical form."""
    return IntervalSet(raw)


# --------------------------------------------------------------------------
# Grid sets
# --------------------------------------------------------------------------


class GridSet:
    """A set of lattice points ``residue + cell * k`` (k integer).

    ``mask[i]`` stores membership of lattice index ``offset + i``; every lattice
    point beyond the mask belongs to the set iff ``outside`` is true.
    """

    __slots__ = ("cell", "residue", "offset", "mask", "outside")

    def __init__(self, origin, cell, mask, outside: bool = False):
        cell = frac(cell)
        if cell <= 0:
            raise GeometryError("cell size must be positive")
        mask = np.array(mask, dtype=bool)
        origin = point(origin)
        if mask.ndim != len(origin):
            raise GeometryError("mask dimensions do not match origin")
        residue = tuple(o % cell for o in origin)
        offset = tuple(int((o - r) / cell) for o, r in zip(origin, residue))
        self._init(cell, residue, offset, mask, outside)

    def _init(self, cell, residue, offset, mask, outside):
        self.cell = cell
        self.residue = residue
        self.offset = tuple(int(o) for o in offset)
        mask = np.ascontiguousarray(mask, dtype=bool)
        mask.setflags(write=False)
        self.mask = mask
        self.outside = bool(outside)

    @classmethod
    def _raw(cls, cell, residue, offset, mask, outside=False) -> "GridSet":
        obj = cls.__new__(cls)
        obj._init(cell, residue, offset, mask, outside)
        return obj

    @classmethod
    def from_indices(cls, indices, cell=1, residue=None, dim=None, outside=False) -> "GridSet":
        idx = np.array(list(indices), dtype=np.int64)
        if dim is None:
            dim = idx.shape[1] if idx.ndim == 2 else len(residue)
        residue = tuple(frac(r) for r in residue) if residue is not None else (Fraction(0),) * dim
        if idx.size == 0:
            return cls._raw(frac(cell), residue, (0,) * dim, np.zeros((0,) * dim, dtype=bool), outside)
        idx = idx.reshape(-1, dim)
        lo = idx.min(axis=0)
        shape = idx.max(axis=0) - lo + 1
        mask = np.zeros(tuple(shape), dtype=bool)
        mask[tuple((idx - lo).T)] = True
        if outside:
            mask = ~mask
        return cls._raw(frac(cell), residue, tuple(lo), mask, outside)

    @classmethod
    def box(cls, lo_index, shape, cell=1, residue=None) -> "GridSet":
        """Every lattice point with index in ``lo_index + [0, shape)``."""
        dim = len(shape)
        residue = tuple(frac(r) for r in residue) if residue is not None else (Fraction(0),) * dim
        return cls._raw(frac(cell), residue, tuple(lo_index), np.ones(tuple(shape), dtype=bool))

    def like(self, offset, mask, outside=None) -> "GridSet":
        return GridSet._raw(self.cell, self.residue, offset, mask, self.outside if outside is None else outside)

    # -- geometry of the lattice ---------------------------------------------

    @property
    def dim(self) -> int:
        return self.mask.ndim

    @property
    def origin(self) -> tuple[Fraction, ...]:
        return tuple(r + self.cell * o for r, o in zip(self.residue, self.offset))

    def lattice_key(self):
        return (self.cell, self.residue)

    def compatible(self, other: "GridSet") -> bool:
        return isinstance(other, GridSet) and self.lattice_key() == other.lattice_key() and self.dim == other.dim

    def _require(self, other):
        if not self.compatible(other):
            raise GeometryError("incompatible lattices")

    def index_of(self, x):
        """Integer lattice index of point x, or None when x is off the lattice."""
        x = point(x)
        if len(x) != self.dim:
            raise GeometryError("dimension mismatch")
        out = []
        for c, r in zip(x, self.residue):
            k = (c - r) / self.cell
            if k.denominator != 1:
                return None
            out.append(int(k))
        return tuple(out)

    def point_of(self, index) -> tuple[Fraction, ...]:
        return tuple(r + self.cell * k for r, k in zip(self.residue, index))

    def contains_index(self, index) -> bool:
        rel = [k - o for k, o in zip(index, self.offset)]
        if all(0 <= i < n for i, n in zip(rel, self.mask.shape)):
            return bool(self.mask[tuple(rel)])
        return self.outside

    def contains(self, x) -> bool:
        idx = self.index_of(x)
        return idx is not None and self.contains_index(idx)

    # -- canonical form -------------------------------------------------------

    def trimmed(self) -> "GridSet":
        """Smallest mask that still describes the set."""
        odd = ~self.mask if self.outside else self.mask
        if not odd.any():
            return self.like((0,) * self.dim, np.zeros((0,) * self.dim, dtype=bool))
        idx = np.nonzero(odd)
        lo = [int(i.min()) for i in idx]
        hi = [int(i.max()) + 1 for i in idx]
        sl = tuple(slice(a, b) for a, b in zip(lo, hi))
        return self.like(tuple(o + a for o, a in zip(self.offset, lo)), self.mask[sl])

    def _key(self):
        t = self.trimmed()
        return (t.cell, t.residue, t.outside, t.offset, t.mask.shape, t.mask.tobytes())

    def __eq__(self, other):
        return isinstance(other, GridSet) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        t = self.trimmed()
        return f"GridSet(cell={t.cell}, offset={t.offset}, shape={t.mask.shape}, count={t.count()}, outside={t.outside})"

    def is_empty(self) -> bool:
        return not self.outside and not self.mask.any()

    def is_bounded(self) -> bool:
        return not self.outside

    def count(self):
        return math.inf if self.outside else int(self.mask.sum())

    def indices(self) -> np.ndarray:
        """Member indices of a bounded set, shape (n, d), in lexicographic order."""
        if self.outside:
            raise GeometryError("unbounded grid set has infinitely many points")
        idx = np.argwhere(self.mask)
        return idx + np.array(self.offset, dtype=np.int64) if len(idx) else idx.reshape(0, self.dim)

    def points(self) -> list[tuple[Fraction, ...]]:
        return [self.point_of(k) for k in self.indices()]

    def bbox(self):
        """(lo, hi) inclusive index corners of the stored odd cells, or None."""
        t = self.trimmed()
        if t.mask.size == 0:
            return None
        return t.offset, tuple(o + n - 1 for o, n in zip(t.offset, t.mask.shape))

    def embed(self, lo, shape) -> np.ndarray:
        """Membership array over index box ``lo + [0, shape)``."""
        out = np.full(tuple(shape), self.outside, dtype=bool)
        src, dst = [], []
        for o, n, l, m in zip(self.offset, self.mask.shape, lo, shape):
            a, b = max(o, l), min(o + n, l + m)
            if a >= b:
                return out
            src.append(slice(a - o, b - o))
            dst.append(slice(a - l, b - l))
        out[tuple(dst)] = self.mask[tuple(src)]
        return out

    def _aligned(self, other: "GridSet"):
        self._require(other)
        lo = [min(a, b) for a, b in zip(self.offset, other.offset)]
        hi = [max(a + n, b + m) for a, n, b, m in zip(self.offset, self.mask.shape, other.offset, other.mask.shape)]
        shape = [h - l for l, h in zip(lo, hi)]
        return tuple(lo), self.embed(lo, shape), other.embed(lo, shape)

    # -- algebra -------------------------------------------------------------------

    def complement(self, domain: "GridSet | None" = None) -> "GridSet":
        comp = self.like(self.offset, ~self.mask, not self.outside)
        return comp if domain is None else comp.intersection(domain)

    def union(self, other):
        lo, a, b = self._aligned(other)
        return self.like(lo, a | b, self.outside or other.outside)

    def intersection(self, other):
        lo, a, b = self._aligned(other)
        return self.like(lo, a & b, self.outside and other.outside)

    def difference(self, other):
        lo, a, b = self._aligned(other)
        return self.like(lo, a & ~b, self.outside and not other.outside)

    def symmetric_difference(self, other):
        lo, a, b = self._aligned(other)
        return self.like(lo, a ^ b, self.outside != other.outside)

    def issubset(self, other) -> bool:
        return self.difference(other).is_empty()

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference
    __le__ = issubset

    def closure_equal(self, other) -> bool:
        return self == other

    # -- morphology primitives --------------------------------------------------------

    def minkowski(self, offsets: np.ndarray) -> "GridSet":
        """{a + k : a in A, k in offsets}; the extent grows, nothing is cut."""
        offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, self.dim)
        if len(offsets) == 0:
            return self.like((0,) * self.dim, np.zeros((0,) * self.dim, dtype=bool), False)
        r = np.abs(offsets).max(axis=0)
        shape = np.array(self.mask.shape)
        padded = np.pad(self.mask, [(2 * x, 2 * x) for x in r], constant_values=self.outside)
        out_shape = shape + 2 * r
        out = np.zeros(tuple(out_shape), dtype=bool)
        for k in offsets:
            # out[y] |= A[y - k]; y indexed from offset - r, padded from offset - 2r
            start = r - k
            sl = tuple(slice(s, s + n) for s, n in zip(start, out_shape))
            out |= padded[sl]
        return self.like(tuple(np.array(self.offset) - r), out)

    def minkowski_erode(self, offsets: np.ndarray) -> "GridSet":
        """{x : x + k in A for all k in offsets}."""
        offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, self.dim)
        r = np.abs(offsets).max(axis=0) if len(offsets) else np.zeros(self.dim, dtype=np.int64)
        shape = np.array(self.mask.shape)
        padded = np.pad(self.mask, [(2 * x, 2 * x) for x in r], constant_values=self.outside)
        out_shape = shape + 2 * r
        out = np.ones(tuple(out_shape), dtype=bool)
        for k in offsets:
            start = r + k
            sl = tuple(slice(s, s + n) for s, n in zip(start, out_shape))
            out &= padded[sl]
        return self.like(tuple(np.array(self.offset) - r), out)

    def _relative(self, x):
        """x in lattice-index units as (integer numerators, common denominator)."""
        x = point(x)
        if len(x) != self.dim:
            raise GeometryError("dimension mismatch")
        rel = [(c - r) / self.cell for c, r in zip(x, self.residue)]
        q = _lcm(v.denominator for v in rel)
        return np.array([int(v * q) for v in rel], dtype=object), q

    def distance(self, x, norm: Norm):
        """Exact min ||x - a|| over members (l2: Fraction when rational, else float)."""
        if self.is_empty():
            raise GeometryError("empty set has no distance")
        members = self._members_near(x, norm)
        num, q = self._relative(x)
        V = (members.astype(object) * q - num)
        vals, qq = norm.batch_powered(V)
        best = min(vals)
        # ||cell * V / q||^p = cell^p * best / (qq q^p)
        p = norm.power()
        powered = self.cell ** p * Fraction(int(best), qq * q ** p)
        return _isqrt_exact(powered) if p == 2 else powered

    def meets_ball(self, x, eps, norm: Norm) -> bool:
        """Whether the closed eps-ball around x contains a member."""
        if self.is_empty():
            return False
        members = self._members_near(x, norm)
        num, q = self._relative(x)
        V = members.astype(object) * q - num
        return bool(norm.batch_within(V, q, frac(eps) / self.cell).any())

    def _members_near(self, x, norm: Norm) -> np.ndarray:
        if not self.outside:
            return self.indices()
        if norm.kind == "polytope":
            raise GeometryError("unbounded grid distances need an absolute norm")
        # members past a one-cell ring around (mask extent + x) are never closer
        num, q = self._relative(x)
        xi = [int(n // q) for n in num]
        lo = [min(o, k) - 1 for o, k in zip(self.offset, xi)]
        hi = [max(o + n, k + 2) + 1 for o, n, k in zip(self.offset, self.mask.shape, xi)]
        arr = self.embed(lo, [h - l for l, h in zip(lo, hi)])
        return np.argwhere(arr) + np.array(lo, dtype=np.int64)

    # -- serialisation -------------------------------------------------------------

    def to_pbm(self) -> str:
        """Plain PBM (P1) of a 2-D mask; row i is the first index axis."""
        if self.dim != 2:
            raise GeometryError("PBM export needs a 2-D grid")
        h, w = self.mask.shape
        rows = [" ".join("1" if v else "0" for v in row) for row in self.mask]
        return f"P1\n{w} {h}\n" + "\n".join(rows) + "\n"

    def sidecar(self) -> dict:
        return {
            "origin": [str(c) for c in self.origin],
            "cell": str(self.cell),
            "extent": list(self.mask.shape),
            "outside": self.outside,
        }

    @classmethod
    def from_pbm(cls, text: str, sidecar: dict) -> "GridSet":
        tokens = [t for line in text.splitlines() if not line.startswith("#") for t in line.split()]
        if not tokens or tokens[0] != "P1":
            raise GeometryError("expected a plain PBM (P1) file")
        w, h = int(tokens[1]), int(tokens[2])
        bits = "".join(tokens[3:])
        if len(bits) != w * h:
            raise GeometryError("PBM pixel count does not match its header")
        mask = np.array([c == "1" for c in bits], dtype=bool).reshape(h, w)
        ext = sidecar.get("extent")
        if ext is not None and list(ext) != [h, w]:
            raise GeometryError("sidecar extent does not match the bitmap")
        return cls(sidecar["origin"], sidecar["cell"], mask, bool(sidecar.get("outside", False)))

    def to_json(self) -> dict:
        t = self.trimmed()
        return {
            "cell": str(t.cell),
            "residue": [str(r) for r in t.residue],
            "outside": t.outside,
            "indices": [[int(v) for v in k] for k in np.argwhere(t.mask if not t.outside else ~t.mask) + np.array(t.offset, dtype=np.int64)]
            if t.mask.size
            else [],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GridSet":
        dim = len(obj["residue"])
        return cls.from_indices(
            [tuple(k) for k in obj["indices"]],
            cell=obj["cell"],
            residue=obj["residue"],
            dim=dim,
            outside=bool(obj.get("outside", False)),
        )


# --------------------------------------------------------------------------
# representation-generic helpers
# --------------------------------------------------------------------------


def set_algebra(op: str, a, b=None, domain=None):
    """Apply ``union | intersection | complement | difference | symmetric-difference``."""
    if op == "complement":
        if domain is None:
            raise GeometryError("complement-within-domain needs a domain")
        return a.complement(domain)
    if b is None:
        raise GeometryError(f"{op} needs two operands")
    if type(a) is not type(b):
        raise GeometryError("operands use different representations")
    ops = {
        "union": a.union,
        "intersection": a.intersection,
        "difference": a.difference,
        "symmetric-difference": a.symmetric_difference,
    }
    if op not in ops:
        raise GeometryError(f"unknown set operation {op!r}")
    return ops[op](b)


def distance_to_set(x, A, norm: Norm):
    """inf ||x - a|| over a in A (exact; l2 on grids may return a float)."""
    if isinstance(A, IntervalSet):
        return A.distance(x) * norm.scale_1d()
    if A.is_empty():
        raise GeometryError("empty set has no distance")
    return A.distance(x, norm)


def meets_ball(x, eps, A, norm: Norm) -> bool:
    """Whether the closed ball B(x, eps) intersects A."""
    eps = frac(eps)
    if isinstance(A, IntervalSet):
        return A.meets_ball(x, eps / norm.scale_1d())
    return A.meets_ball(x, eps, norm)


def load_set(path: str):
    """Read an IntervalSet (.json list), GridSet (.json with indices) or PBM + sidecar."""
    if path.endswith(".pbm"):
        with open(path) as fh:
            text = fh.read()
        side = path[: -len(".pbm")] + ".json"
        with open(side) as fh:
            return GridSet.from_pbm(text, json.load(fh))
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        return GridSet.from_json(data)
    return IntervalSet.from_json(data)


def dump_set(A, path: str) -> None:
    if path.endswith(".pbm"):
        with open(path, "w") as fh:
            fh.write(A.to_pbm())
        with open(path[: -len(".pbm")] + ".json", "w") as fh:
            json.dump(A.sidecar(), fh, indent=2)
        return
    with open(path, "w") as fh:
        json.dump(A.to_json(), fh, indent=2)
        fh.write("\n")
