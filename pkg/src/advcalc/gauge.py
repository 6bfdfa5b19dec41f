"""The ray gauge lambda_C(x, v) = sup{t : x + t v in C} on convex bodies.

Bodies are closed, bounded and convex: Euclidean balls (any dimension) or
half-space polytopes ``{z : a_i . z <= b_i}`` with unit normals.  Everything
here works in doubles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


class GaugeError(ValueError):
    pass


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __init__(self, center, radius):
        c = np.asarray(center, dtype=float)
        if radius <= 0:
            raise GaugeError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(radius))

    @property
    def dim(self) -> int:
        return len(self.center)

    def translate(self, w) -> "Ball":
        return Ball(self.center + np.asarray(w, dtype=float), self.radius)

    def scale(self, s: float) -> "Ball":
        return Ball(self.center * s, self.radius * s)

    def contains(self, x, tol: float = 0.0) -> bool:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.center)) <= self.radius + tol

    def sample(self, rng, n: int) -> np.ndarray:
        d = self.dim
        u = rng.normal(size=(n, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = self.radius * rng.uniform(0, 1, n) ** (1 / d)
        return self.center + u * r[:, None]


class HalfspacePolytope:
    """``{z : A z <= b}`` with rows of A normalised to unit length."""

    def __init__(self, normals, offsets, interior=None):
        A = np.asarray(normals, dtype=float)
        b = np.asarray(offsets, dtype=float)
        if A.ndim != 2 or A.shape[1] not in (2, 3) or len(A) != len(b):
            raise GaugeError("need an (m, d) normal matrix with d in {2, 3}")
        norms = np.linalg.norm(A, axis=1)
        if np.any(norms == 0):
            raise GaugeError("zero normal")
        self.A = A / norms[:, None]
        self.b = b / norms
        self.interior = self._interior() if interior is None else np.asarray(interior, dtype=float)
        if np.any(self.A @ self.interior >= self.b):
            raise GaugeError("polytope has empty interior")
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            for s in (1.0, -1.0):
                if not math.isfinite(lam(self, self.interior, s * e)):
                    raise GaugeError("polytope is unbounded")

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def _interior(self) -> np.ndarray:
        # Chebyshev centre: max r s.t. a_i . z + r <= b_i
        from scipy.optimize import linprog

        d = self.A.shape[1]
        c = np.zeros(d + 1)
        c[-1] = -1.0
        A_ub = np.hstack([self.A, np.ones((len(self.A), 1))])
        res = linprog(c, A_ub=A_ub, b_ub=self.b, bounds=[(None, None)] * d + [(0, None)], method="highs")
        if res.status != 0:
            raise GaugeError("polytope is unbounded or infeasible")
        if res.x[-1] <= 0:
            raise GaugeError("polytope has empty interior")
        return res.x[:-1]

    def translate(self, w) -> "HalfspacePolytope":
        w = np.asarray(w, dtype=float)
        return HalfspacePolytope(self.A, self.b + self.A @ w, self.interior + w)

    def scale(self, s: float) -> "HalfspacePolytope":
        return HalfspacePolytope(self.A, self.b * s, self.interior * s)

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(self.A @ np.asarray(x, dtype=float) <= self.b + tol))

    def sample(self, rng, n: int) -> np.ndarray:
        lo, hi = self.bounding_box()
        out = []
        while len(out) < n:
            z = rng.uniform(lo, hi, size=(4 * n, self.dim))
            out.extend(z[np.all(z @ self.A.T <= self.b, axis=1)])
        return np.array(out[:n])

    def bounding_box(self):
        lo, hi = np.empty(self.dim), np.empty(self.dim)
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            hi[k] = self.interior[k] + lam(self, self.interior, e)
            lo[k] = self.interior[k] - lam(self, self.interior, -e)
        return lo, hi


def box(lo, hi) -> HalfspacePolytope:
    """Axis-aligned box as a polytope (e.g. the l-infinity ball)."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    d = len(lo)
    eye = np.eye(d)
    return HalfspacePolytope(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))


def ray_interval(C, x, v) -> tuple[float, float]:
    """(t_min, t_max) with x + t v in C exactly for t in [t_min, t_max]."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if len(x) != C.dim or len(v) != C.dim:
        raise GaugeError("dimension mismatch")
    if not np.any(v):
        raise GaugeError("direction must be nonzero")
    if isinstance(C, Ball):
        w = x - C.center
        a = float(v @ v)
        b = 2.0 * float(v @ w)
        c = float(w @ w) - C.radius ** 2
        disc = b * b - 4 * a * c
        if disc < 0:
            raise GaugeError("line disjoint from body")
        sq = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(sq, b))
        if q == 0:
            return 0.0, 0.0
        r1, r2 = q / a, c / q
        return min(r1, r2), max(r1, r2)
    av = C.A @ v
    slack = C.b - C.A @ x
    pos, neg, par = av > 0, av < 0, av == 0
    if np.any(slack[par] < 0):
        raise GaugeError("line disjoint from body")
    with np.errstate(over="ignore"):
        t_max = float(np.min(slack[pos] / av[pos])) if pos.any() else math.inf
        t_min = float(np.max(slack[neg] / av[neg])) if neg.any() else -math.inf
    if t_min > t_max:
        raise GaugeError("line disjoint from body")
    return t_min, t_max


def lam(C, x, v) -> float:
    """lambda_C(x, v) = sup{t in R : x + t v in C}."""
    return ray_interval(C, x, v)[1]


def lam_batch(C, X: np.ndarray, v) -> np.ndarray:
    """lambda_C at many points with one direction (points whose line misses C give nan)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    v = np.asarray(v, dtype=float)
    if isinstance(C, Ball):
        W = X - C.center
        a = float(v @ v)
        b = 2.0 * (W @ v)
        c = np.einsum("ij,ij->i", W, W) - C.radius ** 2
        disc = b * b - 4 * a * c
        sq = np.sqrt(np.where(disc >= 0, disc, np.nan))
        q = -0.5 * (b + np.copysign(sq, b))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.maximum(q / a, np.where(q != 0, c / q, q / a))
        return out
    av = C.A @ v
    slack = C.b[None, :] - X @ C.A.T
    pos = av > 0
    if not pos.any():
        return np.full(len(X), math.inf)
    return np.min(slack[:, pos] / av[pos], axis=1)


# --------------------------------------------------------------------------
# probes
# --------------------------------------------------------------------------


@dataclass
class ProbeReport:
    samples: int
    max_violation: float
    min_value: float
    rows: list

    def ok(self, tol: float = 1e-9) -> bool:
        return self.max_violation <= tol and self.min_value >= -tol

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sample", "lhs", "rhs", "violation"])
            for row in self.rows:
                w.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def _unit(rng, d):
    v = rng.normal(size=d)
    return v / np.linalg.norm(v)


def concavity_probe(C, samples: int, seed: int = 0, v=None) -> ProbeReport:
    """Sample x, y in C and t in [0, 1]; measure
    ``t lam(x) + (1 - t) lam(y) - lam(t x + (1 - t) y)`` (positive = violation)."""
    if samples < 1:
        raise GaugeError("need at least one sample")
    rng = np.random.default_rng(seed)
    v = _unit(rng, C.dim) if v is None else np.asarray(v, dtype=float)
    X = C.sample(rng, samples)
    Y = C.sample(rng, samples)
    t = rng.uniform(0, 1, samples)
    Z = t[:, None] * X + (1 - t[:, None]) * Y
    lx, ly, lz = lam_batch(C, X, v), lam_batch(C, Y, v), lam_batch(C, Z, v)
    rhs = t * lx + (1 - t) * ly
    viol = rhs - lz
    rows = [(i, lz[i], rhs[i], viol[i]) for i in range(samples)]
    min_val = float(min(lx.min(), ly.min(), lz.min()))
    return ProbeReport(samples, float(viol.max()), min_val, rows)


@dataclass
class ApproxResult:
    polytope: HalfspacePolytope
    sides: int
    sampled_gap: float
    min_gap: float


def regular_circumscribed(ball: Ball, k: int, phase: float = 0.0) -> HalfspacePolytope:
    """Regular k-gon whose edges are tangent to a 2-D ball."""
    if ball.dim != 2:
        raise GaugeError("circumscribed polygons are planar")
    ang = phase + 2 * np.pi * np.arange(k) / k
    A = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    # cos(pi/2) is 6e-17, not 0; such residue would make an edge look non-parallel
    A[np.abs(A) < 1e-15] = 0.0
    return HalfspacePolytope(A, A @ ball.center + ball.radius, ball.center)


def gap_samples(ball: Ball, v, n: int, seed: int = 0) -> np.ndarray:
    """Half uniform points in the disc, half on its boundary circle."""
    rng = np.random.default_rng(seed)
    inner = ball.sample(rng, n - n // 2)
    ang = 2 * np.pi * (np.arange(n // 2) + rng.uniform(0, 1)) / max(n // 2, 1)
    rim = ball.center + ball.radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return np.vstack([inner, rim])


def approximate_by_polytope(ball: Ball, delta: float, v=(1.0, 0.0), samples: int = 10_000, seed: int = 0,
                            max_sides: int = 1 << 20) -> ApproxResult:
    """Circumscribing regular polygon P with sampled ``lam_P - lam_C < delta / 2``.

    Sides double from 8.  Containment ``C <= P`` holds by construction since
    every edge is a tangent line.
    """
    if not delta > 0:
        raise GaugeError("delta must be positive")
    if ball.dim != 2:
        raise GaugeError("polytope approximation is implemented in the plane")
    v = np.asarray(v, dtype=float)
    X = gap_samples(ball, v, samples, seed)
    lc = lam_batch(ball, X, v)
    k = 8
    while True:
        P = regular_circumscribed(ball, k)
        gap = lam_batch(P, X, v) - lc
        if gap.max() < delta / 2 or k >= max_sides:
            return ApproxResult(P, k, float(gap.max()), float(gap.min()))
        k *= 2


@dataclass
class SemicontinuityReport:
    values: list
    limit_value: float
    limsup: float
    upper_ok: bool
    continuous: bool | None


def semicontinuity_probe(C, path, x, v, tol: float = 1e-9) -> SemicontinuityReport:
    """Compare lam along ``path`` (points of C converging to x) with lam(x).

    limsup is estimated as the max over the final quarter of the path.  For
    polytopes the final value must also match lam(x) within ``tol``.
    """
    vals = [lam(C, p, v) for p in path]
    lx = lam(C, x, v)
    tail = vals[-max(1, len(vals) // 4):]
    limsup = max(tail)
    cont = None
    if isinstance(C, HalfspacePolytope):
        cont = abs(vals[-1] - lx) <= tol
    return SemicontinuityReport(vals, lx, limsup, limsup <= lx + tol, cont)


def random_polytope(rng, m: int | None = None, dim: int = 2) -> HalfspacePolytope:
    """Bounded random polygon around the origin: sorted normal angles with gaps < pi."""
    if dim != 2:
        raise GaugeError("random polytopes are planar")
    m = m or int(rng.integers(5, 10))
    while True:
        ang = np.sort(rng.uniform(0, 2 * np.pi, m))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
        if gaps.max() < np.pi * 0.9:
            break
    A = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    b = rng.uniform(0.5, 2.0, m)
    return HalfspacePolytope(A, b)


def body_from_json(obj: dict):
    kind = obj.get("kind", "ball")
    if kind == "ball":
        return Ball(obj["center"], obj["radius"])
    if kind == "polytope":
        return HalfspacePolytope(obj["normals"], obj["offsets"], obj.get("interior"))
    if kind == "box":
        return box(obj["lo"], obj["hi"])
    raise GaugeError(f"unknown body kind {kind!r}")
