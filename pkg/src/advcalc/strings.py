"""Swap perturbations on a finite string universe.

``perturb(A, B)`` is the image ``{b(a) : a in A, b in B}``; the identity is
*not* implicitly part of B.  Erosion is the complement-conjugate
``U - perturb(U - A)`` inside the universe U, which is exact because swaps
preserve length and U holds every string up to ``max_len``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .optimize import EXHAUSTIVE_LIMIT, SearchError, SearchResult
from .risk import LabeledDistribution

Pair = tuple[int, int]


class StringError(ValueError):
    pass


@dataclass(frozen=True)
class StringUniverse:
    alphabet: str
    max_len: int

    def __post_init__(self):
        if not 1 <= len(self.alphabet) <= 4 or len(set(self.alphabet)) != len(self.alphabet):
            raise StringError("alphabet must have 1 to 4 distinct symbols")
        if not 0 <= self.max_len <= 5:
            raise StringError("max_len must be between 0 and 5")

    def strings(self) -> list[str]:
        out = []
        for n in range(self.max_len + 1):
            out.extend("".join(t) for t in itertools.product(self.alphabet, repeat=n))
        return out

    def size(self) -> int:
        k = len(self.alphabet)
        return sum(k ** n for n in range(self.max_len + 1))

    def __contains__(self, w) -> bool:
        return isinstance(w, str) and len(w) <= self.max_len and all(c in self.alphabet for c in w)

    def all(self) -> frozenset:
        return frozenset(self.strings())


def swap_family(pairs: Iterable[Pair]) -> tuple[Pair, ...]:
    out = []
    for i, j in pairs:
        if i == j or i < 1 or j < 1:
            raise StringError(f"invalid swap pair ({i}, {j})")
        out.append((int(i), int(j)))
    return tuple(out)


def swap_apply(pair: Pair, w: str) -> str:
    """Exchange 1-based positions i and j when both exist, else leave w alone."""
    i, j = pair
    if max(i, j) > len(w):
        return w
    s = list(w)
    s[i - 1], s[j - 1] = s[j - 1], s[i - 1]
    return "".join(s)


def perturb(A: Iterable[str], B: Sequence[Pair]) -> frozenset:
    return frozenset(swap_apply(b, a) for a in A for b in B)


def erode(A: Iterable[str], B: Sequence[Pair], universe: StringUniverse) -> frozenset:
    U = universe.all()
    return U - perturb(U - frozenset(A), B)


def decreasing_intersection_check(chain: Sequence[Iterable[str]], B: Sequence[Pair]) -> bool:
    """Whether the intersection of the perturbed chain equals the perturbed intersection."""
    chain = [frozenset(c) for c in chain]
    if not chain:
        raise StringError("chain must be nonempty")
    for a, b in zip(chain, chain[1:]):
        if not b <= a:
            raise StringError("chain is not decreasing")
    lhs = frozenset.intersection(*(perturb(c, B) for c in chain))
    return lhs == perturb(frozenset.intersection(*chain), B)


def _check_atoms(D: LabeledDistribution, universe: StringUniverse):
    for a in D:
        if a.x not in universe:
            raise StringError(f"atom {a.x!r} is outside the universe")


def string_adversarial_risk(A: Iterable[str], D: LabeledDistribution, B: Sequence[Pair],
                            universe: StringUniverse) -> Fraction:
    _check_atoms(D, universe)
    A = frozenset(A)
    dil = perturb(A, B)
    cdil = perturb(universe.all() - A, B)
    total = Fraction(0)
    for a in D:
        total += a.p * ((1 - a.eta) * (a.x in dil) + a.eta * (a.x in cdil))
    return total


def string_standard_risk(A: Iterable[str], D: LabeledDistribution) -> Fraction:
    A = frozenset(A)
    return sum((a.p * ((1 - a.eta) if a.x in A else a.eta) for a in D), Fraction(0))


def orbit_closure(seeds: Iterable[str], B: Sequence[Pair]) -> list[str]:
    """Every string reachable from ``seeds`` by repeated swaps, in discovery order."""
    seen = list(dict.fromkeys(seeds))
    known = set(seen)
    k = 0
    while k < len(seen):
        for b in B:
            w = swap_apply(b, seen[k])
            if w not in known:
                known.add(w)
                seen.append(w)
        k += 1
    return seen


@dataclass
class StringSearchResult(SearchResult):
    cells: list = None


def string_oracle_search(D: LabeledDistribution, B: Sequence[Pair], universe: StringUniverse) -> StringSearchResult:
    """Exact minimizer over the orbit closure of the atoms plus one residue cell.

    Cells ``0..m-1`` are the closure strings (sorted); the last cell is every
    other string of the universe.  Ties go to the smallest bitmask.
    """
    _check_atoms(D, universe)
    closure = sorted(orbit_closure((a.x for a in D), B))
    n = len(closure) + 1
    if n > EXHAUSTIVE_LIMIT:
        raise SearchError("exhaustive budget exceeded")
    pos = {w: i for i, w in enumerate(closure)}
    den = math.lcm(*(w.denominator for a in D for w in (a.p * a.eta, a.p * (1 - a.eta))))
    masks = np.arange(1 << n, dtype=np.int64)
    acc = np.zeros(len(masks), dtype=np.int64)
    for a in D:
        reach = 0
        for b in B:
            reach |= 1 << pos[swap_apply(b, a.x)]
        w_in = int(a.p * (1 - a.eta) * den)
        w_out = int(a.p * a.eta * den)
        acc += w_in * ((masks & reach) != 0) + w_out * ((~masks & reach) != 0)
    k = int(np.argmin(acc))
    chosen = {closure[i] for i in range(n - 1) if k >> i & 1}
    if k >> (n - 1) & 1:
        chosen |= universe.all() - set(closure)
    risk = Fraction(int(acc[k]), den)
    return StringSearchResult(frozenset(chosen), risk, True, [(0, risk)], k, closure)


def random_subset(rng: random.Random, pool: Sequence[str], p: float = 0.5) -> frozenset:
    return frozenset(w for w in pool if rng.random() < p)
