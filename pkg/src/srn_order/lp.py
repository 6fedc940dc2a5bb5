"""Exact feasibility of ``D @ alpha = b`` under per-variable sign constraints.

The solver is a phase-I simplex with Bland's rule on a fraction-free
integer tableau: every row keeps its own positive scale, so pivots are
cross-multiplications followed by a GCD reduction and no rational numbers
are ever built inside the loop.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Optional, Sequence


class Sign(str, enum.Enum):
    NONNEG = "nonneg"
    NONPOS = "nonpos"
    FREE = "free"

    def flipped(self) -> "Sign":
        if self is Sign.NONNEG:
            return Sign.NONPOS
        if self is Sign.NONPOS:
            return Sign.NONNEG
        return self


class Status(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class FeasibilityResult:
    status: Status
    witness: Optional[tuple[Fraction, ...]] = None
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE

    def __bool__(self):
        return self.feasible


def _reduce_row(row: list[int]) -> list[int]:
    g = reduce(gcd, row, 0)
    if g > 1:
        return [v // g for v in row]
    return row


def _integer_system(D, b):
    """Scale each equation to integers."""
    rows, rhs = [], []
    for drow, bi in zip(D, b):
        vals = [Fraction(v) for v in drow] + [Fraction(bi)]
        den = reduce(lcm, (v.denominator for v in vals), 1)
        ints = [int(v * den) for v in vals]
        rows.append(ints[:-1])
        rhs.append(ints[-1])
    return rows, rhs


def feasible(D: Sequence[Sequence], b: Sequence, signs: Sequence[Sign]) -> FeasibilityResult:
    """Decide whether D alpha = b has a solution respecting ``signs``.

    ``D`` has one row per equation and one column per variable. The witness,
    when feasible, satisfies the system exactly.
    """
    nrows = len(D)
    nvars = len(signs)
    if nrows and any(len(r) != nvars for r in D):
        raise ValueError("sign pattern length does not match the column count of D")
    if len(b) != nrows:
        raise ValueError("right-hand side length does not match the row count of D")
    signs = [Sign(s) for s in signs]
    if all(Fraction(v) == 0 for v in b):
        return FeasibilityResult(Status.FEASIBLE, tuple(Fraction(0) for _ in range(nvars)))

    A, rhs = _integer_system(D, b)
    # expand variables into non-negative columns: (original index, multiplier)
    columns: list[tuple[int, int]] = []
    for k, s in enumerate(signs):
        if s is Sign.NONNEG:
            columns.append((k, 1))
        elif s is Sign.NONPOS:
            columns.append((k, -1))
        else:
            columns.append((k, 1))
            columns.append((k, -1))
    ncols = len(columns)

    # tableau rows: [coefficients..., rhs], rhs made non-negative
    tab = []
    for i in range(nrows):
        row = [A[i][k] * mult for k, mult in columns] + [rhs[i]]
        if row[-1] < 0:
            row = [-v for v in row]
        tab.append(_reduce_row(row))
    # artificial variables are ncols + i; they are dropped once they leave
    basis = [ncols + i for i in range(nrows)]
    obj = [sum(tab[i][j] for i in range(nrows)) for j in range(ncols + 1)]

    pivots = 0
    while True:
        enter = next((j for j in range(ncols) if obj[j] > 0), None)
        if enter is None:
            break
        leave = None
        for i in range(nrows):
            a = tab[i][enter]
            if a <= 0:
                continue
            if leave is None:
                leave = i
                continue
            lhs = tab[i][-1] * tab[leave][enter]
            rhs_ = tab[leave][-1] * a
            if lhs < rhs_ or (lhs == rhs_ and basis[i] < basis[leave]):
                leave = i
        if leave is None:
            # objective decreases without bound: impossible in phase I
            raise AssertionError("unbounded phase-I direction")
        prow = tab[leave]
        p = prow[enter]
        for i in range(nrows):
            if i == leave:
                continue
            f = tab[i][enter]
            if f:
                tab[i] = _reduce_row([p * x - f * y for x, y in zip(tab[i], prow)])
        f = obj[enter]
        obj = _reduce_row([p * x - f * y for x, y in zip(obj, prow)])
        basis[leave] = enter
        pivots += 1

    if obj[-1] != 0:
        return FeasibilityResult(Status.INFEASIBLE, None, pivots)

    alpha = [Fraction(0)] * nvars
    for i, var in enumerate(basis):
        if var >= ncols:
            continue
        value = Fraction(tab[i][-1], tab[i][var])
        k, mult = columns[var]
        alpha[k] += mult * value
    return FeasibilityResult(Status.FEASIBLE, tuple(alpha), pivots)


def verify_witness(D, b, signs, alpha) -> bool:
    """Exact substitution check of a witness."""
    for row, bi in zip(D, b):
        if sum(Fraction(x) * a for x, a in zip(row, alpha)) != Fraction(bi):
            return False
    for s, a in zip(signs, alpha):
        if Sign(s) is Sign.NONNEG and a < 0:
            return False
        if Sign(s) is Sign.NONPOS and a > 0:
            return False
    return True


@dataclass
class CacheStats:
    queries: int = 0
    hits: int = 0
    solves: int = 0


@dataclass
class FeasibilityCache:
    """Memoized feasibility queries against one fixed matrix ``D``.

    A query and its negation (b -> -b with NONNEG and NONPOS swapped) share
    one cache entry. Safe to use from several threads.
    """

    D: tuple[tuple[Fraction, ...], ...]
    stats: CacheStats = field(default_factory=CacheStats)
    enabled: bool = True

    def __post_init__(self):
        self.D = tuple(tuple(Fraction(v) for v in row) for row in self.D)
        self._memo: dict = {}
        self._lock = threading.Lock()

    def feasible(self, b: Sequence, signs: Sequence[Sign]) -> FeasibilityResult:
        b = tuple(Fraction(v) for v in b)
        signs = tuple(Sign(s) for s in signs)
        flip = False
        first = next((s for s in signs if s is not Sign.FREE), None)
        if first is Sign.NONPOS:
            flip = True
            key = (tuple(-v for v in b), tuple(s.flipped() for s in signs))
        else:
            key = (b, signs)
        with self._lock:
            self.stats.queries += 1
            hit = self._memo.get(key) if self.enabled else None
            if hit is not None:
                self.stats.hits += 1
        if hit is None:
            hit = feasible(self.D, key[0], key[1])
            with self._lock:
                self.stats.solves += 1
                if self.enabled:
                    self._memo[key] = hit
        if flip and hit.witness is not None:
            return FeasibilityResult(hit.status, tuple(-a for a in hit.witness), hit.pivots)
        return hit


def feasibility_cache(D) -> FeasibilityCache:
    return FeasibilityCache(D)


class SolverRegistry:
    """One FeasibilityCache per coefficient matrix, created on first use.

    With ``enabled=False`` every query is solved afresh, which is how the
    saving from caching is measured.
    """

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self._caches: dict = {}
        self._lock = threading.Lock()

    def get(self, D) -> FeasibilityCache:
        key = tuple(tuple(Fraction(v) for v in row) for row in D)
        with self._lock:
            cache = self._caches.get(key)
            if cache is None:
                cache = FeasibilityCache(key, enabled=self.enabled)
                self._caches[key] = cache
        return cache

    def feasible(self, D, b, signs) -> FeasibilityResult:
        return self.get(D).feasible(b, signs)

    @property
    def stats(self) -> CacheStats:
        total = CacheStats()
        for cache in self._caches.values():
            total.queries += cache.stats.queries
            total.hits += cache.stats.hits
            total.solves += cache.stats.solves
        return total
