"""Checking whether a matrix preorder is preserved, and which rate constraints it needs.

For a preorder ``x <= y  iff  M (x - y) <= 0`` the check builds
``D = (M^T | C^T)`` and asks, for each species ``j``, whether ``e_j`` is a
sign-constrained combination of the columns of ``D``. Those answers fill the
0/1 matrices ``A`` (non-negative multipliers) and ``B`` (non-positive
multipliers); each reaction is then classified by how ``M xi`` exits the
relation and whether the consumed species are covered by the matching row.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .linalg import ConservationBasis, normalize_row
from .lp import FeasibilityCache, FeasibilityResult, Sign, SolverRegistry, feasible

IntMatrix = tuple[tuple[int, ...], ...]


class RateConstraint(str, enum.Enum):
    LE = "le"
    GE = "ge"
    EQ = "eq"
    FREE = "free"

    def mirrored(self) -> "RateConstraint":
        return {RateConstraint.LE: RateConstraint.GE,
                RateConstraint.GE: RateConstraint.LE}.get(self, self)

    def implied_by(self, other: "RateConstraint") -> bool:
        """True when ``other`` is at least as strong as ``self``."""
        if self is RateConstraint.FREE:
            return True
        if other is RateConstraint.EQ:
            return True
        return self is other

    def holds(self, kx, ky) -> bool:
        if self is RateConstraint.LE:
            return kx <= ky
        if self is RateConstraint.GE:
            return kx >= ky
        if self is RateConstraint.EQ:
            return kx == ky
        return True


def combine(a: RateConstraint, b: RateConstraint) -> RateConstraint:
    if a is RateConstraint.FREE:
        return b
    if b is RateConstraint.FREE:
        return a
    return RateConstraint.EQ


class SpeciesTag(str, enum.Enum):
    LEQ = "leq"
    GEQ = "geq"
    EQ = "eq"
    UNCOMPARED = "uncompared"

    def mirrored(self) -> "SpeciesTag":
        return {SpeciesTag.LEQ: SpeciesTag.GEQ,
                SpeciesTag.GEQ: SpeciesTag.LEQ}.get(self, self)


# a closure row (j, +1) stands for e_j, i.e. x_j <= y_j; (j, -1) for -e_j
UnitRow = tuple[int, int]


def unit_vector(j: int, sign: int, d: int) -> tuple[int, ...]:
    return tuple(sign if k == j else 0 for k in range(d))


def species_tags(closure, d: int) -> tuple[SpeciesTag, ...]:
    tags = []
    for j in range(d):
        up, down = (j, 1) in closure, (j, -1) in closure
        if up and down:
            tags.append(SpeciesTag.EQ)
        elif up:
            tags.append(SpeciesTag.LEQ)
        elif down:
            tags.append(SpeciesTag.GEQ)
        else:
            tags.append(SpeciesTag.UNCOMPARED)
    return tuple(tags)


def _system(rows: Sequence[Sequence[int]], C: Sequence[Sequence[int]], d: int):
    """Columns are the rows of M then the rows of C; one equation per species."""
    cols = [tuple(r) for r in rows] + [tuple(c) for c in C]
    return tuple(tuple(col[j] for col in cols) for j in range(d))


def row_implied(row: Sequence[int], others: Sequence[Sequence[int]], C,
                registry: Optional[SolverRegistry] = None) -> bool:
    """Is ``row`` a non-negative combination of ``others`` plus any combination of C?"""
    C = list(C)
    d = len(row)
    if not others and not C:
        return not any(row)
    D = _system(others, C, d)
    signs = [Sign.NONNEG] * len(others) + [Sign.FREE] * len(C)
    if registry is not None:
        return registry.feasible(D, row, signs).feasible
    return feasible(D, row, signs).feasible


def canonicalize(M: Sequence[Sequence[int]], C, registry: Optional[SolverRegistry] = None) -> IntMatrix:
    """Coprime rows with every row implied by the others removed.

    Rows are scanned in index order and the scan restarts after each
    removal. The result is empty when C alone implies every row.
    """
    rows = []
    for r in M:
        if not any(r):
            raise ValueError("preorder matrix has a zero row")
        rows.append(normalize_row(r))
    changed = True
    while changed:
        changed = False
        for i in range(len(rows)):
            rest = rows[:i] + rows[i + 1:]
            if row_implied(rows[i], rest, C, registry):
                del rows[i]
                changed = True
                break
    return tuple(rows)


def closure_simple(M: Sequence[Sequence[int]], C, d: int,
                   registry: Optional[SolverRegistry] = None) -> frozenset:
    """All signed unit rows implied by M modulo the conservation laws."""
    out = set()
    for j in range(d):
        for sign in (1, -1):
            if row_implied(unit_vector(j, sign, d), M, C, registry):
                out.add((j, sign))
    return frozenset(out)


@dataclass
class ABMatrices:
    """Lazily filled A/B indicator matrices for one canonical M.

    Row ``m`` (0-based) is the extra all-constrained row.
    """

    M: IntMatrix
    C: tuple[tuple[int, ...], ...]
    d: int
    cache: FeasibilityCache = None
    _entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cache is None:
            self.cache = FeasibilityCache(_system(self.M, self.C, self.d))

    @property
    def m(self) -> int:
        return len(self.M)

    def _signs(self, i: int, sign: Sign) -> list[Sign]:
        out = [Sign.FREE if k == i else sign for k in range(self.m)]
        return out + [Sign.FREE] * len(self.C)

    def query(self, which: str, i: int, j: int) -> FeasibilityResult:
        sign = Sign.NONNEG if which == "A" else Sign.NONPOS
        return self.cache.feasible(unit_vector(j, 1, self.d), self._signs(i, sign))

    def entry(self, which: str, i: int, j: int) -> int:
        key = (which, i, j)
        if key not in self._entries:
            self._entries[key] = int(self.query(which, i, j).feasible)
        return self._entries[key]

    def covers(self, which: str, i: int, support: Sequence[int]) -> bool:
        return all(self.entry(which, i, j) for j in support)

    def full(self, which: str) -> list[list[int]]:
        return [[self.entry(which, i, j) for j in range(self.d)] for i in range(self.m + 1)]

    @property
    def A(self):
        return self.full("A")

    @property
    def B(self):
        return self.full("B")


def ab_for(M, C, d: int, registry: Optional[SolverRegistry] = None) -> ABMatrices:
    """A/B matrices whose solver is shared through ``registry`` when given."""
    M = tuple(tuple(r) for r in M)
    C = tuple(tuple(c) for c in C)
    cache = registry.get(_system(M, C, d)) if registry is not None else None
    return ABMatrices(M, C, d, cache)


def compute_AB(M, C, d: Optional[int] = None, cache: Optional[FeasibilityCache] = None) -> ABMatrices:
    """Fully evaluated A and B for a canonical M."""
    M = tuple(tuple(r) for r in M)
    C = tuple(tuple(c) for c in C)
    if d is None:
        d = len(M[0]) if M else len(C[0])
    ab = ABMatrices(M, C, d, cache)
    ab.full("A")
    ab.full("B")
    return ab


@dataclass(frozen=True)
class CheckResult:
    """Outcome of checking one preorder against a network.

    ``valid`` results carry one constraint per reaction; invalid ones name the
    first reaction whose hypotheses fail and the side (``"a"`` for exits
    through the first component, ``"b"`` for the second).
    """

    valid: bool
    constraints: tuple[RateConstraint, ...] = ()
    failed_reaction: Optional[int] = None
    failed_side: Optional[str] = None
    hypotheses: tuple[tuple[str, str], ...] = ()

    def __bool__(self):
        return self.valid


def _side(ab: ABMatrices, which: str, v: Sequence[int], support) -> Optional[str]:
    """Name the first satisfied hypothesis on one side, or None."""
    m = ab.m
    exits = [max(x, 0) for x in v] if which == "A" else [max(-x, 0) for x in v]
    tag = "a" if which == "A" else "b"
    if not any(exits):
        return tag + "1"
    if ab.covers(which, m, support):
        return tag + "2"
    if sum(exits) == 1:
        i = exits.index(1)
        if ab.covers(which, i, support):
            return tag + "3"
    return None


def check_structure(net, M, C, ab: Optional[ABMatrices] = None,
                    registry: Optional[SolverRegistry] = None) -> CheckResult:
    """Classify every reaction of ``net`` under the (canonical) preorder M."""
    M = tuple(tuple(r) for r in M)
    C = tuple(tuple(c) for c in C)
    d = net.dimension
    if ab is None:
        ab = ab_for(M, C, d, registry)
    constraints = []
    hyps = []
    for r, reaction in enumerate(net.reactions):
        xi = reaction.xi
        v = [sum(a * b for a, b in zip(row, xi)) for row in M]
        support = reaction.support
        ha = _side(ab, "A", v, support)
        if ha is None:
            return CheckResult(False, failed_reaction=r, failed_side="a")
        hb = _side(ab, "B", v, support)
        if hb is None:
            return CheckResult(False, failed_reaction=r, failed_side="b")
        ca = RateConstraint.FREE if ha == "a1" else RateConstraint.LE
        cb = RateConstraint.FREE if hb == "b1" else RateConstraint.GE
        constraints.append(combine(ca, cb))
        hyps.append((ha, hb))
    return CheckResult(True, tuple(constraints), hypotheses=tuple(hyps))


@dataclass(frozen=True)
class PreorderingStructure:
    """A preorder together with the rate constraints that preserve it."""

    matrix: IntMatrix
    closure: frozenset
    species: tuple[SpeciesTag, ...]
    constraints: tuple[RateConstraint, ...]

    @classmethod
    def make(cls, matrix, closure, constraints, d: int) -> "PreorderingStructure":
        return cls(tuple(tuple(r) for r in matrix), frozenset(closure),
                   species_tags(closure, d), tuple(constraints))

    def mirror(self) -> "PreorderingStructure":
        return PreorderingStructure(
            tuple(tuple(-a for a in row) for row in self.matrix),
            frozenset((j, -s) for j, s in self.closure),
            tuple(t.mirrored() for t in self.species),
            tuple(c.mirrored() for c in self.constraints),
        )

    @property
    def sorted_closure(self) -> list[UnitRow]:
        return sorted(self.closure, key=lambda u: (u[0], -u[1]))

    def is_equivalence(self) -> bool:
        return (all(c in (RateConstraint.EQ, RateConstraint.FREE) for c in self.constraints)
                and all(t in (SpeciesTag.EQ, SpeciesTag.UNCOMPARED) for t in self.species))

    def admits(self, kinetics) -> bool:
        """Do the rate constants satisfy every constraint?"""
        return all(c.holds(kx, ky) for c, kx, ky in zip(self.constraints, kinetics.kx, kinetics.ky))


def mirror(s: PreorderingStructure) -> PreorderingStructure:
    return s.mirror()


def analyze(net, M, C: ConservationBasis, canonical: bool = True):
    """Canonicalize (optionally), check, and package a user-supplied preorder.

    Returns ``(canonical_M, CheckResult, PreorderingStructure or None)``.
    """
    C = tuple(C)
    d = net.dimension
    M = tuple(normalize_row(r) for r in M)
    cm = canonicalize(M, C) if canonical else M
    result = check_structure(net, cm, C)
    if not result.valid:
        return cm, result, None
    closure = closure_simple(cm, C, d)
    return cm, result, PreorderingStructure.make(cm, closure, result.constraints, d)
