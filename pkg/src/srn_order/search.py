"""Brute-force search for simple preordering structures.

A candidate picks, for every species, one of: no row, ``+e_j``, ``-e_j`` or
both. Candidates are numbered by a base-4 counter with species ``j`` as the
``j``-th least significant digit (0 none, 1 ``+e_j``, 2 ``-e_j``, 3 both).
Candidates implying the same set of signed unit rows describe the same
preorder on every compatibility class, so only the first candidate of each
such closure is canonicalized and checked.

Two engines produce the closures. ``"cone"`` walks the candidate tree while
maintaining the cone of admissible differences ``x - y``, reusing subtrees
that reach an already seen closure. ``"lp"`` canonicalizes every candidate
with LP queries and is kept as a slow, obviously faithful reference.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .cone import Cone
from .linalg import conservation_basis
from .lp import SolverRegistry
from .order import (
    PreorderingStructure,
    RateConstraint,
    SpeciesTag,
    canonicalize,
    check_structure,
    closure_simple,
    unit_vector,
)

WORKERS_ENV = "SRN_ORDER_WORKERS"

_ROWS_FOR_DIGIT = {0: (), 1: (1,), 2: (-1,), 3: (1, -1)}


@dataclass(frozen=True)
class SearchOptions:
    include_dominated: bool = False
    include_equivalence_structures: bool = True
    workers: int = 1
    engine: str = "cone"

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.engine not in ("cone", "lp"):
            raise ValueError(f"unknown engine {self.engine!r}")


@dataclass
class SearchStats:
    candidates: int = 0  # size of the candidate space, 4^d - 1
    closures: int = 0  # distinct closures among candidates
    checked: int = 0  # closures sent through the full hypothesis check
    valid: int = 0  # valid non-trivial structures, mirrors included
    unfiltered: int = 0  # reported count without the domination filter
    lp_queries: int = 0
    lp_solves: int = 0

    def rendered(self) -> dict:
        """Counters that do not depend on worker count or caching."""
        return {"candidates": self.candidates, "closures": self.closures,
                "checked": self.checked, "valid": self.valid,
                "unfiltered": self.unfiltered}


@dataclass
class SearchReport:
    network: object
    structures: list
    equivalence_structures: list
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def all_structures(self) -> list:
        return self.structures + self.equivalence_structures


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if not value:
        return 1
    try:
        n = int(value)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {value!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {value!r}")
    return n


def candidate_rows(index: int, d: int) -> list[tuple[int, int]]:
    """Signed unit rows ``(j, sign)`` of the candidate with the given index."""
    rows = []
    for j in range(d):
        rows.extend((j, s) for s in _ROWS_FOR_DIGIT[(index >> (2 * j)) & 3])
    return rows


def enumerate_candidates(d: int) -> Iterator[list[tuple[int, ...]]]:
    """All 4^d - 1 non-empty candidates as lists of unit row vectors, in index order."""
    if d < 1:
        raise ValueError("need at least one species")
    for index in range(1, 4 ** d):
        yield [unit_vector(j, s, d) for j, s in candidate_rows(index, d)]


def mirror(s: PreorderingStructure) -> PreorderingStructure:
    return s.mirror()


def dominates(s1: PreorderingStructure, s2: PreorderingStructure) -> bool:
    """s1 concludes strictly more than s2 while assuming nothing s2 does not."""
    if not s1.closure > s2.closure:
        return False
    return all(c1.implied_by(c2) for c1, c2 in zip(s1.constraints, s2.constraints))


# -- closure enumeration -------------------------------------------------

def _cone_shard(vectors, d: int, high: int, high_digits: int):
    """Closures of candidates whose top ``high_digits`` species digits equal ``high``.

    Returns ``{closure: (first candidate index, cone)}``.
    """
    base = Cone.subspace(vectors)
    cones = {base.closure(d): base}
    step_memo = {}
    seen_nodes = set()
    found: dict = {}
    low = d - high_digits

    def step(K, j, digit):
        key = (K, j, digit)
        hit = step_memo.get(key)
        if hit is None:
            cone = cones[K]
            for s in _ROWS_FOR_DIGIT[digit]:
                if (j, s) not in K:
                    cone = cone.add_unit(j, s)
            hit = cone.closure(d)
            cones.setdefault(hit, cone)
            step_memo[key] = hit
        return hit

    # fixed high digits first
    K = base.closure(d)
    nonempty = False
    for j in range(d - 1, low - 1, -1):
        digit = (high >> (2 * (j - low))) & 3
        if digit:
            nonempty = True
            K = step(K, j, digit)
    offset = high << (2 * low)

    # depth-first over the remaining species, most significant first, so
    # leaves are met in increasing candidate index
    def dfs(j, K, nonempty, index):
        node = (j, K, nonempty)
        if node in seen_nodes:
            return
        seen_nodes.add(node)
        if j < 0:
            if nonempty and K not in found:
                found[K] = (index, cones[K])
            return
        for digit in range(4):
            nk = step(K, j, digit) if digit else K
            dfs(j - 1, nk, nonempty or digit > 0, index + (digit << (2 * j)))

    dfs(low - 1, K, nonempty, offset)
    return found


def _merge(parts) -> dict:
    out: dict = {}
    for part in parts:
        for K, (index, cone) in part.items():
            if K not in out or index < out[K][0]:
                out[K] = (index, cone)
    return out


def cone_closures(net, workers: int = 1) -> dict:
    d = net.dimension
    vectors = [list(v) for v in net.distinct_vectors]
    high_digits = 0
    if workers > 1:
        while 4 ** high_digits < 4 * workers and high_digits < d:
            high_digits += 1
    shards = range(4 ** high_digits)
    if workers > 1 and len(shards) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_cone_shard, *zip(*[(vectors, d, h, high_digits) for h in shards])))
    else:
        parts = [_cone_shard(vectors, d, h, high_digits) for h in shards]
    return _merge(parts)


def lp_closures(net, C, registry: SolverRegistry) -> dict:
    """Reference engine: canonicalize and close every candidate with LP queries."""
    d = net.dimension
    found: dict = {}
    for index in range(1, 4 ** d):
        rows = [unit_vector(j, s, d) for j, s in candidate_rows(index, d)]
        cm = canonicalize(rows, C, registry)
        K = closure_simple(cm, C, d, registry)
        if K not in found:
            found[K] = (index, None)
    return found


# -- per-closure checking -------------------------------------------------

def plausible(net, K: frozenset, cone: Cone) -> bool:
    """Necessary condition for any canonical form of ``K`` to pass the check.

    The exit hypotheses can be read off the cone: ``xi`` staying inside the
    relation is cone membership, a covered all-row is a subset test on K,
    and a covered single row is a sign test on the face it supports.
    """
    pos = {j for j, s in K if s == 1}
    neg = {j for j, s in K if s == -1}
    for reaction in net.reactions:
        xi = reaction.xi
        support = reaction.support
        ok = (cone.contains(xi, K) or pos.issuperset(support)
              or any(s * xi[k] == 1 and all(cone.face_sign(k, j, 1) for j in support)
                     for k, s in K))
        if not ok:
            return False
        mxi = tuple(-v for v in xi)
        ok = (cone.contains(mxi, K) or neg.issuperset(support)
              or any(s * xi[k] == -1 and all(cone.face_sign(k, j, -1) for j in support)
                     for k, s in K))
        if not ok:
            return False
    return True


def _check_chunk(net, C, items):
    """Check a list of (closure, first index, cone-or-None); returns structures and counters."""
    d = net.dimension
    registry = SolverRegistry()
    out = []
    checked = 0
    for K, index, cone in items:
        if cone is not None and not plausible(net, K, cone):
            continue
        rows = [unit_vector(j, s, d) for j, s in candidate_rows(index, d)]
        cm = canonicalize(rows, C, registry)
        if not cm:
            continue
        checked += 1
        result = check_structure(net, cm, C, registry=registry)
        if result.valid:
            out.append(PreorderingStructure.make(cm, K, result.constraints, d))
    stats = registry.stats
    return out, checked, stats.queries, stats.solves


_TAG_ORDER = {SpeciesTag.EQ: "e", SpeciesTag.GEQ: "g", SpeciesTag.LEQ: "l", SpeciesTag.UNCOMPARED: "u"}
_CON_ORDER = {RateConstraint.EQ: "e", RateConstraint.FREE: "f", RateConstraint.GE: "g", RateConstraint.LE: "l"}


def _mirror_key(s: PreorderingStructure):
    """Lower is preferred: LE on the first strict rate constraint, then species tags."""
    first = next((c for c in s.constraints if c in (RateConstraint.LE, RateConstraint.GE)), None)
    lead = {RateConstraint.LE: 0, None: 1, RateConstraint.GE: 2}[first]
    return lead, "".join(_TAG_ORDER[t] for t in s.species)


def sort_key(s: PreorderingStructure):
    return (-len(s.closure), "".join(_TAG_ORDER[t] for t in s.species),
            "".join(_CON_ORDER[c] for c in s.constraints))


def _meaning(s: PreorderingStructure):
    """What a structure asserts, ignoring which matrix represents it."""
    return s.closure, s.constraints


def pick_mirror_representatives(structures: list) -> list:
    by_closure = {s.closure: s for s in structures}
    out = []
    for s in structures:
        m = s.mirror()
        other = by_closure.get(m.closure)
        if other is None or _meaning(other) != _meaning(m) or _meaning(m) == _meaning(s):
            out.append(s)
        elif _mirror_key(s) < _mirror_key(m):
            out.append(s)
    return out


def domination_filter(structures: list) -> list:
    return [s for s in structures if not any(dominates(t, s) for t in structures if t is not s)]


def search(net, options: Optional[SearchOptions] = None) -> SearchReport:
    """All simple preordering structures of ``net`` after filtering."""
    options = options or SearchOptions()
    d = net.dimension
    C = conservation_basis(net).rows
    stats = SearchStats(candidates=4 ** d - 1)

    if options.engine == "lp":
        registry = SolverRegistry()
        closures = lp_closures(net, C, registry)
        stats.lp_queries += registry.stats.queries
        stats.lp_solves += registry.stats.solves
    else:
        closures = cone_closures(net, options.workers)
    stats.closures = len(closures)

    full = frozenset((j, s) for j in range(d) for s in (1, -1))
    empty = closure_simple((), C, d)
    items = sorted(((K, index, cone) for K, (index, cone) in closures.items()
                    if K != full and K != empty), key=lambda t: t[1])

    if options.workers > 1 and len(items) > 1:
        n = options.workers * 4
        chunks = [items[k::n] for k in range(n)]
        with ProcessPoolExecutor(max_workers=options.workers) as pool:
            results = list(pool.map(_check_chunk, [net] * n, [C] * n, chunks))
    else:
        results = [_check_chunk(net, C, items)]
    valid = []
    for found, checked, queries, solves in results:
        valid.extend(found)
        stats.checked += checked
        stats.lp_queries += queries
        stats.lp_solves += solves
    valid.sort(key=sort_key)
    stats.valid = len(valid)

    unfiltered = pick_mirror_representatives(valid)
    stats.unfiltered = len(unfiltered)
    if options.include_dominated:
        kept = unfiltered
    else:
        kept = pick_mirror_representatives(domination_filter(valid))
    kept.sort(key=sort_key)
    structures = [s for s in kept if not s.is_equivalence()]
    equivalences = [s for s in kept if s.is_equivalence()]
    if not options.include_equivalence_structures:
        equivalences = []
    return SearchReport(net, structures, equivalences, stats)
