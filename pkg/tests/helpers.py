"""Shared fixtures data: expected structures, anchors and kinetics samplers."""

from __future__ import annotations

import random
import time
from fractions import Fraction
from pathlib import Path

from srn_order.network import KineticsPair, load_network
from srn_order.order import RateConstraint
from srn_order.search import SearchOptions, default_workers, search

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load(name):
    return load_network(FIXTURES / f"{name}.net")


def net_of(name):
    return load(name)[0]


# Expected structures, frozen by hand from the reference results: species
# tag per species name and one constraint per reaction in file order.
EXPECTED = {
    "rev": ("rev", {"S": "geq", "P": "leq"}, ["le", "ge"]),
    "sis": ("sis", {"S": "geq", "I": "leq"}, ["le", "ge"]),
    "mm_loose": ("mm", {"S": "geq", "E": "uncompared", "C": "uncompared", "P": "leq"},
                 ["le", "ge", "le"]),
    "mm_tight": ("mm", {"S": "geq", "E": "leq", "C": "geq", "P": "leq"}, ["eq", "eq", "le"]),
    "cascade_mixed": ("cascade", {
        "P0": "eq", "S1": "eq", "C1": "eq", "P1": "leq", "S2": "geq", "C2": "geq",
        "P2": "uncompared", "S3": "geq", "C3": "uncompared", "P3": "leq"},
        ["eq", "eq", "eq", "eq", "eq", "le", "le", "ge", "le"]),
    "cascade_last_layer": ("cascade", {
        "P0": "eq", "S1": "eq", "C1": "eq", "P1": "eq", "S2": "eq", "C2": "eq",
        "P2": "leq", "S3": "geq", "C3": "geq", "P3": "leq"},
        ["eq", "eq", "eq", "eq", "eq", "eq", "eq", "eq", "le"]),
    "cascade_equivalence": ("cascade", {
        "P0": "eq", "S1": "eq", "C1": "eq", "P1": "eq", "S2": "eq", "C2": "eq",
        "P2": "uncompared", "S3": "uncompared", "C3": "uncompared", "P3": "uncompared"},
        ["eq", "eq", "eq", "eq", "eq", "eq", "free", "free", "free"]),
    "competition": ("competition", {"A": "leq", "B": "geq"}, ["le", "ge", "le", "ge", "ge", "le", "ge", "le"]),
    "histone": ("histone", {"R": "geq", "D": "uncompared", "A": "leq", "P": "leq"},
            ["le", "ge", "le", "ge", "le", "ge", "le", "ge", "ge", "le", "le"]),
    "ergodic_a_equal": ("ergodic", {"A": "eq", "B": "geq"}, ["eq", "eq", "le", "le"]),
}

# class anchors for the box oracle; conserved totals kept small
ANCHORS = {
    "rev": (4, 4), "sis": (4, 4), "sir": (3, 3, 0), "mm": (3, 2, 1, 2), "rmm": (3, 2, 1, 2),
    "cascade": (1,) * 10, "competition": (0, 0), "histone": (1, 1, 1, 0), "ergodic": (0, 0), "birth_annihilation": (0,),
}


def matches(structure, net, key) -> bool:
    _, species, constraints = EXPECTED[key]
    got_species = {n: t.value for n, t in zip(net.names, structure.species)}
    got_constraints = [c.value for c in structure.constraints]
    return got_species == species and got_constraints == constraints


def find(structures, net, key):
    hits = [s for s in structures if matches(s, net, key)]
    return hits[0] if hits else None


def sample_compliant(structure, rng: random.Random) -> KineticsPair:
    """Random positive rational constants satisfying every constraint."""
    kx, ky = [], []
    for c in structure.constraints:
        y = Fraction(rng.randint(1, 6), 2)
        if c is RateConstraint.LE:
            x = y * Fraction(rng.randint(1, 4), 4)
        elif c is RateConstraint.GE:
            x = y * Fraction(rng.randint(4, 8), 4)
        elif c is RateConstraint.EQ:
            x = y
        else:
            x = Fraction(rng.randint(1, 6), 2)
        kx.append(x)
        ky.append(y)
    return KineticsPair(tuple(kx), tuple(ky))


def violating(structure, target: int) -> KineticsPair:
    """All constants 1 except reaction ``target``, whose constraint is broken by a factor 2."""
    n = len(structure.constraints)
    kx = [Fraction(1)] * n
    ky = [Fraction(1)] * n
    c = structure.constraints[target]
    if c is RateConstraint.GE:
        ky[target] = Fraction(2)
    elif c in (RateConstraint.LE, RateConstraint.EQ):
        kx[target] = Fraction(2)
    else:
        raise ValueError("a free reaction cannot be violated")
    return KineticsPair(tuple(kx), tuple(ky))


_REPORTS: dict = {}


def search_report(name, include_dominated=False):
    """Search once per process; the cascade takes about a minute."""
    key = (name, include_dominated)
    if key not in _REPORTS:
        _REPORTS[key] = search(net_of(name), SearchOptions(include_dominated=include_dominated))
    return _REPORTS[key]


def timed_search(name):
    """Fresh default search, timed, and remembered for later tests."""
    start = time.perf_counter()
    report = search(net_of(name), SearchOptions(workers=default_workers()))
    _REPORTS[(name, False)] = report
    return report, time.perf_counter() - start


# criterion number -> (status, detail); printed at the end of the run by conftest
ACCEPTANCE: dict = {}
