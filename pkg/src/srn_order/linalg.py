"""Exact rational linear algebra on small dense matrices.

Matrices are plain lists of rows of ``Fraction``/``int``; everything here is
exact, so results can be trusted for 0/1 decisions downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(m: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in m]


def rref(m: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns.

    Pivots are chosen leftmost column first, topmost nonzero row first, so
    the result is deterministic.
    """
    a = to_fractions(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        lead = a[r][c]
        if lead != 1:
            a[r] = [v / lead for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m: Sequence[Sequence]) -> int:
    return len(rref(m)[1]) if m else 0


def normalize_row(v: Sequence[int]) -> tuple[int, ...]:
    """Divide an integer vector by the (positive) GCD of its entries."""
    g = reduce(gcd, (abs(int(x)) for x in v), 0)
    if g == 0:
        raise ValueError("cannot normalize the zero vector")
    return tuple(int(x) // g for x in v)


def integer_row(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to coprime integers with the same direction."""
    den = reduce(lcm, (Fraction(x).denominator for x in v), 1)
    return normalize_row([int(Fraction(x) * den) for x in v])


def nullspace(m: Sequence[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Integer basis of {v : m v = 0}, one vector per free column of the RREF."""
    if not m:
        return [tuple(int(i == k) for i in range(ncols)) for k in range(ncols)]
    red, pivots = rref(m)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(integer_row(v))
    return basis


@dataclass(frozen=True)
class ConservationBasis:
    """Integer conservation laws: rows orthogonal to every reaction vector."""

    rows: tuple[tuple[int, ...], ...]
    s: int  # dimension of the stoichiometric subspace
    d: int

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def stoichiometric_matrix(vectors: Sequence[Sequence[int]], d: int) -> list[list[int]]:
    """d x R matrix whose columns are the reaction vectors."""
    return [[v[j] for v in vectors] for j in range(d)]


def conservation_basis(net) -> ConservationBasis:
    """Left null space of the stoichiometric matrix as coprime integer rows."""
    d = net.dimension
    vectors = [r.xi for r in net.reactions]
    # left null space of N is the null space of N^T, whose rows are the xi
    rows = tuple(nullspace([list(v) for v in vectors], d)) if vectors else tuple(
        tuple(int(i == k) for i in range(d)) for k in range(d))
    return ConservationBasis(rows, d - len(rows), d)


def same_row_space(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    """True when two matrices span the same row space."""
    ra = [row for row in rref(a)[0] if any(row)] if a else []
    rb = [row for row in rref(b)[0] if any(row)] if b else []
    return ra == rb


def in_row_space(v: Sequence, basis: Sequence[Sequence]) -> bool:
    if not basis:
        return not any(v)
    return rank(list(basis) + [list(v)]) == rank(basis)
