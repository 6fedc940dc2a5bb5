"""Double-description cones for the search over signed unit rows.

Differences ``z = x - y`` of two states in one compatibility class live in
the stoichiometric subspace ``S``. Imposing rows ``g`` (``g . z <= 0``) cuts
``S`` down to a polyhedral cone ``Z``; the unit row ``+e_k`` is implied by
the rows modulo conservation laws exactly when ``z_k <= 0`` on all of ``Z``
(Farkas). Keeping ``Z`` as lineality vectors plus rays makes each
implication test a sign scan over a handful of integer vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import gcd
from typing import Sequence

from .linalg import integer_row, rref


def _norm(v) -> tuple[int, ...]:
    g = reduce(gcd, (abs(a) for a in v), 0)
    return tuple(a // g for a in v) if g > 1 else tuple(v)


@dataclass(frozen=True)
class Cone:
    """``{sum of lin * free + sum of rays * nonneg}``; rays may be redundant."""

    lin: tuple[tuple[int, ...], ...]
    rays: tuple[tuple[int, ...], ...]

    @classmethod
    def subspace(cls, vectors: Sequence[Sequence[int]]) -> "Cone":
        """The linear span of ``vectors`` as a cone with no rays."""
        if not vectors:
            return cls((), ())
        red, _ = rref(vectors)
        lin = tuple(integer_row(row) for row in red if any(row))
        return cls(lin, ())

    def add_unit(self, j: int, sign: int) -> "Cone":
        """Intersect with ``sign * z_j <= 0``."""
        pivot = next((k for k, l in enumerate(self.lin) if l[j]), None)
        if pivot is not None:
            l0 = self.lin[pivot]
            a0 = sign * l0[j]
            if a0 > 0:
                l0 = tuple(-x for x in l0)
                a0 = -a0
            # project everything else onto {z_j = 0} along l0; l0 becomes a ray
            lin = []
            for k, l in enumerate(self.lin):
                if k == pivot:
                    continue
                al = sign * l[j]
                lin.append(_norm([-a0 * x + al * y for x, y in zip(l, l0)]) if al else l)
            rays = []
            for r in self.rays:
                ar = sign * r[j]
                rays.append(_norm([-a0 * x + ar * y for x, y in zip(r, l0)]) if ar else r)
            rays.append(_norm(l0))
            return Cone(tuple(lin), tuple(dict.fromkeys(rays)))
        pos, keep = [], []
        for r in self.rays:
            (pos if sign * r[j] > 0 else keep).append(r)
        if not pos:
            return self
        neg = [r for r in keep if sign * r[j] < 0]
        out = list(keep)
        for p in pos:
            ap = sign * p[j]
            for n in neg:
                an = sign * n[j]
                out.append(_norm([ap * x - an * y for x, y in zip(n, p)]))
        return Cone(self.lin, tuple(dict.fromkeys(out)))

    def generators(self):
        """Rays together with both orientations of the lineality vectors."""
        for l in self.lin:
            yield l
            yield tuple(-x for x in l)
        yield from self.rays

    def closure(self, d: int) -> frozenset:
        """Signed unit rows implied by the cone: (k, +1) iff z_k <= 0 on the cone."""
        out = set()
        for k in range(d):
            if any(l[k] for l in self.lin):
                continue
            vals = [r[k] for r in self.rays]
            if all(v <= 0 for v in vals):
                out.add((k, 1))
            if all(v >= 0 for v in vals):
                out.add((k, -1))
        return frozenset(out)

    def contains(self, v: Sequence[int], closure: frozenset) -> bool:
        """Membership of a vector of S, tested against the implied unit rows.

        Only valid when the cone is the one cut out by ``closure``.
        """
        for k, s in closure:
            if s * v[k] > 0:
                return False
        return True

    def face_sign(self, k: int, j: int, sign: int) -> bool:
        """Is ``sign * z_j <= 0`` on the face ``{z_k = 0}`` of the cone?"""
        for r in self.generators():
            if r[k] == 0 and sign * r[j] > 0:
                return False
        return True
