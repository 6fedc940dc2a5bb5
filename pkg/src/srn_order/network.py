"""Reaction networks with mass-action kinetics.

Networks are written in a small line-oriented text format::

    # Michaelis-Menten
    S + E <-> C   kX=1 kY=2 kX2=1 kY2=1
    C -> E + P    kX=1/2 kY=0.5

Species are ordered by first appearance unless a ``species:`` line
declares (a prefix of) the ordering explicitly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

MAX_COEFFICIENT = 10**6

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")
_TERM_RE = re.compile(r"(\d*)\s*([A-Za-z_][A-Za-z0-9_]*)$")
_RATE_RE = re.compile(r"(kX2|kY2|kX|kY)\s*=\s*(\S+)$")


class ParseError(ValueError):
    """Malformed network text; carries the 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Species:
    index: int
    name: str


@dataclass(frozen=True)
class Reaction:
    source: tuple[int, ...]
    product: tuple[int, ...]
    label: str

    @property
    def xi(self) -> tuple[int, ...]:
        return reaction_vector(self)

    @property
    def support(self) -> tuple[int, ...]:
        """Species indices consumed by the reaction (supp of the source)."""
        return tuple(j for j, c in enumerate(self.source) if c)


def reaction_vector(r: Reaction) -> tuple[int, ...]:
    """Net change in species counts when ``r`` fires."""
    return tuple(p - s for s, p in zip(r.source, r.product))


def format_complex(coeffs: Sequence[int], names: Sequence[str]) -> str:
    terms = []
    for c, name in zip(coeffs, names):
        if c == 1:
            terms.append(name)
        elif c > 1:
            terms.append(f"{c}{name}")
    return "+".join(terms) if terms else "0"


@dataclass(frozen=True)
class KineticsPair:
    """Rate constants of the two compared models, one entry per reaction."""

    kx: tuple[Fraction, ...]
    ky: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.kx) != len(self.ky):
            raise ValueError("kx and ky must have the same length")
        for k in self.kx + self.ky:
            if k < 0:
                raise ValueError(f"negative rate constant {k}")

    @classmethod
    def of(cls, kx: Iterable, ky: Iterable) -> "KineticsPair":
        return cls(tuple(Fraction(k) for k in kx), tuple(Fraction(k) for k in ky))

    def swapped(self) -> "KineticsPair":
        return KineticsPair(self.ky, self.kx)


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]
    distinct_vectors: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        if not self.distinct_vectors:
            seen = dict.fromkeys(r.xi for r in self.reactions)
            object.__setattr__(self, "distinct_vectors", tuple(seen))

    @classmethod
    def build(cls, species_names: Sequence[str],
              reactions: Sequence[tuple[Sequence[int], Sequence[int]]]) -> "ReactionNetwork":
        """Build from names and (source, product) coefficient pairs without validation."""
        names = list(species_names)
        species = tuple(Species(i, n) for i, n in enumerate(names))
        rs = []
        for src, prod in reactions:
            src, prod = tuple(int(c) for c in src), tuple(int(c) for c in prod)
            if len(src) != len(names) or len(prod) != len(names):
                raise ValueError("complex length does not match species count")
            label = f"{format_complex(src, names)}->{format_complex(prod, names)}"
            rs.append(Reaction(src, prod, label))
        return cls(species, tuple(rs))

    @property
    def dimension(self) -> int:
        return len(self.species)

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.species]

    @property
    def labels(self) -> list[str]:
        return [r.label for r in self.reactions]

    def index_of(self, name: str) -> int:
        for s in self.species:
            if s.name == name:
                return s.index
        raise KeyError(name)

    def reaction_index(self, label: str) -> int:
        for i, r in enumerate(self.reactions):
            if r.label == label:
                return i
        raise KeyError(label)

    def to_text(self, kinetics: Optional[KineticsPair] = None) -> str:
        """Serialize back to the network DSL (one reaction per line)."""
        lines = ["species: " + " ".join(self.names)]
        for i, r in enumerate(self.reactions):
            line = r.label.replace("+", " + ").replace("->", " -> ")
            if kinetics is not None:
                line += f"  kX={kinetics.kx[i]} kY={kinetics.ky[i]}"
            lines.append(line)
        return "\n".join(lines) + "\n"

    def to_dict(self, kinetics: Optional[KineticsPair] = None) -> dict:
        out = {"species": self.names, "reactions": []}
        for i, r in enumerate(self.reactions):
            entry = {"label": r.label, "source": list(r.source), "product": list(r.product)}
            if kinetics is not None:
                entry["kX"] = str(kinetics.kx[i])
                entry["kY"] = str(kinetics.ky[i])
            out["reactions"].append(entry)
        return out

    def to_json(self, kinetics: Optional[KineticsPair] = None) -> str:
        return json.dumps(self.to_dict(kinetics), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> tuple["ReactionNetwork", Optional[KineticsPair]]:
        pairs = [(e["source"], e["product"]) for e in data["reactions"]]
        net = cls.build(data["species"], pairs)
        kin = None
        if data["reactions"] and all("kX" in e for e in data["reactions"]):
            kin = KineticsPair.of([Fraction(e["kX"]) for e in data["reactions"]],
                                  [Fraction(e["kY"]) for e in data["reactions"]])
        return net, kin


def _parse_rate(text: str, line: int, column: int) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"invalid rate constant {text!r}", line, column) from None
    if value < 0:
        raise ParseError(f"negative rate constant {text}", line, column)
    return value


def _parse_complex(text: str, line: int, column: int) -> dict[str, int]:
    text = text.strip()
    if not text:
        raise ParseError("empty complex (use 0 for the zero complex)", line, column)
    if text == "0":
        return {}
    out: dict[str, int] = {}
    offset = column
    for raw in text.split("+"):
        term = raw.strip()
        m = _TERM_RE.match(term)
        if not m:
            raise ParseError(f"malformed term {term!r}", line, offset)
        coeff = int(m.group(1)) if m.group(1) else 1
        if coeff == 0:
            raise ParseError(f"zero coefficient in {term!r}", line, offset)
        if coeff > MAX_COEFFICIENT:
            raise ParseError(f"coefficient {coeff} exceeds {MAX_COEFFICIENT}", line, offset)
        name = m.group(2)
        out[name] = out.get(name, 0) + coeff
        if out[name] > MAX_COEFFICIENT:
            raise ParseError(f"coefficient of {name} exceeds {MAX_COEFFICIENT}", line, offset)
        offset += len(raw) + 1
    return out


def parse_network(text: str) -> tuple[ReactionNetwork, Optional[KineticsPair]]:
    """Parse network DSL text into a network and, if annotated, its kinetics.

    Rate annotations must be given on every reaction or on none of them.
    Raises ParseError on any malformed line.
    """
    declared: list[str] = []
    order: dict[str, int] = {}
    raw_reactions = []  # (src, prod, kx, ky, line)

    def see(name):
        if name not in order:
            order[name] = len(order)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("species:"):
            if raw_reactions:
                raise ParseError("species declaration must precede reactions", lineno)
            for name in stripped[len("species:"):].replace(",", " ").split():
                if not _NAME_RE.match(name):
                    raise ParseError(f"invalid species name {name!r}", lineno)
                if name in order:
                    raise ParseError(f"species {name} declared twice", lineno)
                declared.append(name)
                see(name)
            continue

        if "<->" in line:
            arrow, reversible = "<->", True
        elif "->" in line:
            arrow, reversible = "->", False
        else:
            raise ParseError("missing reaction arrow", lineno, len(raw) - len(raw.lstrip()) + 1)
        left, right = line.split(arrow, 1)
        if "->" in right:
            raise ParseError("more than one arrow", lineno, len(left) + len(arrow) + right.index("->") + 1)

        # rate annotations are whitespace-separated key=value tokens at the end
        tokens = right.split()
        rates: dict[str, Fraction] = {}
        while tokens and "=" in tokens[-1]:
            tok = tokens.pop()
            col = line.rindex(tok) + 1
            m = _RATE_RE.match(tok)
            if not m:
                raise ParseError(f"malformed rate annotation {tok!r}", lineno, col)
            if m.group(1) in rates:
                raise ParseError(f"duplicate {m.group(1)}", lineno, col)
            rates[m.group(1)] = _parse_rate(m.group(2), lineno, col)
        # tolerate "kX = 1" spacing by re-joining stray fragments
        prod_text = " ".join(tokens)
        if "=" in prod_text:
            raise ParseError("malformed rate annotation", lineno, line.index("=") + 1)

        src = _parse_complex(left, lineno, 1)
        prod = _parse_complex(prod_text, lineno, len(left) + len(arrow) + 1)
        for name in list(src) + list(prod):
            see(name)

        keys = set(rates)
        if reversible:
            allowed = {"kX", "kY", "kX2", "kY2"}
        else:
            allowed = {"kX", "kY"}
            if keys - allowed:
                raise ParseError("kX2/kY2 only apply to <-> reactions", lineno)
        if keys and keys != allowed:
            missing = ", ".join(sorted(allowed - keys))
            raise ParseError(f"incomplete rate annotation (missing {missing})", lineno)
        if src == prod:
            raise ParseError("reaction between identical complexes", lineno)

        has = bool(keys)
        raw_reactions.append((src, prod, rates.get("kX"), rates.get("kY"), has, lineno))
        if reversible:
            raw_reactions.append((prod, src, rates.get("kX2"), rates.get("kY2"), has, lineno))

    if not raw_reactions:
        raise ParseError("no reactions", max(1, len(text.splitlines())))
    annotated = {r[4] for r in raw_reactions}
    if len(annotated) > 1:
        lineno = next(r[5] for r in raw_reactions if not r[4])
        raise ParseError("rate constants must be given on all reactions or none", lineno)

    names = sorted(order, key=order.get)
    pairs = []
    seen = set()
    for src, prod, _, _, _, lineno in raw_reactions:
        s = tuple(src.get(n, 0) for n in names)
        p = tuple(prod.get(n, 0) for n in names)
        if (s, p) in seen:
            raise ParseError("duplicate reaction", lineno)
        seen.add((s, p))
        pairs.append((s, p))
    net = ReactionNetwork.build(names, pairs)
    kin = None
    if annotated == {True}:
        kin = KineticsPair(tuple(r[2] for r in raw_reactions), tuple(r[3] for r in raw_reactions))
    return net, kin


def load_network(path) -> tuple[ReactionNetwork, Optional[KineticsPair]]:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def falling_factorial(x: int, n: int) -> int:
    out = 1
    for k in range(n):
        out *= x - k
    return out


def propensity(net: ReactionNetwork, constants: Sequence, r: int, x: Sequence[int]):
    """Mass-action rate of reaction ``r`` at state ``x``.

    Exact when ``constants`` are Fractions or ints.
    """
    reaction = net.reactions[r]
    value = constants[r]
    if not value:
        return value * 0
    for j in reaction.support:
        value *= falling_factorial(x[j], reaction.source[j])
        if not value:
            break
    return value


def aggregate_rate(net: ReactionNetwork, constants: Sequence, x: Sequence[int], xi: Sequence[int]):
    """Total rate of the jump x -> x + xi: sum of propensities sharing that vector."""
    xi = tuple(xi)
    total = 0
    for r, reaction in enumerate(net.reactions):
        if reaction.xi == xi:
            total += propensity(net, constants, r, x)
    return total


def validate_network(net: ReactionNetwork) -> list[str]:
    """Non-redundancy diagnostics; an empty list means the network is well formed."""
    problems = []
    used = set()
    for r in net.reactions:
        used.update(j for j, c in enumerate(r.source) if c)
        used.update(j for j, c in enumerate(r.product) if c)
        if r.source == r.product:
            problems.append(f"reaction {r.label}: identical complexes")
    for s in net.species:
        if s.index not in used:
            problems.append(f"species {s.name} appears in no complex")
    names = [s.name for s in net.species]
    if len(set(names)) != len(names):
        problems.append("duplicate species names")
    pairs = [(r.source, r.product) for r in net.reactions]
    if len(set(pairs)) != len(pairs):
        problems.append("duplicate reactions")
    return problems
