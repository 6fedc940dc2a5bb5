"""Rendering of search and check results as text, JSON or Graphviz dot.

Colors follow one fixed vocabulary, each paired with a numeric tag:
green (1) for ``x <= y`` and kX <= kY, red (2) for the reverse, blue (3)
for equality and gray (0) for no comparison.
"""

from __future__ import annotations

import json
from typing import Optional

from .order import PreorderingStructure, RateConstraint, SpeciesTag

COLOR = {
    SpeciesTag.LEQ: "green", SpeciesTag.GEQ: "red", SpeciesTag.EQ: "blue", SpeciesTag.UNCOMPARED: "gray",
    RateConstraint.LE: "green", RateConstraint.GE: "red", RateConstraint.EQ: "blue", RateConstraint.FREE: "gray",
}
CODE = {"gray": 0, "green": 1, "red": 2, "blue": 3}
FORMATS = ("text", "json", "dot")


def closure_tags(s: PreorderingStructure, names) -> list[str]:
    """``+X`` for the row e_X (x_X <= y_X), ``-X`` for -e_X."""
    return [("+" if sign > 0 else "-") + names[j] for j, sign in s.sorted_closure]


def structure_dict(s: PreorderingStructure, net) -> dict:
    return {
        "matrix": [list(r) for r in s.matrix],
        "closure": closure_tags(s, net.names),
        "species": {n: t.value for n, t in zip(net.names, s.species)},
        "reactions": {r.label: c.value for r, c in zip(net.reactions, s.constraints)},
    }


def search_dict(report) -> dict:
    net = report.network
    return {
        "network": net.to_dict(),
        "structures": [structure_dict(s, net) for s in report.structures],
        "equivalence_structures": [structure_dict(s, net) for s in report.equivalence_structures],
        "stats": report.stats.rendered(),
    }


def check_dict(net, input_matrix, canonical, result, structure, ab=None, kinetics=None) -> dict:
    out = {
        "network": net.to_dict(kinetics),
        "input_matrix": [list(r) for r in input_matrix],
        "canonical_matrix": [list(r) for r in canonical],
        "valid": bool(result.valid),
        "structures": [structure_dict(structure, net)] if structure is not None else [],
        "failure": None,
    }
    if not result.valid:
        out["failure"] = {"reaction": net.reactions[result.failed_reaction].label,
                          "side": result.failed_side}
    else:
        out["hypotheses"] = {r.label: list(h) for r, h in zip(net.reactions, result.hypotheses)}
        if kinetics is not None:
            out["vacuous"] = [r.label for r, kx, ky in zip(net.reactions, kinetics.kx, kinetics.ky)
                              if kx == 0 and ky == 0]
    if ab is not None:
        out["A"] = ab.A
        out["B"] = ab.B
    return out


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _tag(item) -> str:
    color = COLOR[item]
    return f"{color} ({item.value}, {CODE[color]})"


def _structure_text(s: PreorderingStructure, net, title: str) -> list[str]:
    lines = [title, f"  matrix: {[list(r) for r in s.matrix]}",
             f"  closure: {' '.join(closure_tags(s, net.names)) or '(none)'}", "  species:"]
    width = max(len(n) for n in net.names)
    for n, t in zip(net.names, s.species):
        lines.append(f"    {n:<{width}}  {_tag(t)}")
    lines.append("  reactions:")
    width = max(len(r.label) for r in net.reactions)
    for r, c in zip(net.reactions, s.constraints):
        lines.append(f"    {r.label:<{width}}  {_tag(c)}")
    return lines


def _plural(n, word):
    return f"{n} {word}" + ("" if n == 1 else "s")


def search_text(report) -> str:
    net = report.network
    lines = [f"network: {net.dimension} species, {len(net.reactions)} reactions",
             f"{_plural(len(report.structures), 'structure')}, "
             f"{_plural(len(report.equivalence_structures), 'equivalence structure')}"]
    for k, s in enumerate(report.structures, 1):
        lines += _structure_text(s, net, f"structure {k}")
    for k, s in enumerate(report.equivalence_structures, 1):
        lines += _structure_text(s, net, f"equivalence structure {k}")
    stats = report.stats.rendered()
    lines.append("stats: " + " ".join(f"{k}={v}" for k, v in stats.items()))
    return "\n".join(lines) + "\n"


def check_text(net, input_matrix, canonical, result, structure, kinetics=None) -> str:
    lines = [f"input matrix: {[list(r) for r in input_matrix]}",
             f"canonical matrix: {[list(r) for r in canonical]}"]
    if not canonical:
        lines.append("trivial: every row is implied by the conservation laws")
    if not result.valid:
        label = net.reactions[result.failed_reaction].label
        lines.append(f"INVALID: hypotheses fail for {label} on side {result.failed_side}")
        return "\n".join(lines) + "\n"
    lines += _structure_text(structure, net, "VALID")
    if kinetics is not None:
        silent = [r.label for r, kx, ky in zip(net.reactions, kinetics.kx, kinetics.ky) if kx == 0 and ky == 0]
        if silent:
            lines.append("vacuous (both rate constants zero): " + ", ".join(silent))
    return "\n".join(lines) + "\n"


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _complex_label(coeffs, names, tags) -> str:
    parts = []
    for c, n, t in zip(coeffs, names, tags):
        if not c:
            continue
        coef = "" if c == 1 else str(c)
        parts.append(f'{coef}<font color="{COLOR[t]}">{n}</font>')
    return "<" + ("+".join(parts) if parts else "0") + ">"


def _structure_dot(s: Optional[PreorderingStructure], net, prefix: str, title: str) -> list[str]:
    names = net.names
    tags = s.species if s is not None else (SpeciesTag.UNCOMPARED,) * net.dimension
    lines = [f"  subgraph {_dot_id('cluster_' + prefix)} {{", f"    label={_dot_id(title)};"]
    complexes = {}
    for r in net.reactions:
        for cpx in (r.source, r.product):
            complexes.setdefault(cpx, f"{prefix}_c{len(complexes)}")
    for cpx, node in complexes.items():
        lines.append(f"    {_dot_id(node)} [label={_complex_label(cpx, names, tags)}];")
    for k, r in enumerate(net.reactions):
        con = s.constraints[k] if s is not None else RateConstraint.FREE
        color = COLOR[con]
        lines.append(f"    {_dot_id(complexes[r.source])} -> {_dot_id(complexes[r.product])} "
                     f"[color={color}, tag={CODE[color]}, label={_dot_id(con.value)}];")
    lines.append("  }")
    return lines


def search_dot(report) -> str:
    net = report.network
    lines = ["digraph structures {", "  node [shape=box];"]
    items = [(s, "structure") for s in report.structures] + \
            [(s, "equivalence structure") for s in report.equivalence_structures]
    for k, (s, kind) in enumerate(items, 1):
        lines += _structure_dot(s, net, f"s{k}", f"{kind} {k}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def check_dot(net, structure) -> str:
    lines = ["digraph check {", "  node [shape=box];"]
    lines += _structure_dot(structure, net, "s1", "valid" if structure is not None else "invalid")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render(report, fmt: str = "text") -> str:
    """Render a search report in one of ``FORMATS``."""
    if fmt == "json":
        return render_json(search_dict(report))
    if fmt == "dot":
        return search_dot(report)
    if fmt == "text":
        return search_text(report)
    raise ValueError(f"unknown format {fmt!r}")
