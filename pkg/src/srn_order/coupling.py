"""Coupled simulation of two parameterizations and brute-force condition checks.

The coupled chain runs ``(X, Y)`` on one probability space. While the pair
is inside the relation, each reaction vector ``xi`` is handled by one of
seven cases, keyed on which of ``(x+xi, y)``, ``(x, y+xi)`` and
``(x+xi, y+xi)`` stay inside; the cases never leave the relation. Outside
the relation the two components move independently.

All case arithmetic is exact; floats appear only when drawing random numbers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm
from typing import Iterable, Optional, Sequence

import numpy as np

from .linalg import conservation_basis, rref
from .network import KineticsPair, ReactionNetwork, aggregate_rate

OUTSIDE = "out"


class HypothesisViolation(RuntimeError):
    """The rates at a coupled state cannot be split by the case table."""

    def __init__(self, x, y, xi, case, detail):
        super().__init__(f"case {case} at x={tuple(x)}, y={tuple(y)}, xi={tuple(xi)}: {detail}")
        self.x, self.y, self.xi, self.case, self.detail = tuple(x), tuple(y), tuple(xi), case, detail


@dataclass(frozen=True)
class AffineRelation:
    """``(x, y)`` related iff both are non-negative and ``M (x - y) <= c``."""

    M: tuple[tuple[int, ...], ...]
    c: tuple[int, ...] = ()

    def __post_init__(self):
        M = tuple(tuple(int(v) for v in row) for row in self.M)
        c = tuple(int(v) for v in self.c) if self.c else (0,) * len(M)
        if len(c) != len(M):
            raise ValueError("offset length must equal the number of rows of M")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "c", c)

    @classmethod
    def preorder(cls, M) -> "AffineRelation":
        return cls(tuple(tuple(r) for r in M))

    def holds(self, x: Sequence[int], y: Sequence[int]) -> bool:
        if min(x, default=0) < 0 or min(y, default=0) < 0:
            return False
        for row, cj in zip(self.M, self.c):
            if sum(a * (u - v) for a, u, v in zip(row, x, y)) > cj:
                return False
        return True


@dataclass(frozen=True)
class Transition:
    x: tuple[int, ...]
    y: tuple[int, ...]
    rate: Fraction
    case: object  # 1..7 or OUTSIDE
    xi: tuple[int, ...]


def _add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def coupled_rates(net: ReactionNetwork, kinetics: KineticsPair, rel: AffineRelation,
                  x: Sequence[int], y: Sequence[int]) -> list[Transition]:
    """Outgoing transitions of the coupled chain at ``(x, y)``; zero rates omitted."""
    x, y = tuple(x), tuple(y)
    out: list[Transition] = []
    inside = rel.holds(x, y)
    for xi in net.distinct_vectors:
        a = Fraction(aggregate_rate(net, kinetics.kx, x, xi))
        b = Fraction(aggregate_rate(net, kinetics.ky, y, xi))
        x1, y1 = _add(x, xi), _add(y, xi)
        if not inside:
            if a:
                out.append(Transition(x1, y, a, OUTSIDE, xi))
            if b:
                out.append(Transition(x, y1, b, OUTSIDE, xi))
            continue
        first = rel.holds(x1, y)
        second = rel.holds(x, y1)
        both = rel.holds(x1, y1)
        moves: list[tuple[tuple, tuple, Fraction]] = []
        if first and second and both:
            case = 1
            moves = [(x1, y, a), (x, y1, b)]
        elif first and not second and both:
            case = 2
            if a < b:
                raise HypothesisViolation(x, y, xi, case, f"first rate {a} below second rate {b}")
            moves = [(x1, y, a - b), (x1, y1, b)]
        elif first and not second and not both:
            case = 3
            if b:
                raise HypothesisViolation(x, y, xi, case, f"second rate {b} has nowhere to go")
            moves = [(x1, y, a)]
        elif not first and second and both:
            case = 4
            if b < a:
                raise HypothesisViolation(x, y, xi, case, f"second rate {b} below first rate {a}")
            moves = [(x, y1, b - a), (x1, y1, a)]
        elif not first and second and not both:
            case = 5
            if a:
                raise HypothesisViolation(x, y, xi, case, f"first rate {a} has nowhere to go")
            moves = [(x, y1, b)]
        elif not first and not second and both:
            case = 6
            if a != b:
                raise HypothesisViolation(x, y, xi, case, f"rates {a} and {b} differ")
            moves = [(x1, y1, a)]
        elif not first and not second:
            case = 7
            if a or b:
                raise HypothesisViolation(x, y, xi, case, f"rates {a}, {b} with no admissible move")
        else:
            raise HypothesisViolation(x, y, xi, 8, "both single moves stay related but the joint move does not")
        for u, v, rate in moves:
            if rate:
                out.append(Transition(u, v, rate, case, xi))
    return out


def marginal_rate_identity(net, kinetics, rel, sample_states: Iterable) -> bool:
    """Each component of the coupled chain jumps at its own marginal rate, exactly."""
    for x, y in sample_states:
        x, y = tuple(x), tuple(y)
        try:
            moves = coupled_rates(net, kinetics, rel, x, y)
        except HypothesisViolation:
            return False
        for xi in net.distinct_vectors:
            x1, y1 = _add(x, xi), _add(y, xi)
            if min(x1) >= 0:
                mass = sum((t.rate for t in moves if t.x == x1), Fraction(0))
                if mass != aggregate_rate(net, kinetics.kx, x, xi):
                    return False
            if min(y1) >= 0:
                mass = sum((t.rate for t in moves if t.y == y1), Fraction(0))
                if mass != aggregate_rate(net, kinetics.ky, y, xi):
                    return False
    return True


# -- simulation ------------------------------------------------------------

def trajectory_rng(seed: int, index: int) -> random.Random:
    """Independent stream for trajectory ``index`` derived from the master seed."""
    state = np.random.SeedSequence(entropy=seed, spawn_key=(index,)).generate_state(4)
    return random.Random(int.from_bytes(state.tobytes(), "little"))


@dataclass
class CoupledTrajectory:
    events: list = field(default_factory=list)  # (t, x, y, case, xi)
    terminated_by: str = "t_max"

    def to_tsv(self) -> str:
        lines = []
        for t, x, y, case, xi in self.events:
            cols = [repr(float(t)), " ".join(map(str, x)), " ".join(map(str, y)),
                    str(case), " ".join(map(str, xi)) if xi else "-"]
            lines.append("\t".join(cols))
        return "\n".join(lines) + ("\n" if lines else "")


class _CoupledKernel:
    """Memoized cumulative jump tables for the coupled chain."""

    def __init__(self, net, kinetics, rel):
        self.net, self.kinetics, self.rel = net, kinetics, rel
        self._memo: dict = {}

    def table(self, x, y):
        key = (x, y)
        hit = self._memo.get(key)
        if hit is None:
            moves = coupled_rates(self.net, self.kinetics, self.rel, x, y)
            cum, acc = [], 0.0
            for t in moves:
                acc += float(t.rate)
                cum.append(acc)
            hit = (moves, cum, acc)
            self._memo[key] = hit
        return hit


def _coupled_events(kernel, x0, y0, t_max, rng, max_events):
    """Yield (t, x, y, case, xi) starting with the initial state; last item is the guard name."""
    x, y, t = tuple(x0), tuple(y0), 0.0
    yield (0.0, x, y, None, None)
    events = 0
    while True:
        moves, cum, total = kernel.table(x, y)
        if total <= 0.0:
            yield "absorbed"
            return
        t += rng.expovariate(total)
        if t > t_max:
            yield "t_max"
            return
        if max_events is not None and events >= max_events:
            yield "max_events"
            return
        u = rng.random() * total
        k = 0
        while cum[k] <= u and k < len(cum) - 1:
            k += 1
        move = moves[k]
        x, y = move.x, move.y
        events += 1
        yield (t, x, y, move.case, move.xi)


def simulate_coupled(net, kinetics, rel, x0, y0, t_max, seed, max_events=None,
                     index: int = 0) -> CoupledTrajectory:
    """One exact coupled trajectory; identical seeds give identical output."""
    if not rel.holds(x0, y0):
        raise ValueError("initial pair is not in the relation")
    kernel = _CoupledKernel(net, kinetics, rel)
    traj = CoupledTrajectory()
    for item in _coupled_events(kernel, x0, y0, t_max, trajectory_rng(seed, index), max_events):
        if isinstance(item, str):
            traj.terminated_by = item
        else:
            traj.events.append(item)
    return traj


@dataclass
class SSATrajectory:
    times: list
    states: list
    terminated_by: str = "t_max"


def _ssa_events(net, rates, x0, t_max, rng, max_events):
    x, t = tuple(x0), 0.0
    yield (0.0, x)
    events = 0
    memo: dict = {}
    while True:
        hit = memo.get(x)
        if hit is None:
            props = [float(aggregate_rate(net, rates, x, xi)) for xi in net.distinct_vectors]
            cum = list(np.cumsum(props)) if props else []
            hit = (cum, cum[-1] if cum else 0.0)
            memo[x] = hit
        cum, total = hit
        if total <= 0.0:
            yield "absorbed"
            return
        t += rng.expovariate(total)
        if t > t_max:
            yield "t_max"
            return
        if max_events is not None and events >= max_events:
            yield "max_events"
            return
        u = rng.random() * total
        k = 0
        while cum[k] <= u and k < len(cum) - 1:
            k += 1
        x = _add(x, net.distinct_vectors[k])
        events += 1
        yield (t, x)


def simulate_ssa(net, constants, x0, t_max, seed, max_events=None, index: int = 0) -> SSATrajectory:
    """Plain Gillespie simulation of one parameterization."""
    traj = SSATrajectory([], [])
    for item in _ssa_events(net, constants, x0, t_max, trajectory_rng(seed, index), max_events):
        if isinstance(item, str):
            traj.terminated_by = item
        else:
            traj.times.append(item[0])
            traj.states.append(item[1])
    return traj


@dataclass
class EnsembleSummary:
    trajectories: int
    relation_violations: int  # trajectories that visited a pair outside the relation
    hypothesis_violations: int  # trajectories stopped by a HypothesisViolation
    guards: dict
    checkpoints: tuple
    x_samples: Optional[np.ndarray] = None  # (trajectories, checkpoints, d)
    y_samples: Optional[np.ndarray] = None
    first_violation: Optional[str] = None

    @property
    def violations(self) -> int:
        return self.relation_violations + self.hypothesis_violations


def coupled_ensemble(net, kinetics, rel, x0, y0, t_max, n, seed, checkpoints=(),
                     max_events=None) -> EnsembleSummary:
    """Run ``n`` coupled trajectories, counting relation exits and collecting checkpoint states."""
    if not rel.holds(x0, y0):
        raise ValueError("initial pair is not in the relation")
    d = len(x0)
    cps = tuple(sorted(checkpoints))
    xs = np.zeros((n, len(cps), d), dtype=np.int64)
    ys = np.zeros((n, len(cps), d), dtype=np.int64)
    kernel = _CoupledKernel(net, kinetics, rel)
    rel_bad = hyp_bad = 0
    guards: dict = {}
    first = None
    for k in range(n):
        rng = trajectory_rng(seed, k)
        slot = 0
        cur = None
        bad = False
        try:
            for item in _coupled_events(kernel, x0, y0, t_max, rng, max_events):
                if isinstance(item, str):
                    guards[item] = guards.get(item, 0) + 1
                    break
                t, x, y = item[0], item[1], item[2]
                while slot < len(cps) and cps[slot] < t:
                    xs[k, slot], ys[k, slot] = cur
                    slot += 1
                cur = (x, y)
                if not bad and not rel.holds(x, y):
                    bad = True
                    rel_bad += 1
                    first = first or f"trajectory {k} left the relation at t={t}: x={x}, y={y}"
        except HypothesisViolation as exc:
            hyp_bad += 1
            first = first or f"trajectory {k}: {exc}"
            guards["violation"] = guards.get("violation", 0) + 1
        while slot < len(cps):
            xs[k, slot], ys[k, slot] = cur
            slot += 1
    return EnsembleSummary(n, rel_bad, hyp_bad, guards, cps, xs, ys, first)


def ssa_ensemble(net, constants, x0, t_max, n, seed, checkpoints=(), max_events=None) -> np.ndarray:
    """Checkpoint states of ``n`` independent SSA runs, shape (n, checkpoints, d)."""
    d = len(x0)
    cps = tuple(sorted(checkpoints))
    out = np.zeros((n, len(cps), d), dtype=np.int64)
    for k in range(n):
        rng = trajectory_rng(seed, k)
        slot = 0
        cur = None
        for item in _ssa_events(net, constants, x0, t_max, rng, max_events):
            if isinstance(item, str):
                break
            t, x = item
            while slot < len(cps) and cps[slot] < t:
                out[k, slot] = cur
                slot += 1
            cur = x
        while slot < len(cps):
            out[k, slot] = cur
            slot += 1
    return out


def mean_z_scores(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Two-sample z statistics of per-coordinate means; zero where both samples are constant."""
    ma, mb = a.mean(axis=0), b.mean(axis=0)
    se = np.sqrt(a.var(axis=0, ddof=1) / len(a) + b.var(axis=0, ddof=1) / len(b))
    diff = np.abs(ma - mb)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(diff > 0, np.inf, 0.0))
    return z


# -- brute-force oracle ----------------------------------------------------

def class_states_in_box(net, anchor: Sequence[int], radius: int) -> np.ndarray:
    """Non-negative states of the compatibility class of ``anchor`` with all counts <= radius."""
    d = net.dimension
    C = conservation_basis(net).rows
    if not C:
        grids = np.meshgrid(*[np.arange(radius + 1)] * d, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    red, pivots = rref(C)
    target = [sum(Fraction(a) * v for a, v in zip(row, anchor)) for row in red]
    free = [j for j in range(d) if j not in pivots]
    # x_p = target_i - sum_f red[i][f] x_f; scale to integers per row
    if free:
        grids = np.meshgrid(*[np.arange(radius + 1)] * len(free), indexing="ij")
        F = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    else:
        F = np.zeros((1, 0), dtype=np.int64)
    X = np.zeros((len(F), d), dtype=np.int64)
    X[:, free] = F
    keep = np.ones(len(F), dtype=bool)
    for i, p in enumerate(pivots):
        row = red[i]
        den = reduce(lcm, [Fraction(v).denominator for v in row] + [target[i].denominator], 1)
        coeffs = np.array([int(Fraction(row[f]) * den) for f in free], dtype=np.int64)
        num = int(target[i] * den) - (F @ coeffs if free else np.zeros(len(F), dtype=np.int64))
        ok = num % den == 0
        val = num // den
        keep &= ok & (val >= 0) & (val <= radius)
        X[:, p] = val
    return X[keep]


@dataclass
class OracleViolation:
    condition: str  # "a", "b" or "c"
    x: tuple
    y: tuple
    xi: tuple
    rate_x: Fraction
    rate_y: Fraction


@dataclass
class OracleReport:
    states: int
    pairs: int
    checks: int
    violation_count: int
    violations: list  # at most ``limit`` witnesses

    @property
    def ok(self) -> bool:
        return self.violation_count == 0


def _integer_rates(net, constants, X: np.ndarray, xi, scale: int) -> np.ndarray:
    """Exact scaled aggregate rates for every state row as int64 (object if large)."""
    out = np.zeros(len(X), dtype=object)
    for r, reaction in enumerate(net.reactions):
        if reaction.xi != tuple(xi):
            continue
        k = Fraction(constants[r]) * scale
        if not k:
            continue
        term = np.full(len(X), int(k), dtype=object)
        for j in reaction.support:
            for q in range(reaction.source[j]):
                term = term * (X[:, j] - q).astype(object)
        out = out + term
    return out


def oracle_check_conditions(net, kinetics: KineticsPair, rel: AffineRelation, box_radius: int,
                            anchor: Sequence[int], limit: int = 50, chunk: int = 256) -> OracleReport:
    """Exhaustively test the coupling hypotheses on every related pair in the box."""
    X = class_states_in_box(net, anchor, box_radius)
    n = len(X)
    scale = reduce(lcm, [Fraction(k).denominator for k in kinetics.kx + kinetics.ky], 1)
    M = np.array(rel.M, dtype=np.int64).reshape(len(rel.M), net.dimension)
    c = np.array(rel.c, dtype=np.int64)
    P = X @ M.T  # (n, m)
    per_xi = []
    for xi in net.distinct_vectors:
        xi_arr = np.array(xi, dtype=np.int64)
        ex = (X + xi_arr >= 0).all(axis=1)
        ax = _integer_rates(net, kinetics.kx, X, xi, scale)
        ay = _integer_rates(net, kinetics.ky, X, xi, scale)
        ax = np.where(ex, ax, 0)
        ay = np.where(ex, ay, 0)
        # compare as exact Python ints through a rank transform to stay vectorized
        values = sorted(set(ax.tolist()) | set(ay.tolist()))
        rank = {v: i for i, v in enumerate(values)}
        rx = np.array([rank[v] for v in ax.tolist()], dtype=np.int64)
        ry = np.array([rank[v] for v in ay.tolist()], dtype=np.int64)
        per_xi.append((xi, M @ xi_arr, ex, rx, ry, ax, ay))

    pairs = checks = count = 0
    found: list = []
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diff = P[start:stop, None, :] - P[None, :, :]  # (cx, n, m)
        related = (diff <= c).all(axis=2) if len(c) else np.ones((stop - start, n), dtype=bool)
        pairs += int(related.sum())
        for xi, mxi, ex, rx, ry, ax, ay in per_xi:
            checks += int(related.sum())
            exs = ex[start:stop]
            in_first = exs[:, None] & ((diff + mxi <= c).all(axis=2) if len(c) else True)
            in_second = ex[None, :] & ((diff - mxi <= c).all(axis=2) if len(c) else True)
            in_both = exs[:, None] & ex[None, :] & related
            rxs = rx[start:stop]
            bad = {
                "a": related & ~in_first & (rxs[:, None] > ry[None, :]),
                "b": related & ~in_second & (rxs[:, None] < ry[None, :]),
                "c": related & ~in_both & exs[:, None] & ex[None, :],
            }
            for cond, mask in bad.items():
                k = int(mask.sum())
                if not k:
                    continue
                count += k
                if len(found) < limit:
                    for i, j in np.argwhere(mask)[: limit - len(found)]:
                        gi = start + int(i)
                        found.append(OracleViolation(
                            cond, tuple(int(v) for v in X[gi]), tuple(int(v) for v in X[j]), tuple(xi),
                            Fraction(int(ax[gi]), scale), Fraction(int(ay[j]), scale)))
    return OracleReport(n, pairs, checks, count, found)
