from fractions import Fraction
from math import comb

from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fm_feasible
from srn_order.lp import FeasibilityCache, Sign, SolverRegistry, Status, feasible, verify_witness

N, P, F = Sign.NONNEG, Sign.NONPOS, Sign.FREE


def test_invertible_free_system():
    res = feasible([[0, 1], [1, 1]], [1, 0], [F, F])
    assert res.status is Status.FEASIBLE
    assert res.witness == (Fraction(-1), Fraction(1))


def test_reversible_all_row_infeasible():
    assert not feasible([[-1, 0, 1], [0, 1, 1]], [1, 0], [N, N, F])


def test_zero_rhs_is_feasible_with_zero_witness():
    for signs in ([N, N], [P, F], [F, P]):
        res = feasible([[1, 2], [3, -1]], [0, 0], signs)
        assert res.feasible and all(a == 0 for a in res.witness)


def test_nonpos_and_rational_input():
    res = feasible([[Fraction(1, 2), 1]], [-1], [P, N])
    assert res.feasible
    assert verify_witness([[Fraction(1, 2), 1]], [-1], [P, N], res.witness)
    assert not feasible([[1, 1]], [-1], [N, N])


def test_empty_column_set():
    assert feasible([[], []], [0, 0], []).feasible
    assert not feasible([[], []], [1, 0], []).feasible


def test_cache_memoizes_and_normalizes_negation():
    cache = FeasibilityCache([[1, 0], [0, 1]])
    first = cache.feasible([1, 0], [N, N])
    second = cache.feasible([1, 0], [N, N])
    assert first == second and first.feasible
    assert cache.stats.solves == 1 and cache.stats.hits == 1
    neg = cache.feasible([-1, 0], [P, P])
    assert neg.feasible and neg.witness == (-1, 0)
    assert cache.stats.solves == 1
    cache.feasible([1, 0], [N, F])
    assert cache.stats.solves == 2


def test_disabled_cache_solves_every_time():
    reg = SolverRegistry(enabled=False)
    for _ in range(3):
        reg.feasible([[1]], [1], [N])
    assert reg.stats.solves == 3 and reg.stats.hits == 0


def test_registry_groups_by_matrix():
    reg = SolverRegistry()
    assert reg.get([[1, 0]]) is reg.get([[Fraction(1), 0]])
    assert reg.get([[1, 0]]) is not reg.get([[0, 1]])


systems = st.integers(1, 3).flatmap(lambda m: st.integers(0, 5).flatmap(lambda n: st.tuples(
    st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=m, max_size=m),
    st.lists(st.integers(-3, 3), min_size=m, max_size=m),
    st.lists(st.sampled_from([N, P, F]), min_size=n, max_size=n),
)))


@settings(max_examples=400, deadline=None)
@given(systems)
def test_agrees_with_fourier_motzkin(system):
    D, b, signs = system
    res = feasible(D, b, signs)
    assert res.feasible == fm_feasible(D, b, signs)
    if res.feasible:
        assert verify_witness(D, b, signs, res.witness)
    n = sum(2 if s is F else 1 for s in signs) + len(D)
    assert res.pivots <= comb(n, len(D))


@settings(max_examples=100, deadline=None)
@given(systems)
def test_cached_answers_match_fresh(system):
    D, b, signs = system
    cache = FeasibilityCache(D)
    for rhs, sg in ((b, signs), ([-v for v in b], [s.flipped() for s in signs]), (b, signs)):
        res = cache.feasible(rhs, sg)
        assert res.feasible == feasible(D, rhs, sg).feasible
        if res.feasible:
            assert verify_witness(D, rhs, sg, res.witness)
