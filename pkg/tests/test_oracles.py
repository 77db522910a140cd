import random
from fractions import Fraction as F
from itertools import permutations
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from conftest import NO_MINIMUMS_MPS, NO_MINIMUMS_RSD, WITH_MINIMUMS_MPS, matrix
from minps.eating import mps_unit
from minps.generate import random_market
from minps.market import MarketError, is_allowable, make_market
from minps.oracles import (
    IMPROVEMENT_FOUND,
    OPTIMUM_ZERO,
    OracleSizeError,
    anonymity_audit,
    certificate_is_valid,
    enumerate_allowable,
    envy_free,
    rsd,
    sd_efficient,
    weak_sp_audit,
)
from minps.polytope import in_delta_d


def unit_engine(m):
    return mps_unit(m)[0]


# -- enumeration -------------------------------------------------------------

@pytest.mark.parametrize("n, k", [(1, 1), (1, 3), (2, 3), (2, 4), (3, 3), (3, 5), (4, 5)])
def test_enumeration_count_without_minimums(n, k):
    m = make_market([list(range(k))] * n, [0] * k, [1] * k)
    assert len(enumerate_allowable(m)) == factorial(k) // factorial(k - n)


def test_enumeration_with_minimums(with_minimums):
    allocs = enumerate_allowable(with_minimums)
    profiles = {tuple(sum(c) for c in zip(*a)) for a in allocs}
    assert profiles == {(2, 1, 0), (1, 2, 0), (1, 1, 1)}
    assert all(is_allowable(with_minimums, a) for a in allocs)
    assert len(allocs) == 3 + 3 + 6


def test_enumeration_size_cap():
    m = make_market([list(range(3))] * 6, [0] * 3, [6] * 3)
    with pytest.raises(OracleSizeError):
        enumerate_allowable(m)


def test_enumerated_allocations_are_implementable():
    rng = random.Random(1)
    for _ in range(20):
        m = random_market(rng, demand=rng.choice([1, 2]))
        for a in enumerate_allowable(m):
            assert in_delta_d(m, a)


# -- SD efficiency -----------------------------------------------------------

def test_rsd_is_dominated_without_minimums(no_minimums):
    cert = sd_efficient(no_minimums, NO_MINIMUMS_RSD)
    assert cert.status == IMPROVEMENT_FOUND
    assert certificate_is_valid(no_minimums, NO_MINIMUMS_RSD, cert)


def test_mechanism_examples_are_efficient(no_minimums, with_minimums):
    assert sd_efficient(no_minimums, NO_MINIMUMS_MPS).status == OPTIMUM_ZERO
    assert sd_efficient(with_minimums, WITH_MINIMUMS_MPS).status == OPTIMUM_ZERO


def test_sd_efficient_requires_implementable(with_minimums):
    with pytest.raises(MarketError):
        sd_efficient(with_minimums, matrix([[1, 0, 0]] * 3))


def test_uniform_is_not_efficient_when_tastes_differ():
    m = make_market([[0, 1], [1, 0]], [0, 0], [1, 1])
    half = matrix([["1/2", "1/2"]] * 2)
    cert = sd_efficient(m, half)
    assert not cert.efficient and certificate_is_valid(m, half, cert)
    assert cert.improving_allocation == matrix([[1, 0], [0, 1]])


def scipy_improvable(m, mu):
    """Same question with explicit prefix slacks, solved in floating point."""
    n, k, d = m.n_agents, m.n_objects, m.demand
    nv = n * k
    ns = n * k
    c = np.zeros(nv + ns)
    c[nv:] = -1
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, order in enumerate(m.order):
        for p in range(k):
            row = np.zeros(nv + ns)
            for j in order[:p + 1]:
                row[i * k + j] = -1
            row[nv + i * k + p] = 1
            A_ub.append(row)
            b_ub.append(-float(sum(mu[i][j] for j in order[:p + 1])))
        row = np.zeros(nv + ns)
        row[i * k:(i + 1) * k] = 1
        A_eq.append(row)
        b_eq.append(d)
    for j in range(k):
        row = np.zeros(nv + ns)
        row[[i * k + j for i in range(n)]] = 1
        A_ub.append(row)
        b_ub.append(m.caps[j])
        A_ub.append(-row)
        b_ub.append(-m.mins[j])
    bounds = [(0, 1)] * nv + [(0, None)] * ns
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return -res.fun > 1e-7


def test_lp_matches_float_oracle():
    rng = random.Random(2)
    seen = {True: 0, False: 0}
    for _ in range(60):
        m = random_market(rng, max_agents=3, max_objects=3)
        candidates = [unit_engine(m), rsd(m)]
        allocs = enumerate_allowable(m)
        weights = [rng.randint(0, 3) for _ in allocs]
        if sum(weights):
            total = sum(weights)
            candidates.append(tuple(tuple(sum(F(w, total) * a[i][j] for w, a in zip(weights, allocs))
                                          for j in range(m.n_objects)) for i in range(m.n_agents)))
        for mu in candidates:
            cert = sd_efficient(m, mu)
            assert certificate_is_valid(m, mu, cert)
            assert (not cert.efficient) == scipy_improvable(m, mu)
            seen[cert.efficient] += 1
    assert seen[True] and seen[False]


# -- envy --------------------------------------------------------------------

def test_envy_examples(with_minimums):
    assert envy_free(with_minimums, WITH_MINIMUMS_MPS).passed
    assert envy_free(with_minimums, matrix([["2/3", "1/3", 0]] * 3)).passed
    m = make_market([[0, 1], [0, 1]], [0, 0], [1, 1])
    rep = envy_free(m, matrix([[0, 1], [1, 0]]))
    assert not rep.passed and rep.witness == {"agent": "1", "envies": "2"}


# -- incentives and anonymity ------------------------------------------------

def test_weak_sp_examples(no_minimums, with_minimums):
    rep = weak_sp_audit(with_minimums, unit_engine)
    assert rep.passed and rep.checked == 3 * 5
    rep = weak_sp_audit(no_minimums, unit_engine)
    assert rep.passed and rep.checked == 4 * 23


def test_weak_sp_detects_manipulation():
    # An engine giving each agent his reported second choice rewards lying.
    m = make_market([[0, 1], [1, 0]], [0, 0], [2, 2])

    def second_choice(mk):
        return tuple(tuple(1 if j == o[1] else 0 for j in range(2)) for o in mk.order)

    rep = weak_sp_audit(m, second_choice)
    assert not rep.passed and rep.witness["agent"] == "1"
    assert rep.witness["misreport"] == ["o2", "o1"]


def test_weak_sp_rejects_multi_unit(demand2):
    with pytest.raises(MarketError):
        weak_sp_audit(demand2)


def test_anonymity_examples(with_minimums):
    assert anonymity_audit(with_minimums, [1, 0, 2], unit_engine).passed
    assert anonymity_audit(with_minimums, [0, 1, 2], unit_engine).passed
    with pytest.raises(ValueError):
        anonymity_audit(with_minimums, [0, 0, 1])


def test_anonymity_detects_priority():
    m = make_market([[0, 1], [0, 1]], [0, 0], [1, 1])

    def first_agent_wins(mk):
        return matrix([[1, 0], [0, 1]])

    rep = anonymity_audit(m, [1, 0], first_agent_wins)
    assert not rep.passed and rep.witness == {"permutation": [1, 0]}


def test_random_anonymity():
    rng = random.Random(12)
    for _ in range(200):
        m = random_market(rng)
        perm = list(range(m.n_agents))
        rng.shuffle(perm)
        assert anonymity_audit(m, perm, unit_engine).passed


# -- random serial dictatorship ----------------------------------------------

def brute_rsd(m):
    """Serial dictatorship over every order, picks checked against the full list of allocations."""
    allocs = enumerate_allowable(m)
    n, k = m.n_agents, m.n_objects
    tally = [[0] * k for _ in range(n)]
    for order in permutations(range(n)):
        fixed = {}
        for agent in order:
            for j in m.order[agent]:
                trial = {**fixed, agent: j}
                if any(all(a[i][jj] == 1 for i, jj in trial.items()) for a in allocs):
                    fixed = trial
                    break
            tally[agent][fixed[agent]] += 1
    return tuple(tuple(F(x, factorial(n)) for x in row) for row in tally)


def test_rsd_no_minimums(no_minimums):
    assert rsd(no_minimums) == NO_MINIMUMS_RSD


def test_rsd_with_minimums(with_minimums):
    assert rsd(with_minimums) == WITH_MINIMUMS_MPS == brute_rsd(with_minimums)


def test_rsd_single_agent():
    m = make_market([[2, 0, 1]], [0, 0, 0], [1, 1, 1])
    assert rsd(m) == matrix([[0, 0, 1]])
    m = make_market([[2, 0, 1]], [1, 0, 0], [1, 1, 1])
    assert rsd(m) == matrix([[1, 0, 0]])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_rsd_matches_brute_force(seed):
    m = random_market(random.Random(seed), max_agents=4, max_objects=4)
    nu = rsd(m)
    assert nu == brute_rsd(m)
    assert in_delta_d(m, nu)


# -- the mechanism's claimed properties on random markets --------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_unit_mechanism_properties(seed):
    m = random_market(random.Random(seed), max_agents=4, max_objects=4)
    mu = unit_engine(m)
    assert in_delta_d(m, mu)
    assert sd_efficient(m, mu).efficient
    assert envy_free(m, mu).passed
    assert weak_sp_audit(m, unit_engine, max_objects=4).passed
