"""Brute-force and LP verifiers for the mechanism's properties.

Everything here is deliberately independent of the eating engines' internals:
allowable allocations are enumerated directly, SD efficiency is an exact LP
over the implementable set, and the audits only call an engine as a black box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Callable, Sequence

from minps.flow import Arc, CirculationNetwork, solve_circulation
from minps.market import (
    DeterministicAllocation,
    FosdResult,
    Market,
    MarketError,
    RandomAllocation,
    format_matrix,
    fosd_compare,
)
from minps.polytope import in_delta_d
from minps.simplex import OPTIMAL, solve_lp

OPTIMUM_ZERO = "optimum_zero"
IMPROVEMENT_FOUND = "improvement_found"


class OracleSizeError(MarketError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class AuditReport:
    property: str
    passed: bool
    checked: int = 0
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {"property": self.property, "verdict": "pass" if self.passed else "fail",
                "checked": self.checked, "witness": self.witness}


@dataclass(frozen=True)
class LpCertificate:
    status: str
    improving_allocation: RandomAllocation | None = None
    gain: Fraction = Fraction(0)

    @property
    def efficient(self) -> bool:
        return self.status == OPTIMUM_ZERO

    def to_dict(self) -> dict:
        out = {"status": self.status, "gain": str(self.gain)}
        if self.improving_allocation is not None:
            out["improving_allocation"] = format_matrix(self.improving_allocation)
        return out


# -- enumeration -------------------------------------------------------------

def enumerate_allowable(market: Market, *, max_agents: int = 5,
                        max_objects: int = 5) -> list[DeterministicAllocation]:
    """Every 0/1 matrix meeting Demand, Min and Cap, by depth-first search."""
    n, k, d = market.n_agents, market.n_objects, market.demand
    if n > max_agents or k > max_objects:
        raise OracleSizeError(f"{n}x{k} exceeds enumeration cap {max_agents}x{max_objects}")
    from itertools import combinations

    rows = [tuple(1 if j in combo else 0 for j in range(k)) for combo in combinations(range(k), d)]
    mins, caps = market.mins, market.caps
    out = []
    counts = [0] * k
    chosen: list[tuple[int, ...]] = []

    def visit(i: int):
        left = n - i
        # Each remaining agent adds at most one to any column.
        if any(counts[j] + left < mins[j] for j in range(k)):
            return
        if i == n:
            out.append(tuple(chosen))
            return
        for row in rows:
            if all(counts[j] + row[j] <= caps[j] for j in range(k)):
                for j in range(k):
                    counts[j] += row[j]
                chosen.append(row)
                visit(i + 1)
                chosen.pop()
                for j in range(k):
                    counts[j] -= row[j]

    visit(0)
    return out


# -- SD efficiency -----------------------------------------------------------

def sd_efficient(market: Market, mu) -> LpCertificate:
    """Exact LP test for SD efficiency of ``mu``.

    Maximises the total prefix-sum slack ``sum_{i,k} s_ik`` with
    ``s_ik = prefix_ik(nu) - prefix_ik(mu) >= 0`` over implementable ``nu``.
    The slacks are substituted out, which turns the objective into
    ``sum_ij (K - rank_i(j)) nu_ij`` minus a constant.
    """
    mu = tuple(tuple(Fraction(x) for x in row) for row in mu)
    if not in_delta_d(market, mu):
        raise MarketError("sd_efficient expects an implementable allocation")
    n, k, d = market.n_agents, market.n_objects, market.demand
    var = lambda i, j: i * k + j  # noqa: E731
    nv = n * k
    c = [0] * nv
    for i, order in enumerate(market.order):
        for rank, j in enumerate(order):
            c[var(i, j)] = k - 1 - rank
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    # With d = 1 the row equalities already force nu_ij <= 1 and mu_j <= N.
    if d > 1:
        for i in range(n):
            for j in range(k):
                row = [0] * nv
                row[var(i, j)] = 1
                A_ub.append(row)
                b_ub.append(1)
    for j in range(k):
        row = [0] * nv
        for i in range(n):
            row[var(i, j)] = 1
        if d > 1 or market.caps[j] < n:
            A_ub.append(row)
            b_ub.append(market.caps[j])
        if market.mins[j] > 0:
            A_ub.append([-a for a in row])
            b_ub.append(-market.mins[j])
    for i, order in enumerate(market.order):
        row = [0] * nv
        for j in range(k):
            row[var(i, j)] = 1
        A_eq.append(row)
        b_eq.append(d)
        prefix = [0] * nv
        total = Fraction(0)
        for j in order[:-1]:
            prefix[var(i, j)] = -1
            total += mu[i][j]
            A_ub.append(list(prefix))
            b_ub.append(-total)
    res = solve_lp(c, A_ub, b_ub, A_eq, b_eq)
    if res.status != OPTIMAL:
        raise RuntimeError(f"SD-efficiency LP ended {res.status}; mu should be feasible")
    base = sum(c[var(i, j)] * mu[i][j] for i in range(n) for j in range(k))
    gain = res.value - base
    if gain == 0:
        return LpCertificate(OPTIMUM_ZERO)
    nu = tuple(tuple(res.x[var(i, j)] for j in range(k)) for i in range(n))
    return LpCertificate(IMPROVEMENT_FOUND, nu, gain)


def certificate_is_valid(market: Market, mu, cert: LpCertificate) -> bool:
    """Re-check an improvement certificate with the comparator alone."""
    if cert.efficient:
        return cert.improving_allocation is None
    nu = cert.improving_allocation
    if not in_delta_d(market, nu):
        return False
    verdicts = [fosd_compare(o, nu[i], mu[i]) for i, o in enumerate(market.order)]
    return (all(v in (FosdResult.EQUAL, FosdResult.DOMINATES) for v in verdicts)
            and FosdResult.DOMINATES in verdicts)


# -- fairness and incentives -------------------------------------------------

def envy_free(market: Market, mu) -> AuditReport:
    checked = 0
    for i, order in enumerate(market.order):
        for other in range(market.n_agents):
            if other == i:
                continue
            checked += 1
            if fosd_compare(order, mu[i], mu[other]) is FosdResult.DOMINATED:
                return AuditReport("envy_free", False, checked,
                                   {"agent": market.agents[i], "envies": market.agents[other]})
    return AuditReport("envy_free", True, checked)


def _default_engine(market: Market):
    from minps.eating import mps

    return mps(market)[0]


def anonymity_audit(market: Market, perm: Sequence[int],
                    engine: Callable[[Market], RandomAllocation] = _default_engine,
                    base: RandomAllocation | None = None) -> AuditReport:
    """``f`` of the re-indexed profile must be the re-indexed ``f``."""
    if sorted(perm) != list(range(market.n_agents)):
        raise ValueError(f"not a permutation of agents: {perm}")
    base = engine(market) if base is None else base
    permuted = engine(market.permute_agents(perm))
    ok = all(permuted[k] == base[p] for k, p in enumerate(perm))
    return AuditReport("anonymous", ok, 1, None if ok else {"permutation": list(perm)})


def weak_sp_audit(market: Market,
                  engine: Callable[[Market], RandomAllocation] = _default_engine, *,
                  max_objects: int = 5) -> AuditReport:
    """Try every unilateral misreport; none may strictly FOSD-improve the liar."""
    if market.demand != 1:
        raise MarketError("weak strategyproofness is only claimed for d = 1")
    if market.n_objects > max_objects:
        raise OracleSizeError(f"{market.n_objects} objects exceeds misreport cap {max_objects}")
    truth = engine(market)
    checked = 0
    for i, order in enumerate(market.order):
        for lie in permutations(market.prefs[i]):
            if lie == market.prefs[i]:
                continue
            checked += 1
            got = engine(market.with_prefs(i, lie))[i]
            if fosd_compare(order, got, truth[i]) is FosdResult.DOMINATES:
                return AuditReport("weak_strategyproof", False, checked, {
                    "agent": market.agents[i], "misreport": list(lie),
                    "truthful": [str(x) for x in truth[i]], "manipulated": [str(x) for x in got],
                })
    return AuditReport("weak_strategyproof", True, checked)


# -- random serial dictatorship ----------------------------------------------

def _completable(n_left: int, counts, market: Market) -> bool:
    """Can ``n_left`` further unit-demand agents be placed given ``counts``?"""
    k = market.n_objects
    arcs = [Arc("s", ("a", i), 1, 1) for i in range(n_left)]
    arcs += [Arc(("a", i), ("o", j), 0, 1) for i in range(n_left) for j in range(k)]
    arcs += [Arc(("o", j), "t", max(0, market.mins[j] - counts[j]), market.caps[j] - counts[j])
             for j in range(k)]
    arcs.append(Arc("t", "s", n_left, n_left))
    nodes = ("s", "t") + tuple(("a", i) for i in range(n_left)) + tuple(("o", j) for j in range(k))
    return solve_circulation(CirculationNetwork(nodes, tuple(arcs))) is not None


def rsd(market: Market, *, max_agents: int = 7) -> RandomAllocation:
    """Random serial dictatorship, exact over all priority orders.

    Each agent in turn takes his favourite object that still has room and
    leaves the rest of the market completable.
    """
    if market.demand != 1:
        raise MarketError("rsd supports unit demand only")
    n, k = market.n_agents, market.n_objects
    if n > max_agents:
        raise OracleSizeError(f"{n} agents exceeds RSD enumeration cap {max_agents}")
    memo: dict[tuple, int] = {}

    def pick(agent: int, counts: tuple, left_after: int) -> int:
        key = (agent, counts, left_after)
        if key not in memo:
            for j in market.order[agent]:
                if counts[j] < market.caps[j]:
                    trial = counts[:j] + (counts[j] + 1,) + counts[j + 1:]
                    if _completable(left_after, trial, market):
                        memo[key] = j
                        break
            else:
                raise RuntimeError(f"agent {market.agents[agent]} has no feasible pick")
        return memo[key]

    tally = [[0] * k for _ in range(n)]
    for order in permutations(range(n)):
        counts = (0,) * k
        for pos, agent in enumerate(order):
            j = pick(agent, counts, n - pos - 1)
            tally[agent][j] += 1
            counts = counts[:j] + (counts[j] + 1,) + counts[j + 1:]
    total = factorial(n)
    return tuple(tuple(Fraction(x, total) for x in row) for row in tally)


# -- exhaustive sweep --------------------------------------------------------

@dataclass
class SweepReport:
    markets: int = 0
    infeasible_skipped: int = 0
    lp_solved: int = 0
    decompositions: int = 0
    max_iterations: int = 0
    max_flag_sets: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"markets": self.markets, "infeasible_skipped": self.infeasible_skipped,
                "lp_solved": self.lp_solved, "decompositions": self.decompositions,
                "max_iterations": self.max_iterations, "max_flag_sets": self.max_flag_sets,
                "failures": self.failures[:20], "failure_count": len(self.failures),
                "verdict": "pass" if self.passed else "fail"}


def _canonical(mins, caps, order, mu):
    """Orbit representative under object relabelling and agent reordering.

    SD efficiency of ``mu`` is invariant under both, so this is a sound
    cache key for the LP.
    """
    k = len(mins)
    best = None
    for sigma in permutations(range(k)):  # new label of object j is sigma[j]
        inv = [0] * k
        for j, s in enumerate(sigma):
            inv[s] = j
        q = tuple((mins[inv[s]], caps[inv[s]]) for s in range(k))
        agents = sorted((tuple(sigma[j] for j in o), tuple(row[inv[s]] for s in range(k)))
                        for o, row in zip(order, mu))
        key = (q, tuple(agents))
        if best is None or key < best:
            best = key
    return best


def exhaustive_sweep(n_agents: int = 3, n_objects: int = 3, cap_max: int = 3, *,
                     decompose_outputs: bool = True, progress=None) -> SweepReport:
    """Check every unit-demand MPS property on all small markets.

    Covers every quota profile with ``m_j <= c_j <= cap_max`` and every strict
    preference profile.  Engine outputs are memoised per profile, so the
    misreport and re-indexing audits reuse exactly the values a fresh engine
    call would return.
    """
    from itertools import product

    from minps.decompose import decompose
    from minps.eating import mps_unit
    from minps.market import make_market, validate_feasibility

    report = SweepReport()
    orders = list(permutations(range(n_objects)))
    profiles = list(product(orders, repeat=n_agents))
    agent_perms = list(permutations(range(n_agents)))
    pairs = [(m, c) for c in range(1, cap_max + 1) for m in range(c + 1)]
    lp_cache: dict = {}
    step_bound = 2 * n_objects + 2
    for quota in product(pairs, repeat=n_objects):
        mins = tuple(m for m, _ in quota)
        caps = tuple(c for _, c in quota)
        template = make_market(profiles[0], mins, caps)
        if not validate_feasibility(template).feasible:
            report.infeasible_skipped += len(profiles)
            continue
        out = {}
        markets = {}
        for prof in profiles:
            market = make_market(prof, mins, caps)
            mu, trace = mps_unit(market, check=False)
            out[prof] = mu
            markets[prof] = market
            report.max_iterations = max(report.max_iterations, trace.iterations, len(trace.steps))
            report.max_flag_sets = max(report.max_flag_sets, trace.flag_sets)
            if trace.iterations > step_bound or trace.flag_sets > 1:
                report.failures.append({"check": "step_bound", "mins": mins, "caps": caps,
                                        "prefs": prof, "iterations": trace.iterations})
        decomposed: set = set()
        for prof in profiles:
            market, mu = markets[prof], out[prof]
            report.markets += 1
            where = {"mins": mins, "caps": caps, "prefs": prof}
            if not in_delta_d(market, mu):
                report.failures.append({"check": "delta_d", **where})
                continue
            key = _canonical(mins, caps, prof, mu)
            if key not in lp_cache:
                cert = sd_efficient(market, mu)
                lp_cache[key] = cert.efficient
                report.lp_solved += 1
            if not lp_cache[key]:
                report.failures.append({"check": "sd_efficient", **where})
            if not envy_free(market, mu).passed:
                report.failures.append({"check": "envy_free", **where})
            for perm in agent_perms:
                permuted = tuple(prof[p] for p in perm)
                if any(out[permuted][i] != mu[p] for i, p in enumerate(perm)):
                    report.failures.append({"check": "anonymous", "perm": perm, **where})
            for i in range(n_agents):
                for lie in orders:
                    if lie == prof[i]:
                        continue
                    lied = prof[:i] + (lie,) + prof[i + 1:]
                    if fosd_compare(prof[i], out[lied][i], mu[i]) is FosdResult.DOMINATES:
                        report.failures.append({"check": "weak_sp", "agent": i, "lie": lie, **where})
            if decompose_outputs and mu not in decomposed:
                decomposed.add(mu)
                lot = decompose(market, mu)
                report.decompositions += 1
                if not lot.is_valid(market, mu):
                    report.failures.append({"check": "decompose", **where})
        if progress is not None:
            progress(quota, report)
    return report
