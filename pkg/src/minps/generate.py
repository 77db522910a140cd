"""Random small markets and sub-random matrices for property suites."""

from __future__ import annotations

import random
from fractions import Fraction

from minps.market import Market, make_market, validate_feasibility


def random_market(rng: random.Random, *, max_agents: int = 4, max_objects: int = 4,
                  demand: int | None = None, cap_max: int | None = None,
                  feasible: bool = True, attempts: int = 1000) -> Market:
    """Draw a market uniformly over sizes, quotas and strict preferences.

    With ``feasible`` the draw is repeated until the market admits an
    allowable allocation.
    """
    for _ in range(attempts):
        d = demand or 1
        n = rng.randint(1, max_agents)
        k = rng.randint(d, max(d, max_objects))
        top = cap_max or n
        caps = [rng.randint(1, top) for _ in range(k)]
        mins = [rng.randint(0, c) if rng.random() < 0.5 else 0 for c in caps]
        prefs = []
        for _ in range(n):
            order = list(range(k))
            rng.shuffle(order)
            prefs.append(order)
        market = make_market(prefs, mins, caps, demand=d)
        if not feasible or validate_feasibility(market).feasible:
            return market
    raise RuntimeError("no feasible market drawn")


def random_subrandom(rng: random.Random, market: Market, denominator: int = 6):
    """A matrix in the unit box, biased toward the lower-contour boundary.

    Half the draws scale a random completed allocation down cellwise; the
    rest are unstructured grid points, which are mostly outside.
    """
    from minps.polytope import complete

    n, k, d = market.n_agents, market.n_objects, market.demand
    q = denominator
    if rng.random() < 0.5:
        # Random lower bounds steer the circulation to varied completions.
        seed = [[Fraction(rng.randint(0, q), q) if rng.random() < 0.3 else Fraction(0)
                 for _ in range(k)] for _ in range(n)]
        base = complete(market, seed) or complete(market, None)
        out = []
        for i in range(n):
            row = []
            for j in range(k):
                x = base[i][j] * Fraction(rng.randint(0, q), q) if rng.random() < 0.5 else base[i][j]
                if rng.random() < 0.15:
                    x = min(Fraction(1), x + Fraction(rng.randint(1, q), q))
                row.append(x)
            out.append(tuple(row))
        return tuple(out)
    scale = Fraction(rng.randint(1, q), q) * d / max(1, k // 2)
    return tuple(tuple(min(Fraction(1), Fraction(rng.randint(0, q), q) * scale) for _ in range(k))
                 for _ in range(n))
