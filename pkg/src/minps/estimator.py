"""scikit-learn style wrapper around the mechanism.

``fit`` takes a market (a :class:`~minps.market.Market`, a dict in the file
schema, a JSON string or a path) and stores the random allocation, the eating
trace and a lottery implementing it::

    est = MinimumsProbabilisticSerial().fit("markets/with_minimums.json")
    est.allocation_      # exact N x O matrix
    est.sample(seed=7)   # one allowable deterministic allocation
"""

from __future__ import annotations

import json
import os
from collections.abc import Mapping

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from minps.decompose import decompose, sample
from minps.eating import mps_general, mps_unit
from minps.market import Market, MarketError, assignment_of, load_market, parse_market
from minps.polytope import DEFAULT_MAX_AGENTS, DEFAULT_MAX_OBJECTS


def check_market(X) -> Market:
    """Coerce supported inputs to a validated :class:`Market`."""
    if isinstance(X, Market):
        return X
    if isinstance(X, Mapping):
        return parse_market(json.dumps(dict(X)))
    if isinstance(X, (str, os.PathLike)):
        text = str(X)
        if text.lstrip().startswith("{"):
            return parse_market(text)
        return load_market(X)
    raise MarketError(f"cannot interpret {type(X).__name__} as a market")


class MinimumsProbabilisticSerial(BaseEstimator):
    """Random assignment respecting per-object minimums and capacities.

    Parameters
    ----------
    engine : {"auto", "unit", "general"}
        ``"auto"`` uses the step algorithm when ``d = 1`` and the continuous
        general-demand engine otherwise.
    check_feasible : bool
        Verify by circulation that the market admits an allowable allocation.
    max_agents, max_objects : int
        Size cap for the general engine's subset-enumerated constraint rows.
    """

    def __init__(self, engine="auto", check_feasible=True,
                 max_agents=DEFAULT_MAX_AGENTS, max_objects=DEFAULT_MAX_OBJECTS):
        self.engine = engine
        self.check_feasible = check_feasible
        self.max_agents = max_agents
        self.max_objects = max_objects

    def _run(self, market: Market):
        if self.engine not in ("auto", "unit", "general"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.engine == "unit" or (self.engine == "auto" and market.demand == 1):
            return mps_unit(market, check=self.check_feasible)
        return mps_general(market, check=self.check_feasible,
                           max_agents=self.max_agents, max_objects=self.max_objects)

    def fit(self, X, y=None):
        market = check_market(X)
        self.market_ = market
        self.allocation_, self.trace_ = self._run(market)
        self.lottery_ = decompose(market, self.allocation_)
        self.n_agents_, self.n_objects_ = market.n_agents, market.n_objects
        return self

    def _check_fitted(self):
        if not hasattr(self, "allocation_"):
            raise NotFittedError("call fit() first")

    def predict(self, X=None):
        """Allocation for ``X`` (or the fitted market) as a Fraction object array."""
        if X is None:
            self._check_fitted()
            mu = self.allocation_
        else:
            mu = self._run(check_market(X))[0]
        return np.array(mu, dtype=object)

    def sample(self, seed: int) -> dict[str, list[str]]:
        self._check_fitted()
        return assignment_of(self.market_, sample(self.lottery_, seed))
