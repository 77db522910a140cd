import json

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import WITH_MINIMUMS_MPS, MARKETS
from minps.estimator import MinimumsProbabilisticSerial, check_market
from minps.market import MarketError


def test_params_round_trip():
    est = MinimumsProbabilisticSerial(engine="general", max_agents=5)
    assert est.get_params()["engine"] == "general"
    other = clone(est).set_params(check_feasible=False)
    assert other.check_feasible is False and other.max_agents == 5


def test_fit_predict(with_minimums):
    est = MinimumsProbabilisticSerial().fit(MARKETS / "with_minimums.json")
    assert est.n_agents_ == 3 and est.n_objects_ == 3
    assert tuple(map(tuple, est.predict())) == WITH_MINIMUMS_MPS
    assert est.lottery_.is_valid(with_minimums, WITH_MINIMUMS_MPS)
    assert est.trace_.tau is not None
    assert est.sample(7) == {"1": ["o1"], "2": ["o1"], "3": ["o2"]}


def test_inputs_accepted(with_minimums):
    doc = with_minimums.to_dict()
    for X in (with_minimums, doc, json.dumps(doc), str(MARKETS / "with_minimums.json")):
        assert check_market(X) == with_minimums
    with pytest.raises(MarketError):
        check_market(42)


def test_predict_other_market(demand2):
    est = MinimumsProbabilisticSerial().fit(MARKETS / "with_minimums.json")
    out = est.predict(demand2)
    assert isinstance(out, np.ndarray) and out.shape == (2, 3)
    assert out.sum() == 4


def test_not_fitted_and_bad_engine(with_minimums):
    with pytest.raises(NotFittedError):
        MinimumsProbabilisticSerial().predict()
    with pytest.raises(ValueError):
        MinimumsProbabilisticSerial(engine="fast").fit(with_minimums)
