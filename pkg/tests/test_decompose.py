import json
import random
from collections import Counter
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from conftest import NO_MINIMUMS_MPS, WITH_MINIMUMS_MPS, matrix
from minps.decompose import Lottery, NotImplementableError, SplitMix64, decompose, sample
from minps.eating import mps
from minps.generate import random_market
from minps.market import is_allowable
from minps.polytope import complete


def fractional_count(mu):
    cells = sum(1 for row in mu for x in row if F(x).denominator != 1)
    cols = sum(1 for col in zip(*mu) if F(sum(col)).denominator != 1)
    return cells + cols


def test_with_minimums(with_minimums):
    lot = decompose(with_minimums, WITH_MINIMUMS_MPS)
    assert lot.is_valid(with_minimums, WITH_MINIMUMS_MPS)
    assert sum(lot.weights()) == 1
    assert lot.combination() == WITH_MINIMUMS_MPS
    assert len(lot) <= fractional_count(WITH_MINIMUMS_MPS) + 1


def test_no_minimums(no_minimums):
    lot = decompose(no_minimums, NO_MINIMUMS_MPS)
    assert lot.is_valid(no_minimums, NO_MINIMUMS_MPS)
    assert all(is_allowable(no_minimums, M) for _, M in lot.parts)


def test_known_lottery_is_valid(with_minimums):
    # A hand-built lottery for the same matrix; the checker must accept it.
    third = F(1, 3)
    lot = Lottery(((third, ((1, 0, 0), (1, 0, 0), (0, 1, 0))),
                   (third, ((1, 0, 0), (0, 1, 0), (0, 0, 1))),
                   (third, ((0, 1, 0), (1, 0, 0), (0, 0, 1)))))
    assert lot.is_valid(with_minimums, WITH_MINIMUMS_MPS)
    assert not lot.is_valid(with_minimums, matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_integral_input_is_a_single_part(with_minimums):
    M = complete(with_minimums)
    lot = decompose(with_minimums, M)
    assert lot.parts == ((1, M),)


def test_rejects_non_implementable(with_minimums):
    with pytest.raises(NotImplementableError):
        decompose(with_minimums, matrix([[1, 0, 0]] * 3))


def test_lottery_json(with_minimums):
    doc = json.loads(decompose(with_minimums, WITH_MINIMUMS_MPS).to_json(with_minimums))
    assert sum(F(p["weight"]) for p in doc["parts"]) == 1
    assert set(doc["parts"][0]["assignment"]) == {"1", "2", "3"}


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 9), st.sampled_from([1, 2]))
def test_decomposes_mechanism_outputs(seed, d):
    m = random_market(random.Random(seed), demand=d)
    mu, _ = mps(m)
    lot = decompose(m, mu)
    assert lot.is_valid(m, mu)
    assert len(lot) <= fractional_count(mu) + 1


# -- sampling ----------------------------------------------------------------

def test_splitmix_reference_values():
    g = SplitMix64(0)
    assert g.next() == 0xE220A8397B1DCDAF
    assert g.next() == 0x6E789E6AA1B965F4
    assert SplitMix64(1 << 64).next() == SplitMix64(0).next()


def test_sample_single_part(with_minimums):
    M = complete(with_minimums)
    lot = Lottery(((F(1), M),))
    assert all(sample(lot, s) == M for s in (0, 1, 42, 2 ** 64 - 1))


def test_sample_deterministic(with_minimums):
    lot = decompose(with_minimums, WITH_MINIMUMS_MPS)
    assert sample(lot, 42) == sample(lot, 42)
    assert sample(lot, 42) in [M for _, M in lot.parts]


def test_sample_frequencies(with_minimums):
    lot = decompose(with_minimums, WITH_MINIMUMS_MPS)
    counts = Counter(sample(lot, seed) for seed in range(30000))
    for w, M in lot.parts:
        assert abs(counts[M] / 30000 - float(w)) <= 0.02
