import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quasitaub.slowvary import Family, Site, SlowVarySpec, candidates


def test_one_is_identically_one():
    L = SlowVarySpec.one()
    assert np.all(L(np.logspace(-3, 3, 7)) == 1.0)


def test_log_pow_at_infinity():
    L = SlowVarySpec.log_pow(2.0)
    assert L(math.e ** 3) == pytest.approx(9.0)


def test_origin_evaluates_at_reciprocal():
    L = SlowVarySpec.log_pow(1.0, Site.ORIGIN)
    assert L(1e-4) == pytest.approx(math.log(1e4))


def test_undefined_region_is_nan():
    L = SlowVarySpec.loglog_pow(1.0)
    assert np.isnan(L.log_value(2.0))  # log log 2 < 0
    assert np.isnan(SlowVarySpec.log_pow(1.0).log_value(1.0))


@pytest.mark.parametrize("L", candidates(Site.INFINITY), ids=lambda L: L.describe())
def test_candidates_are_slowly_varying(L):
    tail = np.logspace(100, 200, 21)
    assert L.is_slowly_varying(tail, tol=0.05)


def test_slow_variation_check_rejects_undefined_tail():
    L = SlowVarySpec.loglog_pow(1.0)
    assert not L.is_slowly_varying(np.logspace(0, 3, 7))


def test_candidate_set():
    c = candidates("origin")
    assert c[0].family is Family.ONE
    assert {L.site for L in c} == {Site.ORIGIN}
    assert len(c) == 9


@given(st.sampled_from(list(Family)), st.floats(-3, 3), st.sampled_from(list(Site)))
def test_dict_round_trip(fam, b, site):
    L = SlowVarySpec(fam, b, site)
    assert SlowVarySpec.from_dict(L.to_dict()) == L


def test_describe():
    assert SlowVarySpec.one().describe() == "One"
    assert SlowVarySpec.log_pow(1).describe() == "LogPow(1)"
