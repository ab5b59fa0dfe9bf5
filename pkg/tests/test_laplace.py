import math

import numpy as np
import pytest

from quasitaub.applications import laplace as LP
from quasitaub.errors import ConfigInvalid, InsufficientRange, SlowDecay

# ln(1 + exp(-eps)), mpmath
ABEL_ALT_HARMONIC = {0.1: 0.644396660073570892, 0.01: 0.688159680507862323, 0.001: 0.692647305559940101}


@pytest.fixture(scope="module")
def alt():
    return LP.builtin_series("alt-harmonic")


def test_single_term():
    assert LP.laplace_eval(LP.ConeSeries([1.0]), 1j).value == 1.0


def test_geometric_sum():
    N = 10
    s = LP.ConeSeries(np.ones(N + 1))
    expected = (1 - math.exp(-(N + 1))) / (1 - math.exp(-1))
    assert LP.laplace_eval(s, 1j).value == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("eps", sorted(ABEL_ALT_HARMONIC))
def test_alt_harmonic_abel_means(alt, eps):
    v = LP.laplace_eval(alt, 1j * eps)
    assert v.value.real == pytest.approx(ABEL_ALT_HARMONIC[eps], abs=1e-12)
    assert v.error_bar < 1e-12


def test_slow_decay_is_refused():
    short = LP.builtin_series("alt-harmonic", N=100)
    with pytest.raises(SlowDecay):
        LP.laplace_eval(short, 1e-3j)


def test_upper_half_plane_only(alt):
    with pytest.raises(ValueError):
        LP.laplace_eval(alt, 1.0)


def test_tail_model_validated():
    with pytest.raises(ValueError):
        LP.ConeSeries([0.0, 1.0, 1.0], "OInvN", 1.0)
    with pytest.raises(ValueError):
        LP.ConeSeries([1.0], "O1")


def test_unknown_builtin():
    with pytest.raises(ConfigInvalid):
        LP.builtin_series("fibonacci")


def test_csv_round_trip(tmp_path):
    p = tmp_path / "series.csv"
    p.write_text("n,re,im\n0,1.0,0\n3,-0.5,2\n")
    s = LP.read_series_csv(p)
    np.testing.assert_array_equal(s.coefficients, [1.0, 0, 0, -0.5 + 2j])


def test_csv_bad_row(tmp_path):
    p = tmp_path / "series.csv"
    p.write_text("0,1.0\nzero,1.0\n")
    with pytest.raises(ConfigInvalid):
        LP.read_series_csv(p)


# -- region bound --------------------------------------------------------------------------

def test_region_validation():
    with pytest.raises(ValueError):
        LP.OmegaRegion(kappa=1.0)
    with pytest.raises(ValueError):
        LP.OmegaRegion(sigma_min=0.0)


@pytest.mark.parametrize("name, alpha, bounded", [
    ("alt-harmonic", -1.0, True),
    ("ones", 0.0, True),
    ("linear", -1.0, False),
])
def test_omega_bound(name, alpha, bounded):
    res = LP.omega_bound_check(LP.builtin_series(name), LP.OmegaRegion(0.0), alpha, k=1)
    assert res.bounded is bounded


def test_omega_bound_needs_range(alt):
    with pytest.raises(InsufficientRange):
        LP.omega_bound_check(alt, LP.OmegaRegion(), -1.0, lambdas=np.logspace(0, -2, 9))


# -- Littlewood -------------------------------------------------------------------------------

def test_littlewood_alt_harmonic(alt):
    rep = LP.littlewood_analyze(alt)
    assert rep.abel_limit.real == pytest.approx(math.log(2), abs=1e-3)
    assert rep.tauberian_ok
    assert rep.partial_sum_limit.real == pytest.approx(math.log(2), abs=1e-3)
    assert rep.verdict.startswith("convergent")


def test_littlewood_grandi():
    rep = LP.littlewood_analyze(LP.builtin_series("grandi"))
    assert rep.abel_limit.real == pytest.approx(0.5, abs=1e-3)
    assert not rep.tauberian_ok and rep.partial_sum_limit is None
    assert rep.verdict == "Tauberian hypothesis fails; no conclusion"


def test_littlewood_basel():
    rep = LP.littlewood_analyze(LP.builtin_series("basel"))
    assert rep.abel_limit.real == pytest.approx(math.pi ** 2 / 6, abs=1e-3)
    assert rep.tauberian_ok
    assert rep.partial_sum_limit.real == pytest.approx(1.6449, abs=1e-3)


@pytest.mark.parametrize("name", ["ones", "linear"])
def test_no_abel_limit(name):
    rep = LP.littlewood_analyze(LP.builtin_series(name, N=10 ** 5))
    assert rep.abel_limit is None and not rep.counterexample


def _sin_over_n(N=10 ** 6):
    n = np.arange(N + 1, dtype=float)
    c = np.where(n > 0, np.sin(n) / np.maximum(n, 1), 0.0)
    return LP.ConeSeries(c, "OInvN", 1.0, "sin(n)/n")


@pytest.mark.parametrize("series", [LP.builtin_series("alt-harmonic"), LP.builtin_series("basel"), _sin_over_n()],
                         ids=lambda s: s.name)
def test_littlewood_soundness(series):
    rep = LP.littlewood_analyze(series)
    assert rep.tauberian_ok and rep.abel_limit is not None
    assert rep.partial_sum_limit is not None
    assert abs(rep.partial_sum_limit - rep.abel_limit) < 1e-3
    assert not rep.counterexample


def test_sin_over_n_value():
    rep = LP.littlewood_analyze(_sin_over_n())
    assert rep.abel_limit.real == pytest.approx((math.pi - 1) / 2, abs=1e-3)


def test_report_dict(alt):
    d = LP.littlewood_analyze(alt).to_dict()
    assert d["partial_sum_limit"][0] == pytest.approx(math.log(2), abs=1e-3)
    assert isinstance(d["abel_trend"], list) and len(d["abel_trend"]) == 4
