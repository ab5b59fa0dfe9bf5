import math

import numpy as np
import pytest

from quasitaub import fields as F
from quasitaub.applications import heat as H
from quasitaub.errors import DimMismatch, NotStabilized
from quasitaub.slowvary import SlowVarySpec

# mpmath oracles
HEAT_DELTA_0_1 = 0.282094791773878143          # (4 pi)^-1/2
HEAT_DELTA_07_1 = 0.249570928036152425         # (2 pi)^-1 int exp(-u^2) cos(0.7 u) du
HEAT_HEAVISIDE_1_1 = 0.760249938906523269      # (1 + erf(1/2)) / 2
BIHEAT_DELTA_0_1 = 0.288516869308234844        # (2 pi)^-1 int exp(-u^4) du
HEAVISIDE_DEV_1E4 = 0.0141018016521640070      # erf(5 / 200) / 2


def prob(f, symbol="heat", **kw):
    return H.CauchyProblem(f.dim, f, symbol, **kw)


@pytest.mark.parametrize("f, x, t, expected", [
    (F.delta(), 0.0, 1.0, HEAT_DELTA_0_1),
    (F.delta(), 0.7, 1.0, HEAT_DELTA_07_1),
    (F.heaviside(), 0.0, 4.0, 0.5),
    (F.heaviside(), 1.0, 1.0, HEAT_HEAVISIDE_1_1),
], ids=["delta0", "delta07", "heaviside0", "heaviside1"])
def test_solve_cauchy(f, x, t, expected):
    assert H.solve_cauchy(prob(f), x, t)[0].real == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("x, t", [(0.0, 1e-3), (3.0, 2.0), (-40.0, 1e5)])
def test_constants_are_preserved(x, t):
    assert H.solve_cauchy(prob(F.constant(1.0)), x, t)[0] == pytest.approx(1.0, abs=1e-12)


def test_delta_closed_form_in_time():
    for t in (0.01, 1.0, 100.0):
        assert H.solve_cauchy(prob(F.delta()), 0.0, t)[0].real == pytest.approx(1 / math.sqrt(4 * math.pi * t))


def test_biheat_delta():
    assert H.solve_cauchy(prob(F.delta(), "biheat"), 0.0, 1.0)[0].real == pytest.approx(BIHEAT_DELTA_0_1, rel=1e-9)


def test_problem_validation():
    with pytest.raises(ValueError):
        prob(F.delta(), "wave")
    with pytest.raises(DimMismatch):
        H.CauchyProblem(2, F.delta())
    with pytest.raises(ValueError):
        prob(F.delta(), t_grid=[0.0, 1.0])
    with pytest.raises(ValueError):
        H.solve_cauchy(prob(F.delta()), 0.0, -1.0)


def test_symbol_is_exp_of_P():
    p = prob(F.delta(), "biheat")
    u = np.linspace(-2, 2, 9)[:, None]
    np.testing.assert_allclose(p.kernel.symbol(u), np.exp(p.P(u)), rtol=1e-14)


def test_semigroup():
    p = prob(F.delta())
    dx = 1 / 16
    x = (np.arange(4096) - 2048) * dx
    u1 = np.array([H.solve_cauchy(p, xi, 1.0)[0] for xi in x])
    u12 = np.array([H.solve_cauchy(p, xi, 3.5)[0] for xi in x])
    stepped = H.evolve_samples(p, u1, dx, 2.5)
    assert np.max(np.abs(stepped - u12)) < 1e-6 * np.max(np.abs(u12))


# -- stabilization ----------------------------------------------------------------------

def test_d_curve_delta():
    rep = H.check_d_curve_stabilization(prob(F.delta()), -1.0)
    assert rep.stabilizes
    i = [tuple(d) for d in rep.directions].index((0.0, 1.0))
    assert rep.U0[i][0].real == pytest.approx(HEAT_DELTA_0_1, rel=1e-9)


def test_d_curve_heaviside():
    rep = H.check_d_curve_stabilization(prob(F.heaviside()), 0.0)
    assert rep.stabilizes and rep.l_hat == 0
    i = [tuple(d) for d in rep.directions].index((0.0, 1.0))
    assert rep.U0[i][0].real == pytest.approx(0.5, abs=1e-12)


def test_d_curve_polynomial():
    rep = H.check_d_curve_stabilization(prob(F.polynomial([0, 1.0])), 0.0)
    assert not rep.stabilizes and rep.l_hat is None


def test_time_stabilization_heaviside():
    res = H.time_stabilization(prob(F.heaviside()), 0.0)
    assert res.ell[0].real == pytest.approx(0.5, abs=1e-12)
    assert res.window == (1e4, 1e6)
    # the worst point is x = 5 at t = 1e4
    assert res.sup_dev == pytest.approx(HEAVISIDE_DEV_1E4, rel=1e-9)


def test_time_stabilization_heaviside_later_window():
    p = prob(F.heaviside(), t_grid=np.logspace(1, 7, 25))
    assert H.time_stabilization(p, 0.0).sup_dev < 1e-2


@pytest.mark.parametrize("c", [1.0, 2.5, -0.75])
def test_time_stabilization_constant(c):
    res = H.time_stabilization(prob(F.constant(c)), 0.0)
    assert res.ell[0] == c and res.sup_dev == 0.0


def test_time_stabilization_delta():
    res = H.time_stabilization(prob(F.delta()), -1.0)
    assert res.ell[0].real == pytest.approx(HEAT_DELTA_0_1, rel=1e-12)
    assert res.T_desc.startswith("t^(-1/2)")


def test_time_stabilization_refuses():
    with pytest.raises(NotStabilized):
        H.time_stabilization(prob(F.polynomial([0, 1.0])), 0.0)


def test_log_initial_datum():
    # U(0, t) = (1/2) log sqrt(t) + const, so T(t) = L(sqrt t) with L = log
    rep = H.check_d_curve_stabilization(prob(F.log_heaviside()), 0.0, SlowVarySpec.log_pow(1.0))
    assert rep.l_hat == 0
