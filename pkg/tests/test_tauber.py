import math

import numpy as np
import pytest

from quasitaub import fields as F
from quasitaub import kernels as K
from quasitaub import tauber as TA
from quasitaub import transform as T
from quasitaub.errors import (AllZeroSheet, DegenerateKernel, InsufficientRange, NoFiniteK,
                              QuasitaubError)
from quasitaub.slowvary import Family, Site, SlowVarySpec

ONE = SlowVarySpec.one()
PHI0 = 1 / math.sqrt(2 * math.pi)
E_ABS_SQRT = 0.822178958662458552  # mpmath quadrature, see test_transform


def sheet(f, site="infinity", kernel=None, **kw):
    k = kernel or K.make_kernel("gaussian", f.dim)
    return T.compute_sheet(f, k, T.ScaleGrid.default(f.dim, site, **kw))


def on_axis(site="infinity"):
    return T.ScaleGrid(T.geometric_lambdas(site, 64), [[0.0, 1.0]], site)


# -- alpha ---------------------------------------------------------------------------

@pytest.mark.parametrize("site", ["origin", "infinity"])
def test_alpha_delta(site):
    est = TA.estimate_alpha(sheet(F.delta(), site))
    assert est.alpha_hat == pytest.approx(-1.0, abs=0.01)
    assert est.slow_vary_hat.family is Family.ONE


def test_alpha_abs_half():
    est = TA.estimate_alpha(sheet(F.homogeneous_abs(0.5)))
    assert est.alpha_hat == pytest.approx(0.5, abs=0.02)
    assert est.slow_vary_hat.family is Family.ONE


def test_alpha_log_heaviside():
    est = TA.estimate_alpha(sheet(F.log_heaviside()))
    assert est.alpha_hat == pytest.approx(0.0, abs=0.02)
    assert est.slow_vary_hat == SlowVarySpec.log_pow(1.0)


def test_alpha_zero_sheet(lizorkin):
    with pytest.raises(AllZeroSheet):
        TA.estimate_alpha(sheet(F.polynomial([1.0]), kernel=lizorkin))


# -- k ---------------------------------------------------------------------------------

def test_k_delta_is_zero():
    # on the sphere y -> 0 forces |x| -> 1, where y^-1 phi(x/y) -> 0, so k = 0 already bounds it
    s = sheet(F.delta())
    x, y = s.grid.x[:, 0], s.grid.y
    sup = np.max(np.exp(-0.5 * (x / y) ** 2) / y) * PHI0
    assert sup < 1.0
    assert TA.find_tauberian_k(s, -1.0, ONE).k_hat == 0


def test_k_heaviside():
    assert TA.find_tauberian_k(sheet(F.heaviside()), 0.0, ONE).k_hat == 0


def test_k_polynomial_has_no_finite_k():
    with pytest.raises(NoFiniteK):
        TA.find_tauberian_k(sheet(F.polynomial([0, 1.0])), 0.0, ONE)


# -- limits ---------------------------------------------------------------------------

@pytest.mark.parametrize("f, alpha, expected", [
    (F.delta(), -1.0, PHI0),
    (F.heaviside(), 0.0, 0.5),
    (F.homogeneous_abs(0.5), 0.5, E_ABS_SQRT),
], ids=["delta", "heaviside", "abs"])
def test_limits_on_axis(gauss, f, alpha, expected):
    s = T.compute_sheet(f, gauss, on_axis())
    (entry,) = TA.detect_limits(s, alpha, ONE)
    assert entry.exists
    assert entry.value[0].real == pytest.approx(expected, rel=1e-9)


def test_divergent_limit(gauss):
    s = T.compute_sheet(F.log_heaviside(), gauss, on_axis())
    (entry,) = TA.detect_limits(s, 0.0, ONE)
    assert not entry.exists


# -- critical degree ---------------------------------------------------------------------

def test_critical_log_heaviside(gauss):
    fit = TA.fit_critical_log(T.compute_sheet(F.log_heaviside(), gauss, on_axis()), 0)
    assert fit.log_coeff[0, 0].real == pytest.approx(0.5, abs=1e-3)
    assert np.isfinite(fit.g_part).all()


def test_critical_heaviside(gauss):
    fit = TA.fit_critical_log(T.compute_sheet(F.heaviside(), gauss, on_axis()), 0)
    assert abs(fit.log_coeff[0, 0]) < 1e-3
    assert fit.g_part[0, 0].real == pytest.approx(0.5, abs=1e-9)


def test_critical_delta(gauss):
    fit = TA.fit_critical_log(T.compute_sheet(F.delta(), gauss, on_axis()), -1)
    assert abs(fit.log_coeff[0, 0]) < 1e-3


# -- associate homogeneity ------------------------------------------------------------------

LAM = T.geometric_lambdas("infinity", 64)


def test_associate_log():
    res = TA.test_associate_homogeneous(np.log(LAM), LAM, ONE)
    assert res.is_aah and res.is_ahb
    assert res.v_hat[0] == pytest.approx(1.0, abs=1e-3)


def test_associate_sin_log_log():
    # increments are cos(log log lam) log(a) / log(lam) -> 0: bounded, and of log-a form with v = 0
    res = TA.test_associate_homogeneous(np.sin(np.log(np.log(10 * LAM))), LAM, ONE)
    assert res.is_ahb
    assert abs(res.v_hat[0]) < 0.1


def test_associate_power():
    res = TA.test_associate_homogeneous(LAM ** 0.1, LAM, ONE)
    assert not res.is_aah and not res.is_ahb


def test_associate_vector_samples():
    c = np.stack([np.log(LAM), -2 * np.log(LAM)], axis=1)
    res = TA.test_associate_homogeneous(c, LAM, ONE)
    np.testing.assert_allclose(res.v_hat, [1.0, -2.0], atol=1e-9)


def test_associate_short_range():
    lam = np.logspace(0, 2, 33)
    with pytest.raises(InsufficientRange):
        TA.test_associate_homogeneous(np.log(lam), lam, ONE)


def test_associate_origin():
    lam = T.geometric_lambdas("origin", 64)
    res = TA.test_associate_homogeneous(np.log(lam), lam, SlowVarySpec.one(Site.ORIGIN))
    assert res.is_aah and res.v_hat[0] == pytest.approx(1.0, abs=1e-9)


# -- annihilation ---------------------------------------------------------------------------

def test_annihilation_lizorkin(lizorkin):
    assert TA.verify_annihilation(lizorkin, F.polynomial([1, 2, 3, 4, 5.0]), 4) < 1e-6


def test_annihilation_mixed(mixed):
    assert TA.verify_annihilation(mixed, F.polynomial({(0, 3): 1.0}, dim=2), 4) < 1e-6


def test_annihilation_gaussian(gauss):
    assert TA.verify_annihilation(gauss, F.polynomial([0, 1.0]), 0) == pytest.approx(1.0, abs=1e-8)


def test_annihilation_requires_polynomial(gauss):
    with pytest.raises(QuasitaubError):
        TA.verify_annihilation(gauss, F.delta(), 2)


# -- reports -----------------------------------------------------------------------------------

def test_report_delta(gauss):
    rep = TA.full_report(F.delta(), gauss, T.ScaleGrid.default(1, "infinity"))
    assert rep.alpha_hat == pytest.approx(-1.0, abs=0.01)
    assert rep.slow_vary_hat.family is Family.ONE
    assert rep.k_hat == 0
    assert all(e.exists for e in rep.limits)
    assert rep.diagnostics["homogeneity_residual"] < 2e-2


def test_report_log_heaviside(gauss):
    rep = TA.full_report(F.log_heaviside(), gauss, T.ScaleGrid.default(1, "infinity"))
    assert rep.alpha_hat == pytest.approx(0.0, abs=0.02)
    assert rep.slow_vary_hat == SlowVarySpec.log_pow(1.0)
    i = [tuple(e.direction) for e in rep.limits].index((0.0, 1.0))
    assert rep.critical.log_coeff[i, 0].real == pytest.approx(0.5, abs=1e-2)


def test_report_refuses_degenerate(degenerate):
    with pytest.raises(DegenerateKernel):
        TA.full_report(F.delta(2), degenerate, T.ScaleGrid.default(2, "origin"))


def test_report_to_dict_is_json_ready(gauss):
    import json
    rep = TA.full_report(F.heaviside(), gauss, T.ScaleGrid.default(1, "origin"))
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["k_hat"] == 0 and d["slow_vary_hat"]["family"] == "One"


ROUND_TRIP = [F.delta(), F.heaviside(), F.homogeneous_abs(0.5), F.homogeneous_abs(-0.5),
              F.homogeneous_plus(1.5), F.delta(2), F.homogeneous_abs(0.5, dim=2), F.constant(2.0)]


@pytest.mark.parametrize("kname", ["gaussian", "heat"])
@pytest.mark.parametrize("site", ["origin", "infinity"])
@pytest.mark.parametrize("f", ROUND_TRIP, ids=lambda f: f.describe())
def test_round_trip(f, site, kname):
    k = K.make_kernel(kname, f.dim)
    gt = F.ground_truth(f, site)
    grid = T.ScaleGrid.default(f.dim, site, n_theta=8, n_azimuth=4)
    rep = TA.full_report(f, k, grid)
    assert rep.alpha_hat == pytest.approx(gt.alpha, abs=0.02)
    assert rep.slow_vary_hat.family is gt.slow_vary.family


@pytest.mark.parametrize("f", [F.delta(), F.heaviside(), F.homogeneous_abs(0.5), F.homogeneous_abs(-0.5)],
                         ids=lambda f: f.describe())
def test_locality_at_origin(gauss, f):
    grid = T.ScaleGrid.default(1, "origin")
    a = TA.full_report(f, gauss, grid)
    b = TA.full_report(F.with_cutoff(f, 1.0), gauss, grid)
    assert abs(a.alpha_hat - b.alpha_hat) < 2e-2
    assert a.k_hat == b.k_hat
    for ea, eb in zip(a.limits, b.limits):
        assert ea.exists == eb.exists
        if ea.exists:
            assert np.max(np.abs(ea.value - eb.value)) < 2e-2


@pytest.mark.parametrize("f", ROUND_TRIP[:5], ids=lambda f: f.describe())
def test_sub_grid_consistency(gauss, f):
    full = T.compute_sheet(f, gauss, T.ScaleGrid.default(1, "origin"))
    sub = full.restrict(full.grid.y <= 0.75)
    assert TA.estimate_alpha(sub).alpha_hat == pytest.approx(TA.estimate_alpha(full).alpha_hat, abs=0.02)


@pytest.mark.parametrize("coeffs", [[1.0], [0, 2.0], [1.0, -1.0, 0.5, 0.25, -0.125]])
@pytest.mark.parametrize("f", [F.delta(), F.heaviside()], ids=lambda f: f.describe())
def test_polynomial_insensitivity(lizorkin, f, coeffs):
    grid = T.ScaleGrid.default(1, "infinity")
    a = TA.full_report(f, lizorkin, grid)
    b = TA.full_report(f + F.polynomial(coeffs), lizorkin, grid)
    assert abs(a.alpha_hat - b.alpha_hat) < 1e-6
    assert a.k_hat == b.k_hat and a.slow_vary_hat == b.slow_vary_hat
    for ea, eb in zip(a.limits, b.limits):
        assert ea.exists == eb.exists
        if ea.exists:
            assert np.max(np.abs(ea.value - eb.value)) < 1e-6


@pytest.mark.parametrize("c", [1e-3, 1e3])
def test_positive_scaling_invariance(gauss, c):
    grid = T.ScaleGrid.default(1, "infinity")
    a = TA.full_report(F.homogeneous_abs(0.5), gauss, grid)
    b = TA.full_report(F.homogeneous_abs(0.5, weight=c), gauss, grid)
    assert abs(a.alpha_hat - b.alpha_hat) < 1e-9
    assert (a.k_hat, a.slow_vary_hat, a.flags) == (b.k_hat, b.slow_vary_hat, b.flags)
    for ea, eb in zip(a.limits, b.limits):
        assert math.log(np.abs(eb.value[0])) - math.log(np.abs(ea.value[0])) == pytest.approx(math.log(c))


def test_estimated_L_is_slowly_varying(gauss):
    rep = TA.full_report(F.log_heaviside(), gauss, T.ScaleGrid.default(1, "infinity"))
    lam = T.geometric_lambdas("infinity", 64)
    assert rep.slow_vary_hat.is_slowly_varying(lam[lam >= lam[-1] / 10])


# -- boundary-region equivalence --------------------------------------------------------------

@pytest.mark.parametrize("f, alpha", [(F.delta(), -1.0), (F.heaviside(), 0.0)], ids=["delta", "heaviside"])
def test_equivalence_heat(heat, f, alpha):
    res = TA.equivalence_check(f, heat, alpha)
    assert res.agree and res.sphere_k is not None


def test_omega_grid():
    g = TA.omega_grid(0.5)
    assert g.kind == "omega"
    assert np.all(np.abs(g.x[:, 0]) <= g.y ** 0.5 + 1e-12)
