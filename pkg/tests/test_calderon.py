import numpy as np
import pytest

from quasitaub import calderon as C
from quasitaub import fields as F
from quasitaub import kernels as K
from quasitaub.errors import Degenerate, NonIntegrable, TruncationDominated

# mpmath oracles
TWO_K0_4 = 0.0223193521717060485          # 2 K_0(4)
DILATION_RATIO = 0.762905534497965659     # 2 K_0(2 sqrt(4.5)) / 2 K_0(4)
RHO0_AT_0 = 0.0969895444389349290         # (1/2pi) int exp(-u^2/2 - 1/u^2) du
RHO0_AT_1 = 0.0112069342997841764


@pytest.fixture(scope="module")
def psi():
    return K.make_kernel("paper_lizorkin")


@pytest.fixture(scope="module")
def eta(psi):
    return C.reconstruction_wavelet(psi)


@pytest.fixture(scope="module")
def degenerate_psi():
    return K.compose_lizorkin(K.make_kernel("degenerate_demo", 2), K.make_kernel("paper_lizorkin", 2))


def test_lizorkin_constant(psi):
    rep = C.admissibility(psi, psi)
    assert rep.is_constant
    assert rep.c.real == pytest.approx(TWO_K0_4, abs=1e-10)
    assert np.all(rep.c_values.real > 0) and np.all(rep.c_values.imag == 0)


def test_linearity_in_eta(psi):
    assert C.admissibility(psi, psi * -1).c.real == pytest.approx(-TWO_K0_4, abs=1e-10)


def test_degenerate_composed(degenerate_psi):
    rep = C.admissibility(degenerate_psi, degenerate_psi)
    assert not rep.is_constant and rep.c is None
    zero_rays = rep.rays[:, 0] == 0.0
    assert zero_rays.any() and np.all(rep.c_values[zero_rays] == 0)


def test_non_integrable():
    g = K.make_kernel("gaussian")
    with pytest.raises(NonIntegrable):
        C.admissibility(g, g)


def test_reconstruction_wavelet(psi, eta):
    assert C.admissibility(psi, eta).c.real == pytest.approx(1.0, abs=1e-6)
    assert eta.is_radial


def test_reconstruction_wavelet_2d_radial():
    psi2 = K.make_kernel("paper_lizorkin", 2)
    assert C.reconstruction_wavelet(psi2).is_radial


def test_reconstruction_wavelet_degenerate(degenerate_psi):
    with pytest.raises(Degenerate):
        C.reconstruction_wavelet(degenerate_psi)


def test_mixed_composed_ray_normalized():
    psi = K.compose_lizorkin(K.make_kernel("paper_mixed", 2), K.make_kernel("paper_lizorkin", 2))
    eta = C.reconstruction_wavelet(psi)
    rep = C.admissibility(psi, eta)
    assert rep.is_constant and rep.c.real == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("pair", ["liz-liz", "gauss-composed", "mixed-2d"])
def test_conjugate_symmetry(pair):
    liz = K.make_kernel("paper_lizorkin")
    if pair == "liz-liz":
        a, b = liz, liz * (2 - 1j)
    elif pair == "gauss-composed":
        a, b = liz * 1j, K.compose_lizorkin(K.make_kernel("gaussian"), liz)
    else:
        liz2 = K.make_kernel("paper_lizorkin", 2)
        a, b = K.compose_lizorkin(K.make_kernel("paper_mixed", 2), liz2), liz2
    assert C.conjugate_symmetry_gap(a, b) < 1e-12


# -- test functions and synthesis ---------------------------------------------------------

def test_test_function_tables():
    rho = C.lookup_test_function("gauss_lizorkin")
    assert rho(0.0) == pytest.approx(RHO0_AT_0, abs=1e-9)
    assert rho(1.0) == pytest.approx(RHO0_AT_1, abs=1e-9)


def test_synthesis_of_zero(eta):
    box = C.CalderonBox()
    zero = np.zeros((box.y.size, box.x.size))
    assert np.all(C.synthesis(zero, eta, np.array([0.0, 0.5])) == 0)


@pytest.mark.parametrize("name", C.RECONSTRUCTION_SET)
def test_calderon_reconstruction(psi, eta, name):
    assert C.reconstruction_error(C.lookup_test_function(name), psi, eta) < 1e-3


def test_off_lattice_points(psi, eta):
    rho = C.lookup_test_function("gauss_lizorkin")
    t = np.array([-0.3337, 0.01, 1.2345])
    assert C.reconstruction_error(rho, psi, eta, t) < 1e-3


def test_dilated_synthesis(psi, eta):
    rho = C.lookup_test_function("gauss_lizorkin")
    box = C.CalderonBox()
    a = 2.0

    def hat(u, y):
        v = y * u / a
        return rho.hat(u) * np.conj(psi.symbol(v.reshape(-1, 1)).reshape(v.shape))

    phi_a = C.fourier_rows(hat, box)
    t = np.arange(-64, 65) / 32
    out = C.synthesis(phi_a, eta, t, box)
    ref = rho(t) * DILATION_RATIO
    assert np.max(np.abs(out - ref)) / np.max(np.abs(ref)) < 1e-3


def test_truncation_is_reported(psi, eta):
    small = C.CalderonBox(X=2.0, y_min=0.25, y_max=4.0)
    rho = C.lookup_test_function("wide")
    with pytest.raises(TruncationDominated):
        C.reconstruct(rho, psi, eta, np.array([0.0]), small)


# -- pairings -------------------------------------------------------------------------------

def test_pairing_delta(psi, eta):
    rho = C.lookup_test_function("gauss_lizorkin")
    v = C.desingularized_pairing(F.delta(), rho, psi, eta)[0]
    assert abs(v - RHO0_AT_0) < 1e-3 * RHO0_AT_0


def test_pairing_comb(psi, eta):
    rho = C.lookup_test_function("gauss_lizorkin")
    f = F.delta_comb([(0.0, 1.0), (1.0, -1.0)])
    exact = RHO0_AT_0 - RHO0_AT_1
    assert C.direct_pairing(f, rho)[0] == pytest.approx(exact, abs=1e-9)
    v = C.desingularized_pairing(f, rho, psi, eta)[0]
    assert abs(v - exact) < 1e-3 * abs(exact)


def test_pairing_heaviside(psi, eta):
    # rho = rho_0' gives <H, rho> = int_0^inf rho = -rho_0(0)
    rho = C.lookup_test_function("derivative")
    direct = C.direct_pairing(F.heaviside(), rho)[0]
    assert direct.real == pytest.approx(-RHO0_AT_0, abs=1e-8)
    v = C.desingularized_pairing(F.heaviside(), rho, psi, eta)[0]
    assert abs(v - direct) < 1e-3 * abs(direct)


def test_pairing_transfer(psi, eta):
    rho = C.lookup_test_function("band")
    f = F.delta_comb([(0.0, 1.0), (1.0, -1.0), (-2.0, 0.5)])
    lhs, rhs = C.pairing_transfer(f, rho, psi, eta)
    assert np.max(np.abs(lhs - rhs)) < 1e-3 * np.max(np.abs(lhs))


def test_box_defaults():
    box = C.CalderonBox()
    assert box.x[0] == -16.0 and box.x[-1] == 16.0
    assert box.y[0] == pytest.approx(2.0 ** -8) and box.y[-1] == pytest.approx(2.0 ** 8)
