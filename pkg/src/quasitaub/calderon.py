"""Admissibility constants, reconstruction wavelets, synthesis and desingularized pairings.

Conventions (n = 1 for everything on the (x, y) box):

* W_psi f(x, y) = M^f with kernel conj(psi(-t)), symbol conj(psi_hat(y u)).
* synthesis M_eta Phi(t) = int int Phi(x, y) y^-1 eta((t - x)/y) dx dy/y.
* c_{psi,eta}(w) = int_0^inf conj(psi_hat(r w)) eta_hat(r w) dr/r.

With these, (1/c) M_eta W_psi rho = rho, and
(1/c) int int W_psi f . W_{eta-bar} rho dx dy/y = <f, rho>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import kernels as K
from .errors import (Degenerate, NonIntegrable, QuasitaubError, TruncationDominated,
                     UnsupportedDim, ZeroAdmissibility)
from .fields import FieldId, base_real_value, is_function_field, singular_points
from .transform import box_sheet

R_MIN, R_MAX, N_R = 1e-6, 1e6, 2048
CONST_TOL = 1e-6
TAIL_TOL = 1e-12
TRUNCATION_TOL = 1e-4


# -- admissibility ---------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    rays: np.ndarray
    c_values: np.ndarray
    is_constant: bool
    c: Optional[complex]

    def to_dict(self):
        return {"rays": self.rays.tolist(),
                "c_values": [[float(v.real), float(v.imag)] for v in self.c_values],
                "is_constant": self.is_constant,
                "c": None if self.c is None else [float(self.c.real), float(self.c.imag)]}


def admissibility(psi, eta, r_min=R_MIN, r_max=R_MAX, n_r=N_R, rel_tol=CONST_TOL):
    """Per-ray c_{psi,eta}(w) by the trapezoid rule in log r."""
    if psi.dim != eta.dim:
        raise K.DimMismatch(f"dims {psi.dim} and {eta.dim}")
    rays = psi.ray_grid
    s = np.linspace(math.log(r_min), math.log(r_max), n_r)
    r = np.exp(s)
    u = (rays[:, None, :] * r[None, :, None]).reshape(-1, psi.dim)
    vals = (np.conj(psi.symbol(u)) * eta.symbol(u)).reshape(len(rays), n_r)
    scale = np.max(np.abs(vals))
    ends = np.max(np.abs(vals[:, [0, -1]]))
    if ends > TAIL_TOL * max(scale, 1e-300) and ends > 0:
        raise NonIntegrable(f"integrand at the ends of [{r_min:g}, {r_max:g}] is {ends:.3g}")
    c_values = integrate.trapezoid(vals, s, axis=1)
    ref = np.max(np.abs(c_values))
    dev = np.max(np.abs(c_values - c_values[0]))
    is_constant = bool(ref > 0 and dev <= rel_tol * ref)
    c = complex(np.mean(c_values)) if is_constant else None
    return AdmissibilityReport(rays, c_values, is_constant, c)


def reconstruction_wavelet(psi, min_c=1e-12):
    """eta with eta_hat(u) = psi_hat(u) / c_{psi,psi}(u/|u|), so that c_{psi,eta} = 1."""
    rep = admissibility(psi, psi)
    c = rep.c_values.real
    if np.min(c) < min_c:
        bad = int(np.argmin(c))
        raise Degenerate(f"c_(psi,psi) = {c[bad]:.3g} on ray {rep.rays[bad].tolist()}")
    if rep.is_constant:
        return psi * (1.0 / float(np.mean(c)))
    return K.Kernel(psi.dim, K.KernelId.RAY_NORMALIZED,
                    (psi, tuple(psi.ray_angles.tolist()), tuple(float(v) for v in c)),
                    n_rays=psi.n_rays, n_radial=psi.n_radial, r_min=psi.r_min, r_max=psi.r_max)


# -- box --------------------------------------------------------------------------------

@dataclass(frozen=True)
class CalderonBox:
    """x in [-X, X] with step dx, y = 2^(j/per_octave) between y_min and y_max."""

    X: float = 16.0
    dx: float = 1.0 / 32
    y_min: float = 2.0 ** -8
    y_max: float = 2.0 ** 8
    per_octave: int = 16
    n_fft: int = 2 ** 14

    @property
    def x(self):
        n = int(round(self.X / self.dx))
        return np.arange(-n, n + 1) * self.dx

    @property
    def log_y(self):
        lo, hi = math.log2(self.y_min), math.log2(self.y_max)
        n = int(round((hi - lo) * self.per_octave))
        return np.linspace(lo, hi, n + 1) * math.log(2)

    @property
    def y(self):
        return np.exp(self.log_y)

    def to_dict(self):
        return {"X": self.X, "dx": self.dx, "y_min": self.y_min, "y_max": self.y_max,
                "per_octave": self.per_octave, "n_fft": self.n_fft}


def _box_integral(integrand, box):
    """Trapezoid in x, trapezoid in log y; integrand shape (ny, nx, ...)."""
    rows = integrate.trapezoid(integrand, dx=box.dx, axis=1)
    return integrate.trapezoid(rows, box.log_y, axis=0), rows


def _truncation_estimate(integrand, rows, box):
    """Magnitude of what lies beyond the box, read off the boundary rows and columns."""
    y_edges = np.abs(rows[0]) + np.abs(rows[-1])
    x_edges = integrate.trapezoid(np.abs(integrand[:, 0]) + np.abs(integrand[:, -1]), box.log_y, axis=0)
    return y_edges + x_edges


def fourier_rows(hat, box):
    """rows[i, j] = (2 pi)^-1 int hat(u, y_i) exp(i x_j u) du, by FFT with the box step."""
    N, dx = box.n_fft, box.dx
    du = 2 * np.pi / (N * dx)
    u = (np.arange(N) - N // 2) * du
    x_full = (np.arange(N) - N // 2) * dx
    y = box.y
    F = hat(u[None, :], y[:, None])
    vals = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(F, axes=1), axis=1), axes=1) * N * du / (2 * np.pi)
    keep = np.abs(x_full) <= box.X + 1e-12
    return vals[:, keep]


def _symbol_1d(k, v):
    v = np.asarray(v, dtype=float)
    return k.symbol(v.reshape(-1, 1)).reshape(v.shape)


# -- test functions -------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """Lizorkin test function given by its Fourier transform rho_hat(u) (n = 1)."""

    name: str
    hat: Callable
    band: float = 160.0

    __test__ = False

    def table(self):
        return _table(self)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.table()(t.reshape(-1, 1)).reshape(t.shape)


_TABLES = {}


def _table(rho):
    if rho.name not in _TABLES:
        _TABLES[rho.name] = K.inverse_fourier_table(rho.hat, rho.band, n_pts=2 ** 18, min_width=rho.band)
    return _TABLES[rho.name]


def _bump(u, a=0.5, b=1.0):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.exp(-a * u ** 2 - b / u ** 2)
    return np.where(u == 0, 0.0, out)


def _rho_gauss(u):
    return _bump(u) + 0j


def _rho_band(u):
    u = np.asarray(u, dtype=float)
    return _bump(u, 0.0, 1.0) * np.exp(-(np.abs(u) - 2) ** 2) + 0j


def _rho_odd(u):
    return -1j * np.sign(u) * _bump(u)


def _rho_shifted(u):
    return _bump(u) * np.exp(-1j * u)


def _rho_wide(u):
    return _bump(u, 1 / 8, 4.0) + 0j


def _rho_derivative(u):
    return 1j * u * _bump(u)


TEST_FUNCTIONS = {
    "gauss_lizorkin": TestFunction("gauss_lizorkin", _rho_gauss),
    "band": TestFunction("band", _rho_band),
    "odd": TestFunction("odd", _rho_odd),
    "shifted": TestFunction("shifted", _rho_shifted),
    "wide": TestFunction("wide", _rho_wide),
    "derivative": TestFunction("derivative", _rho_derivative),
}
RECONSTRUCTION_SET = ("gauss_lizorkin", "band", "odd", "shifted", "wide")


def lookup_test_function(name):
    try:
        return TEST_FUNCTIONS[name]
    except KeyError:
        raise QuasitaubError(f"unknown test function {name!r}") from None


# -- synthesis ------------------------------------------------------------------------------

def wavelet_of_test(rho, psi, box=None):
    """W_psi rho on the box, shape (ny, nx)."""
    box = box or CalderonBox()
    return fourier_rows(lambda u, y: rho.hat(u) * np.conj(_symbol_1d(psi, y * u)), box)


def synthesis(values, psi, t, box=None, tol=TRUNCATION_TOL):
    """M_psi Phi(t) for Phi sampled on the box (shape (ny, nx) or (ny, nx, d)).

    ``t`` may be a point or an array; the truncation check is relative to the
    largest output.
    """
    if psi.dim != 1:
        raise UnsupportedDim("synthesis on the (x, y) box is implemented for n = 1")
    box = box or CalderonBox()
    phi = np.asarray(values, dtype=complex)
    scalar_field = phi.ndim == 2
    if scalar_field:
        phi = phi[..., None]
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x, y = box.x, box.y
    out_rows = np.zeros((len(y), len(t), phi.shape[-1]), dtype=complex)
    edge_cols = np.zeros((len(y), len(t), phi.shape[-1]))
    m = t / box.dx
    lattice = None
    if np.allclose(m, np.round(m), rtol=0, atol=1e-9):
        jx = np.round(x / box.dx).astype(int)
        diff = np.round(m).astype(int)[:, None] - jx[None, :]
        k_range = np.arange(diff.min(), diff.max() + 1)
        lattice = diff - diff.min()
    row_size = np.max(np.abs(phi), axis=(1, 2))
    # rows at the FFT noise floor contribute nothing resolvable
    negligible = row_size <= 1e-14 * max(np.max(row_size), 1e-300)
    for i, yi in enumerate(y):
        row = phi[i]
        if negligible[i]:
            continue
        if lattice is not None:
            # t - x lies on the lattice k dx: evaluate the kernel once per row
            kvals = psi.real_space((k_range * box.dx / yi).reshape(-1, 1)) / yi
            kern = kvals[lattice]
        else:
            arg = (t[:, None] - x[None, :]) / yi
            kern = psi.real_space(arg.reshape(-1, 1)).reshape(arg.shape) / yi
        integrand = kern[:, :, None] * row[None, :, :]
        out_rows[i] = integrate.trapezoid(integrand, dx=box.dx, axis=1)
        edge_cols[i] = np.abs(integrand[:, 0]) + np.abs(integrand[:, -1])
    result = integrate.trapezoid(out_rows, box.log_y, axis=0)
    tail = np.abs(out_rows[0]) + np.abs(out_rows[-1]) + integrate.trapezoid(edge_cols, box.log_y, axis=0)
    scale = np.max(np.abs(result))
    if scale > 0 and np.max(tail) > tol * scale:
        raise TruncationDominated(f"boundary contribution {np.max(tail):.3g} vs result {scale:.3g}")
    if scalar_field:
        result = result[..., 0]
    return result


def reconstruct(rho, psi, eta, t, box=None):
    """(1/c_{psi,eta}) M_eta W_psi rho at the points t."""
    rep = admissibility(psi, eta)
    if not rep.is_constant:
        raise QuasitaubError("c_(psi,eta) is not constant across rays")
    if abs(rep.c) < 1e-12:
        raise ZeroAdmissibility("c_(psi,eta) = 0")
    phi = wavelet_of_test(rho, psi, box)
    return synthesis(phi, eta, t, box) / rep.c


def reconstruction_error(rho, psi, eta, t=None, box=None):
    """max |reconstruction - rho| / max |rho| over t (default: |t| <= 3 with step 1/32)."""
    t = np.arange(-96, 97) / 32 if t is None else np.asarray(t, dtype=float)
    rec = reconstruct(rho, psi, eta, t, box)
    ref = rho(t)
    return float(np.max(np.abs(rec - ref)) / np.max(np.abs(ref)))


# -- pairings -------------------------------------------------------------------------------

def direct_pairing(f, rho):
    """<f, rho> evaluated without the Calderon plane."""
    if f.dim != 1:
        raise UnsupportedDim("pairings are implemented for n = 1")
    w = f.weight_array
    cid = f.catalog_id
    if f.cutoff is None and cid is FieldId.DELTA:
        return w * complex(rho(0.0))
    if f.cutoff is None and cid is FieldId.DELTA_COMB:
        return w * sum(c * complex(rho(loc[0])) for loc, c in f.params["atoms"])
    if not is_function_field(f):
        raise QuasitaubError(f"no direct pairing for {cid.value}")
    tab = rho.table()
    grid = np.linspace(-0.9 * tab.tmax, 0.9 * tab.tmax, 20001)
    mag = np.abs(rho(grid))
    lim = float(np.max(np.abs(grid[mag > 1e-15 * mag.max()])))

    def part(fn, a, b):
        kw = dict(limit=400, epsabs=1e-12, epsrel=1e-10)
        return integrate.quad(fn, a, b, **kw)[0]

    def integrand(s, comp):
        v = base_real_value(f, np.array([[s]]))[0] * complex(rho(s))
        return v.real if comp == 0 else v.imag

    pts = sorted({-lim, lim, *[p for p in singular_points(f) if -lim < p < lim]})
    total = 0j
    for a, b in zip(pts[:-1], pts[1:]):
        total += part(lambda s: integrand(s, 0), a, b) + 1j * part(lambda s: integrand(s, 1), a, b)
    return w * total


def _pairing_integrand(f, rho, psi, eta, box):
    wf = box_sheet(f, K.conj_reflect(psi), box.x, box.y).values
    # W_{eta-bar} rho has symbol rho_hat(u) eta_hat(-y u)
    wr = fourier_rows(lambda u, y: rho.hat(u) * _symbol_1d(eta, -y * u), box)
    return wf * wr[..., None]


def desingularized_pairing(f, rho, psi, eta, box=None, tol=TRUNCATION_TOL):
    """(1/c_{psi,eta}) int int W_psi f . W_{eta-bar} rho dx dy/y over the box."""
    if f.dim != 1 or psi.dim != 1:
        raise UnsupportedDim("the Calderon box is implemented for n = 1")
    box = box or CalderonBox()
    rep = admissibility(psi, eta)
    if not rep.is_constant:
        raise QuasitaubError("c_(psi,eta) is not constant across rays")
    if abs(rep.c) < 1e-12:
        raise ZeroAdmissibility("c_(psi,eta) = 0")
    integrand = _pairing_integrand(f, rho, psi, eta, box)
    total, rows = _box_integral(integrand, box)
    tail = _truncation_estimate(integrand, rows, box)
    if np.max(np.abs(total)) > 0 and np.max(tail) > tol * np.max(np.abs(total)):
        raise TruncationDominated(f"boundary contribution {np.max(tail):.3g} vs {np.max(np.abs(total)):.3g}")
    return total / rep.c


def pairing_transfer(f, rho, psi, eta, box=None):
    """Both sides of int int W_psi f . Phi dx dy/y = <f, M_{psi-bar} Phi> with Phi = W_{eta-bar} rho.

    The right side is evaluated for DeltaComb-type fields, where <f, g> is a
    finite sum of point values of the synthesized function.
    """
    box = box or CalderonBox()
    if f.catalog_id not in (FieldId.DELTA, FieldId.DELTA_COMB) or f.cutoff is not None:
        raise QuasitaubError("pairing transfer is evaluated for Delta and DeltaComb fields")
    integrand = _pairing_integrand(f, rho, psi, eta, box)
    lhs, _ = _box_integral(integrand, box)
    phi = fourier_rows(lambda u, y: rho.hat(u) * _symbol_1d(eta, -y * u), box)
    if f.catalog_id is FieldId.DELTA:
        atoms = (((0.0,), 1.0),)
    else:
        atoms = f.params["atoms"]
    pts = np.array([loc[0] for loc, _ in atoms])
    coef = np.array([c for _, c in atoms])
    g = synthesis(phi, K.bar(psi), pts, box)
    rhs = f.weight_array * complex(np.sum(coef * g))
    return lhs, rhs


def conjugate_symmetry_gap(psi, eta):
    """max |c_{psi,eta}(w) - c_{eta-bar,psi-bar}(-w)| over the ray grid, relative."""
    a = admissibility(psi, eta).c_values
    b = admissibility(K.bar(eta), K.bar(psi)).c_values
    rays = psi.ray_grid
    # index of -w on the grid
    flip = [int(np.argmin(np.linalg.norm(rays + r, axis=1))) for r in rays]
    ref = max(np.max(np.abs(a)), 1e-300)
    return float(np.max(np.abs(a - b[flip])) / ref)
