"""Test-function kernels phi, given through their Fourier transforms.

A :class:`Kernel` is an immutable, hashable description.  Its symbol
``phi_hat`` is evaluated in double precision for grids and in mpmath for
the finite-difference Taylor data at the origin.  Real-space values come
either from closed forms (Gaussian family, Poisson kernel) or from a dense
inverse FFT cached per kernel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import mpmath
import numpy as np
from scipy import interpolate, special

from .errors import DimMismatch, GridTooCoarse, NumericallyUnstable, UnsupportedDim
from .fields import as_points, smooth_cutoff

N_MAX = 8
TAYLOR_STEP = 1e-3
TAYLOR_DPS = 50


class KernelId(str, enum.Enum):
    GAUSSIAN = "Gaussian"
    HEAT_SYMBOL = "HeatSymbol"
    PAPER_LIZORKIN = "PaperLizorkin"
    PAPER_MIXED = "PaperMixed"
    DEGENERATE_DEMO = "DegenerateDemo"
    CONE_EXPONENTIAL = "ConeExponential"
    EXP_POWER = "ExpPower"
    SAMPLED_FOURIER = "SampledFourier"
    COMPOSED = "Composed"
    RAY_NORMALIZED = "RayNormalized"


ALIASES = {
    "gaussian": KernelId.GAUSSIAN,
    "heat": KernelId.HEAT_SYMBOL,
    "heat_symbol": KernelId.HEAT_SYMBOL,
    "paper_lizorkin": KernelId.PAPER_LIZORKIN,
    "lizorkin": KernelId.PAPER_LIZORKIN,
    "paper_mixed": KernelId.PAPER_MIXED,
    "degenerate_demo": KernelId.DEGENERATE_DEMO,
    "cone_exponential": KernelId.CONE_EXPONENTIAL,
}


@dataclass(frozen=True)
class Kernel:
    dim: int
    catalog_id: KernelId
    params: tuple = ()
    coef: complex = 1.0 + 0j
    conj: bool = False
    reflect: bool = False
    n_rays: int = 64
    n_radial: int = 200
    r_min: float = 1e-3
    r_max: float = 1e3

    def __post_init__(self):
        object.__setattr__(self, "catalog_id", KernelId(self.catalog_id))
        object.__setattr__(self, "coef", complex(self.coef))
        if self.dim not in (1, 2):
            raise UnsupportedDim(f"kernel dimension {self.dim} not supported")
        if self.catalog_id is KernelId.DEGENERATE_DEMO and self.dim != 2:
            raise UnsupportedDim("DegenerateDemo is defined for n = 2")
        if self.catalog_id is KernelId.CONE_EXPONENTIAL and self.dim != 1:
            raise UnsupportedDim("ConeExponential is defined for n = 1")

    # -- identity ------------------------------------------------------------
    @property
    def name(self):
        base = self.catalog_id.value
        if self.catalog_id is KernelId.COMPOSED:
            base = f"Composed({self.params[0].name},{self.params[1].name})"
        elif self.catalog_id is KernelId.RAY_NORMALIZED:
            base = f"RayNormalized({self.params[0].name})"
        elif self.catalog_id is KernelId.EXP_POWER:
            base = f"ExpPower({self.params[0]:g})"
        if self.reflect:
            base = f"reflect({base})"
        if self.conj:
            base = f"conj_reflect({base})"
        if self.coef != 1:
            base = f"{self.coef:g}*{base}"
        return base

    def __mul__(self, c):
        return replace(self, coef=self.coef * complex(c))

    __rmul__ = __mul__

    def with_grids(self, n_rays=None, n_radial=None, r_min=None, r_max=None):
        return replace(self,
                       n_rays=self.n_rays if n_rays is None else int(n_rays),
                       n_radial=self.n_radial if n_radial is None else int(n_radial),
                       r_min=self.r_min if r_min is None else float(r_min),
                       r_max=self.r_max if r_max is None else float(r_max))

    # -- grids ---------------------------------------------------------------
    @property
    def ray_grid(self):
        """Unit directions, shape (n_rays, n); for n = 1 this is {-1, +1}."""
        if self.dim == 1:
            return np.array([[-1.0], [1.0]])
        ang = 2 * np.pi * np.arange(self.n_rays) / self.n_rays
        rays = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        # exact zeros on the axes keep u1 = 0 rays exactly degenerate
        rays[np.abs(rays) < 1e-15] = 0.0
        return rays

    @property
    def ray_angles(self):
        if self.dim == 1:
            return np.array([np.pi, 0.0])
        return 2 * np.pi * np.arange(self.n_rays) / self.n_rays

    @property
    def radial_grid(self):
        return np.logspace(math.log10(self.r_min), math.log10(self.r_max), self.n_radial)

    # -- symbol --------------------------------------------------------------
    def symbol(self, u):
        """phi_hat at points ``u`` (scalar, (n,) or (m, n)); returns shape (m,)."""
        pts = as_points(u, self.dim)
        raw = _raw_symbol(self, -pts if self.reflect else pts)
        if self.conj:
            raw = np.conj(raw)
        return self.coef * raw

    def symbol_mp(self, u):
        sign = -1 if self.reflect else 1
        raw = _raw_symbol_mp(self, [sign * mpmath.mpf(v) for v in u])
        if self.conj:
            raw = mpmath.conj(raw)
        return mpmath.mpc(self.coef.real, self.coef.imag) * raw

    def radial_profile(self, omega, r):
        """R_omega(r) = phi_hat(r omega) for a unit direction omega."""
        omega = np.asarray(omega, dtype=float).reshape(1, self.dim)
        r = np.asarray(r, dtype=float)
        return self.symbol(r[:, None] * omega)

    @property
    def is_radial(self):
        cid = self.catalog_id
        if cid in (KernelId.GAUSSIAN, KernelId.HEAT_SYMBOL, KernelId.PAPER_LIZORKIN,
                   KernelId.EXP_POWER):
            return True
        if cid is KernelId.COMPOSED:
            return self.params[0].is_radial and self.params[1].is_radial
        if cid is KernelId.RAY_NORMALIZED:
            base, _, scales = self.params
            return base.is_radial and len(set(scales)) == 1
        return self.dim == 1 and cid is KernelId.CONE_EXPONENTIAL

    @property
    def gaussian_variance(self):
        """s with phi_hat = coef * exp(-s |u|^2 / 2), or None."""
        if self.catalog_id is KernelId.GAUSSIAN:
            return 1.0
        if self.catalog_id is KernelId.HEAT_SYMBOL:
            return 2.0
        if self.catalog_id is KernelId.EXP_POWER and self.params[0] == 2:
            return 2.0
        return None

    # -- real space ------------------------------------------------------------
    def real_space(self, t):
        """phi(t) = (2 pi)^-n int phi_hat(u) exp(i u.t) du at points t."""
        pts = as_points(t, self.dim)
        if self.reflect:
            pts = -pts
        base = replace(self, coef=1.0 + 0j, conj=False, reflect=False)
        if self.conj:
            # F^-1[conj(phi_hat)](t) = conj(phi(-t))
            vals = np.conj(_raw_real_space(base, -pts))
        else:
            vals = _raw_real_space(base, pts)
        return self.coef * vals


def make_kernel(name, dim=1, **grid):
    """Catalog kernel by id or CLI alias (``gaussian``, ``paper_lizorkin`` ...)."""
    if isinstance(name, KernelId):
        cid = name
    else:
        key = str(name)
        cid = ALIASES.get(key.lower())
        if cid is None:
            cid = KernelId(key)
    if cid in (KernelId.COMPOSED, KernelId.RAY_NORMALIZED, KernelId.SAMPLED_FOURIER, KernelId.EXP_POWER):
        raise ValueError(f"{cid.value} needs explicit parameters")
    return Kernel(dim, cid, **grid)


def exp_power_kernel(p, dim=1):
    """phi_hat(u) = exp(-|u|^p); p = 2 reproduces the heat symbol."""
    return Kernel(dim, KernelId.EXP_POWER, (float(p),))


def sampled_kernel(values, half_width):
    vals = np.asarray(values, dtype=complex)
    if vals.ndim != 1 or vals.size < 2:
        raise ValueError("sampled kernels are one-dimensional with >= 2 samples")
    data = tuple(complex(v) for v in vals)
    return Kernel(1, KernelId.SAMPLED_FOURIER, (float(half_width), data))


def conj_reflect(k):
    """Kernel of psi-bar-check, t -> conj(psi(-t)); its symbol is conj(psi_hat)."""
    return replace(k, conj=not k.conj, coef=np.conj(k.coef))


def reflect(k):
    """Kernel of psi-check, t -> psi(-t); its symbol is psi_hat(-u)."""
    return replace(k, reflect=not k.reflect)


def bar(k):
    """Kernel of psi-bar, t -> conj(psi(t)); its symbol is conj(psi_hat(-u))."""
    return reflect(conj_reflect(k))


# -- raw symbols ----------------------------------------------------------------

def _lizorkin_np(r):
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = np.exp(-r[pos] - 1.0 / r[pos])
    return out


def _raw_symbol(k, u):
    cid = k.catalog_id
    r = np.linalg.norm(u, axis=-1)
    if cid is KernelId.GAUSSIAN:
        return np.exp(-0.5 * r ** 2) + 0j
    if cid is KernelId.HEAT_SYMBOL:
        return np.exp(-r ** 2) + 0j
    if cid is KernelId.PAPER_LIZORKIN:
        return _lizorkin_np(r) + 0j
    if cid is KernelId.PAPER_MIXED:
        return _lizorkin_np(r) + u[:, 0] ** 2 * smooth_cutoff(r) + 0j
    if cid is KernelId.DEGENERATE_DEMO:
        return u[:, 0] ** 2 * np.exp(-r ** 2) + 0j
    if cid is KernelId.CONE_EXPONENTIAL:
        return np.exp(-r) + 0j
    if cid is KernelId.EXP_POWER:
        return np.exp(-r ** k.params[0]) + 0j
    if cid is KernelId.SAMPLED_FOURIER:
        U, data = k.params
        vals = np.asarray(data)
        axis = np.linspace(-U, U, len(vals))
        v = u[:, 0]
        out = np.interp(v, axis, vals.real, left=0.0, right=0.0) + 1j * np.interp(
            v, axis, vals.imag, left=0.0, right=0.0)
        return out
    if cid is KernelId.COMPOSED:
        phi, psi1 = k.params
        return np.conj(phi.symbol(u)) * psi1.symbol(u)
    if cid is KernelId.RAY_NORMALIZED:
        base, angles, scales = k.params
        return base.symbol(u) / _ray_scale(k.dim, angles, scales, u)
    raise ValueError(f"unknown kernel {cid}")


def _ray_scale(dim, angles, scales, u):
    scales = np.asarray(scales, dtype=complex)
    if dim == 1:
        return np.where(u[:, 0] >= 0, scales[1], scales[0])
    ang = np.mod(np.arctan2(u[:, 1], u[:, 0]), 2 * np.pi)
    grid = np.append(np.asarray(angles), 2 * np.pi)
    vals = np.append(scales, scales[0])
    return np.interp(ang, grid, vals.real) + 1j * np.interp(ang, grid, vals.imag)


def _smooth_cutoff_mp(r):
    if r <= mpmath.mpf(1) / 2:
        return mpmath.mpf(1)
    if r >= 1:
        return mpmath.mpf(0)
    s = 2 * r - 1
    a = mpmath.exp(-1 / (1 - s))
    b = mpmath.exp(-1 / s)
    return a / (a + b)


def _raw_symbol_mp(k, u):
    cid = k.catalog_id
    r2 = sum(v * v for v in u)
    r = mpmath.sqrt(r2)
    if cid is KernelId.GAUSSIAN:
        return mpmath.exp(-r2 / 2)
    if cid is KernelId.HEAT_SYMBOL:
        return mpmath.exp(-r2)
    if cid in (KernelId.PAPER_LIZORKIN, KernelId.PAPER_MIXED):
        val = mpmath.mpf(0) if r == 0 else mpmath.exp(-r - 1 / r)
        if cid is KernelId.PAPER_MIXED:
            val += u[0] ** 2 * _smooth_cutoff_mp(r)
        return val
    if cid is KernelId.DEGENERATE_DEMO:
        return u[0] ** 2 * mpmath.exp(-r2)
    if cid is KernelId.CONE_EXPONENTIAL:
        return mpmath.exp(-r)
    if cid is KernelId.EXP_POWER:
        return mpmath.exp(-(r ** k.params[0]))
    if cid is KernelId.COMPOSED:
        phi, psi1 = k.params
        return mpmath.conj(phi.symbol_mp(u)) * psi1.symbol_mp(u)
    if cid is KernelId.RAY_NORMALIZED:
        base, angles, scales = k.params
        pt = np.array([[float(v) for v in u]])
        s = complex(_ray_scale(k.dim, angles, scales, pt)[0])
        return base.symbol_mp(u) / mpmath.mpc(s.real, s.imag)
    # sampled kernels: piecewise-linear, evaluated in double precision
    val = complex(_raw_symbol(k, np.array([[float(v) for v in u]]))[0])
    return mpmath.mpc(val.real, val.imag)


# -- real space ------------------------------------------------------------------

def _raw_real_space(k, t):
    s = k.gaussian_variance
    n = k.dim
    if s is not None:
        r2 = np.sum(t ** 2, axis=-1)
        return (2 * np.pi * s) ** (-n / 2) * np.exp(-r2 / (2 * s)) + 0j
    if k.catalog_id is KernelId.CONE_EXPONENTIAL:
        return 1.0 / (np.pi * (1.0 + t[:, 0] ** 2)) + 0j
    table = _real_space_table(k)
    return table(t)


def fourier_extent(k, rel=1e-18):
    """Radius beyond which |phi_hat| < rel * max on every probed ray."""
    rays = k.ray_grid if k.dim == 1 else k.with_grids(n_rays=16).ray_grid
    r = np.concatenate([np.linspace(0, 1, 65)[1:], np.logspace(0, 4, 400)])
    vals = np.abs(np.concatenate([k.symbol(r[:, None] * w[None, :]) for w in rays]).reshape(len(rays), -1))
    peak = vals.max()
    if peak == 0:
        return 1.0
    alive = np.nonzero((vals > rel * peak).any(axis=0))[0]
    return float(r[alive[-1]] * 1.25) if alive.size else 1.0


class _Table1D:
    def __init__(self, t, vals):
        self.tmax = t[-1]
        self.re = interpolate.CubicSpline(t, vals.real)
        self.im = interpolate.CubicSpline(t, vals.imag)

    def __call__(self, t):
        x = t[:, 0]
        inside = np.abs(x) <= self.tmax
        xc = np.where(inside, x, 0.0)
        return np.where(inside, self.re(xc) + 1j * self.im(xc), 0.0)


class _TableRadial:
    def __init__(self, rho, vals):
        self.rmax = rho[-1]
        self.re = interpolate.CubicSpline(rho, vals.real)
        self.im = interpolate.CubicSpline(rho, vals.imag)

    def __call__(self, t):
        rho = np.linalg.norm(t, axis=-1)
        inside = rho <= self.rmax
        rc = np.where(inside, rho, 0.0)
        return np.where(inside, self.re(rc) + 1j * self.im(rc), 0.0)


class _Table2D:
    def __init__(self, axis, vals):
        self.tmax = axis[-1]
        self.re = interpolate.RegularGridInterpolator((axis, axis), vals.real, method="cubic")
        self.im = interpolate.RegularGridInterpolator((axis, axis), vals.imag, method="cubic")

    def __call__(self, t):
        inside = np.all(np.abs(t) <= self.tmax, axis=-1)
        tc = np.where(inside[:, None], t, 0.0)
        return np.where(inside, self.re(tc) + 1j * self.im(tc), 0.0)


def inverse_fourier_table(fn, V, n_pts=2 ** 18, min_width=400.0):
    """Dense table of (2 pi)^-1 int fn(v) exp(i v t) dv for a 1-D symbol.

    ``fn`` is sampled on [-U, U] with U = max(V, min_width); the returned
    spline covers 90% of the resulting periodic window.
    """
    U = max(V, min_width)
    dv = 2 * U / n_pts
    v = (np.arange(n_pts) - n_pts // 2) * dv
    vals = fn(v)
    phi = np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(vals))) * n_pts * dv / (2 * np.pi)
    t = (np.arange(n_pts) - n_pts // 2) * (2 * np.pi / (n_pts * dv))
    keep = np.abs(t) <= 0.9 * t[-1]
    return _Table1D(t[keep], phi[keep])


@lru_cache(maxsize=64)
def _real_space_table(k):
    V = fourier_extent(k)
    if k.dim == 1:
        return inverse_fourier_table(k.symbol, V)
    if k.is_radial:
        r = np.linspace(0, V, int(V / 0.004) + 1)
        w = np.full(r.size, r[1] - r[0])
        w[0] = w[-1] = 0.5 * (r[1] - r[0])
        prof = k.symbol(np.stack([r, np.zeros_like(r)], axis=1)) * r * w
        rho = np.linspace(0, 150.0, 6001)
        vals = np.empty(rho.size, dtype=complex)
        for i in range(0, rho.size, 500):
            blk = rho[i:i + 500]
            vals[i:i + 500] = special.j0(np.outer(blk, r)) @ prof
        return _TableRadial(rho, vals / (2 * np.pi))
    n_pts = 1024
    U = max(V, 80.0)
    dv = 2 * U / n_pts
    ax = (np.arange(n_pts) - n_pts // 2) * dv
    g1, g2 = np.meshgrid(ax, ax, indexing="ij")
    vals = k.symbol(np.stack([g1.ravel(), g2.ravel()], axis=1)).reshape(n_pts, n_pts)
    phi = np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(vals))) * (n_pts * dv / (2 * np.pi)) ** 2
    t = (np.arange(n_pts) - n_pts // 2) * (2 * np.pi / (n_pts * dv))
    return _Table2D(t, phi)


@lru_cache(maxsize=64)
def _cdf_table(k):
    base = complex(k.symbol(0.0)[0])

    def integrand(v):
        with np.errstate(divide="ignore", invalid="ignore"):
            g = (k.symbol(v) - base * np.exp(-v ** 2)) / (1j * v)
        zero = np.nonzero(v == 0)[0]
        if zero.size:
            i = zero[0]
            g[i] = 0.5 * (g[i - 1] + g[i + 1])
        return g

    table = inverse_fourier_table(integrand, fourier_extent(k))
    return base, table


def cdf(k, s):
    """int_{-inf}^s phi(t) dt for a 1-D kernel, from its symbol.

    Split as phi_hat(0) times the N(0, 2) distribution function plus an
    inverse transform of the regular remainder (phi_hat - phi_hat(0) e^{-v^2}) / (i v).
    """
    if k.dim != 1:
        raise UnsupportedDim("cdf is defined for n = 1")
    s = np.asarray(s, dtype=float).reshape(-1)
    var = k.gaussian_variance
    if var is not None and not k.reflect and not k.conj:
        return k.coef * special.ndtr(s / math.sqrt(var)) + 0j
    base, table = _cdf_table(k)
    return base * 0.5 * (1 + special.erf(s / 2)) + table(s[:, None])


@lru_cache(maxsize=64)
def real_extent(k, rel=1e-14):
    """Radius beyond which |phi(t)| < rel * max|phi| (n = 1 or radial n = 2)."""
    var = k.gaussian_variance
    if var is not None:
        return math.sqrt(2 * var * math.log(1 / rel))
    if k.catalog_id is KernelId.CONE_EXPONENTIAL:
        return math.sqrt(1 / (math.pi * rel))
    t = np.linspace(0, 800, 16001)
    pts = t[:, None] if k.dim == 1 else np.stack([t, np.zeros_like(t)], axis=1)
    vals = np.abs(k.real_space(pts))
    if k.dim == 1:
        vals = np.maximum(vals, np.abs(k.real_space(-pts)))
    alive = np.nonzero(vals > rel * vals.max())[0]
    return float(t[alive[-1]] + 1.0)


# -- non-degenerateness -------------------------------------------------------------

@dataclass(frozen=True)
class NondegeneracyReport:
    verdict: bool
    worst_ray: tuple
    worst_max: float

    def __bool__(self):
        return self.verdict


def ray_maxima(k):
    """max_r |phi_hat(r omega)| for every ray of the kernel's ray grid."""
    rays = k.ray_grid
    r = k.radial_grid
    pts = (r[None, :, None] * rays[:, None, :]).reshape(-1, k.dim)
    vals = np.abs(k.symbol(pts)).reshape(len(rays), len(r))
    return vals.max(axis=1)


def check_nondegenerate(k, tol=1e-9):
    if not tol > 0:
        raise ValueError("tol must be positive")
    if k.n_radial < 8:
        raise GridTooCoarse(f"radial grid has {k.n_radial} < 8 points")
    maxima = ray_maxima(k)
    worst = int(np.argmin(maxima))
    return NondegeneracyReport(bool(np.all(maxima > tol)),
                               tuple(float(v) for v in k.ray_grid[worst]),
                               float(maxima[worst]))


# -- Taylor data at the origin ------------------------------------------------------

def multi_indices(q, dim):
    if dim == 1:
        return [(q,)]
    return [(q - j, j) for j in range(q + 1)]


@lru_cache(maxsize=None)
def _fd_weights(q):
    """Central weights w_j (j = -p..p) with sum w_j j^k = q! delta_kq, second order."""
    p = (q + 1) // 2
    if q == 0:
        return (mpmath.mpf(1),), 0
    with mpmath.workdps(TAYLOR_DPS + 20):
        size = 2 * p + 1
        A = mpmath.matrix(size, size)
        b = mpmath.matrix(size, 1)
        for row in range(size):
            for col in range(size):
                A[row, col] = mpmath.mpf(col - p) ** row
        b[q] = mpmath.factorial(q)
        w = mpmath.lu_solve(A, b)
        return tuple(w[i] for i in range(size)), p


class _SymbolLattice:
    """Memoized mp evaluations of phi_hat on the lattice h Z^n."""

    def __init__(self, k, h):
        self.k = k
        self.h = h
        self.cache = {}

    def __call__(self, idx):
        if idx not in self.cache:
            self.cache[idx] = self.k.symbol_mp([self.h * i for i in idx])
        return self.cache[idx]


def _fd_derivative(lattice, m):
    total = mpmath.mpc(0)
    parts = [_fd_weights(mi) for mi in m]
    if len(m) == 1:
        (w, p), = parts
        for j, wj in enumerate(w):
            total += wj * lattice((j - p,))
    else:
        (w1, p1), (w2, p2) = parts
        for j1, a in enumerate(w1):
            for j2, b in enumerate(w2):
                total += a * b * lattice((j1 - p1, j2 - p2))
    return total / lattice.h ** sum(m)


@lru_cache(maxsize=128)
def _derivatives(k, n_max):
    """Richardson-extrapolated d^m phi_hat(0) for |m| <= n_max, plus disagreement."""
    out = {}
    with mpmath.workdps(TAYLOR_DPS):
        h0 = mpmath.mpf(TAYLOR_STEP)
        lattices = [_SymbolLattice(k, h0 / 2 ** lev) for lev in range(3)]
        for q in range(n_max + 1):
            for m in multi_indices(q, k.dim):
                d = [_fd_derivative(lat, m) for lat in lattices]
                r1a = (4 * d[1] - d[0]) / 3
                r1b = (4 * d[2] - d[1]) / 3
                r2 = (16 * r1b - r1a) / 15
                gap = abs(r2 - r1b)
                out[m] = (complex(r2), float(gap))
    return out


def derivatives_at_origin(k, n_max):
    if not 0 <= n_max <= N_MAX:
        raise ValueError(f"order must lie in [0, {N_MAX}]")
    data = _derivatives(k, n_max)
    for m, (val, gap) in data.items():
        if not np.isfinite(val) or gap > 1e-4 * max(1.0, abs(val)):
            raise NumericallyUnstable(f"derivative {m} of {k.name}: Richardson gap {gap:.3g}")
    return {m: val for m, (val, _) in data.items()}


@dataclass(frozen=True)
class TaylorTerms:
    """P_q(u) = sum_{|m| = q} d^m phi_hat(0) u^m / m!, stored per degree."""

    dim: int
    terms: dict

    @property
    def max_degree(self):
        return max(self.terms)

    def coefficients(self, q):
        return self.terms[q]

    def evaluate(self, q, u):
        pts = as_points(u, self.dim)
        out = np.zeros(len(pts), dtype=complex)
        for m, c in self.terms[q].items():
            out += c * np.prod(pts ** np.asarray(m), axis=-1)
        return out

    def is_zero(self, q, tol=1e-6):
        return all(abs(c) <= tol for c in self.terms[q].values())

    def to_dict(self):
        return {str(q): [{"m": list(m), "c": [c.real, c.imag]} for m, c in sorted(t.items())]
                for q, t in self.terms.items()}


def taylor_terms(k, N):
    """Homogeneous Taylor terms P_0..P_N of phi_hat at the origin."""
    ders = derivatives_at_origin(k, N)
    terms = {}
    for q in range(N + 1):
        terms[q] = {m: ders[m] / math.prod(math.factorial(v) for v in m)
                    for m in multi_indices(q, k.dim)}
    return TaylorTerms(k.dim, terms)


@dataclass(frozen=True)
class StrongReport:
    verdict: bool
    witness_order: object

    def __bool__(self):
        return self.verdict


def check_strongly_nondegenerate(k, N=N_MAX, tol=1e-9):
    """Does some Taylor polynomial T^N' (N' <= N) fail to vanish on every ray?"""
    tt = taylor_terms(k, N)
    rays = k.ray_grid
    alive = np.zeros(len(rays), dtype=bool)
    for q in range(N + 1):
        alive |= np.abs(tt.evaluate(q, rays)) > tol
        if alive.all():
            return StrongReport(True, q)
    return StrongReport(False, None)


def moments(k, max_order):
    """{m: int t^m phi(t) dt} for |m| <= max_order, from i^|m| d^m phi_hat(0)."""
    ders = derivatives_at_origin(k, max_order)
    return {m: (1j) ** sum(m) * d for m, d in ders.items()}


def is_lizorkin(k, order=2, tol=1e-8):
    try:
        mom = moments(k, order)
    except NumericallyUnstable:
        return False
    return all(abs(v) <= tol for v in mom.values())


def compose_lizorkin(phi, psi1):
    """Kernel psi = conj-reflect(phi) * psi1, i.e. psi_hat = conj(phi_hat) psi1_hat."""
    if phi.dim != psi1.dim:
        raise DimMismatch(f"dims {phi.dim} and {psi1.dim}")
    if not is_lizorkin(psi1, 2):
        raise ValueError(f"{psi1.name} is not a Lizorkin kernel")
    return Kernel(phi.dim, KernelId.COMPOSED, (phi, psi1), n_rays=psi1.n_rays,
                  n_radial=psi1.n_radial, r_min=psi1.r_min, r_max=psi1.r_max)
