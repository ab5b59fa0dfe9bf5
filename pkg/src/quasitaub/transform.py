"""The regularizing transform M^f_phi(x, y) = (f * phi_y)(x) and its sheets.

Evaluation paths, chosen per (field, kernel):

* ``ClosedForm``: point masses through the real-space kernel, constants and
  polynomials through moments, Heaviside through the kernel's distribution
  function, and Gaussian-family kernels against homogeneous fields through
  special functions.
* ``Quadrature``: composite Gauss-Legendre in real space for the remaining
  one-dimensional function fields (graded toward singular points).
* ``FFT``: Fourier-side sums; sampled fields, n = 2 homogeneous fields with
  radial kernels, and the cross-validation path for Delta / Heaviside.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import mpmath
import numpy as np
from scipy import integrate, special

from . import kernels as K
from .errors import (DimMismatch, ExponentRangeExceeded, GridAliasing, QuasitaubError,
                     UnsupportedDim)
from .fields import (FieldId, as_points, base_real_value, homogeneous_abs_constant, is_function_field,
                     scale_field, singular_points, smooth_cutoff)
from .slowvary import Site


class Method(str, enum.Enum):
    CLOSED_FORM = "ClosedForm"
    QUADRATURE = "Quadrature"
    FFT = "FFT"


_RANK = {Method.CLOSED_FORM: 0, Method.FFT: 1, Method.QUADRATURE: 2}


# -- scale grids ---------------------------------------------------------------------

def chebyshev_angles(count=16):
    """Polar angles (pi/2) cos((2k+1) pi / (2 count)), clustered toward y = 0."""
    k = np.arange(count)
    return 0.5 * np.pi * np.cos((2 * k + 1) * np.pi / (2 * count))


def sphere_directions(dim, n_theta=16, n_azimuth=8):
    """Points (x, y) on |x|^2 + y^2 = 1, y > 0; row 0 is the reference (0, 1)."""
    theta = chebyshev_angles(n_theta)
    rows = [np.r_[np.zeros(dim), 1.0]]
    if dim == 1:
        for th in theta:
            rows.append([math.sin(th), math.cos(th)])
    else:
        for th in theta[theta > 0]:
            for b in 2 * np.pi * np.arange(n_azimuth) / n_azimuth:
                rows.append([math.sin(th) * math.cos(b), math.sin(th) * math.sin(b), math.cos(th)])
    return np.array(rows)


def geometric_lambdas(site, n_lambda=64, ratio=2 ** 0.25, lam0=1.0):
    """lam_j = lam0 ratio^{+-j}, ordered toward the site."""
    site = Site.parse(site)
    j = np.arange(n_lambda)
    sign = 1.0 if site is Site.INFINITY else -1.0
    return lam0 * ratio ** (sign * j)


@dataclass(frozen=True, eq=False)
class ScaleGrid:
    """Directions (x, y) and dilations lam, ordered toward ``site``.

    ``directions`` has shape (D, n + 1) with the last column y > 0.  For
    ``kind == "sphere"`` every row satisfies |x|^2 + y^2 = 1.
    """

    lambdas: np.ndarray
    directions: np.ndarray
    site: Site
    kind: str = "sphere"

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "site", Site.parse(self.site))
        if lam.size < 16:
            raise ValueError("a scale grid needs at least 16 lambdas")
        if np.any(lam <= 0):
            raise ValueError("lambdas must be positive")
        steps = np.diff(np.log(lam))
        toward = 1.0 if self.site is Site.INFINITY else -1.0
        if np.any(steps * toward <= 0):
            raise ValueError("lambdas must be strictly monotone toward the site")
        if self.decades < 3 - 1e-9:
            raise ValueError("lambdas must span at least 3 decades")
        if np.any(dirs[:, -1] <= 0):
            raise ValueError("all directions need y > 0")
        if self.kind == "sphere" and not np.allclose(np.sum(dirs ** 2, axis=1), 1.0, atol=1e-12):
            raise ValueError("sphere directions must satisfy |x|^2 + y^2 = 1")

    @classmethod
    def default(cls, dim, site, n_lambda=64, ratio=2 ** 0.25, lam0=1.0, n_theta=16, n_azimuth=8):
        return cls(geometric_lambdas(site, n_lambda, ratio, lam0),
                   sphere_directions(dim, n_theta, n_azimuth), site)

    @property
    def dim(self):
        return self.directions.shape[1] - 1

    @property
    def x(self):
        return self.directions[:, :-1]

    @property
    def y(self):
        return self.directions[:, -1]

    @property
    def log_lambda(self):
        return np.log(self.lambdas)

    @property
    def decades(self):
        return abs(math.log10(self.lambdas[-1] / self.lambdas[0]))

    def tail(self, decades):
        """Boolean mask of the final ``decades`` decades (nearest the site)."""
        dist = np.abs(np.log10(self.lambdas / self.lambdas[-1]))
        return dist <= decades + 1e-9

    def oriented_log(self):
        """s = +-log lam, increasing toward the site."""
        return self.log_lambda if self.site is Site.INFINITY else -self.log_lambda

    def restrict(self, mask):
        return ScaleGrid(self.lambdas, self.directions[mask], self.site, self.kind)

    def to_dict(self):
        return {"site": self.site.value, "kind": self.kind,
                "lambdas": self.lambdas.tolist(), "directions": self.directions.tolist()}


def omega_boundary_directions(kappa=0.0, n_sigma=24, n_top=9, sigma_min=1e-2, dim=1):
    """Points of the boundary of {|x| <= y^kappa, 0 < y <= 1} (n = 1)."""
    if dim != 1:
        raise UnsupportedDim("Omega boundaries are sampled for n = 1")
    if not 0 <= kappa < 1:
        raise ValueError("kappa must lie in [0, 1)")
    sig = np.logspace(math.log10(sigma_min), 0, n_sigma)
    rows = [[0.0, 1.0]]
    for s in sig:
        rows.append([s ** kappa, s])
        rows.append([-s ** kappa, s])
    for x in np.linspace(-1, 1, n_top):
        if x != 0:
            rows.append([x, 1.0])
    return np.array(rows)


# -- sheets ----------------------------------------------------------------------------

@dataclass(eq=False)
class TransformSheet:
    """values[d, j, :] = M^f_phi(lam_j x_d, lam_j y_d)."""

    values: np.ndarray
    grid: ScaleGrid
    field_id: str
    kernel_id: str
    method: Method

    @property
    def norms(self):
        return np.linalg.norm(self.values, axis=-1)

    @property
    def vector_dim(self):
        return self.values.shape[-1]

    def restrict(self, mask):
        return TransformSheet(self.values[mask], self.grid.restrict(mask), self.field_id,
                              self.kernel_id, self.method)

    def __add__(self, other):
        if not np.array_equal(self.grid.lambdas, other.grid.lambdas):
            raise ValueError("sheets live on different grids")
        method = max(self.method, other.method, key=_RANK.get)
        return TransformSheet(self.values + other.values, self.grid,
                              f"{self.field_id}+{other.field_id}", self.kernel_id, method)

    def csv_rows(self):
        """Rows dir_index, x..., y, lambda, re_0.., im_0.. (plot-ready)."""
        g = self.grid
        for d in range(len(g.directions)):
            for j, lam in enumerate(g.lambdas):
                v = self.values[d, j]
                yield [d, *g.directions[d].tolist(), float(lam), *v.real.tolist(), *v.imag.tolist()]


@dataclass(eq=False)
class BoxSheet:
    """values[i, j, :] = M^f_phi(x_j, y_i) on a rectangular (x, y) mesh (n = 1)."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    field_id: str = ""
    kernel_id: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def norms(self):
        return np.linalg.norm(self.values, axis=-1)


# -- evaluation -----------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _gl_rule(length, h, graded, levels=200, q=0.25, floor=0.0):
    """Nodes in (0, length) and weights; geometric grading toward 0 when ``graded``.

    ``floor`` stops the grading once panels would shrink below it.
    """
    n = max(1, int(math.ceil(length / h)))
    edges = np.linspace(0.0, length, n + 1)
    if graded:
        if floor > 0:
            levels = max(0, min(levels, int(math.log(edges[1] / floor) / math.log(1 / q))))
        inner = edges[1] * q ** np.arange(levels, 0, -1)
        edges = np.concatenate([[0.0], inner, edges[1:]])
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def gauss_legendre(func, a, b, h=0.5, grade_left=False, grade_right=False):
    """Composite 16-point Gauss-Legendre on [a, b], graded toward singular ends."""
    if b <= a:
        return 0j
    if grade_left and grade_right:
        m = 0.5 * (a + b)
        return (gauss_legendre(func, a, m, h, True, False)
                + gauss_legendre(func, m, b, h, False, True))
    u, w = _gl_rule(b - a, h, grade_left or grade_right)
    s = b - u if grade_right else a + u
    return complex(np.sum(func(s) * w))


def _check_dims(f, k):
    if f.dim != k.dim:
        raise DimMismatch(f"field dim {f.dim} vs kernel dim {k.dim}")


def _phi_hat0(k):
    return complex(k.symbol(np.zeros(k.dim))[0])


def _poly_transform(coeffs, k, x, y):
    """sum_m c_m int (x - y s)^m phi(s) ds through the kernel moments."""
    order = max(sum(m) for m in coeffs) if coeffs else 0
    mom = K.moments(k, order)
    out = np.zeros(len(x), dtype=complex)
    for m, c in coeffs.items():
        for kk in np.ndindex(*(mi + 1 for mi in m)):
            mu = mom[tuple(kk)]
            if mu == 0:
                continue
            binom = math.prod(math.comb(mi, ki) for mi, ki in zip(m, kk))
            xpow = np.prod(x ** (np.asarray(m) - np.asarray(kk)), axis=-1)
            out += c * binom * xpow * (-y) ** sum(kk) * mu
    return out


def _gauss_abs(a, dim, s, x, y):
    sig = math.sqrt(s) * y
    mu2 = np.sum(x ** 2, axis=-1) / sig ** 2
    mom = 2 ** (a / 2) * special.gamma((dim + a) / 2) / special.gamma(dim / 2)
    return sig ** a * mom * special.hyp1f1(-a / 2, dim / 2, -mu2 / 2) + 0j


def _gauss_plus(a, s, x, y):
    sig = math.sqrt(s) * y
    mu = x[:, 0] / sig
    out = np.empty(len(mu), dtype=complex)
    for i, (m, sg) in enumerate(zip(mu, sig)):
        val = mpmath.gamma(a + 1) * mpmath.exp(-m * m / 4) * mpmath.pcfd(-a - 1, -m) / mpmath.sqrt(2 * mpmath.pi)
        out[i] = float(val) * sg ** a
    return out


def _panel_width(k):
    # 16-point panels resolve the kernel's oscillation comfortably at these widths
    var = k.gaussian_variance
    return 0.5 * math.sqrt(var) if var is not None else 1.0


def _quadrature_1d(f, k, x, y):
    """int f(x - y s) phi(s) ds, pointwise over (x, y) pairs, n = 1.

    Segments end at the preimages s = (x - p) / y of the field's singular
    points p; next to such a point the field is evaluated at p -+ y u with
    u the exact distance, so graded nodes can approach it without
    cancellation.
    """
    S = K.real_extent(k)
    sing = singular_points(f)
    cid = f.catalog_id
    h = _panel_width(k)
    out = np.empty(len(x), dtype=complex)
    for i, (xi, yi) in enumerate(zip(x[:, 0], y)):
        lo, hi = -S, S
        if cid in (FieldId.HEAVISIDE, FieldId.HOMOGENEOUS_PLUS):
            hi = min(hi, xi / yi)
        elif cid is FieldId.LOG_HEAVISIDE:
            hi = min(hi, (xi - f.params["threshold"]) / yi)
        if f.cutoff is not None:
            lo = max(lo, (xi - f.cutoff) / yi)
            hi = min(hi, (xi + f.cutoff) / yi)
        if hi <= lo:
            out[i] = 0.0
            continue
        hh = h if f.cutoff is None else min(h, 0.125 * f.cutoff / yi)
        pre = {(xi - p) / yi: p for p in sing}
        cuts = sorted({lo, hi} | {s0 for s0 in pre if lo < s0 < hi})
        total = 0j
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            pa, pb = pre.get(a), pre.get(b)
            if pa is not None and pb is None:
                u, w = _gl_rule(b - a, hh, True)
                t, s_ = pa - yi * u, a + u
            elif pb is not None and pa is None:
                u, w = _gl_rule(b - a, hh, True)
                t, s_ = pb + yi * u, b - u
            else:
                u, w = _gl_rule(b - a, hh, pa is not None)
                t, s_ = xi - yi * (a + u), a + u
                if pa is not None:
                    # both ends singular: split at the midpoint
                    m = 0.5 * (b - a)
                    u1, w1 = _gl_rule(m, hh, True)
                    u = np.concatenate([u1, u1])
                    w = np.concatenate([w1, w1])
                    t = np.concatenate([pa - yi * u1, pb + yi * u1])
                    s_ = np.concatenate([a + u1, b - u1])
            total += np.sum(base_real_value(f, t[:, None]) * k.real_space(s_) * w)
        out[i] = total
    return out


def _circle_average(a, d):
    """2F1(-a/2, -a/2; 1; (1 - d)^2), using the z -> 1 connection formula for small d."""
    d = np.asarray(d, dtype=float)
    out = np.empty_like(d)
    far = d >= 0.1
    out[far] = special.hyp2f1(-a / 2, -a / 2, 1.0, (1 - d[far]) ** 2)
    w = d[~far] * (2 - d[~far])
    A = special.gamma(1 + a) / special.gamma(1 + a / 2) ** 2
    B = special.gamma(-1 - a) / special.gamma(-a / 2) ** 2
    out[~far] = (A * special.hyp2f1(-a / 2, -a / 2, -a, w)
                 + B * w ** (1 + a) * special.hyp2f1(1 + a / 2, 1 + a / 2, 2 + a, w))
    return out


def _radial_quadrature_2d(a, k, x, y):
    """|t|^a against a radial kernel in n = 2 via the circle average

    (2 pi)^-1 int |X - R e^{i theta}|^a d theta = M^a 2F1(-a/2, -a/2; 1; (m / M)^2),
    with M = max(X, R) and m = min(X, R); what remains is a radial integral.
    """
    S = K.real_extent(k)
    h = _panel_width(k)
    out = np.empty(len(y), dtype=complex)
    for i in range(len(y)):
        X = float(np.linalg.norm(x[i]))
        yi = y[i]

        def piece(rho, gap=None):
            R = yi * rho
            hi = np.maximum(X, R)
            if gap is None:
                lo = np.minimum(X, R)
                d = np.where(hi > 0, 1.0 - lo / np.where(hi > 0, hi, 1.0), 1.0)
            else:
                # 1 - lo/hi from the exact distance to the kink
                d = yi * gap / hi
            avg = hi ** a * _circle_average(a, d)
            phi = k.real_space(np.stack([rho, np.zeros_like(rho)], axis=1))
            return 2 * np.pi * rho * avg * phi

        kink = X / yi
        if 0 < kink < S:
            # the circle average has an integrable |X - R|^(a+1) singularity at the kink
            u1, w1 = _gl_rule(kink, h, True)
            u2, w2 = _gl_rule(S - kink, h, True)
            total = np.sum(piece(kink - u1, u1) * w1) + np.sum(piece(kink + u2, u2) * w2)
        else:
            u, w = _gl_rule(S, h, X == 0)
            total = np.sum(piece(u) * w)
        out[i] = total
    return out


def _fourier_line(k, xi, integrand_maker, dv_max=0.05):
    """Full-line midpoint sum over v for each xi = x / y (n = 1)."""
    V = K.fourier_extent(k)
    out = np.empty(len(xi), dtype=complex)
    for i, z in enumerate(xi):
        dv = min(dv_max, math.pi / (2 * (abs(z) + 1.0)))
        n = int(math.ceil(V / dv))
        v = (np.arange(-n, n) + 0.5) * dv
        out[i] = np.sum(integrand_maker(v, z)) * dv / (2 * np.pi)
    return out


def _fft_delta(k, x, y):
    xi = x[:, 0] / y
    return _fourier_line(k, xi, lambda v, z: k.symbol(v) * np.exp(1j * z * v)) / y


def _fft_heaviside(k, x, y):
    g0 = _phi_hat0(k)

    def make(v, z):
        return (k.symbol(v) * np.exp(1j * z * v) - g0 * np.exp(-v ** 2)) / (1j * v)

    return 0.5 * g0 + _fourier_line(k, x[:, 0] / y, make)


def _fft_homogeneous_abs(a, k, x, y):
    """Fourier-side |t|^a transform.

    phi_hat is split as phi_hat(0) e^{-v^2/2} plus a remainder vanishing at
    the origin; the Gaussian part is closed form, and the remainder needs no
    regularization: y^a C (2 pi)^-n int |v|^{-a-n} rem(v) e^{i xi.v} dv.
    """
    n = k.dim
    if not -n < a < 2:
        raise UnsupportedDim("Fourier path for |t|^a needs -n < a < 2")
    if n == 2 and not k.is_radial:
        raise UnsupportedDim("n = 2 Fourier path needs a radial kernel")
    C = homogeneous_abs_constant(a, n)
    g0 = _phi_hat0(k)
    V = max(K.fourier_extent(k), 10.0)
    gauss = g0 * _gauss_abs(a, n, 1.0, x, y)

    def rem(r):
        pts = r[:, None] if n == 1 else np.stack([r, np.zeros_like(r)], axis=1)
        return k.symbol(pts) - g0 * np.exp(-0.5 * r ** 2)

    def rpow(r):
        with np.errstate(divide="ignore"):
            return np.where(r > 0, np.abs(r) ** (-a - 1), 0.0)

    def part(fn, **kw):
        re = integrate.quad(lambda r: fn(np.atleast_1d(r))[0].real, 0, V, limit=5000, **kw)[0]
        im = integrate.quad(lambda r: fn(np.atleast_1d(r))[0].imag, 0, V, limit=5000, **kw)[0]
        return re + 1j * im

    out = np.empty(len(y), dtype=complex)
    for i in range(len(y)):
        xi = x[i] / y[i]
        if n == 1:
            z = float(xi[0])
            even = part(lambda r: rpow(r) * (rem(r) + rem(-r)), weight="cos", wvar=z)
            odd = part(lambda r: rpow(r) * (rem(r) - rem(-r)), weight="sin", wvar=z)
            core = even + 1j * odd
        else:
            rho = float(np.linalg.norm(xi))
            core = part(lambda r: rpow(r) * rem(r) * special.j0(r * rho))
        out[i] = C * y[i] ** a * core / (2 * np.pi)
    return out + gauss


def transform_values(f, k, x, y, method=None):
    """Unit-weight scalar M^f_phi at arrays x (m, n), y (m,); returns (values, Method)."""
    _check_dims(f, k)
    x = as_points(x, f.dim)
    y = np.asarray(y, dtype=float).reshape(-1)
    if np.any(y <= 0):
        raise ValueError("y must be positive")
    cid = f.catalog_id
    n = f.dim
    if cid is FieldId.SUM:
        total = np.zeros((len(y), f.vector_dim), dtype=complex)
        worst = Method.CLOSED_FORM
        for t in f.params["terms"]:
            if f.cutoff is not None and t.cutoff is None:
                t = replace(t, cutoff=f.cutoff)
            vals, m = transform_values(t, k, x, y, method)
            total += vals
            worst = max(worst, m, key=_RANK.get)
        return total * f.weight_array[None, :], worst
    w = f.weight_array[None, :]

    if cid in (FieldId.DELTA, FieldId.DELTA_COMB):
        atoms = [((0.0,) * n, 1.0)] if cid is FieldId.DELTA else f.params["atoms"]
        if method is Method.FFT:
            if n != 1:
                raise UnsupportedDim("FFT cross-check path is one-dimensional")
            out = sum(c * _fft_delta(k, x - np.asarray(loc), y) for loc, c in atoms)
            return out[:, None] * w, Method.FFT
        out = np.zeros(len(y), dtype=complex)
        for loc, c in atoms:
            loc = np.asarray(loc)
            if f.cutoff is not None:
                c = c * float(smooth_cutoff(np.linalg.norm(loc) / f.cutoff))
            out += c * y ** (-n) * k.real_space((x - loc) / y[:, None])
        return out[:, None] * w, Method.CLOSED_FORM

    if cid is FieldId.SAMPLED_FOURIER:
        return _sampled_transform(f, k, x, y)[:, None] * w, Method.FFT

    if method is Method.QUADRATURE and is_function_field(f) and n == 1:
        return _quadrature_1d(f, k, x, y)[:, None] * w, Method.QUADRATURE

    if f.cutoff is None:
        if cid is FieldId.CONSTANT:
            return np.full((len(y), 1), _phi_hat0(k)) * w, Method.CLOSED_FORM
        if cid is FieldId.POLYNOMIAL:
            return _poly_transform(f.params["coeffs"], k, x, y)[:, None] * w, Method.CLOSED_FORM
        s = k.gaussian_variance
        plain = not k.conj and not k.reflect
        if cid is FieldId.HEAVISIDE:
            if method is Method.FFT:
                return _fft_heaviside(k, x, y)[:, None] * w, Method.FFT
            return K.cdf(k, x[:, 0] / y)[:, None] * w, Method.CLOSED_FORM
        if cid is FieldId.HOMOGENEOUS_ABS:
            a = f.params["a"]
            if s is not None and plain and method is not Method.FFT:
                return k.coef * _gauss_abs(a, n, s, x, y)[:, None] * w, Method.CLOSED_FORM
            if method is Method.FFT:
                return _fft_homogeneous_abs(a, k, x, y)[:, None] * w, Method.FFT
            if n == 2 and k.is_radial:
                return _radial_quadrature_2d(a, k, x, y)[:, None] * w, Method.QUADRATURE
        if cid is FieldId.HOMOGENEOUS_PLUS and s is not None and plain:
            return k.coef * _gauss_plus(f.params["a"], s, x, y)[:, None] * w, Method.CLOSED_FORM

    if is_function_field(f) and n == 1:
        return _quadrature_1d(f, k, x, y)[:, None] * w, Method.QUADRATURE
    raise UnsupportedDim(f"no evaluation path for {f.describe()} with {k.name}")


def _sampled_transform(f, k, x, y):
    g = f.fourier_grid
    axis = g.axis
    du = g.spacing
    out = np.empty(len(y), dtype=complex)
    for i in range(len(y)):
        if f.dim == 1:
            u = axis[:, None]
            wts = np.full(len(axis), du)
            wts[[0, -1]] *= 0.5
        else:
            g1, g2 = np.meshgrid(axis, axis, indexing="ij")
            u = np.stack([g1.ravel(), g2.ravel()], axis=1)
            w1 = np.full(len(axis), du)
            w1[[0, -1]] *= 0.5
            wts = np.outer(w1, w1).ravel()
        ker = k.symbol(y[i] * u)
        edge = np.abs(ker[np.any(np.abs(u) >= g.half_width * (1 - 1e-12), axis=1)]).max()
        peak = max(np.abs(k.symbol(np.zeros((1, f.dim)))).max(), np.abs(ker).max())
        if edge > 1e-8 * peak:
            raise GridAliasing(f"kernel at grid edge is {edge / peak:.2e} of its max (y = {y[i]:g})")
        vals = g.values.reshape(-1) * ker * np.exp(1j * (u @ x[i]))
        out[i] = np.sum(vals * wts) / (2 * np.pi) ** f.dim
    return out


def eval_transform(f, k, x, y, method=None):
    """M^f_phi(x, y) as a complex vector of length ``f.vector_dim``."""
    if not y > 0:
        raise ValueError("y must be positive")
    vals, _ = transform_values(f, k, np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, f.dim), [y],
                               method=None if method is None else Method(method))
    return vals[0]


def compute_sheet(f, k, grid, method=None):
    """Sheet over the grid, evaluated as M^{f(lam .)}(x, y) at unit scale."""
    _check_dims(f, k)
    if grid.dim != f.dim:
        raise DimMismatch("grid and field dimensions differ")
    method = None if method is None else Method(method)
    D, J = len(grid.directions), len(grid.lambdas)
    values = np.empty((D, J, f.vector_dim), dtype=complex)
    worst = Method.CLOSED_FORM
    for j, lam in enumerate(grid.lambdas):
        vals, m = transform_values(scale_field(f, lam), k, grid.x, grid.y, method)
        values[:, j, :] = vals
        worst = max(worst, m, key=_RANK.get)
    if not np.all(np.isfinite(values)):
        raise QuasitaubError("non-finite transform values")
    return TransformSheet(values, grid, f.describe(), k.name, worst)


def wavelet_transform(f, psi, grid, method=None):
    """W_psi f = M^f with kernel psi-bar-check (symbol conj(psi_hat))."""
    return compute_sheet(f, K.conj_reflect(psi), grid, method)


def box_sheet(f, k, x, y, method=None):
    """Transform on the rectangular mesh x (nx,) times y (ny,), n = 1."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X, Y = np.meshgrid(x, y)
    vals, m = transform_values(f, k, X.reshape(-1, 1), Y.ravel(), method)
    return BoxSheet(x, y, vals.reshape(len(y), len(x), -1), f.describe(), k.name, {"method": m.value})


def default_growth_box():
    x = np.concatenate([-np.logspace(3, -3, 49), [0.0], np.logspace(-3, 3, 49)])
    y = np.logspace(-4, 4, 65)
    return x, y


# -- global growth ---------------------------------------------------------------------

def _edge_slope(var, profile, decades=1.0):
    """Least-squares slope of log(profile) against log(var) over the outer decade."""
    lv = np.log10(var)
    keep = lv >= lv.max() - decades - 1e-9
    with np.errstate(divide="ignore"):
        lp = np.log10(np.maximum(profile[keep], 1e-300))
    return float(np.polyfit(lv[keep], lp, 1)[0])


@dataclass(frozen=True)
class GrowthFit:
    k: int
    l: int
    C: float
    slopes: dict


def fit_global_growth(sheet, max_exp=16, slope_tol=0.05):
    """Smallest (k, l) with ||M|| <= C (1/y + y)^k (1 + |x|)^l on the box grid.

    A bound is accepted when the normalized ratio does not grow toward any
    edge of the grid (y -> 0, y -> oo, |x| -> oo): the slope of its log
    profile over the outer decade must stay below ``slope_tol``.
    """
    y = sheet.y
    x = sheet.x
    if math.log10(y.max() / y.min()) < 3 - 1e-9:
        raise ValueError("box sheet must span at least 3 decades in y")
    norms = sheet.norms
    ay = np.log(1 / y + y)[:, None]
    ax = np.log1p(np.abs(x))[None, :]
    with np.errstate(divide="ignore"):
        lm = np.log(np.maximum(norms, 1e-300))
    pos = np.abs(x) > 0
    candidates = sorted(((k, l) for k in range(max_exp + 1) for l in range(max_exp + 1)),
                        key=lambda kl: (kl[0] + kl[1], kl[0]))
    for k, l in candidates:
        ratio = np.exp(lm - k * ay - l * ax)
        small = y < 1
        big = y > 1
        slopes = {
            "y_to_0": _edge_slope(1 / y[small], ratio[small].max(axis=1)),
            "y_to_inf": _edge_slope(y[big], ratio[big].max(axis=1)),
        }
        ax_abs = np.abs(x[pos])
        xs = np.unique(ax_abs)
        prof = np.array([ratio[:, pos][:, ax_abs == v].max() for v in xs])
        slopes["x_to_inf"] = _edge_slope(xs, prof)
        if all(s < slope_tol for s in slopes.values()):
            return GrowthFit(k, l, float(ratio.max()), slopes)
    raise ExponentRangeExceeded(f"no (k, l) <= {max_exp} bounds the sheet")
