"""Catalog of model tempered distributions and their Fourier data.

Fourier convention: ``f_hat(u) = int f(t) exp(-i u.t) dt``.

Every field is a scalar catalog distribution multiplied by a fixed vector
``weight`` in C^d, so vector-valued fields are handled componentwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import special

from .errors import OutOfGrid, QuasitaubError, SingularFourierPoint, UnsupportedDim
from .slowvary import Site, SlowVarySpec


class FieldId(str, enum.Enum):
    DELTA = "Delta"
    HEAVISIDE = "Heaviside"
    HOMOGENEOUS_ABS = "HomogeneousAbs"
    HOMOGENEOUS_PLUS = "HomogeneousPlus"
    LOG_HEAVISIDE = "LogHeaviside"
    CONSTANT = "Constant"
    POLYNOMIAL = "Polynomial"
    DELTA_COMB = "DeltaComb"
    SAMPLED_FOURIER = "SampledFourier"
    SUM = "Sum"


ONE_DIM_ONLY = {FieldId.HEAVISIDE, FieldId.HOMOGENEOUS_PLUS, FieldId.LOG_HEAVISIDE}


@dataclass(frozen=True)
class FourierGrid:
    """Uniform samples of f_hat on [-U, U]^n (``values`` has shape (N,)*n)."""

    values: np.ndarray
    half_width: float
    growth: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", vals)
        if vals.ndim not in (1, 2) or min(vals.shape) < 2:
            raise ValueError("Fourier grid needs at least 2 samples per axis")
        if len(set(vals.shape)) != 1:
            raise ValueError("Fourier grid must be square")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def dim(self):
        return self.values.ndim

    @property
    def axis(self):
        return np.linspace(-self.half_width, self.half_width, self.values.shape[0])

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.values.shape[0] - 1)


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """An immutable model distribution.

    ``params`` per catalog entry:

    * HomogeneousAbs / HomogeneousPlus: ``a``
    * LogHeaviside: ``threshold`` (default 1) and ``offset`` (default 0);
      the field is ``(log t + offset)`` for ``t > threshold``, else 0
    * Polynomial: ``coeffs`` mapping multi-index tuples to coefficients
    * DeltaComb: ``atoms``, a tuple of ``(location tuple, coefficient)``
    * Sum: ``terms``, a tuple of FieldSpec
    """

    dim: int
    catalog_id: FieldId
    params: dict = field(default_factory=dict)
    weight: tuple = (1.0 + 0j,)
    fourier_grid: Optional[FourierGrid] = None
    cutoff: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "catalog_id", FieldId(self.catalog_id))
        w = tuple(complex(v) for v in np.atleast_1d(self.weight))
        object.__setattr__(self, "weight", w)
        if self.dim not in (1, 2):
            raise UnsupportedDim(f"dimension {self.dim} not supported (n in {{1, 2}})")
        if self.catalog_id in ONE_DIM_ONLY and self.dim != 1:
            raise UnsupportedDim(f"{self.catalog_id.value} is defined only for n = 1")
        if not w or not all(np.isfinite(v) for v in w):
            raise ValueError("weight must be a finite nonempty vector")
        cid = self.catalog_id
        if cid is FieldId.HOMOGENEOUS_ABS:
            a = float(self.params["a"])
            if a <= -self.dim or float(a).is_integer():
                raise ValueError("HomogeneousAbs needs non-integer a > -n")
        if cid is FieldId.HOMOGENEOUS_PLUS:
            a = float(self.params["a"])
            if a <= -1 or float(a).is_integer():
                raise ValueError("HomogeneousPlus needs non-integer a > -1")
        if cid is FieldId.DELTA_COMB:
            locs = [tuple(map(float, loc)) for loc, _ in self.params["atoms"]]
            if any(len(loc) != self.dim for loc in locs):
                raise ValueError("atom locations must match dim")
            if len(set(locs)) != len(locs):
                raise ValueError("atom locations must be distinct")
            vals = [complex(c) for _, c in self.params["atoms"]] + [x for loc in locs for x in loc]
            if not all(np.isfinite(vals)):
                raise ValueError("atoms must be finite")
        if cid is FieldId.SAMPLED_FOURIER:
            if self.fourier_grid is None or self.fourier_grid.dim != self.dim:
                raise ValueError("SampledFourier needs a fourier_grid of matching dim")
        if cid is FieldId.SUM:
            terms = self.params["terms"]
            if any(t.dim != self.dim or t.vector_dim != self.vector_dim for t in terms):
                raise ValueError("Sum terms must share dim and vector_dim")
        if self.cutoff is not None and not self.cutoff > 0:
            raise ValueError("cutoff radius must be positive")

    # -- convenience -----------------------------------------------------
    @property
    def vector_dim(self):
        return len(self.weight)

    @property
    def weight_array(self):
        return np.array(self.weight, dtype=complex)

    def with_weight(self, weight):
        return replace(self, weight=tuple(np.atleast_1d(weight)))

    def __mul__(self, c):
        return self.with_weight(self.weight_array * complex(c))

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, FieldSpec):
            return NotImplemented
        terms = []
        for f in (self, other):
            if f.catalog_id is FieldId.SUM and f.cutoff is None and np.allclose(f.weight_array, 1):
                terms.extend(f.params["terms"])
            else:
                terms.append(f)
        ones = (1.0,) * self.vector_dim
        return FieldSpec(self.dim, FieldId.SUM, {"terms": tuple(terms)}, weight=ones)

    def __eq__(self, other):
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return to_dict(self) == to_dict(other)

    __hash__ = None

    def describe(self):
        p = ""
        if "a" in self.params:
            p = f"(a={self.params['a']:g})"
        return f"{self.catalog_id.value}{p}[n={self.dim}]"


# -- constructors ----------------------------------------------------------

def delta(dim=1, weight=1.0):
    return FieldSpec(dim, FieldId.DELTA, {}, weight=weight)


def heaviside(weight=1.0):
    return FieldSpec(1, FieldId.HEAVISIDE, {}, weight=weight)


def homogeneous_abs(a, dim=1, weight=1.0):
    return FieldSpec(dim, FieldId.HOMOGENEOUS_ABS, {"a": float(a)}, weight=weight)


def homogeneous_plus(a, weight=1.0):
    return FieldSpec(1, FieldId.HOMOGENEOUS_PLUS, {"a": float(a)}, weight=weight)


def log_heaviside(threshold=1.0, offset=0.0, weight=1.0):
    return FieldSpec(1, FieldId.LOG_HEAVISIDE,
                     {"threshold": float(threshold), "offset": float(offset)}, weight=weight)


def constant(value=1.0, dim=1):
    return FieldSpec(dim, FieldId.CONSTANT, {}, weight=value)


def polynomial(coeffs, dim=1, weight=1.0):
    """``coeffs`` is a list c_0..c_m (n = 1) or a dict {multi-index: c}."""
    if not isinstance(coeffs, dict):
        if dim != 1:
            raise ValueError("list coefficients only allowed for n = 1")
        coeffs = {(i,): c for i, c in enumerate(coeffs)}
    clean = {}
    for m, c in coeffs.items():
        m = (m,) if isinstance(m, int) else tuple(int(v) for v in m)
        if len(m) != dim or min(m) < 0:
            raise ValueError(f"bad multi-index {m}")
        if c != 0:
            clean[m] = complex(c)
    return FieldSpec(dim, FieldId.POLYNOMIAL, {"coeffs": clean}, weight=weight)


def delta_comb(atoms, dim=1, weight=1.0):
    """``atoms``: iterable of (location, coefficient); scalars allowed for n = 1."""
    norm = []
    for loc, c in atoms:
        loc = tuple(float(v) for v in np.atleast_1d(loc))
        norm.append((loc, complex(c)))
    return FieldSpec(dim, FieldId.DELTA_COMB, {"atoms": tuple(norm)}, weight=weight)


def sampled_fourier(values, half_width, growth=0.0, weight=1.0):
    grid = FourierGrid(np.asarray(values), float(half_width), float(growth))
    return FieldSpec(grid.dim, FieldId.SAMPLED_FOURIER, {}, weight=weight, fourier_grid=grid)


def with_cutoff(f, radius):
    """Multiply ``f`` by a smooth cutoff equal to 1 on |t| <= radius/2, 0 beyond radius."""
    return replace(f, cutoff=float(radius))


# -- smooth cutoff shared with kernels ---------------------------------------

def _smooth_exp(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_cutoff(r):
    """C-infinity step: 1 on [0, 1/2], 0 on [1, inf)."""
    r = np.asarray(r, dtype=float)
    s = 2.0 * r - 1.0
    num = _smooth_exp(1.0 - s)
    den = num + _smooth_exp(s)
    return np.where(r <= 0.5, 1.0, np.where(r >= 1.0, 0.0, num / np.where(den > 0, den, 1.0)))


# -- Fourier side --------------------------------------------------------------

def homogeneous_abs_constant(a, n):
    """C with  F[|t|^a](u) = C |u|^(-a-n)."""
    return 2.0 ** (a + n) * math.pi ** (n / 2) * special.gamma((a + n) / 2) / special.gamma(-a / 2)


def _base_fourier(f, u):
    """Scalar (unit-weight) f_hat at points u of shape (m, n)."""
    cid = f.catalog_id
    r = np.linalg.norm(u, axis=-1)
    if cid is FieldId.DELTA:
        return np.ones(len(u), dtype=complex)
    if cid is FieldId.DELTA_COMB:
        out = np.zeros(len(u), dtype=complex)
        for loc, c in f.params["atoms"]:
            out += c * np.exp(-1j * (u @ np.asarray(loc)))
        return out
    if cid is FieldId.SAMPLED_FOURIER:
        return _interp_grid(f.fourier_grid, u)
    if cid is FieldId.SUM:
        out = np.zeros(len(u), dtype=complex)
        for t in f.params["terms"]:
            if t.vector_dim != 1 and not np.allclose(t.weight_array, t.weight_array[0]):
                raise QuasitaubError("Sum of non-parallel vector terms has no scalar Fourier base")
            out += t.weight_array[0] * _base_fourier(t, u)
        return out
    if np.any(r == 0):
        raise SingularFourierPoint(f"{cid.value} has a singular Fourier transform at u = 0")
    if cid in (FieldId.CONSTANT, FieldId.POLYNOMIAL):
        return np.zeros(len(u), dtype=complex)
    if cid is FieldId.HEAVISIDE:
        return 1.0 / (1j * u[:, 0])
    if cid is FieldId.HOMOGENEOUS_ABS:
        a = f.params["a"]
        return homogeneous_abs_constant(a, f.dim) * r ** (-a - f.dim) + 0j
    if cid is FieldId.HOMOGENEOUS_PLUS:
        a = f.params["a"]
        v = u[:, 0]
        return special.gamma(a + 1) * np.abs(v) ** (-a - 1) * np.exp(-0.5j * math.pi * (a + 1) * np.sign(v))
    if cid is FieldId.LOG_HEAVISIDE:
        tau, off = f.params["threshold"], f.params["offset"]
        v = u[:, 0]
        z = 1j * v * tau
        return (special.exp1(z) + (math.log(tau) + off) * np.exp(-z)) / (1j * v)
    raise QuasitaubError(f"no Fourier representation for {cid.value}")


def _interp_grid(grid, u):
    axis = grid.axis
    U = grid.half_width
    if np.any(np.abs(u) > U * (1 + 1e-12)):
        raise OutOfGrid(f"point outside sampled grid [-{U}, {U}]^n")
    if grid.dim == 1:
        v = u[:, 0]
        return np.interp(v, axis, grid.values.real) + 1j * np.interp(v, axis, grid.values.imag)
    from scipy.interpolate import RegularGridInterpolator

    re = RegularGridInterpolator((axis, axis), grid.values.real)
    im = RegularGridInterpolator((axis, axis), grid.values.imag)
    uc = np.clip(u, -U, U)
    return re(uc) + 1j * im(uc)


def as_points(u, dim):
    """Coerce scalar / (n,) / (m, n) input to an (m, n) float array."""
    u = np.asarray(u, dtype=float)
    if dim == 1 and u.ndim <= 1:
        return u.reshape(-1, 1)
    if u.ndim == 1:
        if u.shape[0] != dim:
            raise UnsupportedDim(f"point of length {u.shape[0]} in dimension {dim}")
        return u.reshape(1, dim)
    if u.shape[-1] != dim:
        raise UnsupportedDim(f"points of length {u.shape[-1]} in dimension {dim}")
    return u.reshape(-1, dim)


def fourier_eval(f, u):
    """f_hat(u) as a complex vector of length ``vector_dim``.

    Accepts a single point; see :func:`fourier_eval_many` for batches.
    """
    return fourier_eval_many(f, u)[0]


def fourier_eval_many(f, u):
    if f.cutoff is not None:
        raise QuasitaubError("cut-off fields have no closed-form Fourier transform")
    pts = as_points(u, f.dim)
    base = _base_fourier(f, pts)
    return base[:, None] * f.weight_array[None, :]


# -- real space ----------------------------------------------------------------

def is_function_field(f):
    """True when f is a locally integrable function (not a measure)."""
    if f.catalog_id is FieldId.SUM:
        return all(is_function_field(t) for t in f.params["terms"])
    return f.catalog_id in (FieldId.HEAVISIDE, FieldId.HOMOGENEOUS_ABS, FieldId.HOMOGENEOUS_PLUS,
                            FieldId.LOG_HEAVISIDE, FieldId.CONSTANT, FieldId.POLYNOMIAL)


def base_real_value(f, t):
    """Unit-weight pointwise value of a function field at points t (m, n)."""
    cid = f.catalog_id
    t = np.asarray(t, dtype=float)
    if cid is FieldId.CONSTANT:
        out = np.ones(len(t))
    elif cid is FieldId.HEAVISIDE:
        out = (t[:, 0] > 0).astype(float)
    elif cid is FieldId.HOMOGENEOUS_ABS:
        r = np.linalg.norm(t, axis=-1)
        with np.errstate(divide="ignore"):
            out = np.where(r > 0, r ** f.params["a"], np.inf if f.params["a"] < 0 else 0.0)
    elif cid is FieldId.HOMOGENEOUS_PLUS:
        s = t[:, 0]
        out = np.where(s > 0, np.abs(s) ** f.params["a"], 0.0)
    elif cid is FieldId.LOG_HEAVISIDE:
        s = t[:, 0]
        tau, off = f.params["threshold"], f.params["offset"]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(s > tau, np.log(np.where(s > 0, s, 1.0)) + off, 0.0)
    elif cid is FieldId.POLYNOMIAL:
        out = np.zeros(len(t), dtype=complex)
        for m, c in f.params["coeffs"].items():
            out = out + c * np.prod(t ** np.asarray(m), axis=-1)
    elif cid is FieldId.SUM:
        out = sum(tt.weight_array[0] * base_real_value(tt, t) for tt in f.params["terms"])
    else:
        raise QuasitaubError(f"{cid.value} is not a pointwise function")
    if f.cutoff is not None:
        out = out * smooth_cutoff(np.linalg.norm(t, axis=-1) / f.cutoff)
    return np.asarray(out, dtype=complex)


def singular_points(f):
    """Scalar abscissae where a 1-D function field is non-smooth."""
    cid = f.catalog_id
    if cid in (FieldId.HEAVISIDE, FieldId.HOMOGENEOUS_ABS, FieldId.HOMOGENEOUS_PLUS):
        pts = [0.0]
    elif cid is FieldId.LOG_HEAVISIDE:
        pts = [f.params["threshold"]]
    elif cid is FieldId.SUM:
        pts = sorted({p for t in f.params["terms"] for p in singular_points(t)})
    else:
        pts = []
    if f.cutoff is not None:
        pts = sorted(set(pts) | {-f.cutoff, -f.cutoff / 2, f.cutoff / 2, f.cutoff})
    return pts


# -- dilation ------------------------------------------------------------------

def scale_field(f, lam):
    """Specification of t -> f(lam t)."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lam must be positive")
    n = f.dim
    cid = f.catalog_id
    w = f.weight_array
    cutoff = None if f.cutoff is None else f.cutoff / lam
    if cid is FieldId.DELTA:
        return replace(f, weight=tuple(w * lam ** (-n)), cutoff=cutoff)
    if cid in (FieldId.HEAVISIDE, FieldId.CONSTANT):
        return replace(f, cutoff=cutoff)
    if cid in (FieldId.HOMOGENEOUS_ABS, FieldId.HOMOGENEOUS_PLUS):
        return replace(f, weight=tuple(w * lam ** f.params["a"]), cutoff=cutoff)
    if cid is FieldId.LOG_HEAVISIDE:
        p = {"threshold": f.params["threshold"] / lam, "offset": f.params["offset"] + math.log(lam)}
        return replace(f, params=p, cutoff=cutoff)
    if cid is FieldId.POLYNOMIAL:
        coeffs = {m: c * lam ** sum(m) for m, c in f.params["coeffs"].items()}
        return replace(f, params={"coeffs": coeffs}, cutoff=cutoff)
    if cid is FieldId.DELTA_COMB:
        atoms = tuple((tuple(x / lam for x in loc), c * lam ** (-n)) for loc, c in f.params["atoms"])
        return replace(f, params={"atoms": atoms}, cutoff=cutoff)
    if cid is FieldId.SAMPLED_FOURIER:
        g = f.fourier_grid
        grid = FourierGrid(g.values * lam ** (-n), g.half_width * lam, g.growth)
        return replace(f, fourier_grid=grid, cutoff=cutoff)
    if cid is FieldId.SUM:
        terms = tuple(scale_field(t, lam) for t in f.params["terms"])
        return replace(f, params={"terms": terms}, cutoff=cutoff)
    raise QuasitaubError(f"cannot dilate {cid.value}")


# -- ground truth ----------------------------------------------------------------

@dataclass(frozen=True)
class GroundTruthScaling:
    site: Site
    alpha: float
    slow_vary: SlowVarySpec
    limit_field: FieldSpec


def ground_truth(f, site):
    """Exact quasiasymptotic data, or None when not analytically catalogued."""
    site = Site.parse(site)
    cid = f.catalog_id
    if f.cutoff is not None:
        return None
    one = SlowVarySpec.one(site)
    if cid is FieldId.DELTA:
        return GroundTruthScaling(site, -float(f.dim), one, f)
    if cid in (FieldId.HEAVISIDE, FieldId.CONSTANT):
        return GroundTruthScaling(site, 0.0, one, f)
    if cid in (FieldId.HOMOGENEOUS_ABS, FieldId.HOMOGENEOUS_PLUS):
        return GroundTruthScaling(site, float(f.params["a"]), one, f)
    if cid is FieldId.LOG_HEAVISIDE and site is Site.INFINITY:
        return GroundTruthScaling(site, 0.0, SlowVarySpec.log_pow(1.0, site), heaviside(f.weight))
    return None


# -- JSON ------------------------------------------------------------------------

def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


def to_dict(f):
    d = {"catalog_id": f.catalog_id.value, "dim": f.dim,
         "weight": [_cplx(w) for w in f.weight]}
    cid = f.catalog_id
    p = {}
    if "a" in f.params:
        p["a"] = f.params["a"]
    if cid is FieldId.LOG_HEAVISIDE:
        p = {"threshold": f.params["threshold"], "offset": f.params["offset"]}
    if cid is FieldId.POLYNOMIAL:
        p["coeffs"] = [{"m": list(m), "c": _cplx(c)} for m, c in sorted(f.params["coeffs"].items())]
    if cid is FieldId.DELTA_COMB:
        p["atoms"] = [{"t": list(loc), "c": _cplx(c)} for loc, c in f.params["atoms"]]
    if cid is FieldId.SUM:
        p["terms"] = [to_dict(t) for t in f.params["terms"]]
    d["params"] = p
    if f.fourier_grid is not None:
        g = f.fourier_grid
        d["fourier_grid"] = {"half_width": g.half_width, "growth": g.growth,
                             "shape": list(g.values.shape),
                             "re": g.values.real.ravel().tolist(),
                             "im": g.values.imag.ravel().tolist()}
    if f.cutoff is not None:
        d["cutoff"] = f.cutoff
    return d


def _from_cplx(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def from_dict(d):
    cid = FieldId(d["catalog_id"])
    dim = int(d.get("dim", 1))
    raw = d.get("weight", [1.0])
    if not isinstance(raw, list):
        raw = [raw]
    weight = tuple(_from_cplx(w) for w in raw)
    p = d.get("params", {}) or {}
    params = {}
    grid = None
    if cid in (FieldId.HOMOGENEOUS_ABS, FieldId.HOMOGENEOUS_PLUS):
        params["a"] = float(p["a"])
    elif cid is FieldId.LOG_HEAVISIDE:
        params = {"threshold": float(p.get("threshold", 1.0)), "offset": float(p.get("offset", 0.0))}
    elif cid is FieldId.POLYNOMIAL:
        params["coeffs"] = {tuple(e["m"]): _from_cplx(e["c"]) for e in p["coeffs"]}
    elif cid is FieldId.DELTA_COMB:
        params["atoms"] = tuple((tuple(float(x) for x in e["t"]), _from_cplx(e["c"])) for e in p["atoms"])
    elif cid is FieldId.SUM:
        params["terms"] = tuple(from_dict(t) for t in p["terms"])
    if "fourier_grid" in d:
        g = d["fourier_grid"]
        vals = (np.asarray(g["re"]) + 1j * np.asarray(g["im"])).reshape(g["shape"])
        grid = FourierGrid(vals, float(g["half_width"]), float(g.get("growth", 0.0)))
    return FieldSpec(dim, cid, params, weight=weight, fourier_grid=grid, cutoff=d.get("cutoff"))
