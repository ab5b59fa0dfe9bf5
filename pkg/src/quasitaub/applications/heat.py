"""Spectral Cauchy problems dU/dt = P(d/dx) U with homogeneous symbols.

With phi_hat(u) = exp(P(iu)) and P homogeneous of degree d, the solution is
U(x, t) = M^f_phi(x, t^(1/d)), so stabilization along the curves
(lam x, lam^d t) is a scaling statement about the regularizing transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels as K
from .. import tauber as T
from ..errors import NoFiniteK, NotStabilized
from ..fields import FieldSpec, to_dict
from ..slowvary import Site, SlowVarySpec
from ..transform import (ScaleGrid, compute_sheet, eval_transform, geometric_lambdas, sphere_directions,
                         transform_values)

# name -> (degree d, kernel factory)
SYMBOLS = {
    "heat": (2, lambda n: K.make_kernel("heat", n)),
    "biheat": (4, lambda n: K.exp_power_kernel(4, n)),
}


@dataclass(frozen=True, eq=False)
class CauchyProblem:
    """dU/dt = P(d/dx) U, U(., 0) = initial, with Re P(iu) = -|u|^d."""

    dim: int
    initial: FieldSpec
    symbol: str = "heat"
    t_grid: np.ndarray = field(default_factory=lambda: np.logspace(0, 6, 25))

    def __post_init__(self):
        if self.symbol not in SYMBOLS:
            raise ValueError(f"unknown symbol {self.symbol!r}; choose from {sorted(SYMBOLS)}")
        if self.initial.dim != self.dim:
            raise K.DimMismatch("initial datum and problem dimensions differ")
        t = np.asarray(self.t_grid, dtype=float)
        if np.any(t <= 0):
            raise ValueError("times must be positive")
        object.__setattr__(self, "t_grid", t)
        # Re P(iu) < 0 on the unit sphere
        u = sphere_directions(self.dim)[:, : self.dim] if self.dim > 1 else np.array([[-1.0], [1.0]])
        u = u[np.linalg.norm(u, axis=1) > 0]
        u = u / np.linalg.norm(u, axis=1, keepdims=True)
        if not np.all(np.abs(self.kernel.symbol(u)) < 1):
            raise ValueError("Re P(iu) must be negative away from the origin")

    @property
    def degree(self):
        return SYMBOLS[self.symbol][0]

    @property
    def kernel(self):
        return SYMBOLS[self.symbol][1](self.dim)

    def P(self, u):
        """P(iu) = -|u|^d, so that phi_hat = exp(P(iu))."""
        return -np.linalg.norm(np.atleast_2d(u), axis=-1) ** self.degree

    def to_dict(self):
        return {"dim": self.dim, "symbol": self.symbol, "degree": self.degree,
                "initial": to_dict(self.initial), "t_grid": self.t_grid.tolist()}


def solve_cauchy(prob, x, t):
    """U(x, t) = M^f_phi(x, t^(1/d))."""
    if not t > 0:
        raise ValueError("t must be positive")
    return eval_transform(prob.initial, prob.kernel, x, float(t) ** (1.0 / prob.degree))


def evolve_samples(prob, samples, dx, t):
    """Advance periodic samples on a uniform 1-D mesh by time t with the Fourier multiplier."""
    if prob.dim != 1:
        raise K.UnsupportedDim("sample evolution is implemented for n = 1")
    samples = np.asarray(samples, dtype=complex)
    u = 2 * np.pi * np.fft.fftfreq(samples.size, d=dx)
    mult = np.exp(t * prob.P(u[:, None]))
    return np.fft.ifft(np.fft.fft(samples) * mult)


def d_curve_grid(prob, n_lambda=64, ratio=2 ** 0.25):
    """Directions (x, t) on the unit sphere, mapped to (x, t^(1/d)); lam toward infinity."""
    dirs = sphere_directions(prob.dim)
    t = dirs[:, -1]
    mapped = np.concatenate([dirs[:, :-1], (t ** (1.0 / prob.degree))[:, None]], axis=1)
    grid = ScaleGrid(geometric_lambdas(Site.INFINITY, n_lambda, ratio), mapped, Site.INFINITY, kind="dcurve")
    return grid, t


@dataclass
class StabilizationReport:
    stabilizes: bool
    l_hat: object
    U0: list
    directions: np.ndarray
    margin: object = None

    def to_dict(self):
        def cvec(v):
            return None if v is None else [[float(z.real), float(z.imag)] for z in np.atleast_1d(v)]

        return {"stabilizes": self.stabilizes, "l_hat": self.l_hat, "margin": self.margin,
                "U0": [{"x": d[:-1].tolist(), "t": float(d[-1]), "value": cvec(v) if v is not None else "divergent"}
                       for d, v in zip(self.directions, self.U0)]}


def check_d_curve_stabilization(prob, alpha, L=None, n_lambda=64):
    """Limits of U(lam x, lam^d t)/(lam^alpha L(lam)) and the smallest l of the t^-l bound."""
    L = L or SlowVarySpec.one(Site.INFINITY)
    grid, t = d_curve_grid(prob, n_lambda)
    sheet = compute_sheet(prob.initial, prob.kernel, grid)
    limits = T.detect_limits(sheet, alpha, L)
    try:
        est = T.find_tauberian_k(sheet, alpha, L, weight_base=t)
        l_hat, margin = est.k_hat, est.margin
    except NoFiniteK:
        l_hat, margin = None, None
    dirs = np.concatenate([grid.x, t[:, None]], axis=1)
    ok = l_hat is not None and all(e.exists for e in limits)
    return StabilizationReport(ok, l_hat, [e.value for e in limits], dirs, margin)


@dataclass
class TimeStabilization:
    T_desc: str
    ell: np.ndarray
    sup_dev: float
    window: tuple

    def to_dict(self):
        return {"T": self.T_desc, "ell": [[float(z.real), float(z.imag)] for z in self.ell],
                "sup_dev": self.sup_dev, "t_window": list(self.window)}


def time_stabilization(prob, alpha, L=None, x_set=None, decades=2.0):
    """lim U(x, t)/T(t) uniformly on x_set, T(t) = t^(alpha/d) L(t^(1/d)).

    ``ell`` is read at x = 0 (or the point of x_set nearest it) at the last
    time; ``sup_dev`` is the largest deviation from ``ell`` over x_set and
    the final ``decades`` of the time grid.
    """
    L = L or SlowVarySpec.one(Site.INFINITY)
    rep = check_d_curve_stabilization(prob, alpha, L)
    if not rep.stabilizes:
        raise NotStabilized("U does not stabilize along the d-curves")
    d = prob.degree
    if x_set is None:
        x_set = np.linspace(-5, 5, 41)
    xs = np.asarray(x_set, dtype=float).reshape(-1, prob.dim)
    ts = prob.t_grid
    window = ts[ts >= ts.max() / 10 ** decades * (1 - 1e-12)]
    desc = f"t^({alpha:g}/{d}) * {L.describe()}(t^(1/{d}))"
    ratios = []
    for t in window:
        y = t ** (1.0 / d)
        Tt = np.exp(alpha * np.log(y) + L.log_value(y))
        vals, _ = transform_values(prob.initial, prob.kernel, xs, np.full(len(xs), y))
        ratios.append(vals / Tt)
    ratios = np.array(ratios)
    i0 = int(np.argmin(np.linalg.norm(xs, axis=1)))
    ell = ratios[-1, i0]
    dev = float(np.max(np.linalg.norm(ratios - ell, axis=-1)))
    return TimeStabilization(desc, ell, dev, (float(window[0]), float(window[-1])))

