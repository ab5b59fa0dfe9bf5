"""Laplace transforms of series on the cone [0, inf) and Littlewood's Tauberian theorem.

h(u) = sum_n c_n delta(u - n) has L{h; z} = sum_n c_n exp(i z n) for Im z > 0,
and the Abel means of sum c_n are L{h; i eps}.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .. import tauber as T
from ..errors import ConfigInvalid, InsufficientRange, SlowDecay
from ..slowvary import Site, SlowVarySpec
from ..transform import omega_boundary_directions

SLOW_DECAY_TOL = 1e-10
DEFAULT_N = 10 ** 6
ABEL_EPS = (1e-1, 1e-2, 1e-3, 1e-4)
ABEL_TOL = 1e-3
MATCH_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class ConeSeries:
    """Coefficients c_0..c_N and a tail model: ``"none"`` or ``"OInvN"`` (|c_n| <= C/n)."""

    coefficients: np.ndarray
    tail: str = "none"
    tail_constant: float = 0.0
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        object.__setattr__(self, "coefficients", c)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty vector")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        if self.tail not in ("none", "OInvN"):
            raise ValueError("tail model must be 'none' or 'OInvN'")
        if self.tail == "OInvN":
            n = np.arange(c.size)
            if np.any(np.abs(c) * n > self.tail_constant * (1 + 1e-12)):
                raise ValueError("stored coefficients violate |c_n| n <= tail constant")

    @property
    def N(self):
        return self.coefficients.size - 1

    def to_dict(self):
        return {"name": self.name, "N": self.N, "tail": self.tail, "tail_constant": self.tail_constant}


def builtin_series(name, N=DEFAULT_N):
    n = np.arange(N + 1, dtype=float)
    with np.errstate(divide="ignore"):
        inv = np.where(n > 0, 1.0 / np.maximum(n, 1), 0.0)
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    if name == "alt-harmonic":
        return ConeSeries(-sign * inv, "OInvN", 1.0, name)
    if name == "grandi":
        return ConeSeries(sign, "none", 0.0, name)
    if name == "basel":
        return ConeSeries(inv ** 2, "OInvN", 1.0, name)
    if name == "ones":
        return ConeSeries(np.ones_like(n), "none", 0.0, name)
    if name == "linear":
        return ConeSeries(n, "none", 0.0, name)
    raise ConfigInvalid(f"unknown builtin series {name!r}")


BUILTINS = ("alt-harmonic", "grandi", "basel", "ones", "linear")


def read_series_csv(path, tail="none", tail_constant=0.0):
    """Rows ``n, re[, im]``; missing indices are zero."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                n = int(row[0])
                re = float(row[1])
                im = float(row[2]) if len(row) > 2 and row[2].strip() else 0.0
            except (ValueError, IndexError):
                if not rows:
                    continue  # header
                raise ConfigInvalid(f"bad series row {row!r}") from None
            if n < 0:
                raise ConfigInvalid("series indices must be non-negative")
            rows.append((n, complex(re, im)))
    if not rows:
        raise ConfigInvalid(f"{path} holds no coefficients")
    c = np.zeros(max(n for n, _ in rows) + 1, dtype=complex)
    for n, v in rows:
        c[n] = v
    return ConeSeries(c, tail, tail_constant, str(path))


# -- evaluation --------------------------------------------------------------------------

@dataclass(frozen=True)
class LaplaceValue:
    value: complex
    error_bar: float


def _terms(series, z, n_stop=None):
    c = series.coefficients[: n_stop]
    n = np.arange(c.size)
    return c * np.exp(1j * z * n)


def laplace_eval(series, z, compensated=True):
    """sum_n c_n exp(i z n) with compensated summation and a tail-model error bar."""
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("Im z must be positive")
    terms = _terms(series, z)
    if compensated:
        value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    else:
        value = complex(np.sum(terms))
    bar = _tail_bound(series, z.imag)
    if bar > SLOW_DECAY_TOL * max(abs(value), 1e-300):
        raise SlowDecay(f"tail bound {bar:.3g} at Im z = {z.imag:g} with N = {series.N}")
    return LaplaceValue(value, bar)


def _tail_bound(series, y):
    if series.tail == "none":
        return 0.0
    N = series.N
    return series.tail_constant / (N + 1) * math.exp(-y * (N + 1)) / (-math.expm1(-y))


def _fast_eval(series, z, cut=40.0):
    """Pairwise-summed value truncated where exp(-Im z n) < e^-cut."""
    stop = min(series.N + 1, int(cut / z.imag) + 1)
    return complex(np.sum(_terms(series, z, stop)))


@dataclass(frozen=True)
class OmegaRegion:
    kappa: float = 0.0
    n_sigma: int = 8
    n_top: int = 5
    sigma_min: float = 0.05

    def __post_init__(self):
        if not 0 <= self.kappa < 1:
            raise ValueError("kappa must lie in [0, 1)")
        if not 0 < self.sigma_min <= 1:
            raise ValueError("sigma_min must lie in (0, 1]")

    def boundary(self):
        return omega_boundary_directions(self.kappa, self.n_sigma, self.n_top + 2, self.sigma_min)


@dataclass(frozen=True)
class BoundCheck:
    bounded: bool
    margin: float
    lambdas: np.ndarray
    sup_values: np.ndarray


def omega_bound_check(series, region, alpha, L=None, k=1, lambdas=None):
    """Running-max test of sup over the boundary of sigma^k lam^(1+alpha)/L(1/lam) |L{h; lam(x + i sigma)}|."""
    L = L or SlowVarySpec.one(Site.INFINITY)
    lam = np.logspace(0, -3, 13) if lambdas is None else np.asarray(lambdas, dtype=float)
    if abs(math.log10(lam[-1] / lam[0])) < 3 - 1e-9:
        raise InsufficientRange("the lambda grid must cover at least 3 decades")
    pts = region.boundary()
    sups = np.empty(lam.size)
    for j, l in enumerate(lam):
        norm = l ** (1 + alpha) / np.exp(L.log_value(1 / l))
        vals = [s ** k * abs(_fast_eval(series, l * complex(x, s))) for x, s in pts]
        sups[j] = norm * max(vals)
    s = -np.log(lam)
    mask = T.tail_mask(lam, 2.0)
    slope = T.running_max_slope(s, sups, mask)
    return BoundCheck(bool(slope < T.SLOPE_TOL), float(slope), lam, sups)


# -- Littlewood -------------------------------------------------------------------------

@dataclass
class LittlewoodReport:
    abel_limit: Optional[complex]
    abel_trend: list
    tauberian_ok: bool
    tail_ok: bool
    omega_ok: bool
    partial_sum_limit: Optional[complex]
    verdict: str
    counterexample: bool = False

    def to_dict(self):
        def c(v):
            return "none" if v is None else [v.real, v.imag]

        return {"abel_limit": c(self.abel_limit), "abel_trend": [[v.real, v.imag] for v in self.abel_trend],
                "tauberian_ok": self.tauberian_ok, "tail_ok": self.tail_ok, "omega_ok": self.omega_ok,
                "partial_sum_limit": c(self.partial_sum_limit), "verdict": self.verdict,
                "counterexample": self.counterexample}


def abel_limit(series, eps=ABEL_EPS, tol=ABEL_TOL):
    """Limit of L{h; i eps} as eps -> 0, or None.

    Successive differences must shrink, and the Richardson extrapolants of
    the last two eps pairs must agree within ``tol``; the later one is the
    limit.
    """
    vals = [laplace_eval(series, 1j * e).value for e in eps]
    diffs = [abs(b - a) for a, b in zip(vals[:-1], vals[1:])]
    shrinking = all(d2 <= d1 * (1 + 1e-9) for d1, d2 in zip(diffs[:-1], diffs[1:]))
    rich = []
    for i in (-3, -2):
        r = eps[i] / eps[i + 1]
        rich.append((r * vals[i + 1] - vals[i]) / (r - 1))
    if not (shrinking and abs(rich[1] - rich[0]) < tol * (1 + abs(rich[1]))):
        return None, vals
    return rich[1], vals


def tail_hypothesis(series, decades=2.0):
    """n |c_n| bounded on the stored prefix (running-max slope in log n)."""
    c = np.abs(series.coefficients)
    n = np.arange(1, c.size)
    if n.size < 10:
        return False
    idx = np.unique(np.logspace(0, math.log10(n[-1]), 200).astype(int))
    vals = idx * c[idx]
    mask = np.abs(np.log10(idx / idx[-1])) <= decades + 1e-9
    return bool(T.running_max_slope(np.log(idx), vals, mask) < T.SLOPE_TOL)


def partial_sum_limit(series, tol=MATCH_TOL):
    """Cauchy test of the partial sums over the last decade."""
    S = np.cumsum(series.coefficients)
    N = series.N
    tail = S[max(N // 10, 0):]
    spread = float(np.max(np.abs(tail - tail[-1])))
    if spread < tol * (1 + abs(tail[-1])):
        return complex(math.fsum(series.coefficients.real), math.fsum(series.coefficients.imag))
    return None


def littlewood_analyze(series, region=None):
    """Abel limit, Tauberian hypothesis c_n = O(1/n), partial-sum limit and the verdict."""
    region = region or OmegaRegion(0.0)
    a, trend = abel_limit(series)
    tail_ok = tail_hypothesis(series)
    omega_ok = omega_bound_check(series, region, -1.0, SlowVarySpec.one(), 1).bounded
    ok = tail_ok and omega_ok
    s = partial_sum_limit(series)
    counter = False
    if a is None:
        verdict = "no Abel limit; no conclusion"
    elif not ok:
        verdict = "Tauberian hypothesis fails; no conclusion"
    elif s is not None and abs(s - a) < MATCH_TOL * (1 + abs(a)):
        verdict = "convergent: partial sums tend to the Abel limit"
    else:
        counter = True
        verdict = "COUNTEREXAMPLE: Abel summable with c_n = O(1/n) but partial sums do not converge to the Abel limit"
    return LittlewoodReport(a, trend, ok, tail_ok, omega_ok, s, verdict, counter)
