"""Parametric slowly varying functions L used as normalizers.

Three families are supported:

* ``One``        L(lam) = 1
* ``LogPow``     L(lam) = log(lam) ** b           (site infinity)
* ``LogLogPow``  L(lam) = log(log(lam)) ** b      (site infinity)

At the origin the same families are evaluated at ``1/lam``, so that
``LogPow(1)`` at the origin means ``log(1/lam)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Site(str, enum.Enum):
    ORIGIN = "origin"
    INFINITY = "infinity"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class Family(str, enum.Enum):
    ONE = "One"
    LOG_POW = "LogPow"
    LOG_LOG_POW = "LogLogPow"


@dataclass(frozen=True)
class SlowVarySpec:
    family: Family = Family.ONE
    b: float = 0.0
    site: Site = Site.INFINITY

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "site", Site.parse(self.site))
        object.__setattr__(self, "b", float(self.b))

    @classmethod
    def one(cls, site=Site.INFINITY):
        return cls(Family.ONE, 0.0, site)

    @classmethod
    def log_pow(cls, b, site=Site.INFINITY):
        return cls(Family.LOG_POW, b, site)

    @classmethod
    def loglog_pow(cls, b, site=Site.INFINITY):
        return cls(Family.LOG_LOG_POW, b, site)

    @property
    def n_params(self):
        return 0 if self.family is Family.ONE else 1

    def _argument(self, lam):
        lam = np.asarray(lam, dtype=float)
        return 1.0 / lam if self.site is Site.ORIGIN else lam

    def log_value(self, lam):
        """Natural log of L(lam); NaN where L is undefined."""
        s = self._argument(lam)
        if self.family is Family.ONE:
            return np.zeros_like(s)
        with np.errstate(invalid="ignore", divide="ignore"):
            if self.family is Family.LOG_POW:
                inner = np.log(s)
            else:
                inner = np.log(np.log(s))
            out = self.b * np.log(inner)
        return np.where(inner > 0, out, np.nan)

    def __call__(self, lam):
        return np.exp(self.log_value(lam))

    def is_slowly_varying(self, lam_tail, factors=(2.0, 10.0), tol=None):
        """Check L(a lam)/L(lam) -> 1 along ``lam_tail`` (ordered toward the site).

        The ratio must approach 1 monotonically in the sense that its
        distance to 1 at the end of the tail does not exceed the distance
        at the start; ``tol`` optionally bounds the final distance.
        """
        lam_tail = np.asarray(lam_tail, dtype=float)
        for a in factors:
            scaled = lam_tail * a if self.site is Site.INFINITY else lam_tail / a
            dev = np.abs(np.exp(self.log_value(scaled) - self.log_value(lam_tail)) - 1.0)
            if not np.all(np.isfinite(dev)):
                return False
            if dev[-1] > dev[0] + 1e-15:
                return False
            if tol is not None and dev[-1] > tol:
                return False
        return True

    def describe(self):
        if self.family is Family.ONE:
            return "One"
        return f"{self.family.value}({self.b:g})"

    def to_dict(self):
        return {"family": self.family.value, "b": self.b, "site": self.site.value}

    @classmethod
    def from_dict(cls, data):
        return cls(Family(data["family"]), data.get("b", 0.0), Site.parse(data.get("site", "infinity")))


# Candidate set used by the exponent estimator's model selection.
CANDIDATE_B = {
    Family.LOG_POW: (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0),
    Family.LOG_LOG_POW: (-1.0, 1.0),
}


def candidates(site):
    site = Site.parse(site)
    out = [SlowVarySpec.one(site)]
    for fam, bs in CANDIDATE_B.items():
        out.extend(SlowVarySpec(fam, b, site) for b in bs)
    return out
