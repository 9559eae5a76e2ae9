"""Variance-ratio tests of the martingale null on a log-price path.

The ratio compares the (per-period) variance of overlapping q-period
log-price increments with the one-period variance, both estimated with
unbiased weights; under a random walk it is 1 for every q.  Each ratio is
standardized with a variance estimate that is robust to conditional
heteroskedasticity, and a battery over several q is summarized by the
maximum absolute statistic, whose p-value is bounded from above through
the Studentized Maximum Modulus distribution with infinite degrees of
freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import two_sided_p
from .series import PriceSeries

DEFAULT_PERIODS = (2, 4, 8, 16)


class ZeroVarianceError(ValueError):
    """One-period variance is zero (constant returns); VR undefined."""


class DegenerateThetaError(ValueError):
    """Robust variance of the ratio is zero; z* undefined."""


@dataclass(frozen=True)
class LogPricePath:
    """Natural-log price levels X_0..X_T; T is the number of returns."""

    X: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.X, dtype=np.float64).copy()
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("need at least two log-price levels")
        arr.flags.writeable = False
        object.__setattr__(self, "X", arr)

    @property
    def n_returns(self) -> int:
        return self.X.size - 1

    @classmethod
    def from_prices(cls, prices: PriceSeries) -> "LogPricePath":
        return cls(X=np.log(prices.prices))

    @classmethod
    def from_returns(cls, returns, x0: float = 0.0) -> "LogPricePath":
        values = np.asarray(getattr(returns, "values", returns), dtype=np.float64)
        x = np.empty(values.size + 1)
        x[0] = x0
        np.cumsum(values, out=x[1:])
        x[1:] += x0
        return cls(X=x)


@dataclass(frozen=True)
class VrResult:
    """Variance ratio at one aggregation period with its robust statistic."""

    q: int
    vr: float
    z_star: float
    p_two_sided: float


@dataclass(frozen=True)
class JointVrResult:
    """Max-|z*| summary of a battery of variance-ratio tests."""

    max_abs_z: float
    argmax_q: int
    m: int
    p_bound: float
    individual: tuple


def _core(path: LogPricePath, q: int):
    x = path.X
    t = path.n_returns
    if q < 1:
        raise ValueError(f"period must be >= 1, got {q}")
    if t <= q:
        raise ValueError(f"need more returns than the period: T={t}, q={q}")
    mu = (x[-1] - x[0]) / t
    eps = np.diff(x) - mu
    var_one = float(np.dot(eps, eps)) / (t - 1.0)
    if var_one <= 0.0:
        raise ZeroVarianceError("constant returns: one-period variance is zero")
    dev_q = x[q:] - x[:-q] - q * mu
    h = q * (t - q + 1.0) * (1.0 - q / t)
    var_q = float(np.dot(dev_q, dev_q)) / h
    return t, eps, var_one, var_q


def vr_estimate(path: LogPricePath, q: int) -> float:
    """Variance ratio VR(q) with unbiased variance estimators.

    With drift mu = (X_T - X_0)/T, the one-period variance averages the
    squared demeaned increments over T-1, and the q-period variance
    averages overlapping q-step increments with the unbiasing weight
    h = q (T - q + 1) (1 - q/T).  At q = 1 the two estimators coincide and
    the ratio is exactly 1.
    """
    _, _, var_one, var_q = _core(path, q)
    return var_q / var_one


def z_star(path: LogPricePath, q: int) -> VrResult:
    """Heteroskedasticity-robust standardized variance ratio.

    The asymptotic variance of VR(q) - 1 is assembled from the lag-j
    cross products of squared demeaned increments,

        delta(j) = sum_t eps_t^2 eps_{t-j}^2 / (sum_t eps_t^2)^2,
        theta(q) = sum_{j=1}^{q-1} (2 (q-j)/q)^2 delta(j),

    which stays valid under ARCH-style changing variances.  z*(q) is
    standard normal under the martingale null.
    """
    if q < 2:
        raise ValueError(f"z* needs period >= 2, got {q}")
    t, eps, var_one, var_q = _core(path, q)
    vr = var_q / var_one
    eps2 = eps * eps
    denom = float(eps2.sum()) ** 2
    theta = 0.0
    for j in range(1, q):
        delta_j = float(np.dot(eps2[j:], eps2[:-j])) / denom
        w = 2.0 * (q - j) / q
        theta += w * w * delta_j
    if theta <= 0.0:
        raise DegenerateThetaError(
            f"zero robust variance at q={q}; need >= 2 distinct increments")
    z = (vr - 1.0) / math.sqrt(theta)
    return VrResult(q=int(q), vr=vr, z_star=z, p_two_sided=two_sided_p(z))


def smm_p_bound(max_abs_z: float, m: int) -> float:
    """Upper p-bound for the max of m |z| statistics, via the SMM tail.

    p <= 1 - (2 Phi(z) - 1)^m with infinite degrees of freedom; at m = 1
    this is exactly the two-sided normal p-value.
    """
    if max_abs_z < 0:
        raise ValueError("statistic must be nonnegative")
    if m < 1:
        raise ValueError("need at least one period")
    inner = math.erf(max_abs_z / math.sqrt(2.0))  # = 2*Phi(z) - 1
    return 1.0 - inner**m


def joint_from_results(results) -> JointVrResult:
    """Chow-Denning summary of already-computed per-period results."""
    results = tuple(results)
    if not results:
        raise ValueError("need at least one variance-ratio result")
    best = max(results, key=lambda r: abs(r.z_star))
    max_abs = abs(best.z_star)
    return JointVrResult(max_abs_z=max_abs, argmax_q=best.q, m=len(results),
                         p_bound=smm_p_bound(max_abs, len(results)),
                         individual=results)


def chow_denning(path: LogPricePath, periods=DEFAULT_PERIODS) -> JointVrResult:
    """Joint variance-ratio test over several periods.

    Computes z*(q) for each period, takes the maximum absolute value and
    the period attaining it, and bounds the joint p-value with
    :func:`smm_p_bound` at m = number of periods.
    """
    periods = tuple(int(q) for q in periods)
    if not periods:
        raise ValueError("need at least one period")
    if len(set(periods)) != len(periods):
        raise ValueError(f"periods must be distinct, got {periods}")
    if any(q < 2 for q in periods):
        raise ValueError(f"every period must be >= 2, got {periods}")
    return joint_from_results(z_star(path, q) for q in periods)
