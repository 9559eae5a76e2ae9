"""Standard-normal primitives shared by every test in the package.

All p-values and interval quantiles route through this module, so the
distribution function is implemented once, on top of the platform error
function, and audited by the test suite against reference values.
"""

from __future__ import annotations

import math

__all__ = ["normal_cdf", "normal_quantile", "two_sided_p"]

_SQRT2 = math.sqrt(2.0)


def normal_cdf(x: float) -> float:
    """Standard normal distribution function Phi(x)."""
    return 0.5 * (1.0 + math.erf(x / _SQRT2))


def two_sided_p(z: float) -> float:
    """Two-sided tail probability 2*(1 - Phi(|z|)) of a standard normal.

    Evaluated through the complementary error function, which keeps full
    relative precision deep in the tails where 1 - Phi(|z|) underflows.
    """
    return math.erfc(abs(z) / _SQRT2)


def normal_quantile(p: float, tol: float = 1e-12) -> float:
    """Inverse of :func:`normal_cdf`, by bisection.

    Bisection against the same CDF used everywhere else guarantees the
    quantile is consistent with the p-values it is compared to; `tol` is
    the absolute tolerance on the returned abscissa.

    Parameters
    ----------
    p : float
        Probability in (0, 1).
    tol : float
        Bisection stopping width.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must be in (0, 1), got {p}")
    lo, hi = -40.0, 40.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
