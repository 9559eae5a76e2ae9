"""Monte Carlo calibration: empirical size of the tests on random series.

Each replication simulates a return series from a known null process and
runs the selected tests; tallying rejections at several levels measures
how close each test's actual size is to its nominal size.  Replication i
is generated from a counter-based bit stream keyed by (seed, i), so
results are bit-identical no matter how the work is scheduled.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .runs import runs_test_mean, runs_test_updown
from .series import ReturnSeries
from .varianceratio import DEFAULT_PERIODS, LogPricePath, chow_denning, z_star

GENERATORS = ("iid-gaussian", "ar1", "garch-like")

DEFAULT_ALPHAS = (0.10, 0.05, 0.01)

_EPOCH = np.datetime64("1970-01-01", "D")


@dataclass(frozen=True)
class SimulationSpec:
    """A reproducible simulation design.

    ``generator`` is one of ``iid-gaussian`` (unit normal increments),
    ``ar1`` (autoregressive returns with coefficient `rho`, stationary
    start), or ``garch-like`` (two-regime variance switching: volatility
    jumps between 1 and `sigma_ratio` with per-step switch probability
    `switch_prob`, a minimal volatility-clustering null).
    """

    replications: int
    length: int = 2659
    generator: str = "iid-gaussian"
    seed: int = 0
    rho: float = 0.0
    switch_prob: float = 0.02
    sigma_ratio: float = 3.0

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError(f"need >= 1 replication, got {self.replications}")
        if self.length < 32:
            raise ValueError(f"need length >= 32, got {self.length}")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; "
                             f"choose from {GENERATORS}")
        if not abs(self.rho) < 1.0:
            raise ValueError(f"ar1 coefficient must satisfy |rho| < 1, got {self.rho}")
        if not 0.0 < self.switch_prob < 1.0:
            raise ValueError(f"switch probability must be in (0,1), got {self.switch_prob}")
        if self.sigma_ratio <= 0.0:
            raise ValueError(f"volatility ratio must be positive, got {self.sigma_ratio}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")


def _rng(seed: int, index: int) -> np.random.Generator:
    # Philox is counter-based: keying by (seed, index) makes replication
    # `index` reproducible on its own, independent of execution order.
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(index)))


def simulate_values(spec: SimulationSpec, index: int) -> np.ndarray:
    """Raw simulated return values for one replication."""
    if not 0 <= int(index) < 2**64:
        raise ValueError("replication index must fit in 64 bits")
    rng = _rng(spec.seed, index)
    n = spec.length
    if spec.generator == "iid-gaussian":
        return rng.standard_normal(n)
    if spec.generator == "ar1":
        eps = rng.standard_normal(n)
        out = np.empty(n)
        out[0] = eps[0] / sqrt(1.0 - spec.rho * spec.rho)  # stationary start
        for t in range(1, n):
            out[t] = spec.rho * out[t - 1] + eps[t]
        return out
    # garch-like: persistent two-state volatility regime
    eps = rng.standard_normal(n)
    state = np.empty(n, dtype=np.int64)
    state[0] = rng.integers(0, 2)
    flips = rng.random(n) < spec.switch_prob
    state[1:] = flips[1:]
    np.cumsum(state, out=state)
    state &= 1
    sigma = np.where(state == 1, spec.sigma_ratio, 1.0)
    return sigma * eps


def simulate_series(spec: SimulationSpec, index: int) -> ReturnSeries:
    """One replication as a ReturnSeries with synthetic daily dates."""
    values = simulate_values(spec, index)
    dates = _EPOCH + np.arange(1, spec.length + 1)
    return ReturnSeries(ticker=f"sim-{index:05d}", dates=dates, values=values)


def available_tests(periods=DEFAULT_PERIODS) -> tuple:
    return ("runs_mean", "runs_updown") + tuple(f"vr{q}" for q in periods) + ("vr_joint",)


def _p_values(values: np.ndarray, tests, periods) -> dict:
    out = {}
    need_path = any(t.startswith("vr") for t in tests)
    path = LogPricePath.from_returns(values) if need_path else None
    for t in tests:
        try:
            if t == "runs_mean":
                out[t] = runs_test_mean(values).p_two_sided
            elif t == "runs_updown":
                out[t] = runs_test_updown(values)[0].p_two_sided
            elif t == "vr_joint":
                out[t] = chow_denning(path, periods).p_bound
            elif t.startswith("vr"):
                out[t] = z_star(path, int(t[2:])).p_two_sided
            else:
                raise ValueError(f"unknown test {t!r}")
        except ValueError as exc:
            if isinstance(exc, ValueError) and t not in available_tests(periods):
                raise
            out[t] = None  # degenerate draw; counted, not fatal
    return out


@dataclass(frozen=True)
class SizeStudyResult:
    """Rejection tallies per test and level, with binomial noise bars."""

    spec: SimulationSpec
    tests: tuple
    alphas: tuple
    periods: tuple
    rejections: dict         # test -> {alpha -> count}
    errors: dict             # test -> count of degenerate replications
    evaluated: dict = field(repr=False, default=None)  # test -> usable count

    def rate(self, test: str, alpha: float) -> float:
        n = self.evaluated[test]
        return self.rejections[test][alpha] / n if n else float("nan")

    def standard_error(self, test: str, alpha: float) -> float:
        n = self.evaluated[test]
        if not n:
            return float("nan")
        r = self.rate(test, alpha)
        return sqrt(r * (1.0 - r) / n)

    def rows(self) -> list:
        out = [["test", "alpha", "rejections", "replications", "rate", "std_error",
                "errors"]]
        for t in self.tests:
            for a in self.alphas:
                out.append([t, f"{a:g}", str(self.rejections[t][a]),
                            str(self.evaluated[t]), f"{self.rate(t, a):.6f}",
                            f"{self.standard_error(t, a):.6f}", str(self.errors[t])])
        return out


def size_study(spec: SimulationSpec, tests=None, alphas=DEFAULT_ALPHAS,
               periods=DEFAULT_PERIODS, workers: int = 1) -> SizeStudyResult:
    """Measure empirical rejection rates of the selected tests under `spec`.

    Degenerate replications (a test raising on a pathological draw) are
    excluded from that test's denominator and reported in ``errors``.
    The result is independent of `workers`: every replication is keyed by
    its index and the reduction is a fixed-order scan.
    """
    tests = tuple(tests) if tests else available_tests(periods)
    alphas = tuple(alphas)
    periods = tuple(periods)
    known = set(available_tests(periods))
    unknown = [t for t in tests if t not in known]
    if unknown:
        raise ValueError(f"unknown tests {unknown}; available: {sorted(known)}")

    def one(index: int) -> dict:
        return _p_values(simulate_values(spec, index), tests, periods)

    indices = range(spec.replications)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, indices))
    else:
        results = [one(i) for i in indices]

    rejections = {t: {a: 0 for a in alphas} for t in tests}
    errors = {t: 0 for t in tests}
    evaluated = {t: 0 for t in tests}
    for res in results:  # fixed index order
        for t in tests:
            p = res[t]
            if p is None:
                errors[t] += 1
                continue
            evaluated[t] += 1
            for a in alphas:
                if p <= a:
                    rejections[t][a] += 1
    return SizeStudyResult(spec=spec, tests=tests, alphas=alphas, periods=periods,
                           rejections=rejections, errors=errors, evaluated=evaluated)
