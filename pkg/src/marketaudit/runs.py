"""Runs tests for randomness of a return series.

Two dichotomizations are supported: above/below the whole-series mean
(symbols 1/0), and up/down moves between consecutive returns (symbols
+1/-1, with ties inheriting the previous sign and an initial tie counted
as up).  Both feed the same normal-approximation z test on the total run
count; the up/down series additionally gets a per-length census whose
observed counts are compared with their expectations under randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import two_sided_p

UP = 1
DOWN = -1


class DegenerateVarianceError(ValueError):
    """Run-count variance is zero; the normal approximation is unusable."""


def _as_values(returns) -> np.ndarray:
    values = getattr(returns, "values", returns)
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a nonempty 1-d array of returns")
    return arr


@dataclass(frozen=True)
class BinarySeries:
    """0/1 symbols from dichotomizing returns against their mean."""

    symbols: np.ndarray
    n_ones: int
    n_zeros: int

    @property
    def total(self) -> int:
        return self.n_ones + self.n_zeros


@dataclass(frozen=True)
class SignSeries:
    """+1/-1 symbols for the direction of each consecutive change."""

    signs: np.ndarray

    def __len__(self) -> int:
        return len(self.signs)


@dataclass(frozen=True)
class RunsTestResult:
    observed_runs: int
    expected_runs: float
    sd_runs: float
    z: float
    p_two_sided: float

    def rejects(self, alpha: float) -> bool:
        return self.p_two_sided <= alpha


@dataclass(frozen=True)
class RunLengthCensus:
    """Per-length run counts, kept separately for each symbol.

    ``counts[symbol][length]`` is the number of maximal blocks of that
    symbol with exactly that length; the lengths weighted by counts always
    add back up to ``total_symbols``.
    """

    counts: dict
    max_length: int
    total_symbols: int

    def lengths(self, symbol) -> dict:
        return self.counts.get(symbol, {})


@dataclass(frozen=True)
class RunLengthFlag:
    """Significance record for one (direction, exact length) cell."""

    direction: int
    length: int
    observed: int
    expected: float
    z: float
    p_two_sided: float
    level: float | None  # smallest alpha at which significant, else None


def dichotomize_mean(returns) -> BinarySeries:
    """Map each return to 1 if strictly above the series mean, else 0.

    The comparison is strict: values equal to the mean go to 0.
    """
    arr = _as_values(returns)
    symbols = (arr > arr.mean()).astype(np.int8)
    ones = int(symbols.sum())
    return BinarySeries(symbols=symbols, n_ones=ones, n_zeros=symbols.size - ones)


def sign_series(returns) -> SignSeries:
    """Signs of consecutive changes, with tie inheritance.

    A rise maps to +1 and a fall to -1.  No-change steps repeat the
    previous sign; a no-change step at the very start counts as up.
    Output length is one less than the input length.
    """
    arr = _as_values(returns)
    if arr.size < 2:
        raise ValueError("need >= 2 returns to compute change signs")
    diff = np.diff(arr)
    signs = np.sign(diff).astype(np.int8)
    if signs[0] == 0:
        signs[0] = UP
    # propagate the previous sign through zero entries
    for i in np.flatnonzero(signs == 0):
        signs[i] = signs[i - 1]
    return SignSeries(signs=signs)


def count_runs(series) -> tuple[int, RunLengthCensus]:
    """Count maximal blocks of identical symbols and census their lengths."""
    if isinstance(series, BinarySeries):
        arr = series.symbols
    elif isinstance(series, SignSeries):
        arr = series.signs
    else:
        arr = np.asarray(series)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a nonempty 1-d symbol array")

    starts = np.flatnonzero(np.concatenate(([True], arr[1:] != arr[:-1])))
    ends = np.append(starts[1:], arr.size)
    lengths = ends - starts
    counts: dict = {}
    for s, ln in zip(arr[starts], lengths):
        per = counts.setdefault(s.item(), {})
        per[int(ln)] = per.get(int(ln), 0) + 1
    census = RunLengthCensus(counts=counts,
                             max_length=int(lengths.max()),
                             total_symbols=int(arr.size))
    return int(starts.size), census


def runs_z_test(n_ones: int, n_zeros: int, observed_runs: int) -> RunsTestResult:
    """Normal-approximation test of the total run count.

    With m symbols of one kind and n of the other (N = m + n), randomness
    implies E[runs] = 2mn/N + 1 and Var[runs] = 2mn(2mn - N) / (N^2 (N-1)).
    Both symbol counts must be >= 1; when the variance is zero (only the
    m = n = 1 case) a :class:`DegenerateVarianceError` is raised.
    """
    m, n = int(n_ones), int(n_zeros)
    if m < 1 or n < 1:
        raise ValueError(f"both symbol counts must be >= 1, got m={m}, n={n}")
    big_n = m + n
    expected = 2.0 * m * n / big_n + 1.0
    var = 2.0 * m * n * (2.0 * m * n - big_n) / (big_n**2 * (big_n - 1.0))
    if var <= 0.0:
        raise DegenerateVarianceError(
            f"zero run-count variance for m={m}, n={n}; z test undefined")
    sd = math.sqrt(var)
    z = (observed_runs - expected) / sd
    return RunsTestResult(observed_runs=int(observed_runs), expected_runs=expected,
                          sd_runs=sd, z=z, p_two_sided=two_sided_p(z))


def runs_test_mean(returns) -> RunsTestResult:
    """Runs test of above/below-mean returns (dichotomize, count, test)."""
    binary = dichotomize_mean(returns)
    observed, _ = count_runs(binary)
    return runs_z_test(binary.n_ones, binary.n_zeros, observed)


def runs_test_updown(returns) -> tuple[RunsTestResult, RunLengthCensus]:
    """Runs test of up/down change signs, plus the per-length census."""
    signs = sign_series(returns)
    observed, census = count_runs(signs)
    ups = int(np.sum(signs.signs == UP))
    return runs_z_test(ups, len(signs) - ups, observed), census


@dataclass(frozen=True)
class RunLengthExpectations:
    """Distribution-theory expectations for up/down runs of N values.

    ``per_length[k]`` is the expected number of runs (up and down pooled)
    of exact length k, for k = 1..N-2, truncated once it falls below
    1e-12.  ``total_mean`` is exact for N >= 2; ``total_variance`` uses
    the classical closed form, exact for N >= 4.
    """

    n_values: int
    total_mean: float
    total_variance: float
    per_length: dict


def _expected_runs_of_length(n_values: int, k: int) -> float:
    """Expected up+down runs of exact sign-length k among N values.

    Valid for 1 <= k <= N-2; the boundary k = N-1 (a monotone series) has
    expectation 2/N! instead and is handled by the caller.
    """
    num = 2 * (n_values * (k * k + 3 * k + 1) - (k**3 + 3 * k * k - k - 4))
    return num / math.factorial(k + 3)


def run_length_expectations(n_values: int, truncate_below: float = 1e-12) -> RunLengthExpectations:
    """Expected run counts by exact length for a random series of N values."""
    if n_values < 2:
        raise ValueError(f"need N >= 2, got {n_values}")
    per_length: dict = {}
    for k in range(1, n_values - 1):
        e = _expected_runs_of_length(n_values, k)
        if e < truncate_below:
            break
        per_length[k] = e
    return RunLengthExpectations(
        n_values=n_values,
        total_mean=(2.0 * n_values - 1.0) / 3.0,
        total_variance=(16.0 * n_values - 29.0) / 90.0,
        per_length=per_length,
    )


def run_length_significance(census: RunLengthCensus, n_values: int,
                            levels: tuple = (0.10, 0.05, 0.01)) -> list[RunLengthFlag]:
    """Flag observed run lengths whose counts deviate from expectation.

    For each direction and each observed exact length, the observed count
    is compared with half the pooled expectation (up and down runs are
    exchangeable) via z = (obs - e)/sqrt(e), i.e. the count variance is
    approximated by its mean.  Two-sided p-values are graded against
    `levels`; ``level`` on each flag is the smallest passed level, or None.

    This is a documented approximation: it is the reproducible stand-in
    for per-length significance, not an exact small-count test.
    """
    grades = tuple(sorted(levels))
    flags: list[RunLengthFlag] = []
    for direction in (UP, DOWN):
        for k, observed in sorted(census.lengths(direction).items()):
            if k <= n_values - 2:
                e = _expected_runs_of_length(n_values, k) / 2.0
            else:
                # monotone boundary: a single run of maximal length N-1
                e = 1.0 / math.factorial(n_values)
            if e > 0.0:
                z = (observed - e) / math.sqrt(e)
                p = two_sided_p(z)
            else:
                z = math.inf if observed else 0.0
                p = 0.0 if observed else 1.0
            level = None
            for g in grades:
                if p <= g:
                    level = g
                    break
            flags.append(RunLengthFlag(direction=direction, length=k,
                                       observed=int(observed), expected=e,
                                       z=z, p_two_sided=p, level=level))
    return flags
