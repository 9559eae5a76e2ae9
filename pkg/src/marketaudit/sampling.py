"""Survey design: sample sizing, stratified allocation, and proportion CIs.

The sampling frame is a population of stocks labelled by exchange and by
a merged sector category.  Sizing uses the Yamane shortcut (the Cochran
two-step at t = 2, p = 0.5); allocation is proportional within each
layer, made exact by largest-remainder apportionment; inference on the
audited proportion uses the normal approximation with a finite-population
correction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .gaussian import normal_quantile

EXCHANGES = ("NYSE", "NASDAQ")

SECTOR_LABELS = (
    "Consumer Discretionary and Staples",
    "Energy, Industrials, Materials and Utilities",
    "Financials and Real Estate",
    "Health Care",
    "Information Technology and Telecommunication Services",
)

# Short stratum tags in reports: exchange prefix + 1-based sector number.
SECTOR_NUMBER = {label: i + 1 for i, label in enumerate(SECTOR_LABELS)}


class FrameError(ValueError):
    """Sampling-frame file is malformed or carries unknown labels."""


class InfeasibleAllocationError(ValueError):
    """Requested counts cannot be satisfied by the stratum populations."""


@dataclass(frozen=True)
class FrameUnit:
    ticker: str
    exchange: str
    sector: str

    @property
    def stratum(self) -> str:
        prefix = "NASD" if self.exchange == "NASDAQ" else "NYSE"
        return f"{prefix}{SECTOR_NUMBER[self.sector]}"


@dataclass(frozen=True)
class Frame:
    """Population of stocks with exchange and merged-sector labels."""

    units: tuple

    @property
    def size(self) -> int:
        return len(self.units)

    def exchange_counts(self) -> dict:
        counts = {ex: 0 for ex in EXCHANGES}
        for u in self.units:
            counts[u.exchange] += 1
        return counts

    def sector_counts(self, exchange: str) -> dict:
        counts = {s: 0 for s in SECTOR_LABELS}
        for u in self.units:
            if u.exchange == exchange:
                counts[u.sector] += 1
        return counts

    def tickers_in(self, exchange: str, sector: str) -> list:
        return [u.ticker for u in self.units
                if u.exchange == exchange and u.sector == sector]


def load_frame(source) -> Frame:
    """Read a ``ticker,exchange,sector`` CSV into a validated Frame."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return load_frame(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise FrameError("empty frame file") from None
    if [h.strip().lower() for h in header] != ["ticker", "exchange", "sector"]:
        raise FrameError(f"expected header 'ticker,exchange,sector', got {header}")
    units = []
    seen = set()
    for i, row in enumerate(reader, start=2):
        if not row or not any(cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise FrameError(f"line {i}: expected 3 fields, got {len(row)}")
        ticker, exchange, sector = (cell.strip() for cell in row)
        if not ticker:
            raise FrameError(f"line {i}: empty ticker")
        if ticker in seen:
            raise FrameError(f"line {i}: duplicate ticker {ticker!r}")
        if exchange not in EXCHANGES:
            raise FrameError(f"line {i}: unknown exchange {exchange!r}")
        if sector not in SECTOR_LABELS:
            raise FrameError(f"line {i}: unknown sector {sector!r}")
        seen.add(ticker)
        units.append(FrameUnit(ticker=ticker, exchange=exchange, sector=sector))
    if not units:
        raise FrameError("frame has no units")
    return Frame(units=tuple(units))


def cochran_n0(t: float, p: float, d: float) -> float:
    """First-approximation sample size t^2 p (1-p) / d^2."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"anticipated proportion must be in (0,1), got {p}")
    if d <= 0:
        raise ValueError(f"margin must be positive, got {d}")
    return t * t * p * (1.0 - p) / (d * d)


def fpc_adjust(n0: float, population: int) -> float:
    """Finite-population adjustment n0 / (1 + n0/N)."""
    if n0 <= 0:
        raise ValueError(f"n0 must be positive, got {n0}")
    if population < 1:
        raise ValueError(f"population must be >= 1, got {population}")
    return n0 / (1.0 + n0 / population)


def _round_half_up(x: float) -> int:
    # snap values a hair under a .5 tie up, so the two algebraically
    # identical sizing routes cannot round apart on binary rounding noise
    shifted = x + 0.5
    base = math.floor(shifted)
    if shifted - base >= 1.0 - 1e-9 * max(1.0, abs(shifted)):
        base += 1
    return int(base)


def yamane_n(population: int, d: float) -> int:
    """Sample size N / (1 + N d^2), rounded to nearest (ties up), capped at N."""
    if population < 1:
        raise ValueError(f"population must be >= 1, got {population}")
    if d <= 0:
        raise ValueError(f"margin must be positive, got {d}")
    return min(_round_half_up(population / (1.0 + population * d * d)), population)


def allocate_proportional(populations: dict, n: int) -> dict:
    """Split n across strata in proportion to their populations.

    Largest-remainder apportionment: every stratum gets the floor of its
    exact quota, and the leftover units go to the largest fractional
    remainders (ties broken toward the larger stratum, then input order).
    The result sums to n exactly and never exceeds any stratum population.
    """
    labels = list(populations)
    sizes = [int(populations[lb]) for lb in labels]
    if any(s < 0 for s in sizes):
        raise ValueError("stratum populations must be nonnegative")
    total = sum(sizes)
    if n < 0 or n > total:
        raise InfeasibleAllocationError(f"cannot draw {n} from population {total}")
    if total == 0:
        return {lb: 0 for lb in labels}
    quotas = [n * s / total for s in sizes]
    alloc = {lb: math.floor(q) for lb, q in zip(labels, quotas)}
    leftover = n - sum(alloc.values())
    order = sorted(range(len(labels)),
                   key=lambda i: (-(quotas[i] - math.floor(quotas[i])), -sizes[i], i))
    for i in order[:leftover]:
        alloc[labels[i]] += 1
    return alloc


@dataclass(frozen=True)
class SamplePlan:
    """A fully resolved two-layer stratified sampling design."""

    population: int
    n: int
    d: float
    confidence: float
    seed: int
    exchange_allocation: dict
    stratum_allocation: dict  # (exchange, sector) -> count
    drawn: dict               # (exchange, sector) -> tuple of tickers

    def all_tickers(self) -> list:
        out = []
        for key in sorted(self.drawn):
            out.extend(self.drawn[key])
        return out


def draw_sample(frame: Frame, allocation: dict, seed: int, *,
                d: float = 0.1, confidence: float = 0.95) -> SamplePlan:
    """Draw tickers uniformly without replacement within each stratum.

    `allocation` maps (exchange, sector) to a count.  Strata are visited
    in a fixed sorted order, so the draw depends only on the seed.
    """
    rng = np.random.default_rng(seed)
    drawn = {}
    for key in sorted(allocation):
        exchange, sector = key
        want = int(allocation[key])
        pool = sorted(frame.tickers_in(exchange, sector))
        if want > len(pool):
            raise InfeasibleAllocationError(
                f"stratum {key}: want {want}, population {len(pool)}")
        if want == 0:
            drawn[key] = ()
            continue
        picks = rng.choice(len(pool), size=want, replace=False)
        drawn[key] = tuple(pool[i] for i in sorted(picks.tolist()))
    exchange_alloc = {}
    for (exchange, _), count in allocation.items():
        exchange_alloc[exchange] = exchange_alloc.get(exchange, 0) + int(count)
    n = sum(exchange_alloc.values())
    return SamplePlan(population=frame.size, n=n, d=d, confidence=confidence,
                      seed=seed, exchange_allocation=exchange_alloc,
                      stratum_allocation={k: int(v) for k, v in allocation.items()},
                      drawn=drawn)


def plan_sample(frame: Frame, d: float = 0.1, confidence: float = 0.95,
                seed: int = 0) -> SamplePlan:
    """Size and draw a two-layer stratified sample from the frame.

    Layer 1 splits the Yamane sample size across exchanges; layer 2
    splits each exchange's share across its merged sectors; both layers
    use proportional allocation.
    """
    n = yamane_n(frame.size, d)
    by_exchange = allocate_proportional(frame.exchange_counts(), n)
    allocation = {}
    for exchange in EXCHANGES:
        sector_pops = frame.sector_counts(exchange)
        per_sector = allocate_proportional(sector_pops, by_exchange.get(exchange, 0))
        for sector, count in per_sector.items():
            allocation[(exchange, sector)] = count
    return draw_sample(frame, allocation, seed, d=d, confidence=confidence)


@dataclass(frozen=True)
class ProportionInterval:
    """Normal-approximation CI for a finite-population proportion."""

    successes: int
    sample_size: int
    population: int
    confidence: float
    estimate: float
    lower: float
    upper: float
    half_width: float = field(repr=False, default=0.0)


def proportion_ci(successes: int, sample_size: int, population: int,
                  confidence: float = 0.95) -> ProportionInterval:
    """Two-sided CI for a proportion with finite-population correction.

    half-width = z * sqrt(p(1-p)/n) * sqrt((N-n)/(N-1)); bounds are
    clamped to [0, 1].  Sampling the whole population gives a zero-width
    interval at the point estimate.
    """
    k, n, big_n = int(successes), int(sample_size), int(population)
    if not 0 <= k <= n <= big_n:
        raise ValueError(f"need 0 <= k <= n <= N, got k={k}, n={n}, N={big_n}")
    if n < 1:
        raise ValueError("sample size must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0,1), got {confidence}")
    p_hat = k / n
    z = normal_quantile((1.0 + confidence) / 2.0)
    fpc = 0.0 if n == big_n else math.sqrt((big_n - n) / (big_n - 1.0))
    half = z * math.sqrt(p_hat * (1.0 - p_hat) / n) * fpc
    return ProportionInterval(successes=k, sample_size=n, population=big_n,
                              confidence=confidence, estimate=p_hat,
                              lower=max(0.0, p_hat - half),
                              upper=min(1.0, p_hat + half),
                              half_width=half)
