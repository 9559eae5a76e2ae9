"""Price ingestion and log-return construction.

Input files are per-ticker CSVs with a ``date,adj_close`` header: ISO
dates, plain decimal prices, one row per trading day.  The file defines
the calendar; nothing is gap-filled or interpolated, and a blank or
non-positive price aborts ingestion rather than silently degrading the
series under test.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "IngestError",
    "MalformedRowError",
    "NonPositivePriceError",
    "DuplicateDateError",
    "TooShortError",
    "load_prices",
    "log_returns",
]

_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


class IngestError(ValueError):
    """Base class for price-file ingestion and validation failures."""


class MalformedRowError(IngestError):
    """Row could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NonPositivePriceError(IngestError):
    """Price <= 0; the logarithm of the series would be undefined."""

    def __init__(self, line: int, price: float):
        super().__init__(f"line {line}: non-positive price {price!r}")
        self.line = line


class DuplicateDateError(IngestError):
    """The same calendar date appears on more than one row."""


class TooShortError(IngestError):
    """Fewer than two price observations; no return is derivable."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PriceSeries:
    """Dated adjusted-close prices for one instrument.

    Dates are strictly increasing ``datetime64[D]`` values, prices are
    strictly positive float64, and there are at least two observations.
    """

    ticker: str
    dates: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]").copy()
        prices = np.asarray(self.prices, dtype=np.float64).copy()
        if dates.ndim != 1 or prices.ndim != 1 or len(dates) != len(prices):
            raise IngestError("dates and prices must be 1-d and equal length")
        if len(prices) < 2:
            raise TooShortError(f"{self.ticker}: need >= 2 prices, got {len(prices)}")
        if np.any(np.diff(dates).astype(np.int64) <= 0):
            raise DuplicateDateError(f"{self.ticker}: dates not strictly increasing")
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise NonPositivePriceError(0, float(prices[~(prices > 0.0)][0]))
        object.__setattr__(self, "dates", _freeze(dates))
        object.__setattr__(self, "prices", _freeze(prices))

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class ReturnSeries:
    """Daily log-returns; one observation fewer than the source prices.

    Each date is the date of the *later* price in its pair.
    """

    ticker: str
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]").copy()
        values = np.asarray(self.values, dtype=np.float64).copy()
        if dates.ndim != 1 or values.ndim != 1 or len(dates) != len(values):
            raise IngestError("dates and values must be 1-d and equal length")
        if len(values) == 0:
            raise TooShortError(f"{self.ticker}: empty return series")
        if len(dates) > 1 and np.any(np.diff(dates).astype(np.int64) <= 0):
            raise DuplicateDateError(f"{self.ticker}: dates not strictly increasing")
        object.__setattr__(self, "dates", _freeze(dates))
        object.__setattr__(self, "values", _freeze(values))

    def __len__(self) -> int:
        return len(self.values)


def _parse_row(line_no: int, row: str) -> tuple[np.datetime64, float]:
    parts = row.split(",")
    if len(parts) != 2:
        raise MalformedRowError(line_no, f"expected 2 fields, got {len(parts)}")
    date_s, price_s = (p.strip() for p in parts)
    if not _ISO_DATE.match(date_s):
        raise MalformedRowError(line_no, f"bad date {date_s!r} (want YYYY-MM-DD)")
    try:
        date = np.datetime64(date_s, "D")
    except ValueError:
        raise MalformedRowError(line_no, f"bad date {date_s!r}") from None
    if not price_s:
        raise MalformedRowError(line_no, "missing price")
    try:
        price = float(price_s)
    except ValueError:
        raise MalformedRowError(line_no, f"bad price {price_s!r}") from None
    if not np.isfinite(price):
        raise MalformedRowError(line_no, f"non-finite price {price_s!r}")
    if price <= 0.0:
        raise NonPositivePriceError(line_no, price)
    return date, price


def load_prices(source, ticker: str | None = None) -> PriceSeries:
    """Read one ticker's adjusted-close CSV into a validated PriceSeries.

    Parameters
    ----------
    source : path, str, or readable text/binary stream
        CSV with header ``date,adj_close``, UTF-8.
    ticker : str, optional
        Overrides the ticker, which otherwise comes from the filename stem
        (streams without a name fall back to ``"<stream>"``).

    Rows may arrive in any order and are sorted by date; a duplicate date,
    a missing or non-positive price, or any unparseable row aborts with an
    :class:`IngestError` naming the offending line.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if ticker is None:
            ticker = path.stem
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        if ticker is None:
            name = getattr(source, "name", None)
            ticker = Path(name).stem if isinstance(name, str) else "<stream>"

    lines = io.StringIO(text).read().splitlines()
    if not lines:
        raise TooShortError(f"{ticker}: empty file")
    header = [h.strip().lower() for h in lines[0].split(",")]
    if header != ["date", "adj_close"]:
        raise MalformedRowError(1, f"expected header 'date,adj_close', got {lines[0]!r}")

    dates: list[np.datetime64] = []
    prices: list[float] = []
    for i, row in enumerate(lines[1:], start=2):
        if not row.strip():
            continue
        d, p = _parse_row(i, row)
        dates.append(d)
        prices.append(p)
    if len(prices) < 2:
        raise TooShortError(f"{ticker}: need >= 2 rows, got {len(prices)}")

    date_arr = np.array(dates, dtype="datetime64[D]")
    price_arr = np.array(prices, dtype=np.float64)
    order = np.argsort(date_arr, kind="stable")
    date_arr, price_arr = date_arr[order], price_arr[order]
    if np.any(np.diff(date_arr).astype(np.int64) == 0):
        dup = date_arr[1:][np.diff(date_arr).astype(np.int64) == 0][0]
        raise DuplicateDateError(f"{ticker}: duplicate date {dup}")
    return PriceSeries(ticker=ticker, dates=date_arr, prices=price_arr)


def log_returns(p: PriceSeries) -> ReturnSeries:
    """First differences of natural-log prices.

    ``r_i = ln(price_{i+1}) - ln(price_i)``; the result is one observation
    shorter than the input and stamped with the later date of each pair.
    """
    values = np.diff(np.log(p.prices))
    return ReturnSeries(ticker=p.ticker, dates=p.dates[1:], values=values)


def write_returns_csv(r: ReturnSeries, fh) -> None:
    """Emit ``date,log_return`` rows with round-trip float precision."""
    fh.write("date,log_return\n")
    for d, v in zip(r.dates, r.values):
        fh.write(f"{d},{float(v)!r}\n")


def read_returns_csv(source, ticker: str | None = None) -> ReturnSeries:
    """Re-ingest a CSV produced by :func:`write_returns_csv`."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if ticker is None:
            ticker = path.stem
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    else:
        raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        ticker = ticker or "<stream>"
    lines = text.splitlines()
    if not lines or [h.strip().lower() for h in lines[0].split(",")] != ["date", "log_return"]:
        raise MalformedRowError(1, "expected header 'date,log_return'")
    dates, values = [], []
    for i, row in enumerate(lines[1:], start=2):
        if not row.strip():
            continue
        parts = row.split(",")
        if len(parts) != 2:
            raise MalformedRowError(i, f"expected 2 fields, got {len(parts)}")
        if not _ISO_DATE.match(parts[0].strip()):
            raise MalformedRowError(i, f"bad date {parts[0]!r}")
        try:
            dates.append(np.datetime64(parts[0].strip(), "D"))
            values.append(float(parts[1]))
        except ValueError:
            raise MalformedRowError(i, f"bad row {row!r}") from None
    return ReturnSeries(ticker=ticker, dates=np.array(dates, dtype="datetime64[D]"),
                        values=np.array(values, dtype=np.float64))
