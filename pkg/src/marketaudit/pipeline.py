"""Per-stock efficiency verdicts, sample-wide aggregation, and report tables.

A stock is ruled inefficient only when the runs test, the individual
variance-ratio battery, and the joint variance-ratio test all reject the
random-walk null; per-test and combined inefficiency counts then feed
finite-population confidence intervals for the whole index.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .runs import (RunLengthCensus, RunsTestResult, UP, DOWN,
                   run_length_significance, runs_test_mean, runs_test_updown)
from .sampling import ProportionInterval, proportion_ci
from .varianceratio import (DEFAULT_PERIODS, JointVrResult, LogPricePath,
                            chow_denning)

TESTS = ("runs", "vr_individual", "vr_joint", "global")


@dataclass(frozen=True)
class VerdictRules:
    """Thresholds of the runs-test ruling, kept configurable.

    A stock fails the runs ruling when the above/below-mean p-value is at
    most `strong_level`; or at most `moderate_level` with at least one
    up/down run length flagged at `flag_level` or better; or at most
    `weak_level` with at least `exception_min_flags` flagged lengths of
    which `exception_min_strong` reach `exception_strong_level`.
    """

    strong_level: float = 0.01
    moderate_level: float = 0.05
    weak_level: float = 0.10
    flag_level: float = 0.10
    exception_min_flags: int = 4
    exception_min_strong: int = 3
    exception_strong_level: float = 0.05
    vr_level: float = 0.05


DEFAULT_RULES = VerdictRules()


@dataclass(frozen=True)
class StockVerdict:
    """Efficient/inefficient rulings for one stock (True = efficient)."""

    ticker: str
    stratum: str
    runs_efficient: bool
    vr_individual_efficient: bool
    vr_joint_efficient: bool
    global_efficient: bool

    def __post_init__(self):
        expected = global_verdict(self.runs_efficient,
                                  self.vr_individual_efficient,
                                  self.vr_joint_efficient)
        if self.global_efficient != expected:
            raise ValueError(
                f"{self.ticker}: global flag {self.global_efficient} inconsistent "
                f"with component flags")

    @property
    def exchange(self) -> str:
        return "NASDAQ" if self.stratum.startswith("NASD") else "NYSE"


def runs_verdict(mean_test: RunsTestResult, length_flags,
                 rules: VerdictRules = DEFAULT_RULES) -> bool:
    """Efficiency ruling from the two runs tests; True means efficient."""
    p = mean_test.p_two_sided
    flagged = [f for f in length_flags
               if f.level is not None and f.level <= rules.flag_level]
    strong = [f for f in flagged if f.p_two_sided <= rules.exception_strong_level]
    inefficient = (
        p <= rules.strong_level
        or (p <= rules.moderate_level and len(flagged) >= 1)
        or (p <= rules.weak_level
            and len(flagged) >= rules.exception_min_flags
            and len(strong) >= rules.exception_min_strong)
    )
    return not inefficient


def vr_individual_verdict(results, level: float = 0.05) -> bool:
    """Efficient unless any per-period variance-ratio test rejects."""
    results = tuple(results)
    if not results:
        raise ValueError("need at least one variance-ratio result")
    return not any(r.p_two_sided <= level for r in results)


def vr_joint_verdict(joint: JointVrResult, level: float = 0.05) -> bool:
    """Efficient unless the joint bound rejects."""
    return not joint.p_bound <= level


def global_verdict(runs_efficient: bool, vr_individual_efficient: bool,
                   vr_joint_efficient: bool) -> bool:
    """Inefficient only when all three component tests say inefficient."""
    return runs_efficient or vr_individual_efficient or vr_joint_efficient


@dataclass(frozen=True)
class StockAudit:
    """Everything computed for one stock: statistics, census, verdict."""

    ticker: str
    stratum: str
    n_returns: int
    runs_mean: RunsTestResult
    runs_updown: RunsTestResult
    updown_census: RunLengthCensus
    length_flags: tuple
    vr: JointVrResult
    verdict: StockVerdict


def audit_stock(returns, ticker: str, stratum: str,
                periods=DEFAULT_PERIODS,
                rules: VerdictRules = DEFAULT_RULES) -> StockAudit:
    """Run the full test battery on one return series and rule on it."""
    mean_test = runs_test_mean(returns)
    updown_test, census = runs_test_updown(returns)
    flags = tuple(run_length_significance(census, len(returns)))
    joint = chow_denning(LogPricePath.from_returns(returns), periods)
    runs_eff = runs_verdict(mean_test, flags, rules)
    ind_eff = vr_individual_verdict(joint.individual, rules.vr_level)
    joint_eff = vr_joint_verdict(joint, rules.vr_level)
    verdict = StockVerdict(ticker=ticker, stratum=stratum,
                           runs_efficient=runs_eff,
                           vr_individual_efficient=ind_eff,
                           vr_joint_efficient=joint_eff,
                           global_efficient=global_verdict(runs_eff, ind_eff, joint_eff))
    return StockAudit(ticker=ticker, stratum=stratum,
                      n_returns=len(returns),
                      runs_mean=mean_test, runs_updown=updown_test,
                      updown_census=census, length_flags=flags,
                      vr=joint, verdict=verdict)


@dataclass(frozen=True)
class AuditReport:
    """Sample-wide synthesis: counts, stratum breakdowns, intervals."""

    verdicts: tuple
    population: int
    confidence: float
    counts: dict            # test name -> inefficiency count
    exchange_rates: dict    # exchange -> (inefficient, total)
    stratum_rates: dict     # stratum -> (inefficient, total)
    intervals: dict         # test name -> ProportionInterval


def build_report(verdicts, population: int, confidence: float = 0.95) -> AuditReport:
    """Aggregate per-stock verdicts into counts, rates, and intervals."""
    verdicts = tuple(sorted(verdicts, key=lambda v: (v.stratum, v.ticker)))
    if not verdicts:
        raise ValueError("need at least one verdict")
    flags_of = {
        "runs": lambda v: v.runs_efficient,
        "vr_individual": lambda v: v.vr_individual_efficient,
        "vr_joint": lambda v: v.vr_joint_efficient,
        "global": lambda v: v.global_efficient,
    }
    counts = {t: sum(1 for v in verdicts if not flags_of[t](v)) for t in TESTS}

    exchange_rates: dict = {}
    stratum_rates: dict = {}
    for v in verdicts:
        bad = 0 if v.global_efficient else 1
        ex_bad, ex_tot = exchange_rates.get(v.exchange, (0, 0))
        exchange_rates[v.exchange] = (ex_bad + bad, ex_tot + 1)
        st_bad, st_tot = stratum_rates.get(v.stratum, (0, 0))
        stratum_rates[v.stratum] = (st_bad + bad, st_tot + 1)

    n = len(verdicts)
    intervals = {t: proportion_ci(counts[t], n, population, confidence)
                 for t in TESTS}
    return AuditReport(verdicts=verdicts, population=population,
                       confidence=confidence, counts=counts,
                       exchange_rates=exchange_rates,
                       stratum_rates=stratum_rates, intervals=intervals)


# --- rendering ------------------------------------------------------------

STAR_NOTE = ("* stands for significance at 10%, ** stands for significance "
             "at 5%, *** stands for significance at 1%.")


def stars(p: float) -> str:
    if p <= 0.01:
        return "***"
    if p <= 0.05:
        return "**"
    if p <= 0.10:
        return "*"
    return ""


def _yn(flag: bool) -> str:
    return "Yes" if flag else "No"


def _length_span(lengths) -> str:
    ks = sorted(lengths)
    if not ks:
        return "-"
    if ks == list(range(ks[0], ks[-1] + 1)):
        return f"{ks[0]}-{ks[-1]}" if len(ks) > 1 else str(ks[0])
    return "-".join(str(k) for k in ks)


def _flag_span(flags, direction) -> str:
    cells = [f"{f.length}{stars(f.p_two_sided)}"
             for f in flags if f.direction == direction and f.level is not None]
    return "-".join(cells) if cells else "ns"


def runs_table_rows(audits) -> list:
    """Table of both runs tests per stock, census spans and flags included."""
    rows = [["stratum", "stock", "p_mean", "up_lengths", "up_significant",
             "down_lengths", "down_significant"]]
    for a in audits:
        rows.append([
            a.stratum, a.ticker,
            f"{a.runs_mean.p_two_sided:.4f}{stars(a.runs_mean.p_two_sided)}",
            _length_span(a.updown_census.lengths(UP)),
            _flag_span(a.length_flags, UP),
            _length_span(a.updown_census.lengths(DOWN)),
            _flag_span(a.length_flags, DOWN),
        ])
    return rows


def vr_table_rows(audits, periods=DEFAULT_PERIODS) -> list:
    """Per-period variance ratios with z* and the joint max-|z| summary."""
    rows = [["stratum", "stock"] + [f"period_{q}" for q in periods] + ["joint"]]
    for a in audits:
        by_q = {r.q: r for r in a.vr.individual}
        cells = [f"{by_q[q].vr:.3f} ({by_q[q].z_star:.2f}){stars(by_q[q].p_two_sided)}"
                 for q in periods]
        joint = f"{a.vr.max_abs_z:.2f} ({a.vr.argmax_q}){stars(a.vr.p_bound)}"
        rows.append([a.stratum, a.ticker] + cells + [joint])
    return rows


def verdict_table_rows(report: AuditReport) -> list:
    """Yes/No verdict table with the inefficiency totals row."""
    rows = [["stratum", "stock", "runs_test", "vr_individual", "vr_joint",
             "global_result"]]
    for v in report.verdicts:
        rows.append([v.stratum, v.ticker, _yn(v.runs_efficient),
                     _yn(v.vr_individual_efficient), _yn(v.vr_joint_efficient),
                     _yn(v.global_efficient)])
    rows.append(["", "Tot. Inefficient Stocks",
                 str(report.counts["runs"]), str(report.counts["vr_individual"]),
                 str(report.counts["vr_joint"]), str(report.counts["global"])])
    return rows


def interval_table_rows(report: AuditReport) -> list:
    """Confidence intervals for the inefficient proportion, per test."""
    label = {
        "runs": "Runs tests",
        "vr_individual": "Individual Variance Ratio tests",
        "vr_joint": "Joint Variance Ratio tests",
        "global": "All the tests",
    }
    rows = [["tests", "inefficient", "sample_size", "population",
             "estimate", "lower", "upper"]]
    for t in TESTS:
        ci = report.intervals[t]
        rows.append([label[t], str(ci.successes), str(ci.sample_size),
                     str(ci.population), f"{ci.estimate:.4f}",
                     f"{ci.lower:.4f}", f"{ci.upper:.4f}"])
    return rows


def render_csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def render_markdown(rows, note: str | None = None) -> str:
    widths = [max(len(str(r[i])) for r in rows) for i in range(len(rows[0]))]
    def fmt(row):
        return "| " + " | ".join(str(c).ljust(w) for c, w in zip(row, widths)) + " |"
    lines = [fmt(rows[0]),
             "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines += [fmt(r) for r in rows[1:]]
    if note:
        lines += ["", note]
    return "\n".join(lines) + "\n"
