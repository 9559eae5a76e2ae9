"""Bundled fixtures: the sampling frame and the published verdict table."""

from __future__ import annotations

import csv
from importlib import resources

from ..pipeline import StockVerdict, global_verdict
from ..sampling import Frame, load_frame

FRAME_FILE = "sp500_frame_2008_2018.csv"
VERDICTS_FILE = "sp500_verdicts_2008_2018.csv"


def _open(name: str):
    return (resources.files(__package__) / name).open("r", encoding="utf-8")


def frame_fixture() -> Frame:
    """305-stock frame matching the published exchange/sector counts."""
    with _open(FRAME_FILE) as fh:
        return load_frame(fh)


def verdict_fixture() -> list:
    """The 75 published per-stock verdicts (True = efficient)."""
    with _open(VERDICTS_FILE) as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        flags = {k: row[k] == "Yes" for k in ("runs_test", "vr_individual", "vr_joint")}
        out.append(StockVerdict(
            ticker=row["stock"], stratum=row["stratum"],
            runs_efficient=flags["runs_test"],
            vr_individual_efficient=flags["vr_individual"],
            vr_joint_efficient=flags["vr_joint"],
            global_efficient=global_verdict(*flags.values()),
        ))
    return out


def verdict_fixture_globals() -> list:
    """The published Global column, as booleans, in file order."""
    with _open(VERDICTS_FILE) as fh:
        return [row["global_result"] == "Yes" for row in csv.DictReader(fh)]
