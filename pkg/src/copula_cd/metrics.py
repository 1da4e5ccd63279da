"""Confusion counting and the FP/FN/OE/PCC/KC evaluation summary."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .raster import ChangeMap


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")
        if self.total == 0:
            raise ValueError("confusion counts must cover at least one pixel")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """Overall error, percentage correct, and kappa with their counts."""

    oe: int
    pcc: float
    kc: float
    counts: ConfusionCounts
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "tp": self.counts.tp,
            "tn": self.counts.tn,
            "fp": self.counts.fp,
            "fn": self.counts.fn,
            "oe": self.oe,
            "pcc": self.pcc,
            "kc": self.kc,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        counts = ConfusionCounts(tp=d["tp"], tn=d["tn"], fp=d["fp"], fn=d["fn"])
        return cls(
            oe=d["oe"], pcc=d["pcc"], kc=d["kc"],
            counts=counts, warnings=tuple(d.get("warnings", ())),
        )


def confusion(pred: ChangeMap, truth: ChangeMap) -> ConfusionCounts:
    """Per-pixel confusion with changed as the positive class."""
    if (pred.width, pred.height) != (truth.width, truth.height):
        raise ValueError(
            f"prediction {pred.width}x{pred.height} and truth "
            f"{truth.width}x{truth.height} dimensions differ"
        )
    p = pred.labels.astype(bool)
    t = truth.labels.astype(bool)
    return ConfusionCounts(
        tp=int(np.sum(p & t)),
        tn=int(np.sum(~p & ~t)),
        fp=int(np.sum(p & ~t)),
        fn=int(np.sum(~p & t)),
    )


def compute_metrics(c: ConfusionCounts) -> MetricsReport:
    """OE = FP + FN, PCC = (TP+TN)/total, and chance-corrected kappa
    KC = (PCC - PRE) / (1 - PRE) with
    PRE = ((TP+FN)(TP+FP) + (TN+FP)(TN+FN)) / total^2.

    A single-class degenerate case (PRE == 1) yields kc = 1 for a perfect
    prediction and 0 otherwise, with a warning attached.
    """
    total = c.total
    oe = c.fp + c.fn
    pcc = (c.tp + c.tn) / total
    pre = ((c.tp + c.fn) * (c.tp + c.fp) + (c.tn + c.fp) * (c.tn + c.fn)) / total**2
    warnings: tuple[str, ...] = ()
    if pre == 1.0:
        kc = 1.0 if pcc == 1.0 else 0.0
        warnings = ("degenerate kappa: single-class prediction and truth",)
    else:
        kc = (pcc - pre) / (1.0 - pre)
    return MetricsReport(oe=oe, pcc=pcc, kc=kc, counts=c, warnings=warnings)


def save_report(report: MetricsReport, path: str | Path) -> None:
    Path(path).write_text(report.to_json() + "\n")


def load_report(path: str | Path) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text()))
