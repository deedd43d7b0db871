"""Empirical quantities computed from (possibly corrupted) point sequences.

Every empirical conditional in this module uses the 0/0 = 0 convention: a
conditional rate over an empty group is defined as zero, never an error.
The ``*_all`` variants score a whole hypothesis space at once via the stacked
table matrix; they are exact equivalents of the per-hypothesis functions.

``clean_subset_report`` is a mark-aware diagnostic: it needs the hidden mark
set of a corrupted sample and must only be called by experiment code, never
by a learner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .hypotheses import Hypothesis, HypothesisSpace
from .model import DataPoint, Measure, Sample

if TYPE_CHECKING:  # avoids a runtime dependency on the corruption module
    from .corruption import CorruptedSample


def _point_arrays(points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(points, Sample):
        return points.x, points.a, points.y
    s = Sample.from_points(points)
    return s.x, s.a, s.y


def _group_mask(a: np.ndarray, y: np.ndarray, group: int, measure: Measure) -> np.ndarray:
    if measure == "parity":
        return a == group
    if measure == "opportunity":
        return (a == group) & (y == 1)
    raise ValueError(f"unknown measure {measure!r}")


def _rate(preds: np.ndarray, sel: np.ndarray, value: int) -> float:
    den = int(sel.sum())
    if den == 0:
        return 0.0
    num = int((preds[sel] == value).sum())
    return num / den


def emp_risk(points, h: Hypothesis) -> float:
    """Fraction of points misclassified by ``h``."""
    x, _, y = _point_arrays(points)
    if x.shape[0] == 0:
        raise ValueError("empty point sequence")
    return int((h.arr[x] != y).sum()) / x.shape[0]


def emp_deviation(points, h: Hypothesis, measure: Measure) -> float:
    """Empirical fairness deviation, group rates taken with 0/0 = 0."""
    x, a, y = _point_arrays(points)
    if x.shape[0] == 0:
        raise ValueError("empty point sequence")
    preds = h.arr[x]
    r0 = _rate(preds, _group_mask(a, y, 0, measure), 1)
    r1 = _rate(preds, _group_mask(a, y, 1, measure), 1)
    return abs(r0 - r1)


def emp_gamma_bar(points, h: Hypothesis, group: int) -> float:
    """Empirical P(h=0 | A=group, Y=1) with 0/0 = 0."""
    x, a, y = _point_arrays(points)
    if x.shape[0] == 0:
        raise ValueError("empty point sequence")
    preds = h.arr[x]
    return _rate(preds, (a == group) & (y == 1), 0)


def _rate_all(preds: np.ndarray, sel: np.ndarray, value: int) -> np.ndarray:
    den = int(sel.sum())
    if den == 0:
        return np.zeros(preds.shape[0])
    return (preds[:, sel] == value).sum(axis=1) / den


def emp_risk_all(points, space: HypothesisSpace) -> np.ndarray:
    x, _, y = _point_arrays(points)
    preds = space.table_matrix[:, x]
    return (preds != y).mean(axis=1)


def emp_deviation_all(points, space: HypothesisSpace, measure: Measure) -> np.ndarray:
    x, a, y = _point_arrays(points)
    preds = space.table_matrix[:, x]
    r0 = _rate_all(preds, _group_mask(a, y, 0, measure), 1)
    r1 = _rate_all(preds, _group_mask(a, y, 1, measure), 1)
    return np.abs(r0 - r1)


def emp_gamma_bar_max_all(points, space: HypothesisSpace) -> np.ndarray:
    """Per hypothesis, max over both groups of the empirical P(h=0 | A=a, Y=1)."""
    x, a, y = _point_arrays(points)
    preds = space.table_matrix[:, x]
    g0 = _rate_all(preds, (a == 0) & (y == 1), 0)
    g1 = _rate_all(preds, (a == 1) & (y == 1), 0)
    return np.maximum(g0, g1)


@dataclass(frozen=True)
class CleanSubsetReport:
    """Corrupted vs clean-subset conditional estimates for one hypothesis.

    Indices 0 and 1 refer to the protected group.  For parity the conditional
    is P(h=1 | A=a); for opportunity it is P(h=1 | A=a, Y=1).  ``clean_counts``
    and ``marked_counts`` are the group sizes among unmarked resp. marked
    points (of the conditioning event).
    """

    measure: Measure
    gamma_corrupted: tuple[float, float]
    gamma_clean: tuple[float, float]
    gaps: tuple[float, float]
    clean_counts: tuple[int, int]
    marked_counts: tuple[int, int]

    @property
    def gap_sum(self) -> float:
        return self.gaps[0] + self.gaps[1]


def clean_subset_report(sample: "CorruptedSample", h: Hypothesis, measure: Measure) -> CleanSubsetReport:
    """Diagnostic comparison of corrupted and clean-subset estimates.

    Uses the hidden mark set of ``sample``; experiment code only.  The clean
    estimate conditions on unmarked points (whose values coincide with the
    clean originals by the protocol contract).
    """
    pts = sample.points
    marks, _ = sample.diagnostics()
    unmarked = ~marks.bool_mask
    preds = h.arr[pts.x]
    gp, gc, gaps, cs, bs = [], [], [], [], []
    for a in (0, 1):
        sel = _group_mask(pts.a, pts.y, a, measure)
        rate_p = _rate(preds, sel, 1)
        rate_c = _rate(preds, sel & unmarked, 1)
        gp.append(rate_p)
        gc.append(rate_c)
        gaps.append(abs(rate_p - rate_c))
        cs.append(int((sel & unmarked).sum()))
        bs.append(int((sel & ~unmarked).sum()))
    return CleanSubsetReport(
        measure=measure,
        gamma_corrupted=(gp[0], gp[1]),
        gamma_clean=(gc[0], gc[1]),
        gaps=(gaps[0], gaps[1]),
        clean_counts=(cs[0], cs[1]),
        marked_counts=(bs[0], bs[1]),
    )


def adversary_gap_sum_all(sample: "CorruptedSample", space: HypothesisSpace, measure: Measure) -> np.ndarray:
    """Per hypothesis, sum over groups of |corrupted rate - clean-subset rate|.

    Vectorized equivalent of ``clean_subset_report(...).gap_sum`` over a
    space; diagnostic (mark-aware), used by the concentration harness.
    """
    pts = sample.points
    marks, _ = sample.diagnostics()
    unmarked = ~marks.bool_mask
    preds = space.table_matrix[:, pts.x]
    total = np.zeros(len(space))
    for a in (0, 1):
        sel = _group_mask(pts.a, pts.y, a, measure)
        rate_p = _rate_all(preds, sel, 1)
        rate_c = _rate_all(preds, sel & unmarked, 1)
        total += np.abs(rate_p - rate_c)
    return total
