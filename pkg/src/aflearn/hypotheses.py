"""Finite tabular classifiers and exact population metrics.

A hypothesis is a lookup table over the input ids of its ambient input set.
All metrics here are population quantities computed from atom masses:
misclassification risk, the two fairness deviation measures, the weighted
objective, and component-wise (risk, deviation) comparisons.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DegenerateGroupError, InputMismatchError, TooLargeError
from .model import DiscreteDistribution, Measure

VC_BRUTE_FORCE_LIMIT = 24


@dataclass(frozen=True)
class Hypothesis:
    """Binary classifier given by its full table of predictions."""

    table: tuple[int, ...]

    def __post_init__(self):
        if not self.table:
            raise ValueError("hypothesis table must be non-empty")
        if any(v not in (0, 1) for v in self.table):
            raise ValueError("hypothesis outputs must be 0 or 1")

    @property
    def input_set_size(self) -> int:
        return len(self.table)

    @cached_property
    def arr(self) -> np.ndarray:
        a = np.array(self.table, dtype=np.int64)
        a.setflags(write=False)
        return a

    def __call__(self, x: int) -> int:
        return self.table[x]

    def predictions(self, xs: np.ndarray) -> np.ndarray:
        return self.arr[xs]


@dataclass(frozen=True)
class HypothesisSpace:
    """Ordered, duplicate-free collection of hypotheses over one input set."""

    hypotheses: tuple[Hypothesis, ...]
    input_set_size: int

    def __post_init__(self):
        if not self.hypotheses:
            raise ValueError("hypothesis space must be non-empty")
        for h in self.hypotheses:
            if h.input_set_size != self.input_set_size:
                raise ValueError("all hypotheses must cover the declared input set")
        if len({h.table for h in self.hypotheses}) != len(self.hypotheses):
            raise ValueError("duplicate hypothesis tables")

    @classmethod
    def from_tables(cls, tables, input_set_size: int | None = None) -> "HypothesisSpace":
        hyps = tuple(Hypothesis(tuple(int(v) for v in t)) for t in tables)
        if input_set_size is None:
            input_set_size = hyps[0].input_set_size
        return cls(hyps, input_set_size)

    def __len__(self) -> int:
        return len(self.hypotheses)

    def __getitem__(self, i: int) -> Hypothesis:
        return self.hypotheses[i]

    def __iter__(self) -> Iterator[Hypothesis]:
        return iter(self.hypotheses)

    @cached_property
    def table_matrix(self) -> np.ndarray:
        m = np.stack([h.arr for h in self.hypotheses])
        m.setflags(write=False)
        return m

    def to_json_dict(self) -> dict:
        return {
            "input_set_size": self.input_set_size,
            "hypotheses": [list(h.table) for h in self.hypotheses],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "HypothesisSpace":
        return cls.from_tables(data["hypotheses"], data["input_set_size"])


class ObjectiveVector(NamedTuple):
    """The pair (risk, fairness deviation) of one hypothesis."""

    risk: float
    deviation: float


def _check_compatible(h: Hypothesis, dist: DiscreteDistribution) -> None:
    if h.input_set_size != dist.input_set_size:
        raise InputMismatchError(
            f"hypothesis covers {h.input_set_size} inputs, distribution declares {dist.input_set_size}"
        )


def risk(h: Hypothesis, dist: DiscreteDistribution) -> float:
    """Exact misclassification mass P(h(X) != Y)."""
    _check_compatible(h, dist)
    preds = h.arr[dist._x]
    return float(dist.probs[preds != dist._y].sum())


def _conditional_positive_rate(h: Hypothesis, dist: DiscreteDistribution, sel: np.ndarray, event: str) -> float:
    mass = float(dist.probs[sel].sum())
    if mass <= 0.0:
        raise DegenerateGroupError(f"conditioning event {event} has zero mass")
    preds = h.arr[dist._x]
    return float(dist.probs[sel & (preds == 1)].sum()) / mass


def deviation(h: Hypothesis, dist: DiscreteDistribution, measure: Measure) -> float:
    """Exact fairness deviation.

    ``parity``: |P(h=1 | A=0) - P(h=1 | A=1)|.
    ``opportunity``: |P(h=1 | A=0, Y=1) - P(h=1 | A=1, Y=1)|.
    """
    _check_compatible(h, dist)
    rates = []
    for a in (0, 1):
        if measure == "parity":
            sel = dist._a == a
            event = f"A={a}"
        elif measure == "opportunity":
            sel = (dist._a == a) & (dist._y == 1)
            event = f"A={a}, Y=1"
        else:
            raise ValueError(f"unknown measure {measure!r}")
        rates.append(_conditional_positive_rate(h, dist, sel, event))
    return abs(rates[0] - rates[1])


def weighted_objective(h: Hypothesis, dist: DiscreteDistribution, lam: float, measure: Measure) -> float:
    """risk + lam * deviation, the scalarized accuracy-fairness objective."""
    if lam < 0:
        raise ValueError("trade-off weight must be non-negative")
    return risk(h, dist) + lam * deviation(h, dist, measure)


def objective_vector(h: Hypothesis, dist: DiscreteDistribution, measure: Measure) -> ObjectiveVector:
    return ObjectiveVector(risk(h, dist), deviation(h, dist, measure))


def dominates(v1, v2) -> bool:
    """Component-wise partial order: v1 is at least as good in both metrics."""
    return v1[0] <= v2[0] and v1[1] <= v2[1]


def loss_vector(h: Hypothesis, h_star: Hypothesis, dist: DiscreteDistribution, measure: Measure) -> ObjectiveVector:
    """Component-wise excess of ``h`` over a reference optimum ``h_star``.

    Components can be negative if the caller's ``h_star`` is not actually
    dominant; verification code must pass a verified dominant reference.
    """
    v = objective_vector(h, dist, measure)
    v_star = objective_vector(h_star, dist, measure)
    return ObjectiveVector(v.risk - v_star.risk, v.deviation - v_star.deviation)


def _is_shattered(space: HypothesisSpace, subset: tuple[int, ...]) -> bool:
    idx = np.array(subset, dtype=np.int64)
    patterns = {tuple(h.arr[idx]) for h in space}
    return len(patterns) == 2 ** len(subset)


def vc_dimension(space: HypothesisSpace) -> int:
    """Exact VC dimension by exhaustive shattering over input subsets.

    Guarded by ``input_set_size <= 24``; raises TooLargeError above, in which
    case callers may fall back on the upper bound ceil(log2 |H|), which keeps
    every threshold formula valid since they are increasing in d.
    """
    k = space.input_set_size
    if k > VC_BRUTE_FORCE_LIMIT:
        raise TooLargeError(f"input set of size {k} exceeds the brute-force guard {VC_BRUTE_FORCE_LIMIT}")
    # A shattered set of size d needs 2^d distinct labelings, so d <= log2 |H|.
    max_d = min(k, len(space).bit_length() - 1)
    d = 0
    for size in range(1, max_d + 1):
        if any(_is_shattered(space, s) for s in itertools.combinations(range(k), size)):
            d = size
        else:
            break
    return d


def vc_dimension_upper_bound(space: HypothesisSpace) -> int:
    """ceil(log2 |H|), a valid stand-in for d in every threshold formula."""
    m = len(space)
    return (m - 1).bit_length()


def vc_dimension_or_bound(space: HypothesisSpace) -> int:
    """Exact VC dimension when brute force is feasible, else ceil(log2 |H|)."""
    try:
        return vc_dimension(space)
    except TooLargeError:
        return vc_dimension_upper_bound(space)
