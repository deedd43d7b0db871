"""Closed-form thresholds, irreducible-error terms and sample-size floors.

All logarithms are natural.  ``group_prob`` always denotes the relevant
minority mass: P(A=0) for demographic parity, P(Y=1, A=0) for equal
opportunity (with the convention that group 0 is the smaller one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .errors import ParameterError, SampleTooSmallError

E = math.e


@dataclass(frozen=True)
class BoundInputs:
    """Parameter bundle consumed by the threshold formulas.

    ``eta`` and ``h_size`` matter only for the fast-rate floor; ``lam`` only
    for the weighted-objective slack.
    """

    alpha: float
    group_prob: float
    lam: float = 0.0
    d: int = 1
    n: int = 0
    delta: float = 0.1
    eta: float = 0.5
    h_size: int = 1

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise ParameterError(f"corruption rate must lie in [0, 0.5), got {self.alpha}")
        if not 0.0 < self.group_prob <= 0.5:
            raise ParameterError(f"group probability must lie in (0, 0.5], got {self.group_prob}")
        if self.lam < 0:
            raise ParameterError("trade-off weight must be non-negative")
        if self.d < 0:
            raise ParameterError("d must be non-negative")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0.0 < self.eta < 1.0:
            raise ParameterError(f"eta must lie in (0, 1), got {self.eta}")
        if self.h_size < 1:
            raise ParameterError("h_size must be at least 1")

    def with_(self, **kwargs) -> "BoundInputs":
        return replace(self, **kwargs)


def delta_irreducible(alpha: float, group_prob: float) -> float:
    """Irreducible gap 2*alpha / (P/3 + alpha) of the corrupted group-rate estimates.

    This is the sample-size-independent part of every fairness-estimation
    guarantee; it saturates once alpha is comparable to the group mass.
    """
    if not 0.0 <= alpha < 0.5:
        raise ParameterError(f"corruption rate must lie in [0, 0.5), got {alpha}")
    if group_prob <= 0.0:
        raise ParameterError("group probability must be positive")
    if alpha == 0.0:
        return 0.0
    return 2.0 * alpha / (group_prob / 3.0 + alpha)


def min_n_weighted_raw(inputs: BoundInputs) -> float:
    """Real-valued sample floor for the weighted-objective and component-wise guarantees.

    max of 8*ln(16/delta)/((1-alpha)*P), 12*ln(12/delta)/alpha and d/2.  The
    middle term controls the corruption count; with alpha = 0 that event is
    vacuous and the term is dropped rather than infinite.
    """
    terms = [
        8.0 * math.log(16.0 / inputs.delta) / ((1.0 - inputs.alpha) * inputs.group_prob),
        inputs.d / 2.0,
    ]
    if inputs.alpha > 0.0:
        terms.append(12.0 * math.log(12.0 / inputs.delta) / inputs.alpha)
    return max(terms)


def min_n_weighted(inputs: BoundInputs) -> int:
    return max(1, math.ceil(min_n_weighted_raw(inputs)))


def min_n_fast_raw(inputs: BoundInputs) -> float:
    """Real-valued sample floor for the realizable fast-rate guarantee.

    Linear rather than quadratic in 1/alpha: the binding term is
    2*ln(16*|H|/delta) / (3*eta^2*(1-alpha)*P10*alpha).  Corruption-count
    terms are dropped at alpha = 0 for the same reason as in
    :func:`min_n_weighted_raw`.
    """
    h, d_ = inputs.h_size, inputs.delta
    terms = [8.0 * math.log(16.0 * h / d_) / ((1.0 - inputs.alpha) * inputs.group_prob)]
    if inputs.alpha > 0.0:
        terms.append(12.0 * math.log(12.0 / d_) / inputs.alpha)
        terms.append(2.0 * math.log(8.0 * h / d_) / (3.0 * inputs.eta**2 * inputs.alpha))
        terms.append(
            2.0
            * math.log(16.0 * h / d_)
            / (3.0 * inputs.eta**2 * (1.0 - inputs.alpha) * inputs.group_prob * inputs.alpha)
        )
    return max(terms)


def min_n_fast(inputs: BoundInputs) -> int:
    return max(1, math.ceil(min_n_fast_raw(inputs)))


def _require_feasible(inputs: BoundInputs) -> None:
    if inputs.d < 1:
        raise ParameterError("threshold formulas need d >= 1")
    if inputs.n < min_n_weighted(inputs):
        raise SampleTooSmallError(
            f"n = {inputs.n} below the guarantee floor {min_n_weighted(inputs)}"
        )


def risk_statistical_slack(inputs: BoundInputs) -> float:
    """4 * sqrt((8 d ln(e n / d) + 2 ln(16/delta)) / n), the risk estimation slack."""
    _require_feasible(inputs)
    n, d = inputs.n, inputs.d
    return 4.0 * math.sqrt((8.0 * d * math.log(E * n / d) + 2.0 * math.log(16.0 / inputs.delta)) / n)


def fairness_statistical_slack(inputs: BoundInputs) -> float:
    """16 * sqrt((2 d ln(2 e n / d) + 2 ln(96/delta)) / ((1-alpha) P n)) doubled.

    Returned value is the 32-prefactor term used by the weighted-objective
    slack and the fairness membership radius.
    """
    _require_feasible(inputs)
    n, d = inputs.n, inputs.d
    inner = (2.0 * d * math.log(2.0 * E * n / d) + 2.0 * math.log(96.0 / inputs.delta)) / (
        (1.0 - inputs.alpha) * inputs.group_prob * n
    )
    return 32.0 * math.sqrt(inner)


def delta_lambda(inputs: BoundInputs) -> float:
    """Finite-n excess bound for the empirical weighted-objective minimizer.

    3*alpha + risk slack + 2*lam*Delta + lam * fairness slack, where Delta is
    :func:`delta_irreducible`.  Converges to 3*alpha + 2*lam*Delta as n grows.
    """
    base = delta_irreducible(inputs.alpha, inputs.group_prob)
    return (
        3.0 * inputs.alpha
        + risk_statistical_slack(inputs)
        + 2.0 * inputs.lam * base
        + inputs.lam * fairness_statistical_slack(inputs)
    )


class CwRadii(NamedTuple):
    """Membership radii of the near-optimal-risk and near-optimal-fairness sets."""

    risk_radius: float
    fairness_radius: float


def cw_radii(inputs: BoundInputs) -> CwRadii:
    """Radii defining the component-wise learner's candidate sets.

    risk: 3*alpha + 4*sqrt((8 d ln(e n/d) + 2 ln(16/delta)) / n)
    fairness: 2*Delta + 32*sqrt((2 d ln(2 e n/d) + 2 ln(96/delta)) / ((1-alpha) P n))
    """
    base = delta_irreducible(inputs.alpha, inputs.group_prob)
    return CwRadii(
        risk_radius=3.0 * inputs.alpha + risk_statistical_slack(inputs),
        fairness_radius=2.0 * base + fairness_statistical_slack(inputs),
    )


THEOREMS = ("parity_pareto", "opp_pareto", "parity_cleanacc", "opp_cleanacc")


class LowerGaps(NamedTuple):
    """Worst-case excess guarantees achievable by an adversary of power alpha.

    ``risk_preserved`` marks the constructions in which the returned
    classifier stays exactly risk-optimal (the excess-risk gap is then zero
    by design).  ``fairness_gap_sharp`` carries the tighter variant of the
    parity risk-preserving gap alongside the headline form.
    """

    risk_gap: float
    fairness_gap: float
    risk_preserved: bool
    fairness_gap_sharp: float | None = None


def _check_lower_params(theorem: str, alpha: float, p0, p10, p11) -> None:
    if theorem not in THEOREMS:
        raise ParameterError(f"unknown construction {theorem!r}")
    if not 0.0 <= alpha < 0.5:
        raise ParameterError(f"corruption rate must lie in [0, 0.5), got {alpha}")
    if theorem.startswith("parity"):
        if p0 is None or not 0.0 < p0 <= 0.5:
            raise ParameterError(f"need 0 < p0 <= 0.5, got {p0}")
    else:
        if p10 is None or p11 is None:
            raise ParameterError("opportunity constructions need p10 and p11")
        if not 0.0 < p10 <= p11 < 1.0:
            raise ParameterError(f"need 0 < p10 <= p11 < 1, got p10={p10}, p11={p11}")
        if not p10 + p11 < 1.0:
            raise ParameterError(f"need p10 + p11 < 1, got {p10 + p11}")


def lower_gaps(theorem: str, alpha: float, *, p0=None, p10=None, p11=None) -> LowerGaps:
    """Evaluate the stated worst-case gaps of one lower-bound construction.

    The parity fairness gaps are written with the canonical factor
    2*p0*(1-p0); the equivalent form 2*p0*p1 appears elsewhere since
    p1 = 1 - p0.
    """
    _check_lower_params(theorem, alpha, p0, p10, p11)
    eta = alpha / (1.0 - alpha)
    if theorem == "parity_pareto":
        return LowerGaps(
            risk_gap=min(eta, 2.0 * p0 * (1.0 - p0)),
            fairness_gap=min(eta / (2.0 * p0 * (1.0 - p0)), 1.0),
            risk_preserved=False,
        )
    if theorem == "opp_pareto":
        return LowerGaps(
            risk_gap=min(eta, 2.0 * p10, 2.0 * (1.0 - p10 - p11)),
            fairness_gap=min(eta / (2.0 * p10), 1.0, (1.0 - p10 - p11) / p10),
            risk_preserved=False,
        )
    if theorem == "parity_cleanacc":
        return LowerGaps(
            risk_gap=0.0,
            fairness_gap=min(alpha / (2.0 * p0), 1.0),
            risk_preserved=True,
            fairness_gap_sharp=min(eta / (2.0 * p0 * (1.0 - p0)), 1.0),
        )
    # opp_cleanacc
    return LowerGaps(
        risk_gap=0.0,
        fairness_gap=min(eta / (2.0 * p10) * (1.0 - p10 / p11), 1.0 - p10 / p11),
        risk_preserved=True,
    )
