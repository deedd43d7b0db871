"""Learning algorithms: deterministic maps from point sequences to hypothesis indices.

Learners see only points.  This module has no access to mark sets or clean
origins; callers holding a corrupted sample pass its learner-facing
``points`` view.  Ties always break toward the lowest index in the space's
stored order, so a spec fully determines behavior.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bounds import BoundInputs, cw_radii, delta_irreducible
from .errors import ConfigError
from .estimators import emp_deviation_all, emp_gamma_bar_max_all, emp_risk_all, _point_arrays
from .hypotheses import HypothesisSpace, vc_dimension_or_bound
from .model import Measure

KINDS = ("erm", "weighted", "componentwise", "fast")


@dataclass(frozen=True)
class LearnerSpec:
    """Declarative description of a learner.

    ``alpha``, ``group_prob`` and ``delta`` are the side knowledge granted to
    the threshold-based learners (the true corruption rate and minority group
    mass); ``d`` optionally overrides the complexity used in their radii,
    which is valid for any upper bound on the true value.
    """

    kind: str
    measure: Measure = "parity"
    lam: float = 0.0
    alpha: float | None = None
    group_prob: float | None = None
    delta: float | None = None
    d: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown learner kind {self.kind!r}")
        if self.measure not in ("parity", "opportunity"):
            raise ConfigError(f"unknown measure {self.measure!r}")
        if self.kind == "weighted" and self.lam < 0:
            raise ConfigError("weighted learner needs a non-negative trade-off weight")
        if self.kind == "componentwise":
            if self.alpha is None or self.group_prob is None or self.delta is None:
                raise ConfigError("componentwise learner needs alpha, group_prob and delta")
        if self.kind == "fast":
            if self.alpha is None or self.group_prob is None:
                raise ConfigError("fast learner needs alpha and group_prob")
            if self.measure != "opportunity":
                raise ConfigError("fast learner is defined for equal opportunity only")

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind, "measure": self.measure}
        if self.kind == "weighted":
            out["lambda"] = self.lam
        for key in ("alpha", "group_prob", "delta", "d"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "LearnerSpec":
        known = {"kind", "measure", "lambda", "alpha", "group_prob", "delta", "d"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown learner spec keys: {sorted(unknown)}")
        try:
            return cls(
                kind=data["kind"],
                measure=data.get("measure", "parity"),
                lam=float(data.get("lambda", 0.0)),
                alpha=data.get("alpha"),
                group_prob=data.get("group_prob"),
                delta=data.get("delta"),
                d=data.get("d"),
            )
        except KeyError as exc:
            raise ConfigError(f"learner spec missing key {exc}") from None


class LearnResult(NamedTuple):
    chosen: int
    feasible_set_empty: bool
    diagnostics: dict


def erm(points, space: HypothesisSpace) -> LearnResult:
    """Empirical risk minimizer."""
    risks = emp_risk_all(points, space)
    return LearnResult(int(np.argmin(risks)), False, {"emp_risk": tuple(risks)})


def weighted(points, space: HypothesisSpace, lam: float, measure: Measure) -> LearnResult:
    """Minimizer of empirical risk + lam * empirical deviation."""
    if lam < 0:
        raise ConfigError("trade-off weight must be non-negative")
    risks = emp_risk_all(points, space)
    devs = emp_deviation_all(points, space, measure)
    scores = risks + lam * devs
    return LearnResult(
        int(np.argmin(scores)),
        False,
        {"emp_risk": tuple(risks), "emp_deviation": tuple(devs), "score": tuple(scores)},
    )


def componentwise(points, space: HypothesisSpace, spec: LearnerSpec) -> LearnResult:
    """First hypothesis that is near-optimal in both empirical metrics.

    Membership radii come from the granted (alpha, group_prob, delta) and the
    space's complexity; if no hypothesis is inside both radii the result
    flags ``feasible_set_empty`` and falls back to index 0.  Raises
    SampleTooSmallError when the sample is below the guarantee floor.
    """
    if spec.kind != "componentwise":
        raise ConfigError("spec kind must be componentwise")
    x, _, _ = _point_arrays(points)
    n = int(x.shape[0])
    d = spec.d if spec.d is not None else max(1, vc_dimension_or_bound(space))
    inputs = BoundInputs(alpha=spec.alpha, group_prob=spec.group_prob, d=d, n=n, delta=spec.delta)
    radii = cw_radii(inputs)
    risks = emp_risk_all(points, space)
    devs = emp_deviation_all(points, space, spec.measure)
    feasible = (risks <= risks.min() + radii.risk_radius) & (devs <= devs.min() + radii.fairness_radius)
    hits = np.flatnonzero(feasible)
    empty = hits.shape[0] == 0
    chosen = 0 if empty else int(hits[0])
    return LearnResult(
        chosen,
        empty,
        {
            "emp_risk": tuple(risks),
            "emp_deviation": tuple(devs),
            "risk_radius": radii.risk_radius,
            "fairness_radius": radii.fairness_radius,
            "d": d,
        },
    )


def fast(points, space: HypothesisSpace, spec: LearnerSpec) -> LearnResult:
    """Realizable-regime learner with a linear-in-1/alpha sample appetite.

    Keeps hypotheses whose worst-group empirical miss rate on positives is at
    most the irreducible gap and whose empirical risk is at most 3*alpha/2;
    returns the first such hypothesis, else flags an empty feasible set.
    """
    if spec.kind != "fast":
        raise ConfigError("spec kind must be fast")
    threshold = delta_irreducible(spec.alpha, spec.group_prob)
    risks = emp_risk_all(points, space)
    gammas = emp_gamma_bar_max_all(points, space)
    feasible = (gammas <= threshold) & (risks <= 1.5 * spec.alpha)
    hits = np.flatnonzero(feasible)
    empty = hits.shape[0] == 0
    chosen = 0 if empty else int(hits[0])
    return LearnResult(
        chosen,
        empty,
        {
            "emp_risk": tuple(risks),
            "gamma_bar_max": tuple(gammas),
            "gamma_threshold": threshold,
            "risk_threshold": 1.5 * spec.alpha,
        },
    )


def learn(points, space: HypothesisSpace, spec: LearnerSpec) -> LearnResult:
    """Dispatch to the learner named by ``spec.kind``."""
    if spec.kind == "erm":
        return erm(points, space)
    if spec.kind == "weighted":
        return weighted(points, space, spec.lam, spec.measure)
    if spec.kind == "componentwise":
        return componentwise(points, space, spec)
    return fast(points, space, spec)
