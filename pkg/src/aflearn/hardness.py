"""Executable worst-case constructions with exactly computable induced laws.

Each construction packages a pair of clean distributions, a two-hypothesis
space and a pair of randomized adversaries, arranged so that the corrupted
per-point laws of the two branches coincide.  A learner seeing only corrupted
data then cannot tell the branches apart, yet the branch-optimal hypotheses
differ, which pins the excess risk and excess unfairness from below.

The four kinds are named by the fairness measure they attack and by whether
the attack also degrades accuracy (``*_pareto``) or preserves risk optimality
while degrading fairness only (``*_cleanacc``).  Input ids are fixed to
0..3 (parity) and 0..4 (opportunity).

When the nominal corruption power exceeds what a construction can absorb, the
adversary plays with a reduced effective power: each marked point is acted on
independently with probability alpha_effective / alpha and left untouched
otherwise, and the clean distributions are built from the effective rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .bounds import THEOREMS
from .corruption import AdversaryContext, MarkSet
from .errors import ParameterError
from .model import DataPoint, DiscreteDistribution, Sample, validate
from .hypotheses import HypothesisSpace


@dataclass(frozen=True)
class PairReplacementAdversary:
    """Overwrites each acted-on marked point with one of two fixed atoms.

    Acts on a marked point independently with probability ``act_prob``
    (leaving it untouched otherwise), then picks ``first`` or ``second`` with
    probability one half each.  Consumes two uniforms per marked point from
    the adversary substream, as two ``random(m)`` calls in that order.
    Ignores the clean values of the points it overwrites.
    """

    first: DataPoint
    second: DataPoint
    act_prob: float = 1.0

    def __call__(self, clean: Sample, marks: MarkSet, ctx: AdversaryContext) -> Sample:
        idx = marks.sorted_indices
        m = idx.shape[0]
        act = ctx.rng.random(m) < self.act_prob
        pick_first = ctx.rng.random(m) < 0.5
        xs = np.where(act, np.where(pick_first, self.first.x, self.second.x), clean.x[idx])
        aa = np.where(act, np.where(pick_first, self.first.a, self.second.a), clean.a[idx])
        ys = np.where(act, np.where(pick_first, self.first.y, self.second.y), clean.y[idx])
        return Sample(xs, aa, ys)


@dataclass(frozen=True)
class HardnessInstance:
    theorem: str
    params: dict
    branch_distributions: tuple[DiscreteDistribution, DiscreteDistribution]
    space: HypothesisSpace
    branch_adversaries: tuple[PairReplacementAdversary, PairReplacementAdversary]
    optimal: dict  # branch -> index of the hypothesis that is best on that branch
    eta_effective: float
    alpha_effective: float
    case2: bool

    @property
    def measure(self) -> str:
        return "parity" if self.theorem.startswith("parity") else "opportunity"

    @property
    def alpha(self) -> float:
        return self.params["alpha"]


class PredictedGaps(NamedTuple):
    risk_gap: float
    fairness_gap: float
    risk_preserved: bool


def _not(i: int) -> int:
    return 1 - i


def _atoms_for(theorem: str, branch: int, eta: float, params: dict):
    e2 = eta / 2.0
    i, j = branch, _not(branch)
    if theorem == "parity_pareto":
        p0 = params["p0"]
        return [
            ((0, 1, 1), 1.0 - p0 - e2),
            ((1, 0, 0), p0 - e2),
            ((2, i, j), e2),
            ((3, j, i), e2),
        ]
    if theorem == "parity_cleanacc":
        p0 = params["p0"]
        return [
            ((0, 1, 1), 1.0 - p0 - e2),
            ((1, 0, 0), p0 - e2),
            ((2, i, 1), e2),
            ((3, j, 1), e2),
        ]
    if theorem == "opp_pareto":
        p10, p11 = params["p10"], params["p11"]
        return [
            ((0, 1, 1), p11),
            ((1, 0, 1), p10 - e2),
            ((2, i, j), e2),
            ((3, j, i), e2),
            ((4, 0, 0), 1.0 - p10 - p11 - e2),
        ]
    # opp_cleanacc
    p10, p11 = params["p10"], params["p11"]
    return [
        ((0, 1, 1), p11 - e2),
        ((1, 0, 1), p10 - e2),
        ((2, i, 1), e2),
        ((3, j, 1), e2),
        ((4, 0, 0), 1.0 - p10 - p11),
    ]


def _replacements_for(theorem: str, branch: int) -> tuple[DataPoint, DataPoint]:
    i, j = branch, _not(branch)
    if theorem in ("parity_pareto", "opp_pareto"):
        return DataPoint(2, j, i), DataPoint(3, i, j)
    return DataPoint(2, j, 1), DataPoint(3, i, 1)


def _space_for(theorem: str) -> HypothesisSpace:
    if theorem.startswith("parity"):
        return HypothesisSpace.from_tables([(1, 0, 1, 0), (1, 0, 0, 1)])
    return HypothesisSpace.from_tables([(1, 1, 1, 0, 0), (1, 1, 0, 1, 0)])


def _cap(theorem: str, params: dict) -> float:
    if theorem in ("parity_pareto", "parity_cleanacc"):
        p0 = params["p0"]
        return 2.0 * p0 * (1.0 - p0)
    if theorem == "opp_pareto":
        return 2.0 * min(params["p10"], 1.0 - params["p10"] - params["p11"])
    return 2.0 * params["p10"]


def build(theorem: str, alpha: float, *, p0=None, p10=None, p11=None) -> HardnessInstance:
    """Assemble one lower-bound instance at the given parameters.

    If eta = alpha/(1-alpha) exceeds the construction's cap, the effective
    rate solves eta_eff = cap via alpha_eff = cap/(1+cap) and the adversaries
    act on each marked point only with probability alpha_eff/alpha.
    """
    if theorem not in THEOREMS:
        raise ParameterError(f"unknown construction {theorem!r}")
    if not 0.0 <= alpha < 0.5:
        raise ParameterError(f"corruption rate must lie in [0, 0.5), got {alpha}")
    if theorem.startswith("parity"):
        if p0 is None or not 0.0 < p0 <= 0.5:
            raise ParameterError(f"need 0 < p0 <= 0.5, got {p0}")
        params = {"alpha": float(alpha), "p0": float(p0)}
    else:
        if p10 is None or p11 is None or not 0.0 < p10 <= p11 < 1.0:
            raise ParameterError(f"need 0 < p10 <= p11 < 1, got p10={p10}, p11={p11}")
        if not p10 + p11 < 1.0:
            raise ParameterError(f"need p10 + p11 < 1, got {p10 + p11}")
        params = {"alpha": float(alpha), "p10": float(p10), "p11": float(p11)}

    eta = alpha / (1.0 - alpha)
    cap = _cap(theorem, params)
    case2 = eta > cap
    eta_eff = cap if case2 else eta
    alpha_eff = eta_eff / (1.0 + eta_eff) if case2 else alpha
    act_prob = alpha_eff / alpha if case2 else 1.0

    measure = "parity" if theorem.startswith("parity") else "opportunity"
    dists = []
    advs = []
    for branch in (0, 1):
        atoms = [(pt, p) for pt, p in _atoms_for(theorem, branch, eta_eff, params) if p > 0.0]
        dist = DiscreteDistribution(4 if measure == "parity" else 5, atoms)
        dists.append(validate(dist, measure))
        first, second = _replacements_for(theorem, branch)
        advs.append(PairReplacementAdversary(first, second, act_prob))

    return HardnessInstance(
        theorem=theorem,
        params=params,
        branch_distributions=(dists[0], dists[1]),
        space=_space_for(theorem),
        branch_adversaries=(advs[0], advs[1]),
        optimal={0: 0, 1: 1},
        eta_effective=eta_eff,
        alpha_effective=alpha_eff,
        case2=case2,
    )


def induced_distribution(inst: HardnessInstance, branch: int) -> DiscreteDistribution:
    """Exact per-point law of one corrupted draw under the branch pair.

    Clean mass is scaled by (1 - alpha_effective); each of the two
    replacement atoms receives alpha_effective / 2, merged with coinciding
    clean atoms.  Atoms are emitted in sorted (x, a, y) order.
    """
    if branch not in (0, 1):
        raise ParameterError(f"branch must be 0 or 1, got {branch}")
    dist = inst.branch_distributions[branch]
    a_eff = inst.alpha_effective
    masses: dict[DataPoint, float] = {}
    for pt, p in zip(dist.points, dist.probs):
        masses[pt] = masses.get(pt, 0.0) + (1.0 - a_eff) * float(p)
    adv = inst.branch_adversaries[branch]
    for rep in (adv.first, adv.second):
        if a_eff > 0.0:
            masses[rep] = masses.get(rep, 0.0) + a_eff / 2.0
    atoms = sorted(((pt, p) for pt, p in masses.items() if p > 0.0), key=lambda item: item[0])
    return validate(DiscreteDistribution(dist.input_set_size, atoms), inst.measure)


def predicted_gaps(inst: HardnessInstance) -> PredictedGaps:
    """Excess values the construction forces on the losing branch.

    These are the exact metric differences between the two hypotheses on a
    branch distribution, expressed through the effective rate; the pareto
    kinds additionally force the risk gap, the cleanacc kinds keep both
    hypotheses exactly risk-optimal instead.
    """
    e = inst.eta_effective
    if inst.theorem == "parity_pareto":
        p0 = inst.params["p0"]
        return PredictedGaps(e, e / (2.0 * p0 * (1.0 - p0)), False)
    if inst.theorem == "parity_cleanacc":
        p0 = inst.params["p0"]
        return PredictedGaps(0.0, e / (2.0 * p0 * (1.0 - p0)), True)
    if inst.theorem == "opp_pareto":
        return PredictedGaps(e, e / (2.0 * inst.params["p10"]), False)
    p10, p11 = inst.params["p10"], inst.params["p11"]
    return PredictedGaps(0.0, e / (2.0 * p10) * (1.0 - p10 / p11), True)


def instance_to_json_dict(inst: HardnessInstance) -> dict:
    """Inspection form of an instance: distributions, tables, gaps."""
    gaps = predicted_gaps(inst)
    return {
        "theorem": inst.theorem,
        "params": dict(inst.params),
        "eta_effective": inst.eta_effective,
        "alpha_effective": inst.alpha_effective,
        "case2": inst.case2,
        "branch_distributions": [d.to_json_dict() for d in inst.branch_distributions],
        "space": inst.space.to_json_dict(),
        "optimal": {str(k): v for k, v in inst.optimal.items()},
        "predicted_gaps": {
            "risk_gap": gaps.risk_gap,
            "fairness_gap": gaps.fairness_gap,
            "risk_preserved": gaps.risk_preserved,
        },
        "induced_distribution": induced_distribution(inst, 0).to_json_dict(),
    }
