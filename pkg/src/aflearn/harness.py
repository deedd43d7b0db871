"""Seeded Monte Carlo experiment engine, summaries, and result persistence.

Experiments are declared by an :class:`ExperimentConfig` (JSON shape below)
and executed by one of the ``run_*`` functions, each returning a
:class:`SummaryReport` with a pass/fail verdict.

Config JSON, top level::

    {"problem": {...}, "learner": {...}, "n": int, "trials": int,
     "seed": int, "delta": float, "lambda": float, "eta": float,
     "epsilon_mc": float, "lemma": "parity-adversary-gap"}

``problem`` is either ``{"hardness": {"theorem": ..., "alpha": ...,
"p0"/"p10"/"p11": ...}}`` or ``{"custom": {"distribution": <literal>,
"space": <literal>, "adversary": "identity|resample|minority_flood",
"alpha": float}}``.

Determinism: trial k of purpose tag ``p`` (and branch ``b`` where
applicable) draws all of its randomness from the substream
``(seed, p, b, k)``, so results are independent of execution order and of
the worker count.  The environment variable ``AFL_THREADS`` caps the worker
pool (0 or unset picks an automatic value).

All excess metrics are exact population computations on the clean problem
distribution; no test-set sampling noise enters the coverage estimates.
Threshold comparisons carry an absolute guard of 1e-9 so that excesses that
equal a gap in exact arithmetic are not dropped by float rounding.

Concentration trials have no chosen hypothesis; their records carry the
lemma statistic in ``excess_deviation`` and -1 in ``chosen``.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bounds, hardness
from .corruption import builtin_adversary, generate
from .errors import (
    ConfigError,
    NoDominantHypothesisError,
    NotRealizableError,
)
from .estimators import (
    adversary_gap_sum_all,
    emp_deviation_all,
    emp_gamma_bar,
)
from .hypotheses import HypothesisSpace, deviation, risk, vc_dimension_or_bound
from .learners import LearnerSpec, learn
from .model import DiscreteDistribution, Measure, marginals, validate
from .seeding import seed_sequence

GAP_TOL = 1e-9
EXACT_TOL = 1e-12

LEMMAS = (
    "parity-adversary-gap",
    "parity-pointwise",
    "parity-uniform",
    "opp-adversary-gap",
    "opp-pointwise",
    "opp-uniform",
    "realizable-miss-rate",
)
_GAP_LEMMAS = ("parity-adversary-gap", "opp-adversary-gap", "realizable-miss-rate")
_UNIFORM_LEMMAS = ("parity-uniform", "opp-uniform")
_POINTWISE_LEMMAS = ("parity-pointwise", "opp-pointwise")
_E = math.e


@dataclass(frozen=True)
class HardnessProblem:
    theorem: str
    alpha: float
    p0: float | None = None
    p10: float | None = None
    p11: float | None = None

    def build(self) -> hardness.HardnessInstance:
        return hardness.build(self.theorem, self.alpha, p0=self.p0, p10=self.p10, p11=self.p11)

    def to_json_dict(self) -> dict:
        out = {"theorem": self.theorem, "alpha": self.alpha}
        for key in ("p0", "p10", "p11"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return {"hardness": out}


@dataclass(frozen=True)
class CustomProblem:
    distribution: DiscreteDistribution
    space: HypothesisSpace
    adversary_kind: str
    alpha: float

    def adversary(self):
        return builtin_adversary(self.adversary_kind)

    def to_json_dict(self) -> dict:
        return {
            "custom": {
                "distribution": self.distribution.to_json_dict(),
                "space": self.space.to_json_dict(),
                "adversary": self.adversary_kind,
                "alpha": self.alpha,
            }
        }


def _problem_from_dict(data: dict):
    if "hardness" in data:
        h = data["hardness"]
        return HardnessProblem(
            theorem=h["theorem"],
            alpha=float(h["alpha"]),
            p0=h.get("p0"),
            p10=h.get("p10"),
            p11=h.get("p11"),
        )
    if "custom" in data:
        c = data["custom"]
        return CustomProblem(
            distribution=DiscreteDistribution.from_json_dict(c["distribution"]),
            space=HypothesisSpace.from_json_dict(c["space"]),
            adversary_kind=c["adversary"],
            alpha=float(c["alpha"]),
        )
    raise ConfigError("problem must contain a 'hardness' or 'custom' entry")


@dataclass(frozen=True)
class ExperimentConfig:
    problem: "HardnessProblem | CustomProblem"
    n: int
    trials: int
    seed: int
    learner: LearnerSpec | None = None
    delta: float = 0.1
    lam: float = 0.0
    eta: float = 0.5
    epsilon_mc: float = 0.03
    lemma: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError("delta must lie in (0, 1)")
        if self.epsilon_mc < 0:
            raise ConfigError("epsilon_mc must be non-negative")
        if self.lemma is not None and self.lemma not in LEMMAS:
            raise ConfigError(f"unknown lemma {self.lemma!r}; known: {LEMMAS}")

    def to_json_dict(self) -> dict:
        out = {
            "problem": self.problem.to_json_dict(),
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "delta": self.delta,
            "lambda": self.lam,
            "eta": self.eta,
            "epsilon_mc": self.epsilon_mc,
        }
        if self.learner is not None:
            out["learner"] = self.learner.to_json_dict()
        if self.lemma is not None:
            out["lemma"] = self.lemma
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            learner = None
            if "learner" in data and data["learner"] is not None:
                learner = LearnerSpec.from_json_dict(data["learner"])
            return cls(
                problem=_problem_from_dict(data["problem"]),
                n=int(data["n"]),
                trials=int(data["trials"]),
                seed=int(data["seed"]),
                learner=learner,
                delta=float(data.get("delta", 0.1)),
                lam=float(data.get("lambda", 0.0)),
                eta=float(data.get("eta", 0.5)),
                epsilon_mc=float(data.get("epsilon_mc", 0.03)),
                lemma=data.get("lemma"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    branch: int
    chosen: int
    excess_risk: float
    excess_deviation: float
    excess_weighted: float
    feasible_set_empty: bool
    mark_count: int

    def to_json_dict(self) -> dict:
        return {
            "trial": self.trial,
            "branch": self.branch,
            "chosen": self.chosen,
            "excess_risk": self.excess_risk,
            "excess_deviation": self.excess_deviation,
            "excess_weighted": self.excess_weighted,
            "feasible_set_empty": self.feasible_set_empty,
            "mark_count": self.mark_count,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "TrialRecord":
        return cls(
            trial=int(data["trial"]),
            branch=int(data["branch"]),
            chosen=int(data["chosen"]),
            excess_risk=float(data["excess_risk"]),
            excess_deviation=float(data["excess_deviation"]),
            excess_weighted=float(data["excess_weighted"]),
            feasible_set_empty=bool(data["feasible_set_empty"]),
            mark_count=int(data["mark_count"]),
        )


@dataclass
class SummaryReport:
    kind: str
    verdict: str
    records: tuple[TrialRecord, ...]
    bounds_used: dict
    quantiles: dict
    wall_clock_seconds: float
    config: dict
    branch_failure_rates: dict | None = None
    coverage: float | None = None
    violation_frequency: float | None = None
    feasible_empty_rate: float | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "branch_failure_rates": self.branch_failure_rates,
            "coverage": self.coverage,
            "violation_frequency": self.violation_frequency,
            "feasible_empty_rate": self.feasible_empty_rate,
            "bounds_used": self.bounds_used,
            "quantiles": self.quantiles,
            "wall_clock_seconds": self.wall_clock_seconds,
            "config": self.config,
            "records": [r.to_json_dict() for r in self.records],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SummaryReport":
        return cls(
            kind=data["kind"],
            verdict=data["verdict"],
            records=tuple(TrialRecord.from_json_dict(r) for r in data["records"]),
            bounds_used=data["bounds_used"],
            quantiles=data["quantiles"],
            wall_clock_seconds=data["wall_clock_seconds"],
            config=data["config"],
            branch_failure_rates=data.get("branch_failure_rates"),
            coverage=data.get("coverage"),
            violation_frequency=data.get("violation_frequency"),
            feasible_empty_rate=data.get("feasible_empty_rate"),
        )


def _worker_count() -> int:
    raw = os.environ.get("AFL_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"AFL_THREADS must be an integer, got {raw!r}") from None
    if value > 0:
        return value
    # Auto resolves to a single worker: trial bodies are GIL-bound, so a
    # thread pool only adds contention.  Results never depend on the count.
    return 1


def _map_trials(fn: Callable[[int], object], count: int) -> list:
    """Order-preserving map over trial indices under the worker-pool contract.

    Each trial's output depends only on its index and the enclosing config,
    so the worker count never changes results.
    """
    workers = _worker_count()
    if workers <= 1 or count <= 1:
        return [fn(t) for t in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(count)))


def _quantiles(records: list[TrialRecord]) -> dict:
    out = {}
    for name in ("excess_risk", "excess_deviation", "excess_weighted"):
        values = np.array([getattr(r, name) for r in records], dtype=np.float64)
        q50, q90, q99 = np.quantile(values, [0.5, 0.9, 0.99])
        out[name] = {"q50": float(q50), "q90": float(q90), "q99": float(q99), "max": float(values.max())}
    return out


def _group_prob(dist: DiscreteDistribution, measure: Measure) -> float:
    m = marginals(dist)
    if measure == "parity":
        return min(m.p0, m.p1)
    return min(m.p10, m.p11)


def run_lower_bound(config: ExperimentConfig) -> SummaryReport:
    """Per branch, measure how often the learner lands on the forced excesses.

    For a deterministic learner on identical induced branch laws, the failure
    event of branch i is exactly "the learner picked the other branch's
    optimum", so the two failure rates sum to one; the verdict checks
    |p0 + p1 - 1| <= epsilon_mc.  Failure in branch i additionally requires
    the trial's exact excesses to reach the construction's gaps (a vacuous
    check only when alpha = 0 makes both gaps zero).
    """
    start = time.perf_counter()
    if not isinstance(config.problem, HardnessProblem):
        raise ConfigError("run_lower_bound needs a hardness problem")
    if config.learner is None:
        raise ConfigError("run_lower_bound needs a learner spec")
    spec = config.learner  # fixed before any branch data is drawn
    inst = config.problem.build()
    gaps = bounds.lower_gaps(
        inst.theorem, inst.alpha,
        p0=inst.params.get("p0"), p10=inst.params.get("p10"), p11=inst.params.get("p11"),
    )
    measure = inst.measure
    space = inst.space
    pop_risk = [[risk(h, d) for h in space] for d in inst.branch_distributions]
    pop_dev = [[deviation(h, d, measure) for h in space] for d in inst.branch_distributions]
    lam_rec = spec.lam if spec.kind == "weighted" else config.lam

    def run_branch(branch: int) -> tuple[list[TrialRecord], float]:
        dist = inst.branch_distributions[branch]
        adv = inst.branch_adversaries[branch]
        opt = inst.optimal[branch]
        risks, devs = pop_risk[branch], pop_dev[branch]
        min_risk = min(risks)

        def one(trial: int) -> tuple[TrialRecord, bool]:
            ss = seed_sequence(config.seed, "lower", branch, trial)
            cs = generate(dist, adv, config.n, inst.alpha, ss, learner_tag=spec.kind)
            result = learn(cs.points, space, spec)
            c = result.chosen
            ex_r = risks[c] - risks[opt]
            ex_d = devs[c] - devs[opt]
            if gaps.risk_preserved:
                fail = (
                    risks[c] <= min_risk + EXACT_TOL
                    and ex_d >= gaps.fairness_gap - GAP_TOL
                    and c != opt
                )
            else:
                fail = (
                    ex_r >= gaps.risk_gap - GAP_TOL
                    and ex_d >= gaps.fairness_gap - GAP_TOL
                    and c != opt
                )
            record = TrialRecord(
                trial=trial, branch=branch, chosen=c,
                excess_risk=float(ex_r), excess_deviation=float(ex_d),
                excess_weighted=float(ex_r + lam_rec * ex_d),
                feasible_set_empty=result.feasible_set_empty,
                mark_count=cs.diagnostics().marks.count,
            )
            return record, fail

        outcomes = _map_trials(one, config.trials)
        records = [r for r, _ in outcomes]
        rate = sum(1 for _, f in outcomes if f) / config.trials
        return records, rate

    records0, p0 = run_branch(0)
    records1, p1 = run_branch(1)
    records = records0 + records1
    verdict = "pass" if abs(p0 + p1 - 1.0) <= config.epsilon_mc else "fail"
    used = {
        "risk_gap": gaps.risk_gap,
        "fairness_gap": gaps.fairness_gap,
        "risk_preserved": gaps.risk_preserved,
        "eta_effective": inst.eta_effective,
        "alpha_effective": inst.alpha_effective,
    }
    if gaps.fairness_gap_sharp is not None:
        used["fairness_gap_sharp"] = gaps.fairness_gap_sharp
    return SummaryReport(
        kind="lower",
        verdict=verdict,
        records=tuple(records),
        bounds_used=used,
        quantiles=_quantiles(records),
        wall_clock_seconds=time.perf_counter() - start,
        config=config.to_json_dict(),
        branch_failure_rates={"0": p0, "1": p1},
    )


def _custom_setup(config: ExperimentConfig, measure: Measure):
    problem = config.problem
    if not isinstance(problem, CustomProblem):
        raise ConfigError("this experiment needs a custom problem")
    dist = validate(problem.distribution, measure)
    space = problem.space
    if space.input_set_size != dist.input_set_size:
        raise ConfigError("space and distribution disagree on the input set")
    return dist, space, problem.adversary(), problem.alpha


def run_upper_bound(config: ExperimentConfig) -> SummaryReport:
    """Coverage of a learner guarantee on a custom problem.

    Weighted learners are checked against the finite-n weighted-objective
    excess bound; component-wise learners against twice their membership
    radii, relative to a hypothesis verified (exactly, against every member
    of the space) to be optimal in both metrics.
    """
    start = time.perf_counter()
    if config.learner is None:
        raise ConfigError("run_upper_bound needs a learner spec")
    spec = config.learner
    if spec.kind not in ("erm", "weighted", "componentwise"):
        raise ConfigError("run_upper_bound supports erm, weighted and componentwise learners")
    measure = spec.measure
    dist, space, adversary, alpha = _custom_setup(config, measure)
    group_prob = _group_prob(dist, measure)
    d = spec.d if spec.d is not None else max(1, vc_dimension_or_bound(space))
    pop_risk = np.array([risk(h, dist) for h in space])
    pop_dev = np.array([deviation(h, dist, measure) for h in space])

    if spec.kind == "componentwise":
        dominant = np.flatnonzero(
            (pop_risk <= pop_risk.min() + EXACT_TOL) & (pop_dev <= pop_dev.min() + EXACT_TOL)
        )
        if dominant.shape[0] == 0:
            raise NoDominantHypothesisError("no hypothesis is optimal in both risk and deviation")
        star = int(dominant[0])
        radii = bounds.cw_radii(
            bounds.BoundInputs(alpha=alpha, group_prob=group_prob, d=d, n=config.n, delta=config.delta)
        )
        conclusion = (2.0 * radii.risk_radius, 2.0 * radii.fairness_radius)
        used = {
            "risk_bound": conclusion[0],
            "fairness_bound": conclusion[1],
            "risk_radius": radii.risk_radius,
            "fairness_radius": radii.fairness_radius,
            "h_star": star,
            "d": d,
        }
    else:
        lam = spec.lam if spec.kind == "weighted" else 0.0
        scores = pop_risk + lam * pop_dev
        best = float(scores.min())
        bound_value = bounds.delta_lambda(
            bounds.BoundInputs(
                alpha=alpha, group_prob=group_prob, lam=lam, d=d, n=config.n, delta=config.delta
            )
        )
        used = {"delta_lambda": bound_value, "lambda": lam, "d": d}

    def one(trial: int) -> tuple[TrialRecord, bool]:
        ss = seed_sequence(config.seed, "upper", 0, trial)
        cs = generate(dist, adversary, config.n, alpha, ss, learner_tag=spec.kind)
        result = learn(cs.points, space, spec)
        c = result.chosen
        if spec.kind == "componentwise":
            ex_r = float(pop_risk[c] - pop_risk[star])
            ex_d = float(pop_dev[c] - pop_dev[star])
            holds = ex_r <= conclusion[0] + GAP_TOL and ex_d <= conclusion[1] + GAP_TOL
            ex_w = ex_r + config.lam * ex_d
        else:
            ex_r = float(pop_risk[c] - pop_risk.min())
            ex_d = float(pop_dev[c] - pop_dev.min())
            ex_w = float(pop_risk[c] + lam * pop_dev[c] - best)
            holds = ex_w <= bound_value + GAP_TOL
        record = TrialRecord(
            trial=trial, branch=-1, chosen=c,
            excess_risk=ex_r, excess_deviation=ex_d, excess_weighted=ex_w,
            feasible_set_empty=result.feasible_set_empty,
            mark_count=cs.diagnostics().marks.count,
        )
        return record, holds

    outcomes = _map_trials(one, config.trials)
    records = [r for r, _ in outcomes]
    coverage = sum(1 for _, h in outcomes if h) / config.trials
    empty_rate = sum(1 for r in records if r.feasible_set_empty) / config.trials
    verdict = "pass" if coverage >= 1.0 - config.delta - config.epsilon_mc else "fail"
    return SummaryReport(
        kind="upper",
        verdict=verdict,
        records=tuple(records),
        bounds_used=used,
        quantiles=_quantiles(records),
        wall_clock_seconds=time.perf_counter() - start,
        config=config.to_json_dict(),
        coverage=coverage,
        feasible_empty_rate=empty_rate,
    )


def run_fast_rate(config: ExperimentConfig) -> SummaryReport:
    """Coverage of the realizable fast-rate guarantee on a custom problem."""
    start = time.perf_counter()
    if config.learner is None or config.learner.kind != "fast":
        raise ConfigError("run_fast_rate needs a fast learner spec")
    spec = config.learner
    dist, space, adversary, alpha = _custom_setup(config, "opportunity")
    p10 = _group_prob(dist, "opportunity")
    pop_risk = np.array([risk(h, dist) for h in space])
    zero = np.flatnonzero(pop_risk <= EXACT_TOL)
    if zero.shape[0] == 0:
        raise NotRealizableError("no hypothesis has zero risk on the clean distribution")
    star = int(zero[0])
    pop_dev = np.array([deviation(h, dist, "opportunity") for h in space])
    floor = bounds.min_n_fast(
        bounds.BoundInputs(
            alpha=alpha, group_prob=p10, delta=config.delta, eta=config.eta, h_size=len(space)
        )
    )
    if config.n < floor:
        raise ConfigError(f"n = {config.n} below the fast-rate floor {floor}")
    base = bounds.delta_irreducible(alpha, p10)
    conclusion = (3.0 * alpha / (1.0 - config.eta), 2.0 * base / (1.0 - config.eta))

    def one(trial: int) -> tuple[TrialRecord, bool]:
        ss = seed_sequence(config.seed, "fast", 0, trial)
        cs = generate(dist, adversary, config.n, alpha, ss, learner_tag=spec.kind)
        result = learn(cs.points, space, spec)
        c = result.chosen
        ex_r = float(pop_risk[c] - pop_risk[star])
        ex_d = float(pop_dev[c] - pop_dev[star])
        holds = ex_r <= conclusion[0] + GAP_TOL and ex_d <= conclusion[1] + GAP_TOL
        record = TrialRecord(
            trial=trial, branch=-1, chosen=c,
            excess_risk=ex_r, excess_deviation=ex_d,
            excess_weighted=ex_r + config.lam * ex_d,
            feasible_set_empty=result.feasible_set_empty,
            mark_count=cs.diagnostics().marks.count,
        )
        return record, holds

    outcomes = _map_trials(one, config.trials)
    records = [r for r, _ in outcomes]
    coverage = sum(1 for _, h in outcomes if h) / config.trials
    empty_rate = sum(1 for r in records if r.feasible_set_empty) / config.trials
    verdict = "pass" if coverage >= 1.0 - config.delta - config.epsilon_mc else "fail"
    return SummaryReport(
        kind="fast",
        verdict=verdict,
        records=tuple(records),
        bounds_used={
            "risk_bound": conclusion[0],
            "fairness_bound": conclusion[1],
            "min_n_fast": floor,
            "delta_irreducible": base,
            "h_star": star,
        },
        quantiles=_quantiles(records),
        wall_clock_seconds=time.perf_counter() - start,
        config=config.to_json_dict(),
        coverage=coverage,
        feasible_empty_rate=empty_rate,
    )


def _lemma_floor(lemma: str, alpha: float, group_prob: float, delta: float, d: int) -> float:
    terms = []
    if lemma in _GAP_LEMMAS:
        terms.append(8.0 * math.log(4.0 / delta) / ((1.0 - alpha) * group_prob))
        if alpha > 0:
            terms.append(12.0 * math.log(3.0 / delta) / alpha)
    else:
        terms.append(8.0 * math.log(8.0 / delta) / ((1.0 - alpha) * group_prob))
        if alpha > 0:
            terms.append(12.0 * math.log(6.0 / delta) / alpha)
        if lemma in _UNIFORM_LEMMAS:
            terms.append(d / 2.0)
    return max(terms)


def _lemma_bound(lemma: str, alpha: float, group_prob: float, delta: float, d: int, n: int) -> float:
    base = bounds.delta_irreducible(alpha, group_prob)
    if lemma in _GAP_LEMMAS:
        return base
    if lemma in _POINTWISE_LEMMAS:
        return base + 2.0 * math.sqrt(math.log(16.0 / delta) / (n * (1.0 - alpha) * group_prob))
    inner = (2.0 * d * math.log(2.0 * _E * n / d) + 2.0 * math.log(48.0 / delta)) / (
        (1.0 - alpha) * group_prob * n
    )
    return base + 16.0 * math.sqrt(inner)


def run_concentration(config: ExperimentConfig) -> SummaryReport:
    """Check one concentration statement by direct simulation.

    ``*-adversary-gap``: the sup over the space of the summed
    corrupted-vs-clean group-rate gaps stays under the irreducible bound.
    ``*-pointwise``: per fixed hypothesis, the empirical deviation stays near
    its population value (violation frequency is reported as the worst single
    hypothesis).  ``*-uniform``: the same, uniformly over the space, with the
    complexity-dependent slack.  ``realizable-miss-rate``: on a realizable
    problem, the summed positive-group miss rates of the zero-risk hypothesis
    stay under the irreducible bound.
    """
    start = time.perf_counter()
    if config.lemma is None:
        raise ConfigError("run_concentration needs a lemma id")
    lemma = config.lemma
    measure: Measure = "parity" if lemma.startswith("parity") else "opportunity"
    dist, space, adversary, alpha = _custom_setup(config, measure)
    group_prob = _group_prob(dist, measure)
    d = max(1, vc_dimension_or_bound(space))
    floor = math.ceil(_lemma_floor(lemma, alpha, group_prob, config.delta, d))
    if config.n < floor:
        raise ConfigError(f"n = {config.n} below the stated floor {floor} for {lemma}")
    bound_value = _lemma_bound(lemma, alpha, group_prob, config.delta, d, config.n)

    star = -1
    pop_dev = None
    if lemma == "realizable-miss-rate":
        pop_risk = np.array([risk(h, dist) for h in space])
        zero = np.flatnonzero(pop_risk <= EXACT_TOL)
        if zero.shape[0] == 0:
            raise ConfigError(f"{lemma} needs a realizable problem (a zero-risk hypothesis)")
        star = int(zero[0])
    if lemma in _POINTWISE_LEMMAS or lemma in _UNIFORM_LEMMAS:
        pop_dev = np.array([deviation(h, dist, measure) for h in space])

    def one(trial: int) -> tuple[TrialRecord, np.ndarray]:
        ss = seed_sequence(config.seed, "concentration", 0, trial)
        cs = generate(dist, adversary, config.n, alpha, ss, learner_tag="none")
        if lemma in ("parity-adversary-gap", "opp-adversary-gap"):
            stats = np.array([adversary_gap_sum_all(cs, space, measure).max()])
        elif lemma == "realizable-miss-rate":
            g0 = emp_gamma_bar(cs.points, space[star], 0)
            g1 = emp_gamma_bar(cs.points, space[star], 1)
            stats = np.array([g0 + g1])
        else:
            emp = emp_deviation_all(cs.points, space, measure)
            stats = np.abs(emp - pop_dev)
            if lemma in _UNIFORM_LEMMAS:
                stats = np.array([stats.max()])
        record = TrialRecord(
            trial=trial, branch=-1, chosen=-1,
            excess_risk=0.0, excess_deviation=float(stats.max()), excess_weighted=0.0,
            feasible_set_empty=False,
            mark_count=cs.diagnostics().marks.count,
        )
        return record, stats

    outcomes = _map_trials(one, config.trials)
    records = [r for r, _ in outcomes]
    stats_matrix = np.stack([s for _, s in outcomes])
    # Strict comparison: with alpha = 0 the statistic and the bound are both
    # exactly zero and the guarantee is vacuous, not violated.
    per_column = (stats_matrix > bound_value).mean(axis=0)
    violation_frequency = float(per_column.max())
    verdict = "pass" if violation_frequency < config.delta + config.epsilon_mc else "fail"
    used = {"lemma": lemma, "bound": bound_value, "n_floor": floor, "d": d, "group_prob": group_prob}
    if star >= 0:
        used["h_star"] = star
    return SummaryReport(
        kind="concentration",
        verdict=verdict,
        records=tuple(records),
        bounds_used=used,
        quantiles=_quantiles(records),
        wall_clock_seconds=time.perf_counter() - start,
        config=config.to_json_dict(),
        violation_frequency=violation_frequency,
    )


CSV_HEADER = ["trial", "branch", "chosen", "excess_risk", "excess_deviation",
              "excess_weighted", "feasible_empty", "marks"]


def export(report: SummaryReport, fmt: str, path: str) -> None:
    """Persist a report as JSON (full nested form) or CSV (one row per trial).

    Numbers in CSV are rendered with 12 significant digits; row order is the
    stored record order (branch-major, then trial index), so re-exporting the
    same report is byte-identical.
    """
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown export format {fmt!r}")
    try:
        if fmt == "json":
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        else:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(CSV_HEADER)
                for r in report.records:
                    writer.writerow([
                        r.trial, r.branch, r.chosen,
                        format(r.excess_risk, ".12g"),
                        format(r.excess_deviation, ".12g"),
                        format(r.excess_weighted, ".12g"),
                        int(r.feasible_set_empty),
                        r.mark_count,
                    ])
    except OSError as exc:
        raise OSError(f"failed to write report to {path!r}: {exc}") from exc


def load_report(path: str) -> SummaryReport:
    try:
        with open(path, encoding="utf-8") as fh:
            return SummaryReport.from_json_dict(json.load(fh))
    except OSError as exc:
        raise OSError(f"failed to read report from {path!r}: {exc}") from exc
