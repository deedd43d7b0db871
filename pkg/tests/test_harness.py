import json

import numpy as np
import pytest

from helpers import dominant_parity_problem, random_distribution, random_space, realizable_opportunity_problem
from aflearn import harness
from aflearn.errors import ConfigError, NoDominantHypothesisError, NotRealizableError
from aflearn.harness import (
    CustomProblem,
    ExperimentConfig,
    HardnessProblem,
    SummaryReport,
    TrialRecord,
    export,
    load_report,
    run_concentration,
    run_fast_rate,
    run_lower_bound,
    run_upper_bound,
)
from aflearn.learners import LearnResult, LearnerSpec
from aflearn.model import DiscreteDistribution, marginals, validate
from aflearn.hypotheses import HypothesisSpace


def lower_config(trials=150, n=1500, alpha=0.2, epsilon=0.12, seed=11, theorem="parity_pareto"):
    kw = {"p0": 0.3} if theorem.startswith("parity") else {"p10": 0.2, "p11": 0.3}
    return ExperimentConfig(
        problem=HardnessProblem(theorem, alpha, **kw),
        n=n,
        trials=trials,
        seed=seed,
        learner=LearnerSpec(kind="weighted", measure="parity" if theorem.startswith("parity") else "opportunity", lam=1.0),
        epsilon_mc=epsilon,
        lam=1.0,
    )


class TestRunLowerBound:
    def test_failures_partition_between_branches(self):
        report = run_lower_bound(lower_config())
        p0 = report.branch_failure_rates["0"]
        p1 = report.branch_failure_rates["1"]
        assert report.passed
        assert abs(p0 + p1 - 1.0) <= 0.12
        assert len(report.records) == 300

    def test_hardcoded_learner_gives_exact_split(self, monkeypatch):
        # A learner pinned to index 0 fails exactly on branch 1.
        monkeypatch.setattr(
            "aflearn.harness.learn", lambda points, space, spec: LearnResult(0, False, {})
        )
        report = run_lower_bound(lower_config(trials=40))
        assert report.branch_failure_rates == {"0": 0.0, "1": 1.0}

    def test_alpha_zero_degenerate_gaps(self):
        # Gaps are zero and the wrong-choice event still partitions.
        report = run_lower_bound(lower_config(trials=120, n=400, alpha=0.0, epsilon=0.2))
        assert report.bounds_used["risk_gap"] == 0.0
        assert report.bounds_used["fairness_gap"] == 0.0
        total = report.branch_failure_rates["0"] + report.branch_failure_rates["1"]
        assert abs(total - 1.0) <= 0.2

    def test_cleanacc_risk_stays_optimal(self):
        report = run_lower_bound(lower_config(trials=60, n=800, theorem="parity_cleanacc"))
        assert report.bounds_used["risk_preserved"] is True
        for record in report.records:
            assert record.excess_risk == pytest.approx(0.0, abs=1e-12)

    def test_excesses_take_construction_values(self):
        report = run_lower_bound(lower_config(trials=60, n=800))
        gap_r = report.bounds_used["risk_gap"]
        gap_d = report.bounds_used["fairness_gap"]
        for record in report.records:
            if record.excess_risk > 0:
                assert record.excess_risk == pytest.approx(gap_r, abs=1e-9)
                assert record.excess_deviation == pytest.approx(gap_d, abs=1e-9)

    def test_requires_hardness_problem(self):
        dist = random_distribution(np.random.default_rng(0), 4, "parity", 0.2)
        config = ExperimentConfig(
            problem=CustomProblem(dist, random_space(np.random.default_rng(1), 4, 4), "identity", 0.1),
            n=100,
            trials=5,
            seed=0,
            learner=LearnerSpec(kind="erm"),
        )
        with pytest.raises(ConfigError):
            run_lower_bound(config)


class TestRunUpperBound:
    def test_weighted_no_corruption_full_coverage(self):
        rng = np.random.default_rng(2)
        dist = random_distribution(rng, 5, "parity", 0.25)
        space = random_space(rng, 5, 8)
        config = ExperimentConfig(
            problem=CustomProblem(dist, space, "identity", 0.0),
            n=3000,
            trials=60,
            seed=4,
            learner=LearnerSpec(kind="weighted", measure="parity", lam=1.0),
            delta=0.1,
        )
        report = run_upper_bound(config)
        assert report.coverage == 1.0
        assert report.passed

    def test_componentwise_needs_dominant(self):
        dist = validate(
            DiscreteDistribution(2, [((0, 0, 1), 0.4), ((1, 1, 0), 0.6)]), "parity"
        )
        space = HypothesisSpace.from_tables([(1, 0), (0, 0)])
        config = ExperimentConfig(
            problem=CustomProblem(dist, space, "identity", 0.1),
            n=2000,
            trials=5,
            seed=0,
            learner=LearnerSpec(
                kind="componentwise", measure="parity", alpha=0.1, group_prob=0.4, delta=0.1
            ),
        )
        with pytest.raises(NoDominantHypothesisError):
            run_upper_bound(config)

    def test_single_trial_coverage_is_binary(self):
        rng = np.random.default_rng(3)
        dist = random_distribution(rng, 4, "parity", 0.25)
        space = random_space(rng, 4, 6)
        config = ExperimentConfig(
            problem=CustomProblem(dist, space, "resample", 0.1),
            n=1200,
            trials=1,
            seed=8,
            learner=LearnerSpec(kind="weighted", measure="parity", lam=1.0),
        )
        assert run_upper_bound(config).coverage in (0.0, 1.0)

    def test_componentwise_covers_with_dominant(self):
        dist, space, star = dominant_parity_problem(np.random.default_rng(6))
        group = min(marginals(dist).p0, marginals(dist).p1)
        config = ExperimentConfig(
            problem=CustomProblem(dist, space, "minority_flood", 0.1),
            n=1200,
            trials=40,
            seed=9,
            learner=LearnerSpec(
                kind="componentwise", measure="parity", alpha=0.1, group_prob=group, delta=0.1
            ),
            delta=0.1,
        )
        report = run_upper_bound(config)
        assert report.bounds_used["h_star"] == star
        assert report.coverage >= 0.9
        assert report.feasible_empty_rate <= 0.1


class TestRunFastRate:
    def test_not_realizable_rejected(self):
        rng = np.random.default_rng(14)
        dist = random_distribution(rng, 3, "opportunity", 0.1)
        space = HypothesisSpace.from_tables([(0, 0, 0)]) if False else random_space(rng, 3, 4)
        # Replace until surely not realizable: constant-wrong table only.
        space = HypothesisSpace.from_tables([(1, 1, 1), (0, 0, 0)])
        config = ExperimentConfig(
            problem=CustomProblem(dist, space, "identity", 0.1),
            n=6000,
            trials=5,
            seed=0,
            learner=LearnerSpec(kind="fast", measure="opportunity", alpha=0.1, group_prob=0.2),
        )
        with pytest.raises(NotRealizableError):
            run_fast_rate(config)

    def test_realizable_coverage(self):
        dist, space, star = realizable_opportunity_problem()
        config = ExperimentConfig(
            problem=CustomProblem(dist, space, "minority_flood", 0.1),
            n=8480,
            trials=40,
            seed=21,
            learner=LearnerSpec(kind="fast", measure="opportunity", alpha=0.1, group_prob=0.25),
            delta=0.1,
            eta=0.5,
        )
        report = run_fast_rate(config)
        assert report.bounds_used["h_star"] == star
        assert report.coverage >= 0.9

    def test_small_n_rejected(self):
        dist, space, _ = realizable_opportunity_problem()
        config = ExperimentConfig(
            problem=CustomProblem(dist, space, "identity", 0.1),
            n=100,
            trials=5,
            seed=0,
            learner=LearnerSpec(kind="fast", measure="opportunity", alpha=0.1, group_prob=0.25),
        )
        with pytest.raises(ConfigError):
            run_fast_rate(config)


class TestRunConcentration:
    def _config(self, lemma, alpha=0.05, trials=60, kind="minority_flood", seed=3):
        rng = np.random.default_rng(33)
        measure = "parity" if lemma.startswith("parity") else "opportunity"
        if lemma == "realizable-miss-rate":
            dist, space, _ = realizable_opportunity_problem()
        else:
            dist = random_distribution(rng, 5, measure, 0.25)
            space = random_space(rng, 5, 12)
        return ExperimentConfig(
            problem=CustomProblem(dist, space, kind, alpha),
            n=1100,
            trials=trials,
            seed=seed,
            delta=0.1,
            lemma=lemma,
        )

    def test_alpha_zero_no_violations(self):
        config = self._config("parity-adversary-gap", alpha=0.0)
        report = run_concentration(config)
        assert report.violation_frequency == 0.0
        for record in report.records:
            assert record.excess_deviation == 0.0

    @pytest.mark.parametrize(
        "lemma",
        [
            "parity-adversary-gap",
            "parity-pointwise",
            "parity-uniform",
            "opp-adversary-gap",
            "opp-pointwise",
            "opp-uniform",
            "realizable-miss-rate",
        ],
    )
    def test_each_lemma_passes(self, lemma):
        report = run_concentration(self._config(lemma))
        assert report.passed
        assert report.violation_frequency < 0.1 + 0.03

    def test_floor_enforced(self):
        config = self._config("parity-adversary-gap")
        too_small = ExperimentConfig(
            problem=config.problem, n=20, trials=5, seed=0, delta=0.1,
            lemma="parity-adversary-gap",
        )
        with pytest.raises(ConfigError):
            run_concentration(too_small)

    def test_lemma_required(self):
        config = self._config("parity-adversary-gap")
        missing = ExperimentConfig(problem=config.problem, n=1100, trials=5, seed=0, delta=0.1)
        with pytest.raises(ConfigError):
            run_concentration(missing)

    def test_unknown_lemma_rejected(self):
        config = self._config("parity-adversary-gap")
        with pytest.raises(ConfigError):
            ExperimentConfig(
                problem=config.problem, n=1100, trials=5, seed=0, delta=0.1, lemma="B1"
            )


class TestDeterminismAndPool:
    def test_worker_count_does_not_change_results(self, monkeypatch):
        config = lower_config(trials=30, n=300)
        monkeypatch.setenv("AFL_THREADS", "1")
        serial = run_lower_bound(config)
        monkeypatch.setenv("AFL_THREADS", "4")
        pooled = run_lower_bound(config)
        assert serial.records == pooled.records
        assert serial.branch_failure_rates == pooled.branch_failure_rates

    def test_repeat_run_identical(self):
        config = lower_config(trials=25, n=250)
        a = run_lower_bound(config)
        b = run_lower_bound(config)
        assert a.records == b.records


class TestExport:
    def _report(self):
        return run_lower_bound(lower_config(trials=12, n=200))

    def test_json_round_trip(self, tmp_path):
        report = self._report()
        path = tmp_path / "report.json"
        export(report, "json", str(path))
        again = load_report(str(path))
        assert again == report

    def test_csv_layout_and_determinism(self, tmp_path):
        report = self._report()
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export(report, "csv", str(p1))
        export(report, "csv", str(p2))
        b1, b2 = p1.read_bytes(), p2.read_bytes()
        assert b1 == b2
        lines = b1.decode().splitlines()
        assert lines[0] == "trial,branch,chosen,excess_risk,excess_deviation,excess_weighted,feasible_empty,marks"
        assert len(lines) == 1 + len(report.records)

    def test_empty_records_header_only(self, tmp_path):
        report = SummaryReport(
            kind="lower", verdict="pass", records=(), bounds_used={}, quantiles={},
            wall_clock_seconds=0.0, config={},
        )
        path = tmp_path / "empty.csv"
        export(report, "csv", str(path))
        assert path.read_text().splitlines() == [
            "trial,branch,chosen,excess_risk,excess_deviation,excess_weighted,feasible_empty,marks"
        ]

    def test_write_error_carries_path(self, tmp_path):
        report = self._report()
        with pytest.raises(OSError, match="no/such"):
            export(report, "json", str(tmp_path / "no" / "such" / "file.json"))


class TestConfigJson:
    def test_round_trip(self):
        config = lower_config(trials=5, n=100)
        again = ExperimentConfig.from_json_dict(config.to_json_dict())
        assert again == config

    def test_custom_problem_round_trip(self):
        rng = np.random.default_rng(1)
        dist = random_distribution(rng, 4, "parity", 0.2)
        config = ExperimentConfig(
            problem=CustomProblem(dist, random_space(rng, 4, 4), "resample", 0.2),
            n=100,
            trials=5,
            seed=7,
            learner=LearnerSpec(kind="erm"),
        )
        again = ExperimentConfig.from_json_dict(json.loads(json.dumps(config.to_json_dict())))
        assert again.problem.distribution == config.problem.distribution
        assert again.problem.space == config.problem.space

    def test_bad_configs_rejected(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json_dict({"n": 10, "trials": 5, "seed": 0})
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json_dict(
                {"problem": {"other": {}}, "n": 10, "trials": 5, "seed": 0}
            )
        with pytest.raises(ConfigError):
            lower_config(trials=0)
