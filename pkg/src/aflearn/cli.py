"""Command-line interface.

Verbs: ``build`` (emit a lower-bound instance as JSON), ``bounds`` (evaluate
the closed-form quantities for given parameters), and ``verify-lower`` /
``verify-upper`` / ``verify-concentration`` / ``verify-fast`` (run a Monte
Carlo check from a config file).  Exit codes: 0 pass, 1 fail, 2 config or
usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import bounds, harness
from .errors import AflearnError, ConfigError
from .hardness import build as build_instance, instance_to_json_dict


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def _emit(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_build(args) -> int:
    cfg = _load_config_file(args.config)
    inst = build_instance(
        cfg["theorem"], float(cfg["alpha"]),
        p0=cfg.get("p0"), p10=cfg.get("p10"), p11=cfg.get("p11"),
    )
    _emit(instance_to_json_dict(inst), args.out)
    return 0


def _bounds_record(cfg: dict) -> dict:
    alpha = float(cfg["alpha"])
    group_prob = float(cfg["group_prob"])
    record: dict = {
        "alpha": alpha,
        "group_prob": group_prob,
        "delta_irreducible": bounds.delta_irreducible(alpha, group_prob),
    }
    delta = float(cfg.get("delta", 0.1))
    lam = float(cfg.get("lambda", 0.0))
    if "d" in cfg:
        inputs = bounds.BoundInputs(
            alpha=alpha, group_prob=group_prob, lam=lam,
            d=int(cfg["d"]), n=int(cfg.get("n", 0)), delta=delta,
        )
        record["min_n_weighted_raw"] = bounds.min_n_weighted_raw(inputs)
        record["min_n_weighted"] = bounds.min_n_weighted(inputs)
        if "n" in cfg:
            radii = bounds.cw_radii(inputs)
            record["risk_radius"] = radii.risk_radius
            record["fairness_radius"] = radii.fairness_radius
            record["delta_lambda"] = bounds.delta_lambda(inputs)
    if "eta" in cfg and "H_size" in cfg:
        fast_inputs = bounds.BoundInputs(
            alpha=alpha, group_prob=group_prob, delta=delta,
            eta=float(cfg["eta"]), h_size=int(cfg["H_size"]),
        )
        record["min_n_fast_raw"] = bounds.min_n_fast_raw(fast_inputs)
        record["min_n_fast"] = bounds.min_n_fast(fast_inputs)
    if "theorem" in cfg:
        gaps = bounds.lower_gaps(
            cfg["theorem"], alpha,
            p0=cfg.get("p0"), p10=cfg.get("p10"), p11=cfg.get("p11"),
        )
        record["risk_gap"] = gaps.risk_gap
        record["fairness_gap"] = gaps.fairness_gap
        record["risk_preserved"] = gaps.risk_preserved
        if gaps.fairness_gap_sharp is not None:
            record["fairness_gap_sharp"] = gaps.fairness_gap_sharp
    return record


def _cmd_bounds(args) -> int:
    record = _bounds_record(_load_config_file(args.config))
    if args.out:
        _emit(record, args.out)
    if args.format == "json":
        if not args.out:
            _emit(record, None)
    else:
        width = max(len(k) for k in record)
        for key in sorted(record):
            print(f"{key:<{width}}  {record[key]}")
    return 0


_RUNNERS = {
    "verify-lower": harness.run_lower_bound,
    "verify-upper": harness.run_upper_bound,
    "verify-concentration": harness.run_concentration,
    "verify-fast": harness.run_fast_rate,
}


def _cmd_verify(args) -> int:
    cfg = _load_config_file(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    config = harness.ExperimentConfig.from_json_dict(cfg)
    report = _RUNNERS[args.verb](config)
    summary = {
        "verdict": report.verdict,
        "branch_failure_rates": report.branch_failure_rates,
        "coverage": report.coverage,
        "violation_frequency": report.violation_frequency,
        "feasible_empty_rate": report.feasible_empty_rate,
        "bounds_used": report.bounds_used,
        "wall_clock_seconds": report.wall_clock_seconds,
    }
    print(json.dumps({k: v for k, v in summary.items() if v is not None}, indent=2, sort_keys=True))
    if args.out:
        harness.export(report, args.format, args.out)
    return 0 if report.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="aflearn",
        description="Corruption-robust fairness-aware learning: constructions, bounds, Monte Carlo verification.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_build = sub.add_parser("build", help="emit a lower-bound instance as JSON")
    p_build.add_argument("--config", required=True)
    p_build.add_argument("--out")

    p_bounds = sub.add_parser("bounds", help="evaluate closed-form bounds for given parameters")
    p_bounds.add_argument("--config", required=True)
    p_bounds.add_argument("--out")
    p_bounds.add_argument("--format", choices=("json", "table"), default="table")

    for verb in _RUNNERS:
        p = sub.add_parser(verb, help=f"run a {verb.split('-', 1)[1]} verification experiment")
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    args = parser.parse_args(argv)
    try:
        if args.verb == "build":
            return _cmd_build(args)
        if args.verb == "bounds":
            return _cmd_bounds(args)
        return _cmd_verify(args)
    except (AflearnError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
