"""aflearn: fairness-aware learning under adversarial data corruption.

A simulation and verification toolkit: exact finite-domain distributions and
metrics, the marked-point corruption protocol, worst-case lower-bound
constructions, threshold-based robust learners, closed-form bounds, and a
seeded Monte Carlo harness that turns the guarantees into pass/fail checks.
"""

from . import bounds, corruption, errors, estimators, hardness, harness, hypotheses, learners, model, seeding

__version__ = "0.1.0"

__all__ = [
    "bounds",
    "corruption",
    "errors",
    "estimators",
    "hardness",
    "harness",
    "hypotheses",
    "learners",
    "model",
    "seeding",
]
