"""Finite data domain: labeled points, finite-support distributions, i.i.d. sampling.

Inputs are small integer ids rather than feature vectors; a data point is a
triple ``(x, a, y)`` with a binary protected attribute ``a`` and a binary
label ``y``.  Distributions are explicit atom tables over such triples, which
keeps every population quantity exactly computable.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Iterator, Literal, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateGroupError, DuplicateAtomError, NormalizationError
from .seeding import as_generator

PROB_TOL = 1e-12

Measure = Literal["parity", "opportunity"]


class DataPoint(NamedTuple):
    x: int
    a: int
    y: int


class Marginals(NamedTuple):
    """Group masses P(A=a) and positive-label group masses P(Y=1, A=a)."""

    p0: float
    p1: float
    p10: float
    p11: float


class Sample:
    """Immutable ordered sequence of data points, stored as parallel arrays.

    ``x``, ``a`` and ``y`` are read-only int64 arrays of equal length; they
    are the representation every estimator and learner operates on.
    """

    __slots__ = ("x", "a", "y")

    def __init__(self, x: np.ndarray, a: np.ndarray, y: np.ndarray):
        x = np.ascontiguousarray(x, dtype=np.int64)
        a = np.ascontiguousarray(a, dtype=np.int64)
        y = np.ascontiguousarray(y, dtype=np.int64)
        if not (x.shape == a.shape == y.shape) or x.ndim != 1:
            raise ValueError("sample arrays must be one-dimensional and of equal length")
        for arr in (x, a, y):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "y", y)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("Sample is immutable")

    @classmethod
    def from_points(cls, points: Iterable[DataPoint | tuple[int, int, int]]) -> "Sample":
        pts = [DataPoint(*p) for p in points]
        if pts:
            x, a, y = (np.array(col, dtype=np.int64) for col in zip(*pts))
        else:
            x = a = y = np.empty(0, dtype=np.int64)
        return cls(x, a, y)

    @classmethod
    def empty(cls) -> "Sample":
        z = np.empty(0, dtype=np.int64)
        return cls(z, z, z)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> DataPoint:
        return DataPoint(int(self.x[i]), int(self.a[i]), int(self.y[i]))

    def __iter__(self) -> Iterator[DataPoint]:
        for i in range(self.n):
            yield self[i]

    @property
    def points(self) -> tuple[DataPoint, ...]:
        return tuple(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            np.array_equal(self.x, other.x)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.y, other.y)
        )

    def __repr__(self) -> str:
        return f"Sample(n={self.n})"


class DiscreteDistribution:
    """Finite-support law over (x, a, y) triples.

    The constructor only checks structure (value ranges and shapes); call
    :func:`validate` to enforce normalization, atom uniqueness and the
    group-positivity assumptions of a fairness measure.
    """

    def __init__(
        self,
        input_set_size: int,
        atoms: Sequence[tuple[DataPoint | tuple[int, int, int], float]],
    ):
        if input_set_size < 1:
            raise ValueError("input_set_size must be at least 1")
        if not atoms:
            raise ValueError("a distribution needs at least one atom")
        points = []
        probs = []
        for point, p in atoms:
            pt = DataPoint(*point)
            if not 0 <= pt.x < input_set_size:
                raise ValueError(f"input id {pt.x} outside [0, {input_set_size})")
            if pt.a not in (0, 1) or pt.y not in (0, 1):
                raise ValueError(f"attribute and label must be binary, got {pt}")
            points.append(pt)
            probs.append(float(p))
        self.input_set_size = int(input_set_size)
        self.points: tuple[DataPoint, ...] = tuple(points)
        arr = np.array(probs, dtype=np.float64)
        arr.setflags(write=False)
        self.probs: np.ndarray = arr

    @cached_property
    def _x(self) -> np.ndarray:
        return np.array([p.x for p in self.points], dtype=np.int64)

    @cached_property
    def _a(self) -> np.ndarray:
        return np.array([p.a for p in self.points], dtype=np.int64)

    @cached_property
    def _y(self) -> np.ndarray:
        return np.array([p.y for p in self.points], dtype=np.int64)

    @cached_property
    def _cum(self) -> np.ndarray:
        return np.cumsum(self.probs)

    @cached_property
    def _mass(self) -> dict[DataPoint, float]:
        return {pt: float(p) for pt, p in zip(self.points, self.probs)}

    def mass(self, point: DataPoint | tuple[int, int, int]) -> float:
        return self._mass.get(DataPoint(*point), 0.0)

    def atoms(self) -> tuple[tuple[DataPoint, float], ...]:
        return tuple(zip(self.points, (float(p) for p in self.probs)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return self.input_set_size == other.input_set_size and self._mass == other._mass

    def __repr__(self) -> str:
        return f"DiscreteDistribution(K={self.input_set_size}, atoms={len(self.points)})"

    def to_json_dict(self) -> dict:
        return {
            "input_set_size": self.input_set_size,
            "atoms": [
                {"x": pt.x, "a": pt.a, "y": pt.y, "p": float(p)}
                for pt, p in zip(self.points, self.probs)
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DiscreteDistribution":
        atoms = [((a["x"], a["a"], a["y"]), a["p"]) for a in data["atoms"]]
        return cls(data["input_set_size"], atoms)


def validate(dist: DiscreteDistribution, measure: str = "none") -> DiscreteDistribution:
    """Check distribution invariants; return ``dist`` unchanged if they hold.

    ``measure="none"`` checks only non-negativity, normalization and atom
    uniqueness.  ``"parity"`` additionally requires P(A=a) > 0 for both
    groups, ``"opportunity"`` requires P(Y=1, A=a) > 0 for both groups.
    """
    if measure not in ("none", "parity", "opportunity"):
        raise ValueError(f"unknown measure {measure!r}")
    if np.any(dist.probs < 0.0):
        raise NormalizationError("atom probabilities must be non-negative")
    total = float(dist.probs.sum())
    if abs(total - 1.0) > PROB_TOL:
        raise NormalizationError(f"atom probabilities sum to {total!r}, not 1")
    if len(set(dist.points)) != len(dist.points):
        raise DuplicateAtomError("duplicate (x, a, y) atoms")
    if measure == "parity":
        for a in (0, 1):
            if float(dist.probs[dist._a == a].sum()) <= 0.0:
                raise DegenerateGroupError(f"P(A={a}) = 0")
    elif measure == "opportunity":
        for a in (0, 1):
            if float(dist.probs[(dist._a == a) & (dist._y == 1)].sum()) <= 0.0:
                raise DegenerateGroupError(f"P(Y=1, A={a}) = 0")
    return dist


def marginals(dist: DiscreteDistribution) -> Marginals:
    """Exact group masses of a validated distribution."""
    p0 = float(dist.probs[dist._a == 0].sum())
    p1 = float(dist.probs[dist._a == 1].sum())
    p10 = float(dist.probs[(dist._a == 0) & (dist._y == 1)].sum())
    p11 = float(dist.probs[(dist._a == 1) & (dist._y == 1)].sum())
    return Marginals(p0, p1, p10, p11)


def sample(dist: DiscreteDistribution, n: int, rng) -> Sample:
    """Draw ``n`` i.i.d. points from a validated distribution.

    RNG consumption (stable across versions): exactly one float64 uniform per
    point, drawn in a single ``rng.random(n)`` call, mapped to an atom by
    cumulative inversion, i.e. ``np.searchsorted(cumsum(probs), u, "right")``
    with atoms in their stored order.  ``rng`` may be a Generator, a
    SeedSequence or an integer seed.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    gen = as_generator(rng)
    u = gen.random(n)
    idx = np.searchsorted(dist._cum, u, side="right")
    np.minimum(idx, len(dist.points) - 1, out=idx)
    return Sample(dist._x[idx], dist._a[idx], dist._y[idx])
