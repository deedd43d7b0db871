"""Data corruption protocol: i.i.d. marking plus adversarial replacement.

Generation runs in four steps: draw a clean i.i.d. sample, mark each index
independently with probability alpha, hand the clean sample, the mark set and
the full context to the adversary (which returns replacement points for the
marked indices only, in ascending index order), then assemble the corrupted
sample.  The protocol, not the adversary, writes the final points, so
"only marked points may change" cannot be violated.

Three substreams are derived from the generation seed with the tags
``"clean"``, ``"marks"`` and ``"adversary"``; experiments can therefore vary
one source of randomness while freezing the others.  Marking consumes one
uniform per index (a single ``random(n)`` call), independent of the clean
values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .errors import AdversaryViolationError
from .model import DataPoint, DiscreteDistribution, Sample, sample as draw_sample
from .seeding import generator, seed_sequence


@dataclass(frozen=True, eq=False)
class MarkSet:
    """Set of marked indices of an n-point sample."""

    n: int
    bool_mask: np.ndarray

    def __post_init__(self):
        mask = np.ascontiguousarray(self.bool_mask, dtype=bool)
        if mask.shape != (self.n,):
            raise ValueError("mark mask must have one entry per index")
        mask.setflags(write=False)
        object.__setattr__(self, "bool_mask", mask)

    @classmethod
    def from_indices(cls, indices, n: int) -> "MarkSet":
        mask = np.zeros(n, dtype=bool)
        for i in indices:
            if not 0 <= i < n:
                raise ValueError(f"mark index {i} out of range for n={n}")
            mask[i] = True
        return cls(n, mask)

    @cached_property
    def sorted_indices(self) -> np.ndarray:
        idx = np.flatnonzero(self.bool_mask)
        idx.setflags(write=False)
        return idx

    @cached_property
    def indices(self) -> frozenset[int]:
        return frozenset(int(i) for i in self.sorted_indices)

    @property
    def count(self) -> int:
        return int(self.bool_mask.sum())

    def __eq__(self, other) -> bool:
        if not isinstance(other, MarkSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.bool_mask, other.bool_mask)


@dataclass(frozen=True, eq=False)
class AdversaryContext:
    """Everything the full-knowledge corruption model grants the adversary.

    The learner under attack is identified by tag only, so adversaries cannot
    mutate learner state.  ``rng`` is the adversary's dedicated substream.
    """

    clean_distribution: DiscreteDistribution
    alpha: float
    learner_tag: str
    rng: np.random.Generator

    def __post_init__(self):
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError(f"corruption rate must lie in [0, 0.5), got {self.alpha}")


Adversary = Callable[[Sample, MarkSet, AdversaryContext], Sample]


class CorruptionDiagnostics(NamedTuple):
    marks: MarkSet
    clean_origin: Sample


class CorruptedSample:
    """A corrupted sample as seen by a learner, plus hidden provenance.

    ``points`` is the learner-facing view.  The mark set and the
    pre-corruption sample are reachable only through :meth:`diagnostics`,
    which experiment and verification code may call but learners must not.
    """

    __slots__ = ("points", "_marks", "_clean")

    def __init__(self, points: Sample, marks: MarkSet, clean_origin: Sample):
        if len(points) != marks.n or len(clean_origin) != marks.n:
            raise ValueError("points, marks and clean origin must agree on n")
        unmarked = ~marks.bool_mask
        if not (
            np.array_equal(points.x[unmarked], clean_origin.x[unmarked])
            and np.array_equal(points.a[unmarked], clean_origin.a[unmarked])
            and np.array_equal(points.y[unmarked], clean_origin.y[unmarked])
        ):
            raise AdversaryViolationError("unmarked points differ from the clean originals")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "_marks", marks)
        object.__setattr__(self, "_clean", clean_origin)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("CorruptedSample is immutable")

    @property
    def n(self) -> int:
        return len(self.points)

    def diagnostics(self) -> CorruptionDiagnostics:
        """Hidden mark set and clean origin; experiment code only."""
        return CorruptionDiagnostics(self._marks, self._clean)

    def to_json_dict(self) -> dict:
        return {
            "points": [[int(x), int(a), int(y)] for x, a, y in zip(self.points.x, self.points.a, self.points.y)],
            "marks": [int(i) for i in self._marks.sorted_indices],
        }


def _check_replacements(reps: Sample, count: int, input_set_size: int) -> None:
    if not isinstance(reps, Sample):
        raise AdversaryViolationError("adversary must return a Sample of replacements")
    if len(reps) != count:
        raise AdversaryViolationError(f"adversary returned {len(reps)} replacements for {count} marked points")
    if count == 0:
        return
    if reps.x.min() < 0 or reps.x.max() >= input_set_size:
        raise AdversaryViolationError("replacement input id outside the declared input set")
    for arr in (reps.a, reps.y):
        if arr.min() < 0 or arr.max() > 1:
            raise AdversaryViolationError("replacement attribute and label must be binary")


def generate(
    dist: DiscreteDistribution,
    adversary: Adversary,
    n: int,
    alpha: float,
    seed,
    learner_tag: str = "",
) -> CorruptedSample:
    """Run the four-step corruption protocol once.

    ``seed`` may be an integer or a SeedSequence; the three substreams are
    derived from it as documented in the module docstring, so the tuple
    (seed, dist, adversary, n, alpha) fully determines the output.
    """
    if n < 1:
        raise ValueError("sample size must be at least 1")
    if not 0.0 <= alpha < 0.5:
        raise ValueError(f"corruption rate must lie in [0, 0.5), got {alpha}")
    root = seed_sequence(seed)
    clean = draw_sample(dist, n, generator(root, "clean"))
    mark_mask = generator(root, "marks").random(n) < alpha
    marks = MarkSet(n, mark_mask)
    ctx = AdversaryContext(dist, alpha, learner_tag, generator(root, "adversary"))
    reps = adversary(clean, marks, ctx)
    _check_replacements(reps, marks.count, dist.input_set_size)
    xs, aa, ys = clean.x.copy(), clean.a.copy(), clean.y.copy()
    idx = marks.sorted_indices
    xs[idx], aa[idx], ys[idx] = reps.x, reps.a, reps.y
    return CorruptedSample(Sample(xs, aa, ys), marks, clean)


@dataclass(frozen=True)
class IdentityAdversary:
    """Leaves every marked point unchanged."""

    kind: str = "identity"

    def __call__(self, clean: Sample, marks: MarkSet, ctx: AdversaryContext) -> Sample:
        idx = marks.sorted_indices
        return Sample(clean.x[idx], clean.a[idx], clean.y[idx])


@dataclass(frozen=True)
class ResampleAdversary:
    """Replaces each marked point by a fresh i.i.d. draw from the clean law."""

    kind: str = "resample"

    def __call__(self, clean: Sample, marks: MarkSet, ctx: AdversaryContext) -> Sample:
        m = marks.count
        if m == 0:
            return Sample.empty()
        return draw_sample(ctx.clean_distribution, m, ctx.rng)


@dataclass(frozen=True)
class MinorityFloodAdversary:
    """Floods group 0 with label-flipped points, a crude bias injection.

    The k-th replacement (in ascending marked-index order) is
    (k mod K, a=0, 1 - majority_label(k mod K)), where majority_label(x) is
    the more likely clean label at x (ties and zero-mass inputs resolve to 1).
    Deterministic; consumes no randomness.
    """

    kind: str = "minority_flood"

    def __call__(self, clean: Sample, marks: MarkSet, ctx: AdversaryContext) -> Sample:
        m = marks.count
        k = ctx.clean_distribution.input_set_size
        if m == 0:
            return Sample.empty()
        dist = ctx.clean_distribution
        mass = np.zeros((k, 2))
        for pt, p in zip(dist.points, dist.probs):
            mass[pt.x, pt.y] += p
        majority = (mass[:, 1] >= mass[:, 0]).astype(np.int64)
        xs = np.arange(m, dtype=np.int64) % k
        return Sample(xs, np.zeros(m, dtype=np.int64), 1 - majority[xs])


_BUILTINS = {
    "identity": IdentityAdversary,
    "resample": ResampleAdversary,
    "minority_flood": MinorityFloodAdversary,
}


def builtin_adversary(kind: str) -> Adversary:
    """Instantiate one of the generic built-in attacks by name."""
    try:
        return _BUILTINS[kind]()
    except KeyError:
        raise ValueError(f"unknown adversary kind {kind!r}") from None
