"""Shared test utilities: independent oracles and random problem generators.

The oracle functions deliberately use plain Python loops and scalar
arithmetic (no numpy) so they form an independent computation path against
the package's vectorized implementations.
"""

from __future__ import annotations

import itertools

import numpy as np

from aflearn.hypotheses import Hypothesis, HypothesisSpace
from aflearn.model import DataPoint, DiscreteDistribution, Sample, marginals, validate


# ---------------------------------------------------------------------------
# Empirical-count oracles (pure loops, same final division arithmetic).

def oracle_emp_risk(points, h: Hypothesis) -> float:
    pts = list(points)
    wrong = sum(1 for p in pts if h.table[p.x] != p.y)
    return wrong / len(pts)


def _oracle_rate(pts, h: Hypothesis, cond, value: int) -> float:
    group = [p for p in pts if cond(p)]
    if not group:
        return 0.0
    num = sum(1 for p in group if h.table[p.x] == value)
    return num / len(group)


def oracle_emp_deviation(points, h: Hypothesis, measure: str) -> float:
    pts = list(points)
    if measure == "parity":
        r0 = _oracle_rate(pts, h, lambda p: p.a == 0, 1)
        r1 = _oracle_rate(pts, h, lambda p: p.a == 1, 1)
    else:
        r0 = _oracle_rate(pts, h, lambda p: p.a == 0 and p.y == 1, 1)
        r1 = _oracle_rate(pts, h, lambda p: p.a == 1 and p.y == 1, 1)
    return abs(r0 - r1)


def oracle_emp_gamma_bar(points, h: Hypothesis, a: int) -> float:
    pts = list(points)
    return _oracle_rate(pts, h, lambda p: p.a == a and p.y == 1, 0)


# ---------------------------------------------------------------------------
# Population oracles over atom tables.

def oracle_risk(h: Hypothesis, dist: DiscreteDistribution) -> float:
    total = 0.0
    for pt, p in dist.atoms():
        if h.table[pt.x] != pt.y:
            total += p
    return total


def oracle_deviation(h: Hypothesis, dist: DiscreteDistribution, measure: str) -> float:
    rates = []
    for a in (0, 1):
        if measure == "parity":
            cond = lambda pt: pt.a == a
        else:
            cond = lambda pt: pt.a == a and pt.y == 1
        mass = sum(p for pt, p in dist.atoms() if cond(pt))
        hit = sum(p for pt, p in dist.atoms() if cond(pt) and h.table[pt.x] == 1)
        rates.append(hit / mass)
    return abs(rates[0] - rates[1])


# ---------------------------------------------------------------------------
# Naive VC dimension: full enumeration over all subsets, no early exit.

def oracle_vc_dimension(space: HypothesisSpace) -> int:
    k = space.input_set_size
    best = 0
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(k), size):
            patterns = {tuple(h.table[i] for i in subset) for h in space}
            if len(patterns) == 2 ** size:
                best = size
                break
    return best


# ---------------------------------------------------------------------------
# Random problem generators.

def random_points(rng: np.random.Generator, n: int, input_set_size: int) -> Sample:
    return Sample(
        rng.integers(0, input_set_size, n),
        rng.integers(0, 2, n),
        rng.integers(0, 2, n),
    )


def random_space(rng: np.random.Generator, input_set_size: int, count: int) -> HypothesisSpace:
    assert count <= 2 ** input_set_size
    codes = rng.choice(2 ** input_set_size, size=count, replace=False)
    tables = [[(int(c) >> i) & 1 for i in range(input_set_size)] for c in codes]
    return HypothesisSpace.from_tables(tables)


def _flip_attribute(dist: DiscreteDistribution) -> DiscreteDistribution:
    atoms = [((pt.x, 1 - pt.a, pt.y), p) for pt, p in dist.atoms()]
    return DiscreteDistribution(dist.input_set_size, atoms)


def random_distribution(
    rng: np.random.Generator,
    input_set_size: int = 6,
    measure: str = "parity",
    min_group: float = 0.2,
    max_tries: int = 500,
) -> DiscreteDistribution:
    """Random validated distribution with both relevant groups at least min_group."""
    triples = [
        (x, a, y)
        for x in range(input_set_size)
        for a in (0, 1)
        for y in (0, 1)
    ]
    for _ in range(max_tries):
        probs = rng.dirichlet(np.ones(len(triples)))
        dist = DiscreteDistribution(input_set_size, list(zip(triples, probs)))
        m = marginals(dist)
        if measure == "parity":
            if min(m.p0, m.p1) >= min_group:
                return validate(dist, "parity")
        else:
            if m.p10 > m.p11:
                dist = _flip_attribute(dist)
                m = marginals(dist)
            if min(m.p10, m.p11) >= min_group:
                return validate(dist, "opportunity")
    raise RuntimeError("could not draw a distribution satisfying the group floor")


def dominant_parity_problem(
    rng: np.random.Generator, n_hyp: int = 16
) -> tuple[DiscreteDistribution, HypothesisSpace, int]:
    """Problem whose space contains a hypothesis optimal in risk and parity deviation.

    Inputs come in pairs (x, x+3) carrying the two attribute values with
    proportional masses and a shared label, so the label table that matches
    the pairs has exactly zero risk and zero deviation.
    """
    labels = [int(b) for b in rng.integers(0, 2, 3)]
    weights = rng.dirichlet(np.ones(3))
    q = float(rng.uniform(0.25, 0.5))
    atoms = []
    for x in range(3):
        atoms.append(((x, 0, labels[x]), q * float(weights[x])))
        atoms.append(((x + 3, 1, labels[x]), (1.0 - q) * float(weights[x])))
    dist = validate(DiscreteDistribution(6, atoms), "parity")
    star_table = tuple(labels + labels)
    tables = {star_table}
    while len(tables) < n_hyp:
        tables.add(tuple(int(b) for b in rng.integers(0, 2, 6)))
    ordered = sorted(tables)
    space = HypothesisSpace.from_tables(ordered)
    star_index = ordered.index(star_table)
    return dist, space, star_index


def realizable_opportunity_problem() -> tuple[DiscreteDistribution, HypothesisSpace, int]:
    """Fixed realizable problem with P(Y=1, A=0) = 0.25 and an 8-hypothesis space.

    The zero-risk table (1, 1, 0, 0) sits at index 3.
    """
    dist = validate(
        DiscreteDistribution(
            4,
            [
                ((0, 0, 1), 0.25),
                ((1, 1, 1), 0.35),
                ((2, 0, 0), 0.20),
                ((3, 1, 0), 0.20),
            ],
        ),
        "opportunity",
    )
    tables = [
        (0, 0, 0, 0),
        (1, 1, 1, 1),
        (1, 0, 1, 0),
        (1, 1, 0, 0),
        (0, 1, 0, 1),
        (1, 1, 1, 0),
        (0, 0, 1, 1),
        (1, 0, 0, 1),
    ]
    return dist, HypothesisSpace.from_tables(tables), 3
