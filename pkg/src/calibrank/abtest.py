"""A/B testing with m reviewers: score-aggregation baselines, the
pair-majority cardinal estimator, and exact success probabilities.

Reviewers are split between the two items by a uniform permutation, half
each.  The k-th reviewer (in permuted order) of item 1 is paired with the
k-th reviewer of item 2; the majority estimator runs the randomized
two-item rule on every such score pair and takes the majority vote.  The
aggregation baselines (sign of pairwise wins, mean, upper median) compare
one summary number per item.  All four break exact ties with a fair coin.

The baselines share a blind spot: calibrations exist under which each is
exactly a coin flip for every pair of item values, while the pair-majority
estimator stays strictly better than a coin flip for any strictly
increasing calibrations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence

import numpy as np

from .canonical import PairOrder, canonical_estimate, random_guess, w_tilde
from .model import (
    Assignment,
    CalibrationFunction,
    NoiseModel,
    WeightFunction,
    evaluate,
)

__all__ = [
    "AB_ESTIMATOR_NAMES",
    "AbScores",
    "SCENARIO_NAMES",
    "collect_ab_scores",
    "exact_abtest_success",
    "majority_cardinal_estimator",
    "mean_estimator",
    "median_estimator",
    "scenario_calibrations",
    "sign_estimator",
    "upper_median",
]

AB_ESTIMATOR_NAMES = ("random", "sign", "mean", "median", "majority")

_EXACT_LIMIT = 8


@dataclass(frozen=True)
class AbScores:
    """Scores for the two items, aligned so index k of each half is a pair."""

    item1: tuple[float, ...]
    item2: tuple[float, ...]

    def __post_init__(self):
        if len(self.item1) != len(self.item2):
            raise ValueError("the two items must receive equally many scores")
        if not self.item1:
            raise ValueError("need at least one score per item")

    @property
    def pairs(self) -> int:
        return len(self.item1)


def collect_ab_scores(
    x1: float,
    x2: float,
    calibrations: Sequence[CalibrationFunction],
    assignment: Assignment,
    noise: NoiseModel = NoiseModel.none(),
    rng: np.random.Generator | None = None,
) -> AbScores:
    """Scores in the pairing convention of :func:`calibrank.model.assign_ab`."""
    if assignment.reviewer_order is None:
        raise ValueError("assignment lacks the A/B reviewer order; use assign_ab")
    m = assignment.m
    if len(calibrations) != m:
        raise ValueError(f"{m} reviewers but {len(calibrations)} calibrations")
    half = m // 2
    order = assignment.reviewer_order
    y1 = tuple(
        float(evaluate(calibrations[j], x1, noise, rng)) for j in order[:half]
    )
    y2 = tuple(
        float(evaluate(calibrations[j], x2, noise, rng)) for j in order[half:]
    )
    return AbScores(y1, y2)


def upper_median(values: Sequence[float]) -> float:
    """The higher of the two central order statistics (the value itself for
    odd length)."""
    if not len(values):
        raise ValueError("need at least one value")
    ordered = sorted(values, reverse=True)
    return ordered[(len(ordered) + 1) // 2 - 1]


def sign_estimator(scores: AbScores, rng: np.random.Generator) -> PairOrder:
    """Count pairwise score wins for each item; most wins first."""
    wins1 = sum(a > b for a, b in zip(scores.item1, scores.item2))
    wins2 = sum(b > a for a, b in zip(scores.item1, scores.item2))
    if wins1 == wins2:
        return random_guess(rng)
    return PairOrder(1, 2) if wins1 > wins2 else PairOrder(2, 1)


def mean_estimator(scores: AbScores, rng: np.random.Generator) -> PairOrder:
    m1 = float(np.mean(scores.item1))
    m2 = float(np.mean(scores.item2))
    if m1 == m2:
        return random_guess(rng)
    return PairOrder(1, 2) if m1 > m2 else PairOrder(2, 1)


def median_estimator(scores: AbScores, rng: np.random.Generator) -> PairOrder:
    m1 = upper_median(scores.item1)
    m2 = upper_median(scores.item2)
    if m1 == m2:
        return random_guess(rng)
    return PairOrder(1, 2) if m1 > m2 else PairOrder(2, 1)


def majority_cardinal_estimator(
    scores: AbScores, w: WeightFunction, rng: np.random.Generator
) -> PairOrder:
    """Randomized two-item rule per score pair, then majority vote."""
    votes1 = 0
    for y1, y2 in zip(scores.item1, scores.item2):
        if canonical_estimate(y1, y2, w, rng).winner == 1:
            votes1 += 1
    votes2 = scores.pairs - votes1
    if votes1 == votes2:
        return random_guess(rng)
    return PairOrder(1, 2) if votes1 > votes2 else PairOrder(2, 1)


# ---------------------------------------------------------------------------
# exact evaluation


def exact_abtest_success(
    x1: float,
    x2: float,
    calibrations: Sequence[CalibrationFunction],
    w: WeightFunction,
    estimator: str,
) -> float:
    """Success probability of an A/B estimator, exactly.

    Averages over all m! reviewer permutations, the estimators' tie coins,
    and (for ``"majority"``) the per-pair randomization.  Noiseless scores;
    m <= 8.
    """
    if estimator not in AB_ESTIMATOR_NAMES:
        raise ValueError(f"unknown estimator {estimator!r}")
    if x1 == x2:
        raise ValueError("item values must differ")
    m = len(calibrations)
    if m < 2 or m % 2:
        raise ValueError(f"need an even number of reviewers >= 2, got {m}")
    if m > _EXACT_LIMIT:
        raise ValueError(f"exact evaluation supports m <= {_EXACT_LIMIT}, got {m}")
    if estimator == "random":
        return 0.5

    half = m // 2
    f_at_x1 = np.array([f(x1) for f in calibrations])
    f_at_x2 = np.array([f(x2) for f in calibrations])
    perms = np.array(list(permutations(range(m))))
    s1 = f_at_x1[perms[:, :half]]  # (m!, m/2) scores for item 1
    s2 = f_at_x2[perms[:, half:]]

    if estimator == "sign":
        wins1 = (s1 > s2).sum(axis=1)
        wins2 = (s2 > s1).sum(axis=1)
        p_first = np.where(wins1 == wins2, 0.5, (wins1 > wins2).astype(float))
    elif estimator == "mean":
        m1 = s1.mean(axis=1)
        m2 = s2.mean(axis=1)
        p_first = np.where(m1 == m2, 0.5, (m1 > m2).astype(float))
    elif estimator == "median":
        idx = half - (half + 1) // 2  # upper median within ascending order
        m1 = np.sort(s1, axis=1)[:, idx]
        m2 = np.sort(s2, axis=1)[:, idx]
        p_first = np.where(m1 == m2, 0.5, (m1 > m2).astype(float))
    else:  # majority
        pc = w_tilde(w, s1 - s2)  # per-pair P(vote for item 1)
        votes = np.zeros((len(perms), half + 1))
        votes[:, 0] = 1.0
        for k in range(half):
            p = pc[:, k][:, None]
            shifted = np.zeros_like(votes)
            shifted[:, 1:] = votes[:, :-1]
            votes = votes * (1.0 - p) + shifted * p
        counts = np.arange(half + 1)
        p_first = votes[:, counts > half / 2].sum(axis=1)
        if half % 2 == 0:
            p_first = p_first + 0.5 * votes[:, half // 2]

    p_correct = p_first if x1 > x2 else 1.0 - p_first
    return float(p_correct.mean())


# ---------------------------------------------------------------------------
# scenario presets


SCENARIO_NAMES = (
    "perfect",
    "one-biased",
    "incremental",
    "incremental-plus-biased",
)


def scenario_calibrations(name: str, m: int) -> tuple[CalibrationFunction, ...]:
    """Named miscalibration families, parameterized by the reviewer count.

    ``perfect``: everyone honest.  ``one-biased``: one reviewer inflates by
    m.  ``incremental``: reviewer j inflates by j (1-based).
    ``incremental-plus-biased``: reviewer j inflates by j - 1 and the last
    reviewer by m(m-1)/2, putting every aggregation baseline at exactly
    chance level.
    """
    if m < 1:
        raise ValueError(f"need at least one reviewer, got m={m}")
    ident = CalibrationFunction.identity()
    shift = CalibrationFunction.shift
    if name == "perfect":
        return (ident,) * m
    if name == "one-biased":
        return (ident,) * (m - 1) + (shift(m),)
    if name == "incremental":
        return tuple(shift(j) for j in range(1, m + 1))
    if name == "incremental-plus-biased":
        return tuple(shift(j - 1) for j in range(1, m)) + (shift(m * (m - 1) // 2),)
    raise ValueError(f"unknown scenario {name!r}")
