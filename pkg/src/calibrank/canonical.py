"""The randomized two-item estimator.

Given two reported scores the estimator outputs "first item wins" with
probability ``w_tilde(y1 - y2)``, where ``w_tilde`` stretches a weight
function w on score gaps into a strictly increasing map on all of R with
``w_tilde(x) + w_tilde(-x) = 1``.  Equivalently: rank the higher-scored
item first with probability (1 + w(|y1 - y2|)) / 2, breaking an exact tie
with a fair coin — the two descriptions compose to the same law.

Whatever the two reviewers' strictly increasing calibrations are, the
probability of recovering the true order exceeds 1/2; see
:func:`canonical_success_probability` for the exact value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CalibrationFunction, WeightFunction

__all__ = [
    "PairOrder",
    "canonical_estimate",
    "canonical_estimate_batch",
    "canonical_success_probability",
    "exact_canonical_success",
    "random_guess",
    "sign_estimate_pair",
    "w_tilde",
]


@dataclass(frozen=True)
class PairOrder:
    """An ordering of two items, labelled 1 and 2 by argument position."""

    winner: int
    loser: int

    def __post_init__(self):
        if {self.winner, self.loser} != {1, 2}:
            raise ValueError(f"not an order on items 1, 2: {self}")


def w_tilde(w: WeightFunction, x):
    """Extend a weight function to signed gaps.

    (1 + w(x)) / 2 for x > 0, exactly 1/2 at x = 0, and (1 - w(-x)) / 2 for
    x < 0.  Accepts scalars or arrays.
    """
    if isinstance(x, (int, float)):
        xf = float(x)
        if xf > 0:
            return (1.0 + w(xf)) / 2.0
        if xf < 0:
            return (1.0 - w(-xf)) / 2.0
        return 0.5
    scalar = np.ndim(x) == 0
    arr = np.asarray(x, dtype=float)
    out = np.full(arr.shape, 0.5)
    pos = arr > 0
    neg = arr < 0
    if np.any(pos):
        out[pos] = (1.0 + w(arr[pos])) / 2.0
    if np.any(neg):
        out[neg] = (1.0 - w(-arr[neg])) / 2.0
    return float(out) if scalar else out


def canonical_estimate(
    y1: float, y2: float, w: WeightFunction, rng: np.random.Generator
) -> PairOrder:
    """Order two scored items; exactly one uniform variate is consumed."""
    if w_tilde(w, float(y1) - float(y2)) > rng.random():
        return PairOrder(1, 2)
    return PairOrder(2, 1)


def canonical_estimate_batch(
    y1, y2, w: WeightFunction, rng: np.random.Generator
) -> np.ndarray:
    """Vector form of :func:`canonical_estimate` over paired score arrays.

    Returns a boolean array, True where the first item won.  One uniform
    variate per pair, same law as the scalar call.
    """
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    p_first = w_tilde(w, y1 - y2)
    return rng.random(p_first.shape) < p_first


def random_guess(rng: np.random.Generator) -> PairOrder:
    """A fair coin between the two orders."""
    return PairOrder(1, 2) if rng.random() < 0.5 else PairOrder(2, 1)


def sign_estimate_pair(
    y1: float, y2: float, rng: np.random.Generator
) -> PairOrder:
    """Deterministically rank the higher score first; coin-flip an exact tie."""
    if y1 == y2:
        return random_guess(rng)
    return PairOrder(1, 2) if y1 > y2 else PairOrder(2, 1)


def canonical_success_probability(
    x1,
    x2,
    f1: CalibrationFunction,
    f2: CalibrationFunction,
    w: WeightFunction,
):
    """Exact probability that the estimator recovers the true order of two
    items with values x1 != x2, with the two reviewers assigned uniformly.

    The value is symmetric in (x1, x2), depends on the calibrations only
    through score gaps, and is strictly above 1/2 whenever both calibrations
    are strictly increasing.  Accepts scalars or arrays (elementwise).
    """
    scalar = np.ndim(x1) == 0 and np.ndim(x2) == 0
    a1 = np.asarray(x1, dtype=float)
    a2 = np.asarray(x2, dtype=float)
    if np.any(a1 == a2):
        raise ValueError("item values must differ")
    hi = np.maximum(a1, a2)
    lo = np.minimum(a1, a2)
    p = 0.5 * (1.0 + w_tilde(w, f1(hi) - f2(lo)) - w_tilde(w, f1(lo) - f2(hi)))
    return float(p) if scalar else p


def exact_canonical_success(
    x1: float,
    x2: float,
    f1: CalibrationFunction,
    f2: CalibrationFunction,
    w: WeightFunction,
    estimator: str = "canonical",
) -> float:
    """Exact success probability in the two-reviewer setting for the
    randomized estimator or its baselines.

    ``"sign"`` deterministically ranks the higher score first (fair coin on
    an exact tie), averaged over the two equally likely reviewer
    assignments; ``"random"`` ignores the scores entirely.
    """
    if estimator == "canonical":
        return canonical_success_probability(x1, x2, f1, f2, w)
    if estimator == "random":
        return 0.5
    if estimator != "sign":
        raise ValueError(f"unknown estimator {estimator!r}")
    if x1 == x2:
        raise ValueError("item values must differ")
    total = 0.0
    for y1, y2 in ((f1(x1), f2(x2)), (f2(x1), f1(x2))):
        p_first = 0.5 if y1 == y2 else float(y1 > y2)
        total += p_first if x1 > x2 else 1.0 - p_first
    return total / 2.0
