"""Core domain model: item values, reviewer calibrations, noise, assignments,
scores, and the ordinal observations deduced from them.

Conventions used across the package:

* item and reviewer indices are 0-based inside the library; anything that
  leaves the library (reports, CLI text) speaks 1-based where item labels
  appear at all;
* every stochastic operation takes an explicit ``numpy.random.Generator``;
  nothing in the library ever touches ambient entropy;
* all model objects are immutable after construction and safe to share
  across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Assignment",
    "CalibrationFunction",
    "DegenerateTieError",
    "ItemValues",
    "NoiseModel",
    "OrdinalObservations",
    "Ranking",
    "ScoreSet",
    "WeightFunction",
    "assign_ab",
    "assign_pairs",
    "collect_scores",
    "deduce_ordinal",
    "evaluate",
    "induced_ranking",
]


class DegenerateTieError(ValueError):
    """Raised when two scores that must be compared are exactly equal."""


def _is_scalar(x) -> bool:
    return np.ndim(x) == 0


# ---------------------------------------------------------------------------
# calibration functions


@dataclass(frozen=True)
class CalibrationFunction:
    """A strictly increasing distortion a reviewer applies to latent values.

    Use the constructors :meth:`identity`, :meth:`shift`, :meth:`affine` or
    :meth:`piecewise_linear`.  All variants are defined on the whole real
    line (piecewise tables extrapolate with their end slopes) and accept
    scalars or numpy arrays.
    """

    kind: str
    params: tuple[float, ...] = ()
    knots: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "identity":
            pass
        elif self.kind == "shift":
            (c,) = self.params
            if not math.isfinite(c):
                raise ValueError("shift offset must be finite")
        elif self.kind == "affine":
            k, b = self.params
            if not (math.isfinite(k) and math.isfinite(b)):
                raise ValueError("affine parameters must be finite")
            if k <= 0:
                raise ValueError(f"affine slope must be positive, got {k}")
        elif self.kind == "piecewise-linear":
            pts = self.knots
            if len(pts) < 2:
                raise ValueError("piecewise-linear table needs at least two knots")
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            if any(not (math.isfinite(a) and math.isfinite(b)) for a, b in pts):
                raise ValueError("knots must be finite")
            if any(x1 >= x2 for x1, x2 in zip(xs, xs[1:])):
                raise ValueError("knot x-coordinates must be strictly increasing")
            if any(y1 >= y2 for y1, y2 in zip(ys, ys[1:])):
                raise ValueError("knot y-coordinates must be strictly increasing")
        else:
            raise ValueError(f"unknown calibration kind {self.kind!r}")

    @classmethod
    def identity(cls) -> "CalibrationFunction":
        return cls("identity")

    @classmethod
    def shift(cls, offset: float) -> "CalibrationFunction":
        """f(x) = x + offset."""
        return cls("shift", (float(offset),))

    @classmethod
    def affine(cls, slope: float, intercept: float = 0.0) -> "CalibrationFunction":
        """f(x) = slope * x + intercept with slope > 0."""
        return cls("affine", (float(slope), float(intercept)))

    @classmethod
    def piecewise_linear(
        cls, knots: Iterable[tuple[float, float]]
    ) -> "CalibrationFunction":
        """Linear interpolation through ``knots``, end slopes extended outward."""
        return cls("piecewise-linear", knots=tuple((float(x), float(y)) for x, y in knots))

    def __call__(self, x):
        if isinstance(x, (int, float)):  # fast path for the per-score loops
            if self.kind == "identity":
                return float(x)
            if self.kind == "shift":
                return float(x) + self.params[0]
            if self.kind == "affine":
                k, b = self.params
                return k * float(x) + b
        scalar = _is_scalar(x)
        arr = np.asarray(x, dtype=float)
        if self.kind == "identity":
            out = arr.copy()
        elif self.kind == "shift":
            out = arr + self.params[0]
        elif self.kind == "affine":
            k, b = self.params
            out = k * arr + b
        else:
            xs = np.array([p[0] for p in self.knots])
            ys = np.array([p[1] for p in self.knots])
            out = np.interp(arr, xs, ys)
            lo_slope = (ys[1] - ys[0]) / (xs[1] - xs[0])
            hi_slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            below = arr < xs[0]
            above = arr > xs[-1]
            out = np.where(below, ys[0] + lo_slope * (arr - xs[0]), out)
            out = np.where(above, ys[-1] + hi_slope * (arr - xs[-1]), out)
        return float(out) if scalar else out


# ---------------------------------------------------------------------------
# weight functions


@dataclass(frozen=True)
class WeightFunction:
    """Strictly increasing map from score gaps in [0, inf) into [0, 1).

    ``ratio(gamma)`` is w(x) = gamma x / (1 + gamma x); ``logistic()`` is
    w(x) = 2 / (1 + e^-x) - 1; ``table(...)`` interpolates user samples.
    """

    kind: str
    gamma: float = 1.0
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "ratio":
            if not (self.gamma > 0 and math.isfinite(self.gamma)):
                raise ValueError(f"ratio weight needs gamma > 0, got {self.gamma}")
        elif self.kind == "logistic":
            pass
        elif self.kind == "table":
            pts = self.points
            if len(pts) < 2:
                raise ValueError("weight table needs at least two samples")
            if pts[0][0] != 0.0:
                raise ValueError("weight table must start at x = 0")
            xs = [p[0] for p in pts]
            ys = [p[1] for p in pts]
            if any(a >= b for a, b in zip(xs, xs[1:])):
                raise ValueError("table x-coordinates must be strictly increasing")
            if any(a >= b for a, b in zip(ys, ys[1:])):
                raise ValueError("table values must be strictly increasing")
            if ys[0] < 0 or ys[-1] >= 1:
                raise ValueError("table values must lie in [0, 1)")
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")

    @classmethod
    def ratio(cls, gamma: float = 1.0) -> "WeightFunction":
        return cls("ratio", gamma=float(gamma))

    @classmethod
    def logistic(cls) -> "WeightFunction":
        return cls("logistic")

    @classmethod
    def table(cls, points: Iterable[tuple[float, float]]) -> "WeightFunction":
        return cls("table", points=tuple((float(x), float(y)) for x, y in points))

    def __call__(self, x):
        if isinstance(x, (int, float)):
            xf = float(x)
            if xf < 0:
                raise ValueError("weight functions are defined on [0, inf)")
            if self.kind == "ratio":
                g = self.gamma
                return g * xf / (1.0 + g * xf)
            if self.kind == "logistic":
                return math.tanh(xf / 2.0)  # == 2/(1+e^-x) - 1, better conditioned
        scalar = _is_scalar(x)
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0):
            raise ValueError("weight functions are defined on [0, inf)")
        if self.kind == "ratio":
            g = self.gamma
            out = g * arr / (1.0 + g * arr)
        elif self.kind == "logistic":
            out = np.tanh(arr / 2.0)
        else:
            xs = np.array([p[0] for p in self.points])
            ys = np.array([p[1] for p in self.points])
            # flat beyond the last sample; callers wanting more detail supply it
            out = np.interp(arr, xs, ys)
        return float(out) if scalar else out


# ---------------------------------------------------------------------------
# noise


@dataclass(frozen=True)
class NoiseModel:
    """Additive i.i.d. score noise: none, centered gaussian, or centered uniform."""

    kind: str = "none"
    scale: float = 0.0

    def __post_init__(self):
        if self.kind == "none":
            pass
        elif self.kind in ("gaussian", "uniform"):
            if not (self.scale > 0 and math.isfinite(self.scale)):
                raise ValueError(f"{self.kind} noise needs a positive scale")
        else:
            raise ValueError(f"unknown noise kind {self.kind!r}")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls("none")

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseModel":
        return cls("gaussian", float(sigma))

    @classmethod
    def uniform(cls, half_width: float) -> "NoiseModel":
        """Uniform on [-half_width, +half_width]."""
        return cls("uniform", float(half_width))

    def sample(self, rng: np.random.Generator | None, size=None):
        if self.kind == "none":
            return 0.0 if size is None else np.zeros(size)
        if rng is None:
            raise ValueError("a random generator is required to sample noise")
        if self.kind == "gaussian":
            return rng.normal(0.0, self.scale, size)
        return rng.uniform(-self.scale, self.scale, size)


# ---------------------------------------------------------------------------
# values and rankings


@dataclass(frozen=True)
class ItemValues:
    """Latent item values; pairwise distinct so the true ranking is unique."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise ValueError("need at least two items")
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("item values must be finite")
        if len(set(self.values)) != len(self.values):
            raise ValueError("item values must be pairwise distinct")

    @classmethod
    def of(cls, values: Sequence[float]) -> "ItemValues":
        return cls(tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


@dataclass(frozen=True)
class Ranking:
    """A total order on n items, best first.

    ``item_at_rank[t]`` is the item occupying rank t; ``rank_of_item[i]``
    inverts it.  Both are 0-based.
    """

    item_at_rank: tuple[int, ...]

    def __post_init__(self):
        n = len(self.item_at_rank)
        if sorted(self.item_at_rank) != list(range(n)):
            raise ValueError(f"not a permutation of 0..{n - 1}: {self.item_at_rank}")

    @classmethod
    def from_item_at_rank(cls, seq: Sequence[int]) -> "Ranking":
        return cls(tuple(int(i) for i in seq))

    @classmethod
    def from_rank_of_item(cls, seq: Sequence[int]) -> "Ranking":
        inv = [0] * len(seq)
        for item, rank in enumerate(seq):
            inv[int(rank)] = item
        return cls(tuple(inv))

    @cached_property
    def rank_of_item(self) -> tuple[int, ...]:
        inv = [0] * len(self.item_at_rank)
        for rank, item in enumerate(self.item_at_rank):
            inv[item] = rank
        return tuple(inv)

    @property
    def n(self) -> int:
        return len(self.item_at_rank)

    def rank_of(self, item: int) -> int:
        return self.rank_of_item[item]


def induced_ranking(values: ItemValues | Sequence[float]) -> Ranking:
    """The unique descending ranking of distinct values."""
    if not isinstance(values, ItemValues):
        values = ItemValues.of(values)
    order = np.argsort(-values.as_array(), kind="stable")
    return Ranking(tuple(int(i) for i in order))


# ---------------------------------------------------------------------------
# assignments


@dataclass(frozen=True)
class Assignment:
    """Which items each reviewer grades.

    ``reviewer_order`` is set by :func:`assign_ab` only: it records the
    uniform permutation of reviewers whose first half graded item 0, which
    fixes how scores pair up downstream.
    """

    n_items: int
    items_per_reviewer: tuple[tuple[int, ...], ...]
    reviewer_order: tuple[int, ...] | None = None

    def __post_init__(self):
        for items in self.items_per_reviewer:
            if len(set(items)) != len(items):
                raise ValueError("a reviewer cannot grade the same item twice")
            if any(not 0 <= i < self.n_items for i in items):
                raise ValueError("item index out of range")

    @property
    def m(self) -> int:
        return len(self.items_per_reviewer)


def assign_ab(m: int, rng: np.random.Generator) -> Assignment:
    """Uniformly split an even number of reviewers between two items.

    The permuted order is retained: the k-th reviewer in it grades item 0
    for k < m/2 and item 1 otherwise, and the k-th scores of each half are
    the ones paired by the per-pair estimators.
    """
    if m < 2 or m % 2:
        raise ValueError(f"need an even number of reviewers >= 2, got {m}")
    perm = [int(j) for j in rng.permutation(m)]
    half = m // 2
    items = [()] * m
    for k, j in enumerate(perm):
        items[j] = (0,) if k < half else (1,)
    return Assignment(2, tuple(items), reviewer_order=tuple(perm))


def assign_pairs(n: int, m: int, rng: np.random.Generator) -> Assignment:
    """Give each of m reviewers a distinct unordered pair, uniformly without
    replacement among all n-choose-2 pairs."""
    total = n * (n - 1) // 2
    if n < 2:
        raise ValueError(f"need at least two items, got n={n}")
    if not 1 < m < total:
        raise ValueError(
            f"reviewer count must satisfy 1 < m < {total} for n={n}, got m={m}"
        )
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = rng.choice(total, size=m, replace=False)
    return Assignment(n, tuple(pairs[int(k)] for k in chosen))


# ---------------------------------------------------------------------------
# scores


def evaluate(
    f: CalibrationFunction,
    x,
    noise: NoiseModel = NoiseModel.none(),
    rng: np.random.Generator | None = None,
):
    """A reviewer's reported score: f(x) plus one noise draw per entry.

    ``x`` may be a scalar or an array (one independent noise draw each).
    """
    y = f(x)
    if noise.kind == "none":
        return y
    return y + noise.sample(rng, None if _is_scalar(x) else np.shape(x))


@dataclass(frozen=True)
class ScoreSet:
    """All reported scores, keyed by reviewer then item."""

    by_reviewer: tuple[tuple[tuple[int, float], ...], ...]

    @property
    def m(self) -> int:
        return len(self.by_reviewer)

    def score(self, reviewer: int, item: int) -> float:
        for i, y in self.by_reviewer[reviewer]:
            if i == item:
                return y
        raise KeyError(f"reviewer {reviewer} did not grade item {item}")

    def entries_for_item(self, item: int) -> list[tuple[int, float]]:
        """(reviewer, score) pairs for one item, in reviewer order."""
        return [
            (j, y)
            for j, graded in enumerate(self.by_reviewer)
            for i, y in graded
            if i == item
        ]


def collect_scores(
    values: ItemValues | Sequence[float],
    calibrations: Sequence[CalibrationFunction],
    assignment: Assignment,
    noise: NoiseModel = NoiseModel.none(),
    rng: np.random.Generator | None = None,
) -> ScoreSet:
    """Run the grading process: reviewer j scores each assigned item i as
    evaluate(f_j, x_i)."""
    if not isinstance(values, ItemValues):
        values = ItemValues.of(values)
    if len(calibrations) != assignment.m:
        raise ValueError(
            f"{assignment.m} reviewers but {len(calibrations)} calibrations"
        )
    if len(values) != assignment.n_items:
        raise ValueError(f"{assignment.n_items} items but {len(values)} values")
    rows = []
    for j, items in enumerate(assignment.items_per_reviewer):
        f = calibrations[j]
        rows.append(
            tuple((i, float(evaluate(f, values[i], noise, rng))) for i in items)
        )
    return ScoreSet(tuple(rows))


# ---------------------------------------------------------------------------
# ordinal observations


@dataclass(frozen=True)
class OrdinalObservations:
    """Pairwise outcomes deduced from scores: (winner, loser) per graded pair."""

    n_items: int
    comparisons: frozenset[tuple[int, int]]

    def __post_init__(self):
        seen = set()
        for w, l in self.comparisons:
            if w == l or not (0 <= w < self.n_items and 0 <= l < self.n_items):
                raise ValueError(f"bad comparison ({w}, {l})")
            key = frozenset((w, l))
            if key in seen:
                raise ValueError(f"pair {set(key)} observed twice")
            seen.add(key)

    def outcome(self, i: int, j: int) -> bool | None:
        """True if i beat j, False if j beat i, None if never compared."""
        if (i, j) in self.comparisons:
            return True
        if (j, i) in self.comparisons:
            return False
        return None

    def compared(self, i: int, j: int) -> bool:
        return self.outcome(i, j) is not None


def deduce_ordinal(assignment: Assignment, scores: ScoreSet) -> OrdinalObservations:
    """Convert each reviewer's two scores into a pairwise outcome.

    Exact score ties are a hard error: the downstream estimators are defined
    only for strict outcomes, and under continuous values or noise a tie has
    probability zero, so one occurring means the inputs are degenerate.
    """
    if scores.m != assignment.m:
        raise ValueError("scores and assignment disagree on reviewer count")
    out = set()
    pairs_seen = set()
    for j, items in enumerate(assignment.items_per_reviewer):
        if len(items) != 2:
            raise ValueError(
                f"reviewer {j} graded {len(items)} items; pairwise deduction "
                "needs exactly two"
            )
        i1, i2 = items
        key = frozenset(items)
        if key in pairs_seen:
            raise ValueError(f"pair {set(key)} assigned to more than one reviewer")
        pairs_seen.add(key)
        y1, y2 = scores.score(j, i1), scores.score(j, i2)
        if y1 == y2:
            raise DegenerateTieError(
                f"reviewer {j} scored items {i1} and {i2} identically ({y1})"
            )
        out.add((i1, i2) if y1 > y2 else (i2, i1))
    return OrdinalObservations(assignment.n_items, frozenset(out))
