"""Metric losses on rankings and the rearrange-then-flip estimator.

When two items were never compared directly and every comparison either of
them took part in went the same way against the same opponents, the
observations treat them as interchangeable: any consistent ranking stays
consistent when they swap.  The estimator below exploits one such pair.  It
first rearranges the ranking so that everything forced above the pair sits
above it and everything forced below sits below (which can only shrink
Kendall-tau and footrule distance to any consistent truth), then draws one
score for each of the two items and lets the randomized two-item rule
re-decide their relative order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .canonical import canonical_estimate
from .model import (
    Assignment,
    OrdinalObservations,
    Ranking,
    ScoreSet,
    WeightFunction,
    deduce_ordinal,
)
from .ranking import ComparisonGraph, topological_order_index_ties

__all__ = [
    "ContractViolationError",
    "IdenticalPair",
    "are_topologically_identical",
    "find_topologically_identical_pair",
    "index_ties_baseline",
    "kendall_tau",
    "metric_rank_estimate",
    "reachable_above",
    "reachable_below",
    "rearrange",
    "spearman_footrule",
]


class ContractViolationError(ValueError):
    """An operation was applied to a pair that is not topologically identical."""


def _check_same_n(r1: Ranking, r2: Ranking) -> None:
    if r1.n != r2.n:
        raise ValueError(f"rankings of different sizes: {r1.n} vs {r2.n}")


def kendall_tau(r1: Ranking, r2: Ranking) -> int:
    """Number of item pairs the two rankings order oppositely."""
    _check_same_n(r1, r2)
    a = np.asarray(r1.rank_of_item)
    b = np.asarray(r2.rank_of_item)
    i, j = np.triu_indices(r1.n, k=1)
    return int(np.sum((a[i] - a[j]) * (b[i] - b[j]) < 0))


def spearman_footrule(r1: Ranking, r2: Ranking) -> int:
    """Total displacement: sum over items of |rank difference|."""
    _check_same_n(r1, r2)
    a = np.asarray(r1.rank_of_item)
    b = np.asarray(r2.rank_of_item)
    return int(np.sum(np.abs(a - b)))


def _reachable(graph: ComparisonGraph, item: int, forward: bool) -> frozenset[int]:
    step = graph.successors if forward else graph.predecessors
    seen = {item}
    queue = deque([item])
    while queue:
        v = queue.popleft()
        for u in step[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    seen.discard(item)
    return frozenset(seen)


def reachable_above(graph: ComparisonGraph, item: int) -> frozenset[int]:
    """Items forced above ``item``: everything with a directed path to it."""
    return _reachable(graph, item, forward=False)


def reachable_below(graph: ComparisonGraph, item: int) -> frozenset[int]:
    """Items forced below ``item``: everything it has a directed path to."""
    return _reachable(graph, item, forward=True)


def are_topologically_identical(
    obs: OrdinalObservations, i: int, j: int
) -> bool:
    """True iff i and j were never compared and are indistinguishable in the
    observations: the same opponents, with the same outcomes."""
    if i == j:
        raise ValueError("need two distinct items")
    if obs.compared(i, j):
        return False
    return all(
        obs.outcome(i, other) == obs.outcome(j, other)
        for other in range(obs.n_items)
        if other != i and other != j
    )


@dataclass(frozen=True)
class IdenticalPair:
    """A topologically identical pair plus the items forced above/below it."""

    first: int
    second: int
    above: frozenset[int]
    below: frozenset[int]


def find_topologically_identical_pair(
    obs: OrdinalObservations, scores: ScoreSet | None = None
) -> IdenticalPair | None:
    """Lexicographically first identical pair, optionally requiring that both
    items hold at least one score.  None when no pair qualifies."""
    graph = ComparisonGraph.from_observations(obs)
    for i in range(obs.n_items):
        if scores is not None and not scores.entries_for_item(i):
            continue
        for j in range(i + 1, obs.n_items):
            if scores is not None and not scores.entries_for_item(j):
                continue
            if are_topologically_identical(obs, i, j):
                # identical direct neighbourhoods force identical reachability
                return IdenticalPair(
                    i,
                    j,
                    above=reachable_above(graph, i),
                    below=reachable_below(graph, i),
                )
    return None


def rearrange(
    initial: Ranking, pair: IdenticalPair, obs: OrdinalObservations
) -> Ranking:
    """Regroup the positions occupied by the pair and everything forced
    above or below it: forced-above items first, then the pair (keeping its
    current relative order), then forced-below items, each group keeping its
    internal order.  All other items stay where they are.

    Never increases Kendall-tau or footrule distance to any ranking that is
    consistent with the observations; if ``initial`` is consistent, the
    result is too.
    """
    if not are_topologically_identical(obs, pair.first, pair.second):
        raise ContractViolationError(
            f"items {pair.first} and {pair.second} are not topologically identical"
        )
    graph = ComparisonGraph.from_observations(obs)
    if pair.above != reachable_above(graph, pair.first) or pair.below != reachable_below(
        graph, pair.first
    ):
        raise ContractViolationError("pair's above/below sets do not match the observations")

    by_rank = lambda item: initial.rank_of(item)
    duo = sorted((pair.first, pair.second), key=by_rank)
    affected = sorted(pair.above | pair.below | set(duo), key=by_rank)
    slots = [initial.rank_of(item) for item in affected]
    occupants = (
        sorted(pair.above, key=by_rank) + duo + sorted(pair.below, key=by_rank)
    )
    order = list(initial.item_at_rank)
    for slot, item in zip(slots, occupants):
        order[slot] = item
    return Ranking(tuple(order))


def index_ties_baseline(obs: OrdinalObservations) -> Ranking:
    """The deterministic consistent ordering; the default ordinal opener."""
    return topological_order_index_ties(ComparisonGraph.from_observations(obs))


def metric_rank_estimate(
    assignment: Assignment,
    scores: ScoreSet,
    w: WeightFunction,
    rng: np.random.Generator,
    ordinal=index_ties_baseline,
    process_all: bool = False,
) -> Ranking:
    """Improve an ordinal ranking in expectation under Kendall-tau and
    footrule loss.

    ``ordinal``: any callable from observations to a :class:`Ranking`
    (close over your own generator for randomized openers).  Scores are
    drawn but never consumed: each of the pair's items contributes one
    score sampled uniformly over the reviewers who graded it.  By default
    only the first identical pair is processed; ``process_all=True``
    continues through later pairs disjoint from those already handled.
    """
    obs = deduce_ordinal(assignment, scores)
    current = ordinal(obs)
    used: set[int] = set()
    for i in range(obs.n_items):
        entries_i = scores.entries_for_item(i)
        if i in used or not entries_i:
            continue
        for j in range(i + 1, obs.n_items):
            if j in used or not scores.entries_for_item(j):
                continue
            if not are_topologically_identical(obs, i, j):
                continue
            graph = ComparisonGraph.from_observations(obs)
            pair = IdenticalPair(
                i, j, reachable_above(graph, i), reachable_below(graph, i)
            )
            current = rearrange(current, pair, obs)
            entries_j = scores.entries_for_item(j)
            _, y_i = entries_i[int(rng.integers(len(entries_i)))]
            _, y_j = entries_j[int(rng.integers(len(entries_j)))]
            hi, lo = (i, j) if current.rank_of(i) < current.rank_of(j) else (j, i)
            y_hi, y_lo = (y_i, y_j) if hi == i else (y_j, y_i)
            if canonical_estimate(y_hi, y_lo, w, rng).winner == 2:
                order = list(current.item_at_rank)
                ri, rj = current.rank_of(hi), current.rank_of(lo)
                order[ri], order[rj] = lo, hi
                current = Ranking(tuple(order))
            used.update((i, j))
            break
        if used and not process_all:
            break
    return current
