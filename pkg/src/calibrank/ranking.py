"""Ranking from pairwise comparisons: the observation graph, topological
orderings, exact uniform sampling of them, and the cardinal estimator that
re-examines adjacent ranks with held-out scores.

The estimator improves on purely ordinal ranking wherever the observations
leave adjacent items unordered: it walks the initial ordering left to right
and, whenever swapping the adjacent pair would still respect every observed
comparison and both items still have unused scores, it draws one score for
each and lets the randomized two-item rule decide their order.  The two
supplying reviewers are then retired entirely, which keeps every decision
based on fresh scores.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property

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

__all__ = [
    "CapacityError",
    "ComparisonGraph",
    "FlippableRecord",
    "InconsistentObservationsError",
    "LinearExtensionSampler",
    "cardinal_rank_estimate",
    "count_topological_orderings",
    "enumerate_topological_orderings",
    "is_topological_ordering",
    "topological_order_index_ties",
    "uniform_topological_ordering",
]

_ENUM_LIMIT = 10
_SAMPLE_LIMIT = 20


class InconsistentObservationsError(ValueError):
    """The pairwise outcomes contain a cycle and admit no consistent order."""


class CapacityError(ValueError):
    """The requested exact computation exceeds the supported problem size."""


@dataclass(frozen=True)
class ComparisonGraph:
    """Directed graph with an edge winner -> loser per observed comparison."""

    n_items: int
    edges: frozenset[tuple[int, int]]

    @classmethod
    def from_observations(cls, obs: OrdinalObservations) -> "ComparisonGraph":
        return cls(obs.n_items, obs.comparisons)

    @cached_property
    def successors(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.n_items)]
        for w, l in self.edges:
            out[w].add(l)
        return tuple(frozenset(s) for s in out)

    @cached_property
    def predecessors(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.n_items)]
        for w, l in self.edges:
            out[l].add(w)
        return tuple(frozenset(s) for s in out)


def topological_order_index_ties(graph: ComparisonGraph) -> Ranking:
    """Kahn's algorithm, always emitting the smallest ready item index.

    Deterministic; raises :class:`InconsistentObservationsError` on a cycle.
    """
    indegree = [len(graph.predecessors[v]) for v in range(graph.n_items)]
    ready = [v for v, d in enumerate(indegree) if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for u in graph.successors[v]:
            indegree[u] -= 1
            if indegree[u] == 0:
                heapq.heappush(ready, u)
    if len(order) != graph.n_items:
        raise InconsistentObservationsError("comparison outcomes contain a cycle")
    return Ranking(tuple(order))


def is_topological_ordering(ranking: Ranking, graph: ComparisonGraph) -> bool:
    """True iff every observed winner is ranked above its loser."""
    if ranking.n != graph.n_items:
        raise ValueError("ranking and graph disagree on item count")
    rank = ranking.rank_of_item
    return all(rank[w] < rank[l] for w, l in graph.edges)


def enumerate_topological_orderings(graph: ComparisonGraph) -> list[Ranking]:
    """All rankings consistent with the observations (n <= 10)."""
    n = graph.n_items
    if n > _ENUM_LIMIT:
        raise CapacityError(f"enumeration supports n <= {_ENUM_LIMIT}, got {n}")
    topological_order_index_ties(graph)  # cycle check
    indegree = [len(graph.predecessors[v]) for v in range(n)]
    out: list[Ranking] = []
    prefix: list[int] = []

    def extend():
        if len(prefix) == n:
            out.append(Ranking(tuple(prefix)))
            return
        for v in range(n):
            if indegree[v] == 0:
                indegree[v] = -1
                prefix.append(v)
                for u in graph.successors[v]:
                    indegree[u] -= 1
                extend()
                for u in graph.successors[v]:
                    indegree[u] += 1
                prefix.pop()
                indegree[v] = 0

    extend()
    return out


class LinearExtensionSampler:
    """Exact uniform sampling of topological orderings via counting.

    Counts extensions of every reachable suffix set of items once (lazy
    bitmask recursion), then draws rankings with the counts as weights.
    Supports n <= 20; the counting table is reused across draws.
    """

    def __init__(self, graph: ComparisonGraph):
        n = graph.n_items
        if n > _SAMPLE_LIMIT:
            raise CapacityError(f"sampling supports n <= {_SAMPLE_LIMIT}, got {n}")
        topological_order_index_ties(graph)  # cycle check
        self._n = n
        self._pred_mask = [0] * n
        for w, l in graph.edges:
            self._pred_mask[l] |= 1 << w
        self._memo: dict[int, int] = {0: 1}

    def _count(self, mask: int) -> int:
        cached = self._memo.get(mask)
        if cached is not None:
            return cached
        total = 0
        for v in range(self._n):
            bit = 1 << v
            if mask & bit and not (self._pred_mask[v] & mask):
                total += self._count(mask & ~bit)
        self._memo[mask] = total
        return total

    def count(self) -> int:
        """Number of topological orderings."""
        return self._count((1 << self._n) - 1)

    def sample(self, rng: np.random.Generator) -> Ranking:
        mask = (1 << self._n) - 1
        order = []
        while mask:
            sources = [
                v
                for v in range(self._n)
                if mask & (1 << v) and not (self._pred_mask[v] & mask)
            ]
            weights = [self._count(mask & ~(1 << v)) for v in sources]
            r = int(rng.integers(sum(weights)))
            for v, wt in zip(sources, weights):
                r -= wt
                if r < 0:
                    order.append(v)
                    mask &= ~(1 << v)
                    break
        return Ranking(tuple(order))


def count_topological_orderings(graph: ComparisonGraph) -> int:
    return LinearExtensionSampler(graph).count()


def uniform_topological_ordering(
    graph: ComparisonGraph, rng: np.random.Generator
) -> Ranking:
    """One exactly-uniform draw among all consistent rankings (n <= 20).

    This is the minimax-optimal purely ordinal estimator under a uniform
    prior: given the observations, every consistent ranking is equally
    likely to be the truth, so nothing better than a uniform draw exists
    without scores.
    """
    return LinearExtensionSampler(graph).sample(rng)


@dataclass(frozen=True)
class FlippableRecord:
    """Audit record of one adjacent re-examination during the scan.

    ``position`` is the left rank of the pair (0-based); ``items``,
    ``reviewers`` and ``scores`` are the pair examined, the two reviewers
    whose scores were drawn (and then retired), and the drawn scores.
    """

    position: int
    items: tuple[int, int]
    reviewers: tuple[int, int]
    scores: tuple[float, float]


def cardinal_rank_estimate(
    assignment: Assignment,
    scores: ScoreSet,
    w: WeightFunction,
    rng: np.random.Generator,
    init: str = "index-ties",
    audit: list[FlippableRecord] | None = None,
) -> Ranking:
    """Rank items from pairwise scores, re-deciding unordered adjacent pairs.

    ``init`` selects the starting consistent ordering: ``"index-ties"`` is
    the deterministic Kahn order, ``"uniform-random"`` a uniform draw among
    all consistent orderings (needs n <= 20).  Pass a list as ``audit`` to
    receive a :class:`FlippableRecord` per re-examined pair.
    """
    obs = deduce_ordinal(assignment, scores)
    graph = ComparisonGraph.from_observations(obs)
    if init == "index-ties":
        order = list(topological_order_index_ties(graph).item_at_rank)
    elif init == "uniform-random":
        order = list(uniform_topological_ordering(graph, rng).item_at_rank)
    else:
        raise ValueError(f"unknown init {init!r}")

    n = graph.n_items
    pool: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for j, graded in enumerate(scores.by_reviewer):
        for i, y in graded:
            pool[i].append((j, y))

    def retire(reviewer: int) -> None:
        for i in assignment.items_per_reviewer[reviewer]:
            pool[i] = [(j, y) for j, y in pool[i] if j != reviewer]

    t = 0
    while t < n - 1:
        a, b = order[t], order[t + 1]
        # the swap stays consistent iff there is no direct a -> b edge
        # (b -> a would contradict the current ordering)
        if (a, b) not in graph.edges and pool[a] and pool[b]:
            rev_a, y_a = pool[a][int(rng.integers(len(pool[a])))]
            rev_b, y_b = pool[b][int(rng.integers(len(pool[b])))]
            # a reviewer holding both a and b would have forced a direct
            # edge, so the two draws cannot collide
            assert rev_a != rev_b, "sampled the same reviewer for both items"
            retire(rev_a)
            retire(rev_b)
            if canonical_estimate(y_a, y_b, w, rng).winner == 2:
                order[t], order[t + 1] = b, a
            if audit is not None:
                audit.append(FlippableRecord(t, (a, b), (rev_a, rev_b), (y_a, y_b)))
            t += 2
        else:
            t += 1
    return Ranking(tuple(order))
