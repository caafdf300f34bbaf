"""Topological machinery and the adjacent-pair cardinal ranking estimator."""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np
import pytest

from calibrank.model import (
    Assignment,
    CalibrationFunction,
    Ranking,
    ScoreSet,
    WeightFunction,
    assign_pairs,
    collect_scores,
    deduce_ordinal,
    induced_ranking,
)
from calibrank.ranking import (
    CapacityError,
    ComparisonGraph,
    InconsistentObservationsError,
    LinearExtensionSampler,
    cardinal_rank_estimate,
    count_topological_orderings,
    enumerate_topological_orderings,
    is_topological_ordering,
    topological_order_index_ties,
    uniform_topological_ordering,
)

w1 = WeightFunction.ratio(1.0)


def graph(n, *edges):
    return ComparisonGraph(n, frozenset(edges))


def random_dag(n, rng, p=0.5):
    """Acyclic by construction: orient each kept pair along a hidden order."""
    order = rng.permutation(n)
    pos = {int(v): k for k, v in enumerate(order)}
    edges = set()
    for u, v in combinations(range(n), 2):
        if rng.random() < p:
            edges.add((u, v) if pos[u] < pos[v] else (v, u))
    return graph(n, *edges)


def brute_orderings(g):
    out = []
    for perm in permutations(range(g.n_items)):
        rank = {v: k for k, v in enumerate(perm)}
        if all(rank[w] < rank[l] for w, l in g.edges):
            out.append(Ranking(perm))
    return out


class TestGraph:
    def test_accessors(self):
        g = graph(3, (0, 2), (1, 2))
        assert g.successors == (frozenset({2}), frozenset({2}), frozenset())
        assert g.predecessors == (frozenset(), frozenset(), frozenset({0, 1}))

    def test_kahn_prefers_small_indices(self):
        assert topological_order_index_ties(graph(3, (0, 2), (1, 2))) == Ranking(
            (0, 1, 2)
        )
        assert topological_order_index_ties(graph(3, (2, 0))) == Ranking((1, 2, 0))

    def test_cycle_detected(self):
        with pytest.raises(InconsistentObservationsError):
            topological_order_index_ties(graph(3, (0, 1), (1, 2), (2, 0)))
        with pytest.raises(InconsistentObservationsError):
            enumerate_topological_orderings(graph(2, (0, 1), (1, 0)))

    def test_is_topological(self):
        g = graph(3, (0, 2), (1, 2))
        assert is_topological_ordering(Ranking((1, 0, 2)), g)
        assert not is_topological_ordering(Ranking((2, 0, 1)), g)
        with pytest.raises(ValueError):
            is_topological_ordering(Ranking((0, 1)), g)


class TestEnumerationAndCounting:
    def test_known_counts(self):
        assert len(enumerate_topological_orderings(graph(3))) == 6
        chain = graph(4, (0, 1), (1, 2), (2, 3))
        assert enumerate_topological_orderings(chain) == [Ranking((0, 1, 2, 3))]
        assert count_topological_orderings(chain) == 1
        assert count_topological_orderings(graph(4, (0, 1), (2, 3))) == 6

    def test_matches_brute_force(self):
        rng = np.random.default_rng(41)
        for _ in range(15):
            g = random_dag(int(rng.integers(2, 6)), rng)
            assert set(enumerate_topological_orderings(g)) == set(brute_orderings(g))

    def test_count_matches_enumeration(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            g = random_dag(int(rng.integers(2, 7)), rng, p=float(rng.random()))
            assert count_topological_orderings(g) == len(
                enumerate_topological_orderings(g)
            )

    def test_uniform_sampling_frequencies(self):
        rng = np.random.default_rng(43)
        g = graph(4, (0, 1), (2, 3))
        sampler = LinearExtensionSampler(g)
        support = set(enumerate_topological_orderings(g))
        counts = {r: 0 for r in support}
        draws = 12_000
        for _ in range(draws):
            counts[sampler.sample(rng)] += 1
        for c in counts.values():
            assert c / draws == pytest.approx(1 / 6, abs=0.02)

    def test_capacity_limits(self):
        with pytest.raises(CapacityError):
            enumerate_topological_orderings(graph(11))
        with pytest.raises(CapacityError):
            LinearExtensionSampler(graph(21))
        # 20 items is in range even though 20! orderings exist
        assert count_topological_orderings(graph(20)) == 2432902008176640000


class TestCardinalRankEstimate:
    # three items, two reviewers: 0 vs 2 and 1 vs 2.  The pair (0, 1) is
    # never compared, so the scan re-decides it from the held-out scores.
    values = (1.0, 0.0, -1.0)
    assignment = Assignment(3, ((0, 2), (1, 2)))

    def scores(self):
        cals = (CalibrationFunction.identity(),) * 2
        return collect_scores(self.values, cals, self.assignment)

    def test_recovery_rate_matches_two_item_rule(self):
        # the one re-decision sees scores 1.0 vs 0.0, so exact recovery
        # happens with probability (1 + 1/2) / 2 = 0.75
        rng = np.random.default_rng(44)
        scores = self.scores()
        truth = induced_ranking(self.values)
        trials = 50_000
        hits = sum(
            cardinal_rank_estimate(self.assignment, scores, w1, rng) == truth
            for _ in range(trials)
        )
        assert hits / trials == pytest.approx(0.75, abs=0.01)

    def test_audit_record(self):
        rng = np.random.default_rng(45)
        audit = []
        cardinal_rank_estimate(self.assignment, self.scores(), w1, rng, audit=audit)
        assert len(audit) == 1
        rec = audit[0]
        assert rec.position == 0
        assert rec.items == (0, 1)
        assert rec.reviewers == (0, 1)
        assert rec.scores == (1.0, 0.0)

    def test_outputs_stay_consistent(self):
        rng = np.random.default_rng(46)
        for _ in range(150):
            n = int(rng.integers(4, 9))
            total = n * (n - 1) // 2
            m = int(rng.integers(2, total))
            x = rng.normal(size=n)
            cals = tuple(
                CalibrationFunction.affine(
                    0.25 + 2.75 * rng.random(), rng.normal()
                )
                for _ in range(m)
            )
            assignment = assign_pairs(n, m, rng)
            scores = collect_scores(x, cals, assignment, rng=rng)
            g = ComparisonGraph.from_observations(deduce_ordinal(assignment, scores))
            for init in ("index-ties", "uniform-random"):
                result = cardinal_rank_estimate(assignment, scores, w1, rng, init=init)
                assert is_topological_ordering(result, g)

    def test_audit_invariants(self):
        rng = np.random.default_rng(47)
        for _ in range(80):
            n = int(rng.integers(5, 9))
            total = n * (n - 1) // 2
            m = int(rng.integers(4, total))
            x = rng.normal(size=n)
            cals = tuple(CalibrationFunction.shift(float(rng.normal())) for _ in range(m))
            assignment = assign_pairs(n, m, rng)
            scores = collect_scores(x, cals, assignment, rng=rng)
            audit = []
            cardinal_rank_estimate(assignment, scores, w1, rng, audit=audit)
            positions = [rec.position for rec in audit]
            assert positions == sorted(positions)
            assert all(b - a >= 2 for a, b in zip(positions, positions[1:]))
            used = []
            for rec in audit:
                ra, rb = rec.reviewers
                assert ra != rb
                # a reviewer's scores are retired wholesale after one use
                assert ra not in used and rb not in used
                used += [ra, rb]
                ia, ib = rec.items
                assert ia in assignment.items_per_reviewer[ra]
                assert ib in assignment.items_per_reviewer[rb]
                assert rec.scores == (scores.score(ra, ia), scores.score(rb, ib))

    def test_fully_compared_items_never_move(self):
        rng = np.random.default_rng(48)
        n = 4
        all_pairs = tuple((i, j) for i in range(n) for j in range(i + 1, n))
        assignment = Assignment(n, all_pairs)
        x = (0.4, 1.2, -0.3, 0.9)
        cals = tuple(CalibrationFunction.identity() for _ in all_pairs)
        scores = collect_scores(x, cals, assignment)
        truth = induced_ranking(x)
        for _ in range(20):
            audit = []
            result = cardinal_rank_estimate(assignment, scores, w1, rng, audit=audit)
            assert result == truth
            assert audit == []

    def test_unknown_init(self):
        rng = np.random.default_rng(49)
        with pytest.raises(ValueError):
            cardinal_rank_estimate(self.assignment, self.scores(), w1, rng, init="best")


def test_uniform_topological_ordering_is_consistent():
    rng = np.random.default_rng(50)
    g = graph(5, (0, 1), (1, 2), (3, 4))
    for _ in range(200):
        assert is_topological_ordering(uniform_topological_ordering(g, rng), g)
