"""Core model: calibrations, weights, noise, assignments, deduction."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from calibrank.model import (
    Assignment,
    CalibrationFunction,
    DegenerateTieError,
    ItemValues,
    NoiseModel,
    Ranking,
    WeightFunction,
    assign_ab,
    assign_pairs,
    collect_scores,
    deduce_ordinal,
    evaluate,
    induced_ranking,
)

ident = CalibrationFunction.identity()


# ---------------------------------------------------------------------------
# calibrations


def test_calibration_values():
    assert ident(1.25) == 1.25
    assert CalibrationFunction.shift(2.0)(-1.0) == 1.0
    assert CalibrationFunction.affine(2.0, 1.0)(3.0) == 7.0
    f = CalibrationFunction.piecewise_linear([(0, 0), (1, 2), (3, 3)])
    assert f(0.5) == 1.0
    assert f(2.0) == 2.5
    # end slopes extend beyond the table
    assert f(-1.0) == -2.0
    assert f(4.0) == 3.5


def test_calibration_vectorized_matches_scalar():
    fs = [
        ident,
        CalibrationFunction.shift(-0.7),
        CalibrationFunction.affine(0.3, 2.0),
        CalibrationFunction.piecewise_linear([(-1, -2), (0, 0), (2, 1)]),
    ]
    xs = np.linspace(-3, 3, 13)
    for f in fs:
        np.testing.assert_allclose(f(xs), [f(float(x)) for x in xs])


@given(
    st.floats(-100, 100),
    st.floats(-50, 50),
    st.floats(min_value=1e-2, max_value=100),
)
def test_calibration_strictly_increasing(x, gap, slope):
    gap = abs(gap) + 1e-3
    for f in (ident, CalibrationFunction.shift(x), CalibrationFunction.affine(slope, x)):
        assert f(x + gap) > f(x)


def test_piecewise_strictly_increasing_on_grid():
    rng = np.random.default_rng(11)
    for _ in range(50):
        count = int(rng.integers(2, 7))
        xs = np.cumsum(rng.uniform(0.2, 1.0, count)) - 1.0
        ys = np.cumsum(rng.uniform(0.1, 2.0, count))
        f = CalibrationFunction.piecewise_linear(zip(xs, ys))
        grid = np.sort(rng.uniform(xs[0] - 2, xs[-1] + 2, 40))
        vals = f(grid)
        assert np.all(np.diff(vals) > 0)


def test_calibration_validation():
    with pytest.raises(ValueError):
        CalibrationFunction.affine(0.0, 1.0)
    with pytest.raises(ValueError):
        CalibrationFunction.affine(-2.0, 0.0)
    with pytest.raises(ValueError):
        CalibrationFunction.piecewise_linear([(0, 0)])
    with pytest.raises(ValueError):
        CalibrationFunction.piecewise_linear([(0, 0), (1, 0)])  # flat in y
    with pytest.raises(ValueError):
        CalibrationFunction.piecewise_linear([(0, 0), (0, 1)])  # flat in x


# ---------------------------------------------------------------------------
# weights


def test_weight_values():
    w = WeightFunction.ratio(1.0)
    assert w(0.0) == 0.0
    assert w(1.0) == 0.5
    assert WeightFunction.ratio(3.0)(1.0) == 0.75
    wl = WeightFunction.logistic()
    assert wl(0.0) == 0.0
    assert wl(1.0) == pytest.approx(2 / (1 + np.exp(-1)) - 1)


def test_weight_range_and_monotonicity():
    # strictness is checked where float64 can still represent the growth
    grid = np.linspace(0, 20, 400)
    for w in (
        WeightFunction.ratio(0.1),
        WeightFunction.ratio(4.0),
        WeightFunction.logistic(),
    ):
        vals = w(grid)
        assert np.all(np.diff(vals) > 0)
        assert np.all((vals >= 0) & (vals < 1))
        assert w(0.0) == 0.0


def test_weight_table():
    w = WeightFunction.table([(0.0, 0.1), (1.0, 0.5), (2.0, 0.8)])
    assert w(0.0) == 0.1
    assert w(0.5) == pytest.approx(0.3)
    assert w(5.0) == 0.8  # flat beyond the last sample
    grid = np.linspace(0, 2, 50)
    assert np.all(np.diff(w(grid)) > 0)


def test_weight_validation():
    with pytest.raises(ValueError):
        WeightFunction.ratio(0.0)
    with pytest.raises(ValueError):
        WeightFunction.ratio(-1.0)
    with pytest.raises(ValueError):
        WeightFunction.table([(0.5, 0.1), (1.0, 0.2)])  # must start at 0
    with pytest.raises(ValueError):
        WeightFunction.table([(0.0, 0.1), (1.0, 1.0)])  # reaches 1
    with pytest.raises(ValueError):
        WeightFunction.ratio(1.0)(-0.5)


# ---------------------------------------------------------------------------
# noise


def test_noise_moments():
    rng = np.random.default_rng(3)
    g = NoiseModel.gaussian(0.5).sample(rng, 1_000_000)
    assert abs(g.mean()) < 0.002
    assert g.std() == pytest.approx(0.5, abs=0.002)
    u = NoiseModel.uniform(0.3).sample(rng, 1_000_000)
    assert np.all((u >= -0.3) & (u <= 0.3))
    assert abs(u.mean()) < 0.002
    assert NoiseModel.none().sample(rng) == 0.0
    assert not NoiseModel.none().sample(rng, 5).any()


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel.gaussian(0.0)
    with pytest.raises(ValueError):
        NoiseModel.uniform(-1.0)
    with pytest.raises(ValueError):
        NoiseModel("white", 1.0)
    with pytest.raises(ValueError):
        NoiseModel.gaussian(1.0).sample(None, 3)


def test_evaluate():
    assert evaluate(CalibrationFunction.affine(2.0, 1.0), 0.5) == 2.0
    rng = np.random.default_rng(8)
    draws = evaluate(ident, np.full(1_000_000, 0.5), NoiseModel.gaussian(0.5), rng)
    assert draws.mean() == pytest.approx(0.5, abs=0.002)
    assert draws.std() == pytest.approx(0.5, abs=0.002)


# ---------------------------------------------------------------------------
# values and rankings


def test_item_values_validation():
    with pytest.raises(ValueError):
        ItemValues.of([1.0])
    with pytest.raises(ValueError):
        ItemValues.of([1.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        ItemValues.of([np.inf, 0.0])
    vals = ItemValues.of([0.2, 0.9])
    assert len(vals) == 2 and vals[1] == 0.9


def test_ranking_round_trip_exhaustive():
    for n in range(2, 8):
        for perm in itertools.permutations(range(n)):
            r = Ranking.from_item_at_rank(perm)
            assert Ranking.from_rank_of_item(r.rank_of_item) == r
            assert tuple(r.item_at_rank[r.rank_of(i)] for i in perm) == perm


def test_ranking_validation():
    with pytest.raises(ValueError):
        Ranking((0, 0, 1))
    with pytest.raises(ValueError):
        Ranking((0, 2))


def test_induced_ranking():
    assert induced_ranking([0.2, 0.9, 0.5]).item_at_rank == (1, 2, 0)
    assert induced_ranking([5.0, 4.0, 3.0, 1.0]).item_at_rank == (0, 1, 2, 3)
    rng = np.random.default_rng(4)
    x = rng.uniform(size=9)
    r = induced_ranking(x)
    assert sorted(x[list(r.item_at_rank)], reverse=True) == list(x[list(r.item_at_rank)])


# ---------------------------------------------------------------------------
# assignments


def test_assign_ab_marginals():
    rng = np.random.default_rng(12)
    m = 4
    counts = np.zeros(m)
    for _ in range(100_000):
        a = assign_ab(m, rng)
        for j in range(m):
            counts[j] += a.items_per_reviewer[j] == (0,)
    freqs = counts / 100_000
    np.testing.assert_allclose(freqs, 0.5, atol=0.01)


def test_assign_ab_subset_frequencies():
    rng = np.random.default_rng(13)
    draws = 300_000
    counts = {}
    for _ in range(draws):
        a = assign_ab(4, rng)
        subset = frozenset(j for j in range(4) if a.items_per_reviewer[j] == (0,))
        counts[subset] = counts.get(subset, 0) + 1
    assert len(counts) == 6
    for subset, c in counts.items():
        assert c / draws == pytest.approx(1 / 6, abs=0.004), subset


def test_assign_ab_order_consistency():
    rng = np.random.default_rng(14)
    for _ in range(200):
        m = int(rng.choice([2, 4, 6, 8]))
        a = assign_ab(m, rng)
        order = a.reviewer_order
        assert sorted(order) == list(range(m))
        for k, j in enumerate(order):
            expected = (0,) if k < m // 2 else (1,)
            assert a.items_per_reviewer[j] == expected
    with pytest.raises(ValueError):
        assign_ab(3, rng)
    with pytest.raises(ValueError):
        assign_ab(0, rng)


def test_assign_pairs():
    rng = np.random.default_rng(15)
    counts = {}
    for _ in range(60_000):
        a = assign_pairs(3, 2, rng)
        key = frozenset(a.items_per_reviewer)
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 3
    for c in counts.values():
        assert c / 60_000 == pytest.approx(1 / 3, abs=0.01)

    a = assign_pairs(6, 7, rng)
    assert a.m == 7 and len(set(a.items_per_reviewer)) == 7
    assert all(i < j for i, j in a.items_per_reviewer)
    with pytest.raises(ValueError):
        assign_pairs(4, 1, rng)
    with pytest.raises(ValueError):
        assign_pairs(4, 6, rng)  # must stay strictly below n-choose-2


# ---------------------------------------------------------------------------
# scores and deduction


def test_collect_scores_and_deduce():
    a = Assignment(3, ((0, 2), (1, 2)))
    s = collect_scores([3.0, 2.0, 1.0], (ident, CalibrationFunction.shift(10.0)), a)
    assert s.score(0, 0) == 3.0 and s.score(0, 2) == 1.0
    assert s.score(1, 1) == 12.0 and s.score(1, 2) == 11.0
    assert s.entries_for_item(2) == [(0, 1.0), (1, 11.0)]
    obs = deduce_ordinal(a, s)
    assert obs.comparisons == frozenset({(0, 2), (1, 2)})
    assert obs.outcome(0, 2) is True
    assert obs.outcome(2, 0) is False
    assert obs.outcome(0, 1) is None


def test_deduce_rejects_ties_and_duplicates():
    a = Assignment(2, ((0, 1),))
    s = collect_scores([1.0, 2.0], (CalibrationFunction.piecewise_linear([(0, 0), (3, 3)]),), a)
    assert deduce_ordinal(a, s).comparisons == {(1, 0)}

    flat_scores = type(s)((((0, 5.0), (1, 5.0)),))
    with pytest.raises(DegenerateTieError):
        deduce_ordinal(a, flat_scores)

    dup = Assignment(2, ((0, 1), (1, 0)))
    s2 = collect_scores([1.0, 2.0], (ident, ident), dup)
    with pytest.raises(ValueError, match="more than one reviewer"):
        deduce_ordinal(dup, s2)

    ab = assign_ab(2, np.random.default_rng(0))
    s3 = collect_scores([1.0, 2.0], (ident, ident), ab)
    with pytest.raises(ValueError, match="exactly two"):
        deduce_ordinal(ab, s3)


def test_collect_scores_validation():
    a = Assignment(3, ((0, 2), (1, 2)))
    with pytest.raises(ValueError):
        collect_scores([1.0, 2.0, 3.0], (ident,), a)
    with pytest.raises(ValueError):
        collect_scores([1.0, 2.0], (ident, ident), a)
