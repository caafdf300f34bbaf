"""Loss functions on rankings and relative-improvement bookkeeping."""

from __future__ import annotations

import enum

from .metric import kendall_tau, spearman_footrule
from .model import Ranking

__all__ = ["LossKind", "loss", "relative_improvement"]


class LossKind(enum.Enum):
    ZERO_ONE = "zero-one"
    KENDALL_TAU = "kendall-tau"
    SPEARMAN_FOOTRULE = "spearman-footrule"


def loss(kind: LossKind | str, truth: Ranking, estimate: Ranking) -> float:
    """Loss of an estimated ranking against the truth.

    Zero-one charges 1 unless the rankings agree exactly; the other kinds
    are the usual permutation distances.
    """
    kind = LossKind(kind)
    if truth.n != estimate.n:
        raise ValueError(f"rankings of different sizes: {truth.n} vs {estimate.n}")
    if kind is LossKind.ZERO_ONE:
        return 0.0 if truth.item_at_rank == estimate.item_at_rank else 1.0
    if kind is LossKind.KENDALL_TAU:
        return float(kendall_tau(truth, estimate))
    return float(spearman_footrule(truth, estimate))


def relative_improvement(candidate_loss: float, baseline_loss: float) -> float:
    """Percent reduction of expected loss relative to a baseline.

    100 * (baseline - candidate) / baseline; the baseline must be positive.
    """
    if not baseline_loss > 0:
        raise ValueError(f"baseline loss must be positive, got {baseline_loss}")
    return 100.0 * (baseline_loss - candidate_loss) / baseline_loss
