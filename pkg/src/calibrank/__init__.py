"""calibrank: randomized estimators that stay above chance level no matter
how reviewers distort their scores.

Three settings share one trick.  When two items' scores come from two
different reviewers, comparing the scores deterministically can be defeated
by calibration differences alone; softening the comparison with a
score-gap-dependent randomization cannot.  The package provides that
two-item rule, its A/B-testing majority form, two ranking estimators that
graft it onto consistent orderings, and a simulation harness plus CLI to
measure all of them against ordinal baselines.
"""

from .abtest import (
    AB_ESTIMATOR_NAMES,
    AbScores,
    collect_ab_scores,
    exact_abtest_success,
    majority_cardinal_estimator,
    mean_estimator,
    median_estimator,
    scenario_calibrations,
    sign_estimator,
    upper_median,
)
from .canonical import (
    PairOrder,
    canonical_estimate,
    canonical_estimate_batch,
    canonical_success_probability,
    exact_canonical_success,
    random_guess,
    sign_estimate_pair,
    w_tilde,
)
from .config import ScenarioConfig, load_config_file, resolve_config
from .harness import (
    Report,
    ReportRow,
    run_abtest_scenario,
    run_canonical_scenario,
    run_metric_experiment,
    run_oracle,
    run_ranking_experiment,
    run_scenario,
    run_tradeoff_sweep,
)
from .losses import LossKind, loss, relative_improvement
from .metric import (
    IdenticalPair,
    find_topologically_identical_pair,
    kendall_tau,
    metric_rank_estimate,
    rearrange,
    spearman_footrule,
)
from .model import (
    Assignment,
    CalibrationFunction,
    DegenerateTieError,
    ItemValues,
    NoiseModel,
    OrdinalObservations,
    Ranking,
    ScoreSet,
    WeightFunction,
    assign_ab,
    assign_pairs,
    collect_scores,
    deduce_ordinal,
    evaluate,
    induced_ranking,
)
from .ranking import (
    ComparisonGraph,
    FlippableRecord,
    InconsistentObservationsError,
    cardinal_rank_estimate,
    count_topological_orderings,
    enumerate_topological_orderings,
    is_topological_ordering,
    topological_order_index_ties,
    uniform_topological_ordering,
)

__version__ = "0.1.0"
