"""Monte Carlo drivers for every setting, plus report emission.

Determinism contract: a run is a pure function of its
:class:`~calibrank.config.ScenarioConfig` (seed included).  Every trial
draws from its own generator derived from ``(seed, setting, sweep point,
trial index)``, so reports are bit-identical regardless of how many worker
processes execute the trial loop.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .abtest import AB_ESTIMATOR_NAMES, exact_abtest_success, scenario_calibrations
from .canonical import (
    canonical_estimate_batch,
    canonical_success_probability,
    exact_canonical_success,
    w_tilde,
)
from .config import ScenarioConfig
from .losses import relative_improvement
from .metric import kendall_tau, metric_rank_estimate, spearman_footrule
from .model import (
    CalibrationFunction,
    NoiseModel,
    WeightFunction,
    assign_pairs,
    collect_scores,
    deduce_ordinal,
    induced_ranking,
)
from .ranking import (
    ComparisonGraph,
    LinearExtensionSampler,
    cardinal_rank_estimate,
    topological_order_index_ties,
)

__all__ = [
    "REPORT_COLUMNS",
    "Report",
    "ReportRow",
    "canonical_success_mc",
    "derive_rng",
    "improvement_quadrature",
    "run_abtest_scenario",
    "run_canonical_scenario",
    "run_metric_experiment",
    "run_oracle",
    "run_ranking_experiment",
    "run_scenario",
    "run_tradeoff_sweep",
    "sample_calibration",
    "sample_canonical_scenarios",
]

REPORT_COLUMNS = (
    "scenario",
    "estimator",
    "n",
    "m",
    "gamma",
    "trials",
    "error_rate",
    "rel_improvement_pct",
    "std_err",
)

_SETTING_CODE = {
    "canonical": 1,
    "abtest": 2,
    "rank": 3,
    "metric-rank": 4,
    "tradeoff": 5,
    "oracle": 6,
}

_CANONICAL_PAIRS = {
    "perfect": (CalibrationFunction.identity(), CalibrationFunction.identity()),
    "one-biased": (CalibrationFunction.identity(), CalibrationFunction.shift(1.0)),
}


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """An independent generator keyed by (seed, path...)."""
    return np.random.default_rng([int(seed)] + [int(p) for p in path])


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ReportRow:
    scenario: str
    estimator: str
    n: int
    m: int
    gamma: float | None
    trials: int
    error_rate: float
    rel_improvement_pct: float
    std_err: float


@dataclass
class Report:
    rows: list[ReportRow]
    meta: dict

    @staticmethod
    def _cell(value) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return format(value, ".12g")
        return str(value)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in self.rows:
            d = asdict(row)
            writer.writerow([self._cell(d[c]) for c in REPORT_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "meta": self.meta,
            "rows": [
                {c: asdict(row)[c] for c in REPORT_COLUMNS} for row in self.rows
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")


def _meta(cfg: ScenarioConfig) -> dict:
    return {"config": asdict(cfg)}


def _proportion_se(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


# ---------------------------------------------------------------------------
# two-item settings (vectorized)


def _draw_distinct_pairs(rng, trials, lo, hi):
    x1 = rng.uniform(lo, hi, trials)
    x2 = rng.uniform(lo, hi, trials)
    ties = x1 == x2
    while np.any(ties):  # probability ~0; keeps values strictly distinct
        x2[ties] = rng.uniform(lo, hi, int(ties.sum()))
        ties = x1 == x2
    return x1, x2


def canonical_success_mc(
    x1: float,
    x2: float,
    f1: CalibrationFunction,
    f2: CalibrationFunction,
    w: WeightFunction,
    noise: NoiseModel,
    trials: int,
    rng: np.random.Generator,
    average_decision: bool = False,
) -> tuple[float, float]:
    """Monte Carlo success probability over assignment and noise.

    Returns (estimate, standard error).  With ``average_decision`` the final
    randomized decision is integrated out analytically per trial, which
    shrinks the variance without changing the estimand.
    """
    swap = rng.random(trials) < 0.5  # True: second reviewer grades item 1
    y1 = np.where(swap, f2(np.full(trials, float(x1))), f1(np.full(trials, float(x1))))
    y2 = np.where(swap, f1(np.full(trials, float(x2))), f2(np.full(trials, float(x2))))
    if noise.kind != "none":
        y1 = y1 + noise.sample(rng, trials)
        y2 = y2 + noise.sample(rng, trials)
    p_first = w_tilde(w, y1 - y2)
    p_success = p_first if x1 > x2 else 1.0 - p_first
    if average_decision:
        est = float(p_success.mean())
        se = float(p_success.std(ddof=1) / math.sqrt(trials))
        return est, se
    success = (rng.random(trials) < p_first) == (x1 > x2)
    est = float(success.mean())
    return est, _proportion_se(est, trials)


def _two_item_errors(cfg, f1, f2, w, rng, roster):
    """Shared two-item trial loop; returns {estimator: error rate}."""
    lo = 0.0 if cfg.value_lo is None else cfg.value_lo
    hi = 1.0 if cfg.value_hi is None else cfg.value_hi
    noise = cfg.noise_model()
    trials = cfg.trials
    x1, x2 = _draw_distinct_pairs(rng, trials, lo, hi)
    swap = rng.random(trials) < 0.5
    y1 = np.where(swap, f2(x1), f1(x1))
    y2 = np.where(swap, f1(x2), f2(x2))
    if noise.kind != "none":
        y1 = y1 + noise.sample(rng, trials)
        y2 = y2 + noise.sample(rng, trials)
    truth_first = x1 > x2
    errors = {}
    for name in roster:
        if name == "canonical":
            first = canonical_estimate_batch(y1, y2, w, rng)
        elif name == "sign":
            coin = rng.random(trials) < 0.5
            first = np.where(y1 == y2, coin, y1 > y2)
        elif name == "random":
            first = rng.random(trials) < 0.5
        else:
            raise ValueError(f"unknown two-item estimator {name!r}")
        errors[name] = float(np.mean(first != truth_first))
    return errors


def run_canonical_scenario(cfg: ScenarioConfig) -> Report:
    """Head-to-head error rates of the randomized two-item estimator and its
    baselines under a named calibration pair."""
    if cfg.scenario not in _CANONICAL_PAIRS:
        raise ValueError(f"unknown canonical scenario {cfg.scenario!r}")
    f1, f2 = _CANONICAL_PAIRS[cfg.scenario]
    roster = cfg.estimators or ("canonical", "sign", "random")
    rows = []
    for gi, gamma in enumerate(cfg.gamma):
        w = cfg.weight_fn(gamma)
        rng = derive_rng(cfg.seed, _SETTING_CODE["canonical"], gi)
        errors = _two_item_errors(cfg, f1, f2, w, rng, roster)
        for name in roster:
            err = errors[name]
            rows.append(
                ReportRow(
                    scenario=f"canonical-{cfg.scenario}",
                    estimator=name,
                    n=2,
                    m=2,
                    gamma=gamma if cfg.weight == "ratio" else None,
                    trials=cfg.trials,
                    error_rate=err,
                    rel_improvement_pct=relative_improvement(err, 0.5),
                    std_err=_proportion_se(err, cfg.trials),
                )
            )
    return Report(rows, _meta(cfg))


def run_tradeoff_sweep(cfg: ScenarioConfig) -> Report:
    """Improvement of the randomized estimator over random guessing, swept
    across the aggressiveness parameter of the ratio weight.

    Run under honest reviewers and under the one-shifted-reviewer pair: the
    aggressive end maximizes the first and destroys the second, the timid
    end forfeits both, which is the calibration-robustness tradeoff.
    """
    regimes = ("perfect", "one-biased") if cfg.scenario == "both" else (cfg.scenario,)
    rows = []
    for ri, regime in enumerate(regimes):
        f1, f2 = _CANONICAL_PAIRS[regime]
        for gi, gamma in enumerate(cfg.gamma):
            w = WeightFunction.ratio(gamma)
            rng = derive_rng(cfg.seed, _SETTING_CODE["tradeoff"], ri, gi)
            errors = _two_item_errors(cfg, f1, f2, w, rng, ("canonical",))
            err = errors["canonical"]
            rows.append(
                ReportRow(
                    scenario=f"tradeoff-{regime}",
                    estimator="canonical",
                    n=2,
                    m=2,
                    gamma=gamma,
                    trials=cfg.trials,
                    error_rate=err,
                    rel_improvement_pct=relative_improvement(err, 0.5),
                    std_err=_proportion_se(err, cfg.trials),
                )
            )
    return Report(rows, _meta(cfg))


def improvement_quadrature(
    f1: CalibrationFunction,
    f2: CalibrationFunction,
    w: WeightFunction,
    lo: float = 0.0,
    hi: float = 1.0,
    nodes: int = 2**20,
    seed: int = 0,
) -> float:
    """Relative improvement (percent) over random guessing for values drawn
    uniformly from [lo, hi]^2, by quasi-random integration of the exact
    success probability."""
    from scipy.stats import qmc

    pts = qmc.Sobol(d=2, scramble=True, seed=seed).random(nodes)
    x1 = lo + (hi - lo) * pts[:, 0]
    x2 = lo + (hi - lo) * pts[:, 1]
    keep = x1 != x2
    p = canonical_success_probability(x1[keep], x2[keep], f1, f2, w)
    return float((2.0 * p.mean() - 1.0) * 100.0)


# ---------------------------------------------------------------------------
# A/B testing


def run_abtest_scenario(cfg: ScenarioConfig) -> Report:
    """Error rates of the A/B estimators under a named miscalibration
    family, for each reviewer count in the sweep."""
    roster = cfg.estimators or AB_ESTIMATOR_NAMES
    lo = 0.0 if cfg.value_lo is None else cfg.value_lo
    hi = 1.0 if cfg.value_hi is None else cfg.value_hi
    noise = cfg.noise_model()
    w = cfg.weight_fn()
    trials = cfg.trials
    rows = []
    for m in cfg.m:
        fs = scenario_calibrations(cfg.scenario, m)
        half = m // 2
        rng = derive_rng(cfg.seed, _SETTING_CODE["abtest"], m)
        x1, x2 = _draw_distinct_pairs(rng, trials, lo, hi)
        perm = np.argsort(rng.random((trials, m)), axis=1)
        scores1 = np.stack([f(x1) for f in fs], axis=1)  # reviewer j's take on item 1
        scores2 = np.stack([f(x2) for f in fs], axis=1)
        y1 = np.take_along_axis(scores1, perm[:, :half], axis=1)
        y2 = np.take_along_axis(scores2, perm[:, half:], axis=1)
        if noise.kind != "none":
            y1 = y1 + noise.sample(rng, (trials, half))
            y2 = y2 + noise.sample(rng, (trials, half))
        truth_first = x1 > x2
        for name in roster:
            if name == "random":
                first = rng.random(trials) < 0.5
            elif name == "sign":
                wins1 = (y1 > y2).sum(axis=1)
                wins2 = (y2 > y1).sum(axis=1)
                coin = rng.random(trials) < 0.5
                first = np.where(wins1 == wins2, coin, wins1 > wins2)
            elif name == "mean":
                s1, s2 = y1.mean(axis=1), y2.mean(axis=1)
                coin = rng.random(trials) < 0.5
                first = np.where(s1 == s2, coin, s1 > s2)
            elif name == "median":
                idx = half - (half + 1) // 2
                s1 = np.sort(y1, axis=1)[:, idx]
                s2 = np.sort(y2, axis=1)[:, idx]
                coin = rng.random(trials) < 0.5
                first = np.where(s1 == s2, coin, s1 > s2)
            elif name == "majority":
                votes1 = canonical_estimate_batch(y1, y2, w, rng).sum(axis=1)
                coin = rng.random(trials) < 0.5
                first = np.where(votes1 * 2 == half, coin, votes1 * 2 > half)
            else:
                raise ValueError(f"unknown A/B estimator {name!r}")
            err = float(np.mean(first != truth_first))
            rows.append(
                ReportRow(
                    scenario=cfg.scenario,
                    estimator=name,
                    n=2,
                    m=m,
                    gamma=cfg.gamma[0] if cfg.weight == "ratio" else None,
                    trials=trials,
                    error_rate=err,
                    rel_improvement_pct=relative_improvement(err, 0.5),
                    std_err=_proportion_se(err, trials),
                )
            )
    return Report(rows, _meta(cfg))


# ---------------------------------------------------------------------------
# ranking experiments


def _auto_m(n: int) -> int:
    return n * (n - 1) // 2 // 2


def _m_for(cfg: ScenarioConfig, n_index: int, n: int) -> int:
    if cfg.m == (0,):
        return _auto_m(n)
    if len(cfg.m) == len(cfg.n):
        return cfg.m[n_index]
    return cfg.m[0]


def _draw_instance(rng, n, m, lo, hi):
    """One experiment instance: distinct values plus random affine reviewers."""
    x = rng.uniform(lo, hi, n)
    while len(np.unique(x)) != n:
        x = rng.uniform(lo, hi, n)
    slopes = rng.uniform(0.0, 1.0, m)
    zero = slopes == 0.0
    while np.any(zero):  # slope must be strictly positive
        slopes[zero] = rng.uniform(0.0, 1.0, int(zero.sum()))
        zero = slopes == 0.0
    intercepts = rng.uniform(0.0, 1.0, m)
    calibrations = tuple(
        CalibrationFunction.affine(k, b) for k, b in zip(slopes, intercepts)
    )
    return x, calibrations


def _ranking_trial(args) -> tuple[float, float]:
    """Mean Kendall-tau loss of (ordinal opener, cardinal estimator) for one
    instance, averaged over inner samples."""
    (seed, code, n, m, trial, inner, lo, hi, weight, gamma, noise_spec, init) = args
    from .config import parse_noise

    rng = derive_rng(seed, code, n, trial)
    noise = parse_noise(noise_spec)
    w = (
        WeightFunction.ratio(gamma)
        if weight == "ratio"
        else WeightFunction.logistic()
    )
    x, calibrations = _draw_instance(rng, n, m, lo, hi)
    truth = induced_ranking(x)
    kt_ord = 0.0
    kt_card = 0.0
    for _ in range(inner):
        assignment = assign_pairs(n, m, rng)
        scores = collect_scores(x, calibrations, assignment, noise, rng)
        obs = deduce_ordinal(assignment, scores)
        graph = ComparisonGraph.from_observations(obs)
        if init == "uniform-random":
            opener = LinearExtensionSampler(graph).sample(rng)
        else:
            opener = topological_order_index_ties(graph)
        estimate = cardinal_rank_estimate(assignment, scores, w, rng, init=init)
        kt_ord += kendall_tau(truth, opener)
        kt_card += kendall_tau(truth, estimate)
    return kt_ord / inner, kt_card / inner


def _metric_trial(args) -> tuple[float, float, float, float]:
    """Per-instance mean (KT, SF) losses of the ordinal opener and of the
    rearrange-then-flip estimator, sharing the opener draw."""
    (seed, code, n, m, trial, inner, lo, hi, weight, gamma, noise_spec, init) = args
    from .config import parse_noise

    rng = derive_rng(seed, code, n, trial)
    noise = parse_noise(noise_spec)
    w = (
        WeightFunction.ratio(gamma)
        if weight == "ratio"
        else WeightFunction.logistic()
    )
    x, calibrations = _draw_instance(rng, n, m, lo, hi)
    truth = induced_ranking(x)
    totals = np.zeros(4)
    for _ in range(inner):
        assignment = assign_pairs(n, m, rng)
        scores = collect_scores(x, calibrations, assignment, noise, rng)
        obs = deduce_ordinal(assignment, scores)
        graph = ComparisonGraph.from_observations(obs)
        if init == "uniform-random":
            opener = LinearExtensionSampler(graph).sample(rng)
        else:
            opener = topological_order_index_ties(graph)
        estimate = metric_rank_estimate(
            assignment, scores, w, rng, ordinal=lambda _obs: opener
        )
        totals += (
            kendall_tau(truth, opener),
            kendall_tau(truth, estimate),
            spearman_footrule(truth, opener),
            spearman_footrule(truth, estimate),
        )
    return tuple(totals / inner)


def _map_trials(threads: int, fn, argses: list):
    if threads <= 1 or len(argses) < 2:
        return [fn(a) for a in argses]
    chunk = max(1, len(argses) // (threads * 4))
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, argses, chunksize=chunk))


def _experiment_rows(cfg, worker, code):
    lo = 0.0 if cfg.value_lo is None else cfg.value_lo
    threads = cfg.effective_threads()
    gamma = cfg.gamma[0]
    per_n = {}
    for ni, n in enumerate(cfg.n):
        hi = float(n) if cfg.value_hi is None else cfg.value_hi
        m = _m_for(cfg, ni, n)
        argses = [
            (
                cfg.seed,
                code,
                n,
                m,
                t,
                cfg.inner_samples,
                lo,
                hi,
                cfg.weight,
                gamma,
                cfg.noise,
                cfg.init,
            )
            for t in range(cfg.trials)
        ]
        per_n[n] = (m, np.array(_map_trials(threads, worker, argses)))
    return per_n


def _loss_row(scenario, estimator, n, m, cfg, losses, baseline_mean):
    mean = float(losses.mean())
    se = float(losses.std(ddof=1) / math.sqrt(len(losses))) if len(losses) > 1 else 0.0
    if baseline_mean is None:
        rel = 0.0
    else:
        rel = relative_improvement(mean, baseline_mean)
    return ReportRow(
        scenario=scenario,
        estimator=estimator,
        n=n,
        m=m,
        gamma=cfg.gamma[0] if cfg.weight == "ratio" else None,
        trials=cfg.trials,
        error_rate=mean,
        rel_improvement_pct=rel,
        std_err=se,
    )


def run_ranking_experiment(cfg: ScenarioConfig) -> Report:
    """Kendall-tau loss of the flip-scan cardinal estimator against its
    ordinal opener, n swept, values uniform on [0, n], random affine
    reviewers, half of all pairs compared.

    Outer trials redraw (values, calibrations); inner samples redraw the
    assignment and all estimator randomness.
    """
    per_n = _experiment_rows(cfg, _ranking_trial, _SETTING_CODE["rank"])
    ordinal_name = (
        "ordinal-index-ties" if cfg.init == "index-ties" else "ordinal-uniform"
    )
    rows = []
    for n, (m, results) in per_n.items():
        kt_ord, kt_card = results[:, 0], results[:, 1]
        rows.append(
            _loss_row("ranking", "cardinal", n, m, cfg, kt_card, float(kt_ord.mean()))
        )
        rows.append(_loss_row("ranking", ordinal_name, n, m, cfg, kt_ord, None))
    return Report(rows, _meta(cfg))


def run_metric_experiment(cfg: ScenarioConfig) -> Report:
    """Kendall-tau and footrule losses of the rearrange-then-flip estimator
    against the ordinal opener it started from."""
    per_n = _experiment_rows(cfg, _metric_trial, _SETTING_CODE["metric-rank"])
    ordinal_name = (
        "ordinal-index-ties" if cfg.init == "index-ties" else "ordinal-uniform"
    )
    rows = []
    for n, (m, results) in per_n.items():
        kt_ord, kt_est, sf_ord, sf_est = (results[:, k] for k in range(4))
        rows.append(
            _loss_row(
                "metric-rank-kt", "metric", n, m, cfg, kt_est, float(kt_ord.mean())
            )
        )
        rows.append(_loss_row("metric-rank-kt", ordinal_name, n, m, cfg, kt_ord, None))
        rows.append(
            _loss_row(
                "metric-rank-sf", "metric", n, m, cfg, sf_est, float(sf_ord.mean())
            )
        )
        rows.append(_loss_row("metric-rank-sf", ordinal_name, n, m, cfg, sf_ord, None))
    return Report(rows, _meta(cfg))


# ---------------------------------------------------------------------------
# exact oracle


def run_oracle(cfg: ScenarioConfig) -> Report:
    """Exact success probabilities (no sampling): closed form for the
    two-item setting, full enumeration for A/B at m <= 8."""
    rows = []
    w = cfg.weight_fn()
    gamma = cfg.gamma[0] if cfg.weight == "ratio" else None
    if cfg.target == "canonical":
        if cfg.scenario not in _CANONICAL_PAIRS:
            raise ValueError(f"unknown canonical scenario {cfg.scenario!r}")
        f1, f2 = _CANONICAL_PAIRS[cfg.scenario]
        roster = cfg.estimators or ("canonical", "sign", "random")
        for name in roster:
            p = exact_canonical_success(cfg.x1, cfg.x2, f1, f2, w, name)
            rows.append(
                ReportRow(
                    scenario=f"canonical-{cfg.scenario}",
                    estimator=name,
                    n=2,
                    m=2,
                    gamma=gamma,
                    trials=0,
                    error_rate=1.0 - p,
                    rel_improvement_pct=relative_improvement(1.0 - p, 0.5),
                    std_err=0.0,
                )
            )
        return Report(rows, _meta(cfg))
    for m in cfg.m:
        fs = scenario_calibrations(cfg.scenario, m)
        roster = cfg.estimators or AB_ESTIMATOR_NAMES
        for name in roster:
            p = exact_abtest_success(cfg.x1, cfg.x2, fs, w, name)
            rows.append(
                ReportRow(
                    scenario=cfg.scenario,
                    estimator=name,
                    n=2,
                    m=m,
                    gamma=gamma,
                    trials=0,
                    error_rate=1.0 - p,
                    rel_improvement_pct=relative_improvement(1.0 - p, 0.5),
                    std_err=0.0,
                )
            )
    return Report(rows, _meta(cfg))


def run_scenario(cfg: ScenarioConfig) -> Report:
    """Dispatch a config to the runner for its setting."""
    runner = {
        "canonical": run_canonical_scenario,
        "abtest": run_abtest_scenario,
        "rank": run_ranking_experiment,
        "metric-rank": run_metric_experiment,
        "tradeoff": run_tradeoff_sweep,
        "oracle": run_oracle,
    }[cfg.setting]
    return runner(cfg)


# ---------------------------------------------------------------------------
# random scenario generation (used by the validation suite)


def sample_calibration(rng: np.random.Generator) -> CalibrationFunction:
    """A random strictly increasing calibration, spanning all constructor
    kinds, with slopes bounded away from zero."""
    kind = int(rng.integers(4))
    if kind == 0:
        return CalibrationFunction.identity()
    if kind == 1:
        return CalibrationFunction.shift(rng.uniform(-3.0, 3.0))
    if kind == 2:
        return CalibrationFunction.affine(rng.uniform(0.25, 3.0), rng.uniform(-3.0, 3.0))
    count = int(rng.integers(4, 7))
    xs = np.cumsum(np.concatenate(([rng.uniform(-1.0, 0.0)], rng.uniform(0.3, 1.0, count - 1))))
    ys = np.cumsum(
        np.concatenate(
            ([rng.uniform(-3.0, 3.0)], rng.uniform(0.25, 3.0, count - 1) * np.diff(xs))
        )
    )
    return CalibrationFunction.piecewise_linear(zip(xs, ys))


def sample_canonical_scenarios(count: int, seed: int, min_gap: float = 0.1):
    """Random (x1, x2, f1, f2) scenarios with a guaranteed value gap."""
    rng = derive_rng(seed, 99)
    out = []
    for _ in range(count):
        x1, x2 = rng.uniform(0.0, 1.0, 2)
        while abs(x1 - x2) < min_gap:
            x1, x2 = rng.uniform(0.0, 1.0, 2)
        out.append((float(x1), float(x2), sample_calibration(rng), sample_calibration(rng)))
    return out
