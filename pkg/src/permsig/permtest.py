"""Permutation significance tests for learning pipelines.

A study compares an observed error statistic against a null
distribution built by refitting the pipeline on label-randomized data:

* :func:`power_study` — labeled data; the observed statistic is the mean
  over several row-shuffled iterations, the null permutes the labels,
  and the one-sided p-value counts null statistics at or below the
  observed one (with the +1 correction, so ``p >= 1 / (M + 1)``).
* :func:`type1_study` — one-condition data; every replicate splits the
  rows into two pseudo-groups, each null statistic is ranked against
  the whole null (self-inclusively), and the family-wise error rate at
  level alpha is reported.
* :func:`alt_scheme_study` — either flavor, but the feature extractor
  and reducer are fitted once on the unrandomized data and only the
  classifier refits inside replicates.

Replicates are independent and own their random streams, so they can
run on a process pool; results are invariant to the worker count.
A replicate whose fit fails is resampled with a fresh sub-stream up to
three times before the study aborts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import BoundSpec, empirical_bound
from .dataset import (
    Dataset,
    permute_labels,
    scale_unit_interval,
    shuffle_rows,
    split_null_groups,
    stratified_folds,
    trim_to_even,
)
from .errors import FitError
from .pipeline import AltPipeline, PipelineSpec, fit_feature_maps
from .rng import PermutationPlan
from .validate import Scheme, kfold_errors, resub_error

# Replicate-index spaces for the (master_seed, replicate_index, tag) keying.
# Null replicates live at [0, m); retries stride far above any real m;
# observed iterations and one-off fits use their own reserved ranges.
RETRY_STRIDE = 2**32
OBSERVED_BASE = 2**48
EXTRACTOR_INDEX = 2**49
TRIM_INDEX = 2**49 + 1

MAX_RETRIES = 3

HISTOGRAM_BINS = 30


@dataclass(frozen=True)
class StudySettings:
    """Knobs of a permutation study.

    ``m`` is the number of permutation replicates; ``None`` picks the
    scheme default (1000 for resubstitution-based statistics, 100 for
    k-fold, whose replicates contribute k values each).
    """

    scheme: Scheme = Scheme.RUB
    m: int | None = None
    k: int = 10
    alpha: float = 0.05
    eta: float = 0.05
    master_seed: int = 0
    observed_iterations: int = 20
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.m is not None and self.m < 1:
            raise ValueError("m must be positive")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie strictly between 0 and 1")
        if self.observed_iterations < 1:
            raise ValueError("observed_iterations must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    @property
    def replicates(self) -> int:
        if self.m is not None:
            return self.m
        return 100 if self.scheme is Scheme.KFOLD else 1000


@dataclass(frozen=True)
class NullDistribution:
    """Null statistics plus the plans that generated them.

    ``statistics`` holds every null value — ``m`` entries for
    resubstitution schemes, ``m * k`` for k-fold.  ``replicate_plans``
    records the plan actually used per replicate (retries shift the
    index by a large stride, so the record is an honest replay log).
    """

    statistics: tuple[float, ...]
    scheme: Scheme
    replicate_plans: tuple[PermutationPlan, ...]
    k: int | None = None

    @property
    def m(self) -> int:
        return len(self.statistics)


@dataclass(frozen=True)
class StudyReport:
    """Summary of one study, ready for serialization."""

    study: str
    scheme: Scheme
    m: int
    k: int | None
    alpha: float
    eta: float
    mu: float | None
    observed_mean: float | None
    observed_sd: float | None
    null_mean: float
    null_sd: float
    p_value: float | None
    p_value_sd: float | None
    fwe_rate: float | None
    fwe_rate_sd: float | None
    histogram_edges: tuple[float, ...]
    histogram_counts: tuple[int, ...]
    master_seed: int
    replicate_indices: tuple[int, ...]

    def to_json_dict(self, config: dict | None = None) -> dict:
        doc = {
            "study": self.study,
            "scheme": self.scheme.value,
            "m": self.m,
            "k": self.k,
            "alpha": self.alpha,
            "eta": self.eta,
            "mu": self.mu,
            "observed_mean": self.observed_mean,
            "observed_sd": self.observed_sd,
            "null_mean": self.null_mean,
            "null_sd": self.null_sd,
            "p_value": self.p_value,
            "p_value_sd": self.p_value_sd,
            "fwe_rate": self.fwe_rate,
            "fwe_rate_sd": self.fwe_rate_sd,
            "histogram": {
                "bin_edges": list(self.histogram_edges),
                "counts": list(self.histogram_counts),
            },
            "seeds": {
                "master_seed": self.master_seed,
                "replicate_indices": list(self.replicate_indices),
            },
        }
        if config is not None:
            doc["config"] = config
        return doc

    def histogram_csv_rows(self) -> list[tuple[float, float, int]]:
        edges = self.histogram_edges
        return [
            (edges[i], edges[i + 1], self.histogram_counts[i])
            for i in range(len(self.histogram_counts))
        ]


def p_value(observed: float, null: NullDistribution) -> float:
    """One-sided permutation p-value with the +1 correction.

    Counts null statistics less than or equal to the observed one (ties
    count), adds one to numerator and denominator.  Always at least
    ``1 / (M + 1)``.
    """
    stats = np.asarray(null.statistics)
    if stats.size == 0:
        raise ValueError("null distribution is empty")
    count = int(np.count_nonzero(stats <= observed))
    return (count + 1) / (stats.size + 1)


def mc_stddev(p: float, n: int) -> float:
    """Monte-Carlo standard deviation ``sqrt(p (1 - p) / n)``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    return math.sqrt(p * (1.0 - p) / n)


def omnibus_pvalues(null: NullDistribution) -> np.ndarray:
    """Self-inclusive rank p-value of every null statistic.

    ``p_m = card{T <= T_m} / M``; each value is at least ``1 / M`` and
    ties share one p-value.  If all statistics are equal, every p is 1.
    """
    stats = np.asarray(null.statistics)
    if stats.size == 0:
        raise ValueError("null distribution is empty")
    ordered = np.sort(stats)
    return np.searchsorted(ordered, stats, side="right") / stats.size


def fwe_rate(pvalues: np.ndarray, alpha: float) -> float:
    """Fraction of p-values at or below ``alpha``."""
    p = np.asarray(pvalues)
    if p.size == 0:
        raise ValueError("pvalues must be non-empty")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return float(np.count_nonzero(p <= alpha) / p.size)


# ---------------------------------------------------------------------------
# Replicate engine


@dataclass
class _ReplicateTask:
    pipeline: object  # PipelineSpec or AltPipeline
    data: Dataset
    scheme: Scheme
    k: int
    mu: float | None
    master_seed: int
    labeling: str  # "permute" | "split"


def _replicate_stats(task: _ReplicateTask, r: int) -> tuple[int, list[float]]:
    last: FitError | None = None
    for attempt in range(MAX_RETRIES + 1):
        plan = PermutationPlan(task.master_seed, r + attempt * RETRY_STRIDE)
        try:
            if task.labeling == "split":
                d_r = split_null_groups(task.data, plan)
            else:
                d_r = permute_labels(task.data, plan)
            if task.scheme is Scheme.KFOLD:
                folds = stratified_folds(d_r, task.k, plan)
                tests, _ = kfold_errors(task.pipeline, d_r, folds, plan)
                return plan.replicate_index, [e.value for e in tests]
            est = resub_error(task.pipeline, d_r, plan)
            value = est.value + task.mu if task.scheme is Scheme.RUB else est.value
            return plan.replicate_index, [value]
        except FitError as exc:
            last = exc
    raise FitError(f"replicate {r} failed after {MAX_RETRIES} retries: {last}")


_POOL_TASK: _ReplicateTask | None = None


def _pool_init(task: _ReplicateTask) -> None:
    global _POOL_TASK
    _POOL_TASK = task


def _pool_run(r: int) -> tuple[int, list[float]]:
    return _replicate_stats(_POOL_TASK, r)


def null_distribution(
    pipeline,
    d: Dataset,
    m: int,
    scheme: Scheme | str,
    master_seed: int,
    *,
    k: int = 10,
    eta: float = 0.05,
    labeling: str = "permute",
    workers: int = 1,
) -> NullDistribution:
    """Null statistics from ``m`` label-randomized replicates.

    Each replicate derives every random draw from
    ``(master_seed, replicate_index)``; statistics are aggregated in
    replicate order, so the result is identical for any ``workers``.
    """
    scheme = Scheme(scheme)
    if m < 1:
        raise ValueError("m must be positive")
    if labeling not in ("permute", "split"):
        raise ValueError("labeling must be 'permute' or 'split'")
    mu = None
    if scheme is Scheme.RUB:
        dim = pipeline.classifier_input_dim(d.n_features)
        mu = empirical_bound(BoundSpec(d.n, dim, eta))
    task = _ReplicateTask(pipeline, d, scheme, k, mu, master_seed, labeling)

    if workers <= 1:
        results = [_replicate_stats(task, r) for r in range(m)]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_pool_init, initargs=(task,)
        ) as pool:
            chunk = max(1, m // (workers * 8))
            results = list(pool.map(_pool_run, range(m), chunksize=chunk))

    stats: list[float] = []
    plans: list[PermutationPlan] = []
    for idx, values in results:
        stats.extend(values)
        plans.append(PermutationPlan(master_seed, idx))
    return NullDistribution(
        tuple(stats),
        scheme,
        tuple(plans),
        k if scheme is Scheme.KFOLD else None,
    )


# ---------------------------------------------------------------------------
# Studies


def _histogram(stats) -> tuple[tuple[float, ...], tuple[int, ...]]:
    clipped = np.clip(np.asarray(stats, dtype=np.float64), 0.0, 1.0)
    counts, edges = np.histogram(clipped, bins=HISTOGRAM_BINS, range=(0.0, 1.0))
    return tuple(float(e) for e in edges), tuple(int(c) for c in counts)


def _observed_values(pipeline, data: Dataset, settings: StudySettings, mu) -> list[float]:
    values: list[float] = []
    for i in range(settings.observed_iterations):
        plan = PermutationPlan(settings.master_seed, OBSERVED_BASE + i)
        d_i = shuffle_rows(data, plan)
        if settings.scheme is Scheme.KFOLD:
            folds = stratified_folds(d_i, settings.k, plan)
            tests, _ = kfold_errors(pipeline, d_i, folds, plan)
            values.extend(e.value for e in tests)
        else:
            est = resub_error(pipeline, d_i, plan)
            values.append(est.value + mu if settings.scheme is Scheme.RUB else est.value)
    return values


def _mu_for(pipeline, data: Dataset, settings: StudySettings) -> float | None:
    if settings.scheme is not Scheme.RUB:
        return None
    dim = pipeline.classifier_input_dim(data.n_features)
    return empirical_bound(BoundSpec(data.n, dim, settings.eta))


def _power_flavor(pipeline, data: Dataset, settings: StudySettings, study: str) -> StudyReport:
    mu = _mu_for(pipeline, data, settings)
    observed = _observed_values(pipeline, data, settings, mu)
    null = null_distribution(
        pipeline,
        data,
        settings.replicates,
        settings.scheme,
        settings.master_seed,
        k=settings.k,
        eta=settings.eta,
        labeling="permute",
        workers=settings.workers,
    )
    t_obs = float(np.mean(observed))
    p = p_value(t_obs, null)
    stats = np.asarray(null.statistics)
    edges, counts = _histogram(stats)
    return StudyReport(
        study=study,
        scheme=settings.scheme,
        m=null.m,
        k=settings.k if settings.scheme is Scheme.KFOLD else None,
        alpha=settings.alpha,
        eta=settings.eta,
        mu=mu,
        observed_mean=t_obs,
        observed_sd=float(np.std(observed, ddof=1)) if len(observed) > 1 else 0.0,
        null_mean=float(stats.mean()),
        null_sd=float(stats.std(ddof=1)),
        p_value=p,
        p_value_sd=mc_stddev(p, null.m),
        fwe_rate=None,
        fwe_rate_sd=None,
        histogram_edges=edges,
        histogram_counts=counts,
        master_seed=settings.master_seed,
        replicate_indices=tuple(pl.replicate_index for pl in null.replicate_plans),
    )


def _type1_flavor(pipeline, data: Dataset, settings: StudySettings, study: str) -> StudyReport:
    mu = _mu_for(pipeline, data, settings)
    null = null_distribution(
        pipeline,
        data,
        settings.replicates,
        settings.scheme,
        settings.master_seed,
        k=settings.k,
        eta=settings.eta,
        labeling="split",
        workers=settings.workers,
    )
    pvals = omnibus_pvalues(null)
    rate = fwe_rate(pvals, settings.alpha)
    stats = np.asarray(null.statistics)
    edges, counts = _histogram(stats)
    return StudyReport(
        study=study,
        scheme=settings.scheme,
        m=null.m,
        k=settings.k if settings.scheme is Scheme.KFOLD else None,
        alpha=settings.alpha,
        eta=settings.eta,
        mu=mu,
        observed_mean=None,
        observed_sd=None,
        null_mean=float(stats.mean()),
        null_sd=float(stats.std(ddof=1)),
        p_value=None,
        p_value_sd=None,
        fwe_rate=rate,
        fwe_rate_sd=mc_stddev(rate, null.m),
        histogram_edges=edges,
        histogram_counts=counts,
        master_seed=settings.master_seed,
        replicate_indices=tuple(pl.replicate_index for pl in null.replicate_plans),
    )


def power_study(pipeline: PipelineSpec, d: Dataset, settings: StudySettings) -> StudyReport:
    """Significance of the class effect in a labeled dataset.

    The observed statistic is the mean over ``observed_iterations``
    row-shuffled evaluations; the null refits the whole pipeline on
    label-permuted data.
    """
    if d.class_count < 2:
        raise ValueError("power_study requires at least two classes")
    data = scale_unit_interval(d)
    return _power_flavor(pipeline, data, settings, "power")


def type1_study(pipeline: PipelineSpec, d: Dataset, settings: StudySettings) -> StudyReport:
    """Family-wise error rate of the test on one-condition data.

    Every replicate splits the rows into two pseudo-groups, so the null
    hypothesis holds by construction; the report carries the omnibus
    rejection rate at level alpha and its Monte-Carlo deviation.
    """
    if d.class_count != 1:
        raise ValueError("type1_study requires a one-condition dataset")
    data = scale_unit_interval(d)
    if data.n % 2:
        data = trim_to_even(data, PermutationPlan(settings.master_seed, TRIM_INDEX))
    return _type1_flavor(pipeline, data, settings, "type1")


def alt_scheme_study(pipeline: PipelineSpec, d: Dataset, settings: StudySettings) -> StudyReport:
    """Study with the extractor and reducer fitted once, outside the loop.

    Labeled data runs the power flavor; one-condition data runs the
    type-1 flavor (and needs an unsupervised reducer, since no labels
    exist when the feature maps are frozen).
    """
    data = scale_unit_interval(d)
    plan = PermutationPlan(settings.master_seed, EXTRACTOR_INDEX)
    if d.class_count == 1:
        if data.n % 2:
            data = trim_to_even(data, PermutationPlan(settings.master_seed, TRIM_INDEX))
        if pipeline.reducer == "pls":
            raise ValueError(
                "pls cannot be frozen on one-condition data; use reducer='pca' or 'none'"
            )
        maps = fit_feature_maps(pipeline, data, plan)
        return _type1_flavor(AltPipeline(maps, pipeline), data, settings, "alt")
    maps = fit_feature_maps(pipeline, data, plan)
    return _power_flavor(AltPipeline(maps, pipeline), data, settings, "alt")
