"""Error estimation schemes and the generalization diagnostic.

Three estimators of a pipeline's error share one interface:

* resubstitution — train and evaluate on the same rows,
* upper-bound-corrected resubstitution — resubstitution plus an
  analytic deviation bound ``mu`` (scheme ``rub``),
* k-fold cross-validation — the K per-fold test errors, kept separate
  rather than averaged, plus the matching per-fold training errors.

The generalization diagnostic is the relative optimism
``actual / empirical - 1`` of an empirical error estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bounds import BoundSpec, empirical_bound
from .dataset import Dataset, FoldAssignment
from .errors import FitError
from .rng import PermutationPlan


class Scheme(str, Enum):
    RESUB = "resub"
    RUB = "rub"
    KFOLD = "kfold"


@dataclass(frozen=True)
class ErrorEstimate:
    """One error value with its provenance.

    ``value`` lies in [0, 1] except for the ``rub`` scheme, where it is
    the resubstitution error plus the bound and may reach ``1 + bound``.
    Bound-corrected estimates also keep the uncorrected error in
    ``base_value``; the accuracy view then subtracts the bound from the
    uncorrected accuracy directly, so it matches a caller doing the same
    subtraction bit for bit (``1 - (e + mu)`` and ``(1 - e) - mu`` can
    differ in the last place).
    """

    value: float
    scheme: Scheme
    fold: int | None = None
    iteration: int = 0
    bound: float | None = None
    base_value: float | None = None

    def __post_init__(self):
        ceiling = 1.0 + (self.bound or 0.0)
        if not 0.0 <= self.value <= ceiling + 1e-12:
            raise ValueError(f"error value {self.value} outside [0, {ceiling}]")

    @property
    def accuracy(self) -> float:
        """Complementary accuracy view, ``1 - value``."""
        if self.base_value is not None and self.bound is not None:
            return (1.0 - self.base_value) - self.bound
        return 1.0 - self.value


@dataclass(frozen=True)
class GeneralizationDiagnostic:
    """Relative optimism of an empirical error estimate."""

    empirical: float
    actual: float
    ratio: float


def resub_error(pipeline, d: Dataset, plan: PermutationPlan) -> ErrorEstimate:
    """Train on all rows and evaluate on the same rows."""
    fitted = pipeline.fit(d, plan, tag="resub")
    return ErrorEstimate(
        fitted.error(d.features, d.labels),
        Scheme.RESUB,
        iteration=plan.replicate_index,
    )


def rub_error(
    pipeline, d: Dataset, plan: PermutationPlan, bound_spec: BoundSpec
) -> ErrorEstimate:
    """Resubstitution error plus the empirical deviation bound.

    The value is exactly ``resub.value + mu`` — a single addition — and
    the accuracy view is exactly ``resub.accuracy - mu``; both
    identities are bit-exact.
    """
    base = resub_error(pipeline, d, plan)
    mu = empirical_bound(bound_spec)
    return ErrorEstimate(
        base.value + mu,
        Scheme.RUB,
        iteration=plan.replicate_index,
        bound=mu,
        base_value=base.value,
    )


def kfold_errors(
    pipeline,
    d: Dataset,
    folds: FoldAssignment,
    plan: PermutationPlan,
) -> tuple[list[ErrorEstimate], list[float]]:
    """Per-fold test errors and matching training errors.

    Returns the K fold-wise test-error estimates (not their mean) and
    the K training errors of the same fitted models, for the
    generalization diagnostic.

    Raises
    ------
    ValueError
        If the fold assignment length does not match the dataset.
    FitError
        When a fold cannot be fitted (for example its training rows are
        single-class); the message names the fold.
    """
    if folds.fold_of.shape[0] != d.n:
        raise ValueError("fold assignment length must equal the row count")
    tests: list[ErrorEstimate] = []
    trains: list[float] = []
    for f in range(folds.k):
        train_rows = folds.train_rows(f)
        test_rows = folds.test_rows(f)
        sub = Dataset(
            d.features[train_rows], d.labels[train_rows], d.class_count, d.feature_names
        )
        try:
            fitted = pipeline.fit(sub, plan, tag=f"fold{f}")
        except FitError as exc:
            raise FitError(f"fold {f}: {exc}") from exc
        tests.append(
            ErrorEstimate(
                fitted.error(d.features[test_rows], d.labels[test_rows]),
                Scheme.KFOLD,
                fold=f,
                iteration=plan.replicate_index,
            )
        )
        trains.append(fitted.error(d.features[train_rows], d.labels[train_rows]))
    return tests, trains


def generalization_ratio(e_emp: float, e_act: float) -> GeneralizationDiagnostic:
    """Relative optimism ``e_act / e_emp - 1``.

    A zero empirical error gives 0 when the actual error is also zero
    and ``+inf`` otherwise.
    """
    if e_emp < 0 or e_act < 0:
        raise ValueError("error rates must be non-negative")
    if e_emp == 0.0:
        ratio = 0.0 if e_act == 0.0 else math.inf
    else:
        ratio = e_act / e_emp - 1.0
    return GeneralizationDiagnostic(e_emp, e_act, ratio)
