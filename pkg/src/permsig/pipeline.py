"""Learning-pipeline composition: extractor, reducer, classifier stages.

A :class:`PipelineSpec` names the stages; fitting produces a
:class:`FittedPipeline` that predicts labels through calibrated
probabilities.  Feature columns may be split into disjoint region
blocks: each block trains its own sub-pipeline, per-sample class
probabilities are averaged across blocks, and the arg-max class wins
(ties to the lowest index).  With a single block this reduces exactly
to the plain pipeline.

Two fitting modes exist:

* :meth:`PipelineSpec.fit` refits every stage on the data it is given
  (the usual mode; used inside every fold and permutation replicate).
* :func:`fit_feature_maps` + :class:`AltPipeline` freeze the extractor
  and reducer on the original data, so only the classifier and its
  calibration are refit afterwards — the cheap alternative scheme for
  permutation nulls.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .autoenc import AeArchitecture, AeModel, ae_encode, ae_fit
from .dataset import Dataset
from .dimred import LinearReducer, pca_fit, pls1_fit, reduce
from .errors import FitError
from .linclass import (
    Calibration,
    LinearSvm,
    calibrate,
    calibrated_probability,
    decision_values,
    svm_fit,
)
from .rng import PermutationPlan

_REDUCERS = ("pls", "pca", "none")


@dataclass(frozen=True)
class PipelineSpec:
    """Declarative description of a learning pipeline.

    Parameters
    ----------
    ae : AeArchitecture or None
        Optional autoencoder feature extractor, trained per block.
    reducer : str
        ``pls`` (single supervised component, fit per class pair),
        ``pca`` (unsupervised, ``pca_components`` directions), or
        ``none``.
    pca_components : int
        Component count when ``reducer == "pca"``.
    svm_c : float
        Soft-margin cost of the linear SVM.
    region_blocks : tuple of tuple of int, optional
        Disjoint, non-empty groups of feature columns; one sub-pipeline
        per block.  ``None`` means one block of all columns.
    """

    ae: AeArchitecture | None = None
    reducer: str = "pls"
    pca_components: int = 1
    svm_c: float = 1.0
    region_blocks: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.reducer not in _REDUCERS:
            raise ValueError(f"reducer must be one of {_REDUCERS}")
        if self.pca_components < 1:
            raise ValueError("pca_components must be positive")
        if self.svm_c <= 0:
            raise ValueError("svm_c must be positive")
        if self.region_blocks is not None:
            blocks = tuple(tuple(int(i) for i in blk) for blk in self.region_blocks)
            object.__setattr__(self, "region_blocks", blocks)

    def resolve_blocks(self, n_features: int) -> tuple[tuple[int, ...], ...]:
        """Validated column blocks; a single full block when unset."""
        if self.region_blocks is None:
            return (tuple(range(n_features)),)
        seen: set[int] = set()
        for bi, blk in enumerate(self.region_blocks):
            if len(blk) == 0:
                raise ValueError(f"region block {bi} is empty")
            for col in blk:
                if not 0 <= col < n_features:
                    raise ValueError(
                        f"region block {bi} references column {col}, "
                        f"valid range is [0, {n_features})"
                    )
                if col in seen:
                    raise ValueError(f"column {col} appears in more than one region block")
                seen.add(col)
        return self.region_blocks

    def classifier_input_dim(self, n_features: int) -> int:
        """Dimension of the feature vector the final classifier sees."""
        if self.reducer == "pls":
            return 1
        if self.reducer == "pca":
            return self.pca_components
        if self.ae is not None:
            return self.ae.z_dim
        return max(len(blk) for blk in self.resolve_blocks(n_features))

    def fit(self, d: Dataset, plan: PermutationPlan, tag: str = "fit") -> "FittedPipeline":
        return fit_pipeline(self, d, plan, tag)


@dataclass
class PairModel:
    """Calibrated pairwise classifier for classes ``(a, b)``; +1 = b."""

    a: int
    b: int
    reducer: LinearReducer | None
    svm: LinearSvm
    calibration: Calibration

    def probability(self, z: np.ndarray) -> np.ndarray:
        feats = reduce(self.reducer, z) if self.reducer is not None else z
        return calibrated_probability(self.calibration, decision_values(self.svm, feats))


@dataclass
class FittedBlock:
    columns: tuple[int, ...]
    ae_model: AeModel | None
    pairs: list[PairModel]
    class_count: int

    def encode(self, x: np.ndarray) -> np.ndarray:
        xb = x[:, self.columns]
        return ae_encode(self.ae_model, xb) if self.ae_model is not None else xb

    def probability(self, x: np.ndarray) -> np.ndarray:
        """Per-sample class probabilities from summed pairwise votes."""
        z = self.encode(x)
        scores = np.zeros((x.shape[0], self.class_count))
        for pair in self.pairs:
            p = pair.probability(z)
            scores[:, pair.b] += p
            scores[:, pair.a] += 1.0 - p
        return scores / len(self.pairs)


@dataclass
class FittedPipeline:
    """Trained pipeline: per-block models plus the aggregation rule."""

    blocks: list[FittedBlock]
    class_count: int
    n_features: int

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise ValueError(f"x must be (n, {self.n_features})")
        stacked = np.stack([blk.probability(x) for blk in self.blocks])
        return stacked.mean(axis=0)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(x), axis=1).astype(np.int64)

    def error(self, x: np.ndarray, labels: np.ndarray) -> float:
        """Misclassified fraction."""
        return float(np.mean(self.predict(x) != np.asarray(labels)))


def _fit_pair(
    z: np.ndarray,
    labels: np.ndarray,
    a: int,
    b: int,
    spec: PipelineSpec,
    fixed_reducer: LinearReducer | None = None,
    use_fixed: bool = False,
) -> PairModel:
    rows = np.flatnonzero((labels == a) | (labels == b))
    if rows.size == 0:
        raise FitError(f"class pair ({a}, {b}) has no training rows")
    y = np.where(labels[rows] == b, 1.0, -1.0)
    if np.unique(y).size < 2:
        raise FitError(f"class pair ({a}, {b}) is single-class in training data")
    feats = z[rows]
    if use_fixed:
        red = fixed_reducer
    elif spec.reducer == "pls":
        red = pls1_fit(feats, y)
    elif spec.reducer == "pca":
        cap = min(feats.shape[0] - 1, feats.shape[1])
        if spec.pca_components > cap:
            raise FitError(
                f"pca_components={spec.pca_components} exceeds rank cap {cap} "
                f"for class pair ({a}, {b})"
            )
        red = pca_fit(feats, spec.pca_components)
    else:
        red = None
    scores = reduce(red, feats) if red is not None else feats
    svm = svm_fit(scores, y, spec.svm_c)
    cal = calibrate(decision_values(svm, scores), y)
    return PairModel(a, b, red, svm, cal)


def fit_pipeline(
    spec: PipelineSpec, d: Dataset, plan: PermutationPlan, tag: str = "fit"
) -> FittedPipeline:
    """Fit every stage of the pipeline on ``d``.

    Raises
    ------
    ValueError
        On invalid region blocks or fewer than two classes.
    FitError
        On data-dependent failures (degenerate reduction, single-class
        pair, calibration non-convergence, training divergence).
    """
    if d.class_count < 2:
        raise ValueError("pipeline fitting requires at least two classes")
    blocks = spec.resolve_blocks(d.n_features)
    fitted = []
    for bi, cols in enumerate(blocks):
        xb = d.features[:, cols]
        ae_model = None
        z = xb
        if spec.ae is not None:
            ae_model = ae_fit(xb, spec.ae, plan, tag=f"{tag}.b{bi}.ae")
            z = ae_encode(ae_model, xb)
        pairs = [
            _fit_pair(z, d.labels, a, b, spec)
            for a, b in combinations(range(d.class_count), 2)
        ]
        fitted.append(FittedBlock(cols, ae_model, pairs, d.class_count))
    return FittedPipeline(fitted, d.class_count, d.n_features)


@dataclass
class BlockMaps:
    """Frozen extractor state of one block for the alternative scheme."""

    columns: tuple[int, ...]
    ae_model: AeModel | None
    pair_reducers: dict[tuple[int, int], LinearReducer] | None
    global_reducer: LinearReducer | None


@dataclass
class FixedMaps:
    blocks: list[BlockMaps]
    class_count: int
    n_features: int


def fit_feature_maps(
    spec: PipelineSpec, d: Dataset, plan: PermutationPlan, tag: str = "extract"
) -> FixedMaps:
    """Fit extractor and reducer once, on unpermuted data.

    With two or more classes, a ``pls`` reducer is fit per class pair on
    the original labels.  One-condition data cannot drive a supervised
    reduction, so ``pca`` (or ``none``) must be used there.
    """
    blocks = spec.resolve_blocks(d.n_features)
    out = []
    for bi, cols in enumerate(blocks):
        xb = d.features[:, cols]
        ae_model = None
        z = xb
        if spec.ae is not None:
            ae_model = ae_fit(xb, spec.ae, plan, tag=f"{tag}.b{bi}.ae")
            z = ae_encode(ae_model, xb)
        pair_reducers = None
        global_reducer = None
        if spec.reducer == "pls":
            if d.class_count < 2:
                raise ValueError(
                    "pls reduction needs labeled data; use pca for one-condition sets"
                )
            pair_reducers = {}
            for a, b in combinations(range(d.class_count), 2):
                rows = np.flatnonzero((d.labels == a) | (d.labels == b))
                y = np.where(d.labels[rows] == b, 1.0, -1.0)
                if np.unique(y).size < 2:
                    raise FitError(f"class pair ({a}, {b}) is single-class")
                pair_reducers[(a, b)] = pls1_fit(z[rows], y)
        elif spec.reducer == "pca":
            cap = min(z.shape[0] - 1, z.shape[1])
            if spec.pca_components > cap:
                raise FitError(f"pca_components={spec.pca_components} exceeds rank cap {cap}")
            global_reducer = pca_fit(z, spec.pca_components)
        out.append(BlockMaps(cols, ae_model, pair_reducers, global_reducer))
    return FixedMaps(out, d.class_count, d.n_features)


@dataclass
class AltPipeline:
    """Pipeline whose extractor/reducer are frozen; classifier refits.

    Exposes the same ``fit`` interface as :class:`PipelineSpec`, so the
    validation estimators accept either.  Fitting is deterministic given
    the data, so the plan argument is accepted but unused.
    """

    maps: FixedMaps
    spec: PipelineSpec

    def classifier_input_dim(self, n_features: int) -> int:
        if self.spec.reducer == "pls":
            return 1
        if self.spec.reducer == "pca":
            return self.spec.pca_components
        if self.spec.ae is not None:
            return self.spec.ae.z_dim
        return max(len(b.columns) for b in self.maps.blocks)

    def fit(self, d: Dataset, plan: PermutationPlan, tag: str = "fit") -> FittedPipeline:
        if d.class_count < 2:
            raise ValueError("classifier fitting requires at least two classes")
        if d.n_features != self.maps.n_features:
            raise ValueError("dataset width differs from the mapped width")
        fitted = []
        for bm in self.maps.blocks:
            xb = d.features[:, bm.columns]
            z = ae_encode(bm.ae_model, xb) if bm.ae_model is not None else xb
            pairs = []
            for a, b in combinations(range(d.class_count), 2):
                if bm.pair_reducers is not None:
                    if (a, b) not in bm.pair_reducers:
                        raise FitError(f"no frozen reducer for class pair ({a}, {b})")
                    red = bm.pair_reducers[(a, b)]
                else:
                    red = bm.global_reducer
                pairs.append(
                    _fit_pair(z, d.labels, a, b, self.spec, fixed_reducer=red, use_fixed=True)
                )
            fitted.append(FittedBlock(bm.columns, bm.ae_model, pairs, d.class_count))
        return FittedPipeline(fitted, d.class_count, d.n_features)
