"""Linear soft-margin classification with calibrated probabilities.

The pieces here are deliberately self-contained:

* :func:`svm_fit` trains a linear soft-margin SVM by sequential minimal
  optimization on the dual, to an approximate minimizer of
  ``0.5 * ||w||^2 + c * sum(max(0, 1 - y * (w @ x + b)))``.
* :func:`calibrate` fits a sigmoid ``p = sigma(slope * margin + intercept)``
  to training margins by damped Newton iterations on the Bernoulli
  log-likelihood with the usual smoothed targets, so separable margins
  still yield a finite optimum.
* :func:`ensemble_probability` / :func:`ensemble_label` aggregate
  per-region class probabilities by an unweighted mean and pick the
  arg-max label (ties to the lowest index).
* :class:`OvoClassifier` handles more than two classes with one
  (SVM, calibration) pair per class pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError

_TAU = 1e-12  # curvature floor in the SMO subproblem


@dataclass(frozen=True)
class LinearSvm:
    """Fitted linear decision function ``f(x) = weights @ x + bias``."""

    weights: np.ndarray
    bias: float
    c: float

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, copy=True)
        if w.ndim != 1:
            raise ValueError("weights must be 1-D")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class Calibration:
    """Sigmoid map from margins to probabilities of the +1 class."""

    slope: float
    intercept: float


def decision_values(m: LinearSvm, x: np.ndarray) -> np.ndarray:
    """Signed margins ``x @ weights + bias`` for each row of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.weights.shape[0]:
        raise ValueError("x has the wrong number of columns")
    return x @ m.weights + m.bias


def svm_objective(x: np.ndarray, y: np.ndarray, w: np.ndarray, b: float, c: float) -> float:
    """Primal soft-margin objective at ``(w, b)``."""
    margins = x @ w + b
    hinge = np.maximum(0.0, 1.0 - y * margins)
    return 0.5 * float(w @ w) + c * float(hinge.sum())


def svm_fit(
    x: np.ndarray,
    y: np.ndarray,
    c: float = 1.0,
    tol: float = 1e-6,
    max_passes: int = 10_000,
) -> LinearSvm:
    """Train a linear soft-margin SVM.

    Solves the dual box-constrained problem by pairwise coordinate
    updates with second-order working-set selection, stopping when the
    duality gap or the per-pass objective decrease falls below ``tol``.

    Parameters
    ----------
    x : ndarray, shape (n, d)
    y : ndarray, shape (n,)
        Signed labels; both of ``-1`` and ``+1`` must be present.
    c : float
        Misclassification cost, positive.

    Raises
    ------
    ValueError
        On malformed input, non-positive ``c``, or a single-class ``y``.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise ValueError("x must be (n, d) and y (n,)")
    if not np.all(np.isin(np.unique(y), (-1.0, 1.0))):
        raise ValueError("y must contain only -1 and +1")
    if c <= 0:
        raise ValueError("c must be positive")
    pos = y > 0
    n_pos = int(pos.sum())
    n = y.shape[0]
    if n_pos == 0 or n_pos == n:
        raise ValueError("both label signs must be present")

    g_mat = x * y[:, None]
    q = g_mat @ g_mat.T
    dq = np.ascontiguousarray(np.diag(q))

    # Feasible warm start near the typical non-separable solution.
    nu = 0.9 * c * min(n_pos, n - n_pos)
    alpha = np.where(pos, nu / n_pos, nu / (n - n_pos))
    grad = q @ alpha - 1.0

    prev_primal = np.inf
    w = g_mat.T @ alpha
    b = 0.0
    for _ in range(max_passes):
        for _ in range(n):
            up = (pos & (alpha < c)) | (~pos & (alpha > 0.0))
            low = (pos & (alpha > 0.0)) | (~pos & (alpha < c))
            myg = -y * grad
            up_vals = np.where(up, myg, -np.inf)
            i = int(np.argmax(up_vals))
            m_up = up_vals[i]
            low_vals = np.where(low, myg, np.inf)
            if m_up - low_vals.min() < 1e-10:
                break
            diff = m_up - myg
            curv = np.maximum(dq[i] + dq - 2.0 * y[i] * y * q[:, i], _TAU)
            gain = np.where(low & (diff > 0.0), diff * diff / curv, -np.inf)
            j = int(np.argmax(gain))
            step = diff[j] / curv[j]
            cap_i = (c - alpha[i]) if y[i] > 0 else alpha[i]
            cap_j = alpha[j] if y[j] > 0 else (c - alpha[j])
            step = min(step, cap_i, cap_j)
            alpha[i] += y[i] * step
            alpha[j] -= y[j] * step
            grad += step * (y[i] * q[:, i] - y[j] * q[:, j])

        w = g_mat.T @ alpha
        b = _bias_from_kkt(alpha, grad, y, pos, c)
        primal = svm_objective(x, y, w, b, c)
        dual = float(alpha.sum() - 0.5 * (w @ w))
        if primal - dual < tol * max(1.0, abs(primal)):
            break
        if prev_primal - primal < tol:
            break
        prev_primal = primal
    return LinearSvm(w, float(b), float(c))


def _bias_from_kkt(alpha, grad, y, pos, c) -> float:
    """Bias from free support vectors, or the KKT interval midpoint."""
    myg = -y * grad
    free = (alpha > 1e-9 * c) & (alpha < c * (1.0 - 1e-9))
    if free.any():
        return float(myg[free].mean())
    up = (pos & (alpha < c)) | (~pos & (alpha > 0.0))
    low = (pos & (alpha > 0.0)) | (~pos & (alpha < c))
    hi = np.where(up, myg, -np.inf).max()
    lo = np.where(low, myg, np.inf).min()
    if not np.isfinite(hi):
        hi = lo
    if not np.isfinite(lo):
        lo = hi
    return float(0.5 * (hi + lo))


def calibrate(
    margins: np.ndarray,
    y: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> Calibration:
    """Fit a sigmoid probability map on training margins.

    Maximizes the Bernoulli log-likelihood of the labels under
    ``p = sigma(slope * margin + intercept)`` with damped Newton steps.
    Labels are smoothed to ``(n_pos + 1) / (n_pos + 2)`` and
    ``1 / (n_neg + 2)`` so the optimum stays finite even when margins
    separate the classes perfectly.

    Raises
    ------
    ValueError
        On malformed input or a single-class ``y``.
    FitError
        If Newton fails to converge within ``max_iter`` iterations.
    """
    margins = np.asarray(margins, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if margins.shape != y.shape:
        raise ValueError("margins and y must have the same length")
    if not np.all(np.isin(np.unique(y), (-1.0, 1.0))):
        raise ValueError("y must contain only -1 and +1")
    n_pos = int((y > 0).sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both label signs must be present")

    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    target = np.where(y > 0, hi, lo)

    mean_t = float(target.mean())
    slope = 0.0
    intercept = float(np.log(mean_t / (1.0 - mean_t)))

    def nll(a: float, b: float) -> float:
        z = a * margins + b
        # log(1 + e^z) - t*z, computed stably
        return float(np.sum(np.logaddexp(0.0, z) - target * z))

    current = nll(slope, intercept)
    for _ in range(max_iter):
        z = slope * margins + intercept
        p = 1.0 / (1.0 + np.exp(-z))
        resid = p - target
        g = np.array([float(resid @ margins), float(resid.sum())])
        if np.max(np.abs(g)) < tol:
            return Calibration(slope, intercept)
        wgt = p * (1.0 - p)
        h11 = float(wgt @ (margins * margins)) + 1e-12
        h12 = float(wgt @ margins)
        h22 = float(wgt.sum()) + 1e-12
        det = h11 * h22 - h12 * h12
        if det <= 0:
            raise FitError("calibration Hessian is singular")
        da = -(h22 * g[0] - h12 * g[1]) / det
        db = -(-h12 * g[0] + h11 * g[1]) / det
        factor = 1.0
        for _ in range(40):
            cand = nll(slope + factor * da, intercept + factor * db)
            if cand <= current:
                break
            factor *= 0.5
        else:
            raise FitError("calibration line search failed")
        slope += factor * da
        intercept += factor * db
        if max(abs(factor * da), abs(factor * db)) < tol:
            return Calibration(slope, intercept)
        current = cand
    raise FitError(f"calibration did not converge in {max_iter} iterations")


def calibrated_probability(cal: Calibration, margins: np.ndarray) -> np.ndarray:
    """Probability of the +1 class for each margin."""
    z = cal.slope * np.asarray(margins, dtype=np.float64) + cal.intercept
    return 1.0 / (1.0 + np.exp(-z))


def ensemble_probability(region_probs: np.ndarray) -> np.ndarray:
    """Mean class probabilities over regions.

    Parameters
    ----------
    region_probs : ndarray, shape (L, C)
        One row of class probabilities per region; every row must sum
        to 1 within ``1e-9``.

    Returns
    -------
    ndarray, shape (C,)
        Column means; again sums to 1.
    """
    p = np.asarray(region_probs, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] == 0 or p.shape[1] == 0:
        raise ValueError("region_probs must be a non-empty (L, C) matrix")
    sums = p.sum(axis=1)
    if np.max(np.abs(sums - 1.0)) > 1e-9:
        bad = int(np.argmax(np.abs(sums - 1.0)))
        raise ValueError(f"region row {bad} sums to {sums[bad]!r}, expected 1")
    return p.mean(axis=0)


def ensemble_label(total_probs: np.ndarray) -> int:
    """Arg-max class of a probability vector, ties to the lowest index."""
    p = np.asarray(total_probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("total_probs must be a non-empty vector")
    return int(np.argmax(p))


@dataclass(frozen=True)
class OvoClassifier:
    """One-vs-one multiclass classifier.

    Holds one ``(LinearSvm, Calibration)`` pair per unordered class pair
    ``(a, b)`` with ``a < b``; the SVM's +1 side is class ``b``.
    """

    class_count: int
    pairs: tuple[tuple[int, int], ...]
    models: tuple[LinearSvm, ...]
    calibrations: tuple[Calibration, ...]


def ovo_fit(x: np.ndarray, labels: np.ndarray, class_count: int, c: float = 1.0) -> OvoClassifier:
    """Fit one calibrated SVM per class pair on shared features."""
    labels = np.asarray(labels)
    if class_count < 2:
        raise ValueError("class_count must be at least 2")
    pairs = []
    models = []
    cals = []
    for a in range(class_count):
        for b in range(a + 1, class_count):
            rows = np.flatnonzero((labels == a) | (labels == b))
            if rows.size == 0 or np.unique(labels[rows]).size < 2:
                raise FitError(f"class pair ({a}, {b}) lacks training rows")
            y = np.where(labels[rows] == b, 1.0, -1.0)
            svm = svm_fit(x[rows], y, c)
            cal = calibrate(decision_values(svm, x[rows]), y)
            pairs.append((a, b))
            models.append(svm)
            cals.append(cal)
    return OvoClassifier(class_count, tuple(pairs), tuple(models), tuple(cals))


def ovo_probability(m: OvoClassifier, x: np.ndarray) -> np.ndarray:
    """Per-class probabilities from summed pairwise calibrated votes.

    Every pair contributes ``p`` to its +1 class and ``1 - p`` to the
    other; scores are normalized by the number of pairs so rows sum to 1.
    """
    x = np.asarray(x, dtype=np.float64)
    scores = np.zeros((x.shape[0], m.class_count))
    for (a, b), svm, cal in zip(m.pairs, m.models, m.calibrations):
        p = calibrated_probability(cal, decision_values(svm, x))
        scores[:, b] += p
        scores[:, a] += 1.0 - p
    return scores / len(m.pairs)


def ovo_predict(m: OvoClassifier, x: np.ndarray) -> np.ndarray:
    """Predicted labels; for two classes this equals thresholding the
    single pairwise probability at 0.5 with ties to the lower class."""
    probs = ovo_probability(m, x)
    return np.argmax(probs, axis=1).astype(np.int64)
