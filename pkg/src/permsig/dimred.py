"""Linear dimensionality reduction: single-component PLS and PCA.

Both reducers store a column mean and a set of unit-norm projection
directions; :func:`reduce` applies them to new data.  PLS extracts the
single direction of maximal covariance with a signed binary response and
is refit wherever labels change (per training fold, per class pair).
PCA is the unsupervised fallback for data without labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError

_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class LinearReducer:
    """Fitted linear projection.

    Parameters
    ----------
    kind : str
        ``"pls"`` or ``"pca"``.
    mean : ndarray, shape (N,)
        Column mean subtracted before projecting.
    directions : ndarray, shape (N, r)
        Unit-norm projection directions, one column per component.
    """

    kind: str
    mean: np.ndarray
    directions: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64, copy=True)
        dirs = np.array(self.directions, dtype=np.float64, copy=True)
        if mean.ndim != 1 or dirs.ndim != 2 or dirs.shape[0] != mean.shape[0]:
            raise ValueError("mean must be (N,) and directions (N, r)")
        if self.kind not in ("pls", "pca"):
            raise ValueError("kind must be 'pls' or 'pca'")
        mean.setflags(write=False)
        dirs.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "directions", dirs)

    @property
    def r(self) -> int:
        return self.directions.shape[1]


def pls1_fit(x: np.ndarray, y: np.ndarray) -> LinearReducer:
    """Fit a single partial-least-squares component.

    The direction is the unit-normalized covariance vector between the
    centered features and the centered signed response:
    ``w = X_c.T @ y_c / ||X_c.T @ y_c||``.

    Parameters
    ----------
    x : ndarray, shape (n, N)
    y : ndarray, shape (n,)
        Signed labels, both of ``-1`` and ``+1`` present.

    Raises
    ------
    ValueError
        If labels are not signed binary or one sign is missing.
    FitError
        If the covariance vector is numerically zero (degenerate
        direction, e.g. constant features).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise ValueError("x must be (n, N) and y (n,)")
    signs = np.unique(y)
    if not np.all(np.isin(signs, (-1.0, 1.0))):
        raise ValueError("y must contain only -1 and +1")
    if signs.size < 2:
        raise ValueError("both label signs must be present")
    mean = x.mean(axis=0)
    w = (x - mean).T @ (y - y.mean())
    norm = float(np.linalg.norm(w))
    scale = float(np.abs(x - mean).max()) * x.shape[0] or 1.0
    if norm <= _DEGENERATE_TOL * max(scale, 1.0):
        raise FitError("degenerate PLS direction: covariance with labels is zero")
    return LinearReducer("pls", mean, (w / norm)[:, None])


def pca_fit(x: np.ndarray, r: int) -> LinearReducer:
    """Fit the top-``r`` principal directions of ``x``.

    Directions are eigenvectors of the sample covariance matrix, ordered
    by decreasing eigenvalue.  Each direction's sign is fixed so that its
    largest-magnitude entry is positive, making the result deterministic.

    Raises
    ------
    ValueError
        If ``r`` is not in ``[1, min(n - 1, N)]`` or ``n < 2``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("x must be (n, N)")
    n, n_feat = x.shape
    if n < 2:
        raise ValueError("PCA needs at least 2 rows")
    if not 1 <= r <= min(n - 1, n_feat):
        raise ValueError(f"r must lie in [1, {min(n - 1, n_feat)}]")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:r]
    dirs = eigvecs[:, order]
    for j in range(dirs.shape[1]):
        lead = np.argmax(np.abs(dirs[:, j]))
        if dirs[lead, j] < 0:
            dirs[:, j] = -dirs[:, j]
    return LinearReducer("pca", mean, dirs)


def reduce(m: LinearReducer, x: np.ndarray) -> np.ndarray:
    """Project rows of ``x`` onto the fitted directions.

    Returns an ``(n, r)`` score matrix ``(x - mean) @ directions``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.mean.shape[0]:
        raise ValueError(
            f"x must have {m.mean.shape[0]} columns, got {x.shape[1] if x.ndim == 2 else 'non-2D'}"
        )
    return (x - m.mean) @ m.directions
