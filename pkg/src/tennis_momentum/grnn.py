"""Gaussian kernel regression (GRNN) with cross-validated smoothing factor.

The regressor is a one-pass Nadaraya-Watson estimator: one Gaussian unit per
training sample, prediction = kernel-weighted average of training targets.
The only hyperparameter, the smoothing factor sigma, is chosen by k-fold
cross-validation over a fixed grid (contiguous chronological folds, ties
resolved toward the smaller sigma).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, UndefinedCorrelationError
from .momentum import pearson

DEFAULT_SIGMA_GRID = tuple(float(s) for s in np.geomspace(0.01, 2.0, 40))


@dataclass(frozen=True)
class CvConfig:
    folds: int = 5
    sigma_grid: tuple[float, ...] = DEFAULT_SIGMA_GRID
    split_fraction: float = 0.7
    decision_threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not self.sigma_grid:
            raise ValueError("sigma grid must be non-empty")
        grid = tuple(float(s) for s in self.sigma_grid)
        if any(s <= 0 for s in grid):
            raise ValueError("sigma values must be positive")
        if list(grid) != sorted(grid):
            raise ValueError("sigma grid must be sorted ascending")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must be in (0, 1)")


@dataclass(frozen=True)
class GrnnModel:
    training_inputs: np.ndarray   # (n, p), already normalized
    training_targets: np.ndarray  # (n,)
    sigma: float
    feature_normalization: tuple[tuple[float, float], ...]  # per-column (min, max)
    cv_curve: tuple[tuple[float, float], ...] | None = None  # (sigma, cv mse)


@dataclass(frozen=True)
class EvalReport:
    mse: float
    acc: float
    predictions: tuple[tuple[int, int, float], ...]  # (actual, predicted, raw)


@dataclass(frozen=True)
class SweepStep:
    added_feature: str  # "" for the base step
    feature_count: int
    mse: float
    acc: float
    sigma: float


@dataclass(frozen=True)
class SweepResult:
    steps: tuple[SweepStep, ...]

    @property
    def best_by_mse(self) -> SweepStep:
        return min(self.steps, key=lambda s: (s.mse, s.feature_count))

    @property
    def best_by_acc(self) -> SweepStep:
        return max(self.steps, key=lambda s: (s.acc, -s.feature_count))


def _normalize(x: np.ndarray, ranges) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    for j, (lo, hi) in enumerate(ranges):
        if hi > lo:
            out[:, j] = (x[:, j] - lo) / (hi - lo)
        else:
            out[:, j] = 0.5
    return out


def grnn_predict(model: GrnnModel, x: Sequence[float]) -> float:
    """Gaussian-kernel weighted average of the training targets at x.

    x is given in original feature units and normalized by the model's
    stored ranges. If every kernel weight underflows to zero the target of
    the nearest training point is returned.
    """
    q = np.asarray(x, dtype=float).reshape(1, -1)
    if q.shape[1] != model.training_inputs.shape[1]:
        raise ValueError(
            f"query has {q.shape[1]} features, model expects "
            f"{model.training_inputs.shape[1]}"
        )
    qn = _normalize(q, model.feature_normalization)[0]
    d2 = ((model.training_inputs - qn) ** 2).sum(axis=1)
    with np.errstate(under="ignore"):
        w = np.exp(-d2 / (2.0 * model.sigma**2))
    denom = w.sum()
    if denom == 0.0:
        return float(model.training_targets[int(np.argmin(d2))])
    return float((w @ model.training_targets) / denom)


def _predict_block(
    train_x: np.ndarray, train_y: np.ndarray, query_x: np.ndarray, sigma: float
) -> np.ndarray:
    """Vectorized predictions for already-normalized queries."""
    d2 = (
        (query_x**2).sum(axis=1)[:, None]
        - 2.0 * query_x @ train_x.T
        + (train_x**2).sum(axis=1)[None, :]
    )
    d2 = np.maximum(d2, 0.0)
    with np.errstate(under="ignore"):
        w = np.exp(-d2 / (2.0 * sigma**2))
    denom = w.sum(axis=1)
    out = np.empty(query_x.shape[0])
    ok = denom > 0.0
    out[ok] = (w[ok] @ train_y) / denom[ok]
    if not ok.all():
        nearest = np.argmin(d2[~ok], axis=1)
        out[~ok] = train_y[nearest]
    return out


def fold_boundaries(n: int, folds: int) -> list[tuple[int, int]]:
    """Contiguous chronological fold index ranges [lo, hi)."""
    return [(f * n // folds, (f + 1) * n // folds) for f in range(folds)]


def cross_validated_mse(
    x: np.ndarray, y: np.ndarray, sigma: float, folds: int
) -> float:
    """Mean held-out MSE over contiguous folds at one sigma (x normalized)."""
    errors = []
    for lo, hi in fold_boundaries(len(y), folds):
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[lo:hi] = False
        preds = _predict_block(x[train_mask], y[train_mask], x[lo:hi], sigma)
        errors.append(float(((y[lo:hi] - preds) ** 2).mean()))
    return float(np.mean(errors))


def train_cv(x: np.ndarray, y: np.ndarray, config: CvConfig) -> GrnnModel:
    """Fit a GRNN on (x, y), choosing sigma by k-fold cross-validation.

    Features are min-max normalized (the ranges are stored on the model);
    folds are contiguous chronological blocks; the sigma with the smallest
    mean held-out MSE wins, with ties going to the smaller sigma.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (n, p) and y (n,) with matching n")
    if x.shape[1] < 1:
        raise ValueError("at least one feature is required")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DataError("training data contains non-finite values")
    n = x.shape[0]
    if n < config.folds:
        raise ValueError(f"need at least {config.folds} samples, got {n}")

    ranges = tuple(
        (float(x[:, j].min()), float(x[:, j].max())) for j in range(x.shape[1])
    )
    xn = _normalize(x, ranges)

    curve = []
    best_sigma, best_mse = None, np.inf
    for sigma in config.sigma_grid:
        mse = cross_validated_mse(xn, y, sigma, config.folds)
        curve.append((float(sigma), mse))
        if mse < best_mse:
            best_sigma, best_mse = float(sigma), mse

    return GrnnModel(
        training_inputs=xn,
        training_targets=y.copy(),
        sigma=best_sigma,
        feature_normalization=ranges,
        cv_curve=tuple(curve),
    )


def evaluate(
    model: GrnnModel,
    x: np.ndarray,
    y: Sequence[float],
    threshold: float = 0.5,
) -> EvalReport:
    """MSE over raw kernel outputs and thresholded accuracy on 0/1 targets."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("x must be (m, p) with one target per row")
    if x.shape[0] < 1:
        raise ValueError("need at least one evaluation row")
    qn = _normalize(x, model.feature_normalization)
    raw = _predict_block(
        model.training_inputs, model.training_targets, qn, model.sigma
    )
    predicted = (raw >= threshold).astype(int)
    mse = float(((y - raw) ** 2).mean())
    acc = float((predicted == y.astype(int)).mean())
    return EvalReport(
        mse=mse,
        acc=acc,
        predictions=tuple(
            (int(a), int(p), float(r)) for a, p, r in zip(y, predicted, raw)
        ),
    )


def chronological_split(n: int, fraction: float) -> int:
    """Boundary index of a leading train / trailing test split."""
    split = int(np.floor(n * fraction))
    return min(max(split, 1), n - 1)


def rank_extras_by_correlation(
    extras: Mapping[str, Sequence[float]], omega: Sequence[float]
) -> list[str]:
    """Feature names sorted by |pearson(feature, omega)|, strongest first.

    Features whose correlation is undefined (constant columns) rank last,
    in name order.
    """
    omega = np.asarray(omega, dtype=float)
    defined: list[tuple[float, str]] = []
    undefined: list[str] = []
    for name in extras:
        col = np.asarray(extras[name], dtype=float)
        if col.shape != omega.shape:
            raise ValueError(f"column {name!r} length mismatch")
        try:
            r = pearson(col, omega)
            defined.append((-abs(r), name))
        except UndefinedCorrelationError:
            undefined.append(name)
    defined.sort()
    return [name for _, name in defined] + sorted(undefined)


def expand_features(
    base: np.ndarray,
    extras_ranked: Mapping[str, Sequence[float]],
    y: Sequence[float],
    config: CvConfig,
    ranked_names: Sequence[str] | None = None,
) -> SweepResult:
    """Greedy feature-expansion sweep.

    Step 0 trains on the base features alone; step t adds the first t ranked
    extra columns. Every step records held-out MSE/ACC (chronological
    train/test split from ``config``) and the cross-validated sigma.
    """
    base = np.asarray(base, dtype=float)
    y = np.asarray(y, dtype=float)
    names = list(ranked_names) if ranked_names is not None else list(extras_ranked)
    if not names:
        raise ValueError("at least one extra feature is required")
    split = chronological_split(len(y), config.split_fraction)

    steps = []
    current = base
    for name in [""] + names:
        if name:
            col = np.asarray(extras_ranked[name], dtype=float).reshape(-1, 1)
            current = np.hstack([current, col])
        model = train_cv(current[:split], y[:split], config)
        report = evaluate(
            model, current[split:], y[split:], config.decision_threshold
        )
        steps.append(
            SweepStep(
                added_feature=name,
                feature_count=current.shape[1],
                mse=report.mse,
                acc=report.acc,
                sigma=model.sigma,
            )
        )
    return SweepResult(tuple(steps))
