"""Correlation coefficients, regression quality metrics, and distribution distance."""

import numpy as np


def _as_pair(xs, ys, min_len: int = 2):
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("inputs must be one-dimensional")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < min_len:
        raise ValueError(f"need at least {min_len} samples, got {x.size}")
    return x, y


def pearson(xs, ys) -> float:
    """Product-moment correlation coefficient in [-1, 1]."""
    x, y = _as_pair(xs, ys)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined for constant input")
    r = float(np.sum(dx * dy)) / (sx * sy)
    return min(1.0, max(-1.0, r))


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """Ranks starting at 1, with tied values assigned their average rank."""
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    ranks[order] = np.arange(1, x.size + 1, dtype=np.float64)
    _, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    # average the positional ranks within each tie group
    sums = np.zeros(counts.size, dtype=np.float64)
    np.add.at(sums, inverse, ranks)
    return sums[inverse] / counts[inverse]


def spearman(xs, ys) -> float:
    """Rank correlation: Pearson on average-tied ranks."""
    x, y = _as_pair(xs, ys)
    return pearson(_average_ranks(x), _average_ranks(y))


def regression_metrics(y_true, y_pred) -> dict:
    """MAE, RMSE and the coefficient of determination.

    R^2 is defined as 0 when the true values are constant (the strict formula
    is undefined there).
    """
    yt, yp = _as_pair(y_true, y_pred)
    err = yt - yp
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err * err)))
    ss_tot = float(np.sum((yt - yt.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 0.0
    else:
        r2 = 1.0 - float(np.sum(err * err)) / ss_tot
    return {"mae": mae, "rmse": rmse, "r2": r2}


def distribution_distance(original, sampled) -> dict:
    """Two-sample Kolmogorov-Smirnov statistic: sup distance of empirical CDFs."""
    a = np.sort(np.asarray(original, dtype=np.float64))
    b = np.sort(np.asarray(sampled, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return {"ks_stat": float(np.max(np.abs(cdf_a - cdf_b)))}
