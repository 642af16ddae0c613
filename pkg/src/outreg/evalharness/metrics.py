"""Scale-free evaluation metrics and distribution summaries.

MAEn divides the mean absolute error by the median absolute deviation of
a reference sample (here always the full test target), which makes scores
comparable across targets with wildly different units and, crucially,
comparable between subsets of the same test set: the outlier subset and
the non-outlier subset are normalised by the same constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numkernel import as_vector, average_ranks, percentile


def mad(values) -> float:
    """Median absolute deviation: median(|v - median(v)|)."""
    v = as_vector(values, "values")
    if v.size == 0:
        raise ValueError("mad of an empty sequence is undefined")
    med = float(np.median(v))
    return float(np.median(np.abs(v - med)))


def maen(predictions, observations, mad_reference) -> float:
    """Mean absolute error normalised by the reference sample's MAD.

    ``mad_reference`` is the sample whose median absolute deviation sets
    the scale (pass the full test target even when scoring a subset).  A
    constant reference has zero MAD and no meaningful scale, which is an
    error rather than an infinity.
    """
    p = as_vector(predictions, "predictions")
    o = as_vector(observations, "observations")
    if p.size != o.size:
        raise ValueError(f"{p.size} predictions for {o.size} observations")
    if p.size == 0:
        raise ValueError("maen of an empty sequence is undefined")
    scale = mad(mad_reference)
    if scale == 0.0:
        raise ValueError("reference sample is constant: MAD normaliser is zero")
    return float(np.mean(np.abs(p - o)) / scale)


def spearman(a, b) -> float:
    """Rank correlation: Pearson correlation of average ranks.

    Ties get average ranks, so the coefficient handles discrete or
    repeated values.  Constant input has no rank ordering and raises.
    """
    x = as_vector(a, "a")
    y = as_vector(b, "b")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("spearman needs at least two points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("spearman is undefined for constant input")
    rx = average_ranks(x)
    ry = average_ranks(y)
    cx = rx - rx.mean()
    cy = ry - ry.mean()
    return float((cx @ cy) / np.sqrt((cx @ cx) * (cy @ cy)))


@dataclass(frozen=True)
class BoxplotSummary:
    """Five-number summary with 1.5 IQR whiskers.

    Whiskers sit on the most extreme data points still within 1.5 IQR of
    the box; everything beyond them is listed in ``outside_points``.
    """

    median: float
    q25: float
    q75: float
    whisker_low: float
    whisker_high: float
    outside_points: tuple[float, ...]


def boxplot_stats(values) -> BoxplotSummary:
    v = as_vector(values, "values")
    if v.size == 0:
        raise ValueError("boxplot_stats of an empty sequence is undefined")
    q25 = percentile(v, 25.0)
    q75 = percentile(v, 75.0)
    iqr = q75 - q25
    fence_low = q25 - 1.5 * iqr
    fence_high = q75 + 1.5 * iqr
    within = v[(v >= fence_low) & (v <= fence_high)]
    outside = v[(v < fence_low) | (v > fence_high)]
    return BoxplotSummary(
        median=float(np.median(v)),
        q25=q25,
        q75=q75,
        whisker_low=float(within.min()),
        whisker_high=float(within.max()),
        outside_points=tuple(float(x) for x in np.sort(outside)),
    )
