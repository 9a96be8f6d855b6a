"""Least-trimmed-squares location estimation and window trimming.

For one-dimensional data the LTS location estimate can be computed
exactly: the optimal retained subset of size n - r is always a contiguous
block of the sorted sample, so it suffices to slide a block of that size
across the sorted values and keep the block mean with the smallest
within-block sum of squares.  Ties go to the block with the smaller
starting index in sorted order; block scatter is compared through an
integer-exact quantity so that this rule is deterministic on integer
(pixel-valued) data, where genuine scatter ties actually occur.

Trimming a window removes the r = floor(l * n) entries with the largest
squared residuals against the LTS centre.  The retained set is defined by
the order statistic of the squared residuals; residual ties at the
threshold are resolved by dropping entries in descending (row, column)
order until exactly n - r remain, which makes the whole procedure
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid_image import Window


def trim_count(n: int, trim_fraction: float) -> int:
    """Number of entries removed from an n-entry window: floor(n * l)."""
    if not (0.0 <= trim_fraction < 0.5):
        raise ValueError(f"trim fraction must be in [0, 0.5), got {trim_fraction}")
    return int(math.floor(n * trim_fraction))


def lts_center(values, r: int) -> float:
    """Exact 1-D LTS location estimate with r values trimmed.

    Returns the mean of the contiguous sorted block of size len(values) - r
    with minimal within-block sum of squared deviations.
    """
    vals = np.asarray(values, dtype=float).ravel()
    n = vals.size
    if n == 0:
        raise ValueError("lts_center needs at least one value")
    if not (0 <= r < n):
        raise ValueError(f"trim count r={r} must satisfy 0 <= r < {n}")
    h = n - r
    s = np.sort(vals)
    if r == 0:
        return float(np.mean(s))
    blocks = np.lib.stride_tricks.sliding_window_view(s, h)
    # order blocks by h * SS = h * sum(x'^2) - (sum x')^2 with an integer
    # shift: every intermediate is exact in float for integer-valued data,
    # so equal-scatter blocks compare exactly equal and argmin's
    # first-occurrence rule implements the smaller-start-index tie rule
    shift = float(round(float(s[(n - 1) // 2])))
    sb = blocks - shift
    ssq = h * (sb * sb).sum(axis=1) - sb.sum(axis=1) ** 2
    best = int(np.argmin(ssq))
    return float(blocks[best].mean())


@dataclass(frozen=True)
class TrimConfig:
    """Trim fraction for window trimming; l = 0 disables trimming."""

    trim_fraction: float = 0.15

    def __post_init__(self):
        if not (0.0 <= self.trim_fraction < 0.5):
            raise ValueError(
                f"trim fraction must be in [0, 0.5), got {self.trim_fraction}")


@dataclass(frozen=True)
class TrimOutcome:
    """Result of trimming one window.

    `retained` lists the surviving (row, column) index pairs in window
    entry order; `mask` is the matching boolean selector over the window
    entries; `threshold` is the squared-residual order statistic that
    separated survivors from trimmed entries.
    """

    lts_center: float
    retained: tuple[tuple[int, int], ...]
    mask: np.ndarray
    threshold: float
    r: int


def trim_values(values, trim_fraction: float) -> tuple[float, np.ndarray, float, int]:
    """Array-level trimming: (lts_centre, retained mask, threshold, r).

    Entries are assumed to be in window order, i.e. ascending (row, column);
    threshold ties are dropped from the back of that order.
    """
    vals = np.asarray(values, dtype=float).ravel()
    n = vals.size
    if n == 0:
        raise ValueError("cannot trim an empty window")
    r = trim_count(n, trim_fraction)
    keep = n - r
    center = lts_center(vals, r)
    if r == 0:
        resid = (vals - center) ** 2
        thr = float(np.max(resid))
        return center, np.ones(n, dtype=bool), thr, 0
    resid = (vals - center) ** 2
    thr = float(np.partition(resid, keep - 1)[keep - 1])
    below = resid < thr
    tied = resid == thr
    need = keep - int(np.count_nonzero(below))
    tie_rank = np.cumsum(tied)
    mask = below | (tied & (tie_rank <= need))
    return center, mask, thr, r


def trim_window(win: Window, cfg: TrimConfig) -> TrimOutcome:
    """Trim a window per the config; retains ceil((1 - l) * n) entries."""
    center, mask, thr, r = trim_values(win.values, cfg.trim_fraction)
    retained = tuple(
        (int(i), int(j))
        for i, j, keep in zip(win.rows, win.cols, mask)
        if keep)
    return TrimOutcome(lts_center=center, retained=retained, mask=mask,
                       threshold=thr, r=r)
