"""Shared test fixtures and independent reference implementations.

The reference code here recomputes everything from the mathematical
definitions with plain numpy (no package internals), so the unit tests
compare two structurally different implementations.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

TRUNC_MASS = math.erf(1.0 / math.sqrt(2.0))
GAUSS_NORM = 1.0 / (TRUNC_MASS * math.sqrt(2.0 * math.pi))


def ref_field(ys, ks, g):
    """Reference density: returns (F, F1, F2) callables, vectorised in y."""
    ys = np.asarray(ys, dtype=float)
    ks = np.asarray(ks, dtype=float)
    c = ks * GAUSS_NORM / g

    def terms(y):
        v = (np.atleast_1d(np.asarray(y, float))[:, None] - ys) / g
        t = np.where(np.abs(v) < 1.0, c * np.exp(-0.5 * v * v), 0.0)
        return v, t

    def F(y):
        _, t = terms(y)
        return t.sum(axis=1)

    def F1(y):
        v, t = terms(y)
        return -(v * t).sum(axis=1) / g

    def F2(y):
        v, t = terms(y)
        return ((v * v - 1.0) * t).sum(axis=1) / (g * g)

    return F, F1, F2


def ref_lts_center(values, r):
    """Brute-force least trimmed squares over contiguous sorted blocks.

    Blocks are ranked by keep * sum(x'^2) - (sum x')^2 around an integer
    shift, which is exact for integer-valued data; the first minimum wins,
    matching the documented smaller-start-index tie rule.
    """
    srt = sorted(float(v) for v in values)
    keep = len(srt) - r
    shift = round(srt[(len(srt) - 1) // 2])
    best_ssq = None
    best_mean = None
    for s in range(r + 1):
        block = srt[s:s + keep]
        ssq = (keep * sum((b - shift) ** 2 for b in block)
               - sum(b - shift for b in block) ** 2)
        if best_ssq is None or ssq < best_ssq:
            best_ssq, best_mean = ssq, sum(block) / keep
    return best_mean


def ref_lattice_weights(radius_px):
    """Spatial weights over the full (2w+1)^2 offset lattice, row-major."""
    w = radius_px
    lat = np.arange(-w, w + 1) / w
    u1 = np.repeat(lat, 2 * w + 1)
    u2 = np.tile(lat, 2 * w + 1)
    phi = lambda u: np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)
    k = np.where((np.abs(u1) < 1) & (np.abs(u2) < 1),
                 (phi(u1) / TRUNC_MASS) * (phi(u2) / TRUNC_MASS), 0.0)
    return k / (w * w)


def random_positive_field(rng, n_max=25, g_range=(5.0, 60.0)):
    """Random density field with strictly positive weights.

    Values mix a central cluster with a few strays so trimming has
    something to bite on.
    """
    n = int(rng.integers(5, n_max + 1))
    center = rng.uniform(0.0, 255.0)
    spread = rng.uniform(2.0, 40.0)
    vals = center + rng.normal(0.0, spread, size=n)
    n_stray = int(rng.integers(0, max(1, n // 5) + 1))
    if n_stray:
        idx = rng.choice(n, size=n_stray, replace=False)
        vals[idx] = rng.uniform(-200.0, 500.0, size=n_stray)
    wts = rng.uniform(0.05, 1.0, size=n)
    g = rng.uniform(*g_range)
    return vals, wts, g


@pytest.fixture
def rng():
    return np.random.default_rng(20260813)
