"""Weighted kernel density in the intensity variable and local mode search.

A density field is the weighted sum of truncated-Gaussian kernels centred
at the retained window intensities.  The per-pixel estimate is the local
maximum of that field nearest to a starting intensity (the untrimmed
centre observation), found by Newton ascent with Armijo backtracking.

Search policy, given F = field value, F' and F'' its derivatives:

* F(start) > 0 and |F'(start)| > tol: ascend in the direction F'
  points; the first local maximum reached in that direction is returned.
* F(start) > 0, |F'(start)| <= tol, F''(start) < 0: the start already is
  a local maximum and is returned unchanged.
* F(start) > 0, |F'(start)| <= tol, F''(start) >= 0: ascend in both
  directions and keep the mode closer to the start (ties pick the
  smaller intensity).
* F(start) = 0 (the centre observation was an outlier far from every
  retained value): enter the nearest stretch of positive density on each
  side, ascend away from the start, and keep the closer mode.

Newton steps are taken only where F'' < 0 and are capped at g/2; elsewhere
a fixed fraction of g is used.  Iterates are clamped to the support hull
[min(retained) - g, max(retained) + g].  Accepted steps longer than g/4
get a midpoint derivative check so a maximum cannot be jumped even when
the derivative sign happens to match again at the landing point (kernel
truncation makes F only piecewise smooth, so F' can flip twice across a
support edge).  If the ascent stalls or the iteration budget runs out, a
deterministic grid scan at resolution g/64 over the current support
component brackets the derivative sign change and a bisection pass
refines it.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .kernels import _GAUSS_COEF, l0, l1, l2

ARMIJO_C1 = 1e-4
BACKTRACK_FACTOR = 0.5
# a step still rejected after 12 halvings (alpha < 2.5e-4) is a stall in
# all but name; handing over to the grid scan there avoids crawling along
# nearly flat density tops at microscopic accepted steps
MAX_BACKTRACKS = 12
PLATEAU_STEP_FRACTION = 0.25
NEWTON_CAP_FRACTION = 0.5
MIDPOINT_CHECK_FRACTION = 0.25
SCAN_RESOLUTION_DIVISOR = 64
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200


class DegenerateFieldError(ValueError):
    """No retained entry carries positive spatial weight."""


@dataclass
class DensityField:
    """Intensity density built from (value, weight) pairs.

    `retained` is a boolean mask over the entries; None keeps all of them.
    Entries with zero spatial weight contribute nothing and are excluded
    from the support hull.
    """

    values: np.ndarray
    weights: np.ndarray
    g: float
    retained: np.ndarray | None = None

    _ys: np.ndarray = dc_field(init=False, repr=False)
    _ks: np.ndarray = dc_field(init=False, repr=False)
    _kc: np.ndarray = dc_field(init=False, repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).ravel()
        wts = np.asarray(self.weights, dtype=float).ravel()
        if vals.size != wts.size:
            raise ValueError("values and weights must have equal length")
        if vals.size == 0:
            raise ValueError("density field needs at least one entry")
        if not np.all(np.isfinite(vals)) or not np.all(np.isfinite(wts)):
            raise ValueError("values and weights must be finite")
        if np.any(wts < 0):
            raise ValueError("weights must be non-negative")
        if not (self.g > 0 and np.isfinite(self.g)):
            raise ValueError(f"bandwidth g must be positive, got {self.g}")
        if self.retained is None:
            mask = np.ones(vals.size, dtype=bool)
        else:
            mask = np.asarray(self.retained, dtype=bool).ravel()
            if mask.size != vals.size:
                raise ValueError("retained mask length mismatch")
        active = mask & (wts > 0)
        if not np.any(active):
            raise DegenerateFieldError(
                "no retained entry has positive spatial weight")
        order = np.argsort(vals[active], kind="stable")
        self._ys = vals[active][order]
        self._ks = wts[active][order]
        # shared coefficient for the fast combined evaluation:
        # kappa * phi(v) / (Z * g) is the per-entry contribution to F.
        self._kc = self._ks * (_GAUSS_COEF / self.g)
        self.values = vals
        self.weights = wts
        self.retained = mask

    # -- support geometry ------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        """Hull of the positive-density region."""
        return float(self._ys[0] - self.g), float(self._ys[-1] + self.g)

    def components(self) -> list[tuple[float, float]]:
        """Maximal merged intervals (value - g, value + g) of the support."""
        g = self.g
        out: list[tuple[float, float]] = []
        lo = self._ys[0] - g
        hi = self._ys[0] + g
        for y in self._ys[1:]:
            if y - g <= hi:
                hi = max(hi, y + g)
            else:
                out.append((float(lo), float(hi)))
                lo, hi = y - g, y + g
        out.append((float(lo), float(hi)))
        return out

    # -- reference evaluation (vectorised over y) -------------------------

    def value(self, y):
        """Field value F(y); accepts scalars or arrays."""
        y_arr = np.asarray(y, dtype=float)
        v = (y_arr[..., None] - self._ys) / self.g
        out = (self._ks * l0(v)).sum(axis=-1) / self.g
        return float(out) if y_arr.ndim == 0 else out

    def d1(self, y):
        """First derivative F'(y)."""
        y_arr = np.asarray(y, dtype=float)
        v = (y_arr[..., None] - self._ys) / self.g
        out = (self._ks * l1(v)).sum(axis=-1) / self.g ** 2
        return float(out) if y_arr.ndim == 0 else out

    def d2(self, y):
        """Second derivative F''(y)."""
        y_arr = np.asarray(y, dtype=float)
        v = (y_arr[..., None] - self._ys) / self.g
        out = (self._ks * l2(v)).sum(axis=-1) / self.g ** 3
        return float(out) if y_arr.ndim == 0 else out

    # -- fast scalar evaluation for the mode search -----------------------

    def eval_all(self, y: float) -> tuple[float, float, float]:
        """(F, F', F'') at a scalar y, sharing one exponential pass."""
        v = (y - self._ys) / self.g
        t = np.where(np.abs(v) < 1.0, self._kc * np.exp(-0.5 * v * v), 0.0)
        f = float(t.sum())
        fp = float(-(v * t).sum() / self.g)
        fpp = float(((v * v - 1.0) * t).sum() / (self.g * self.g))
        return f, fp, fpp

    def eval_value(self, y: float) -> float:
        v = (y - self._ys) / self.g
        t = np.where(np.abs(v) < 1.0, self._kc * np.exp(-0.5 * v * v), 0.0)
        return float(t.sum())

    def eval_d1(self, y: float) -> float:
        v = (y - self._ys) / self.g
        t = np.where(np.abs(v) < 1.0, self._kc * np.exp(-0.5 * v * v), 0.0)
        return float(-(v * t).sum() / self.g)


# Module-level aliases matching the functional naming used elsewhere.

def field_value(f: DensityField, y):
    return f.value(y)


def field_d1(f: DensityField, y):
    return f.d1(y)


def field_d2(f: DensityField, y):
    return f.d2(y)


@dataclass(frozen=True)
class ModeResult:
    """Outcome of a nearest-mode search."""

    mode: float
    iterations: int
    direction: str  # "up", "down", "both", or "stay"
    converged: bool
    field_value: float
    used_scan: bool = False


def _bisect(f: DensityField, a: float, b: float, d: float, tol: float,
            max_steps: int = 200) -> tuple[float, int, bool]:
    """Refine a derivative sign change: F'(a)*d > 0, F'(b)*d < 0."""
    best = a
    best_abs = abs(f.eval_d1(a))
    for it in range(1, max_steps + 1):
        mid = 0.5 * (a + b)
        if mid == a or mid == b:
            return best, it, best_abs <= tol
        fp = f.eval_d1(mid)
        if abs(fp) < best_abs:
            best, best_abs = mid, abs(fp)
        if abs(fp) <= tol:
            return mid, it, True
        if fp * d > 0.0:
            a = mid
        else:
            b = mid
    return best, max_steps, best_abs <= tol


def _scan(f: DensityField, y: float, d: float, tol: float,
          iters: int) -> tuple[float, int, bool, bool]:
    """Deterministic fallback: grid scan at g/64 toward the next mode."""
    res = f.g / SCAN_RESOLUTION_DIVISOR
    comps = f.components()
    # scan to the end of the support component that contains y (or the
    # next one in direction d if y sits in a density gap)
    bound = None
    if d > 0:
        for lo, hi in comps:
            if y < hi:
                bound = hi
                break
    else:
        for lo, hi in reversed(comps):
            if y > lo:
                bound = lo
                break
    if bound is None:
        return y, iters, False, True
    n_steps = int(np.ceil(abs(bound - y) / res)) + 1
    grid = y + d * res * np.arange(1, n_steps + 1)
    grid = np.clip(grid, min(y, bound), max(y, bound))
    d1_grid = f.d1(grid)
    flipped = np.nonzero(d1_grid * d < 0.0)[0]
    if flipped.size:
        k = int(flipped[0])
        a = y if k == 0 else float(grid[k - 1])
        mode, bis_iters, conv = _bisect(f, a, float(grid[k]), d, tol)
        return mode, iters + bis_iters + k + 1, conv, True
    # no sign change up to the component end: return the best grid point
    f_grid = f.value(grid)
    k = int(np.argmax(f_grid))
    mode = float(grid[k])
    conv = abs(float(d1_grid[k])) <= tol and float(f_grid[k]) > 0.0
    return mode, iters + n_steps, conv, True


def _ascend(f: DensityField, y0: float, d: float, tol: float,
            max_iter: int) -> tuple[float, int, bool, bool]:
    """Climb the field from y0 in direction d (+1 or -1)."""
    g = f.g
    lo, hi = f.support
    y = min(max(y0, lo), hi)
    fv, fp, fpp = f.eval_all(y)
    iters = 0
    for _ in range(max_iter):
        iters += 1
        if abs(fp) <= tol and fpp < 0.0 and fv > 0.0:
            return y, iters, True, False
        if abs(fp) > tol and fpp < 0.0:
            step = -fp / fpp
            if step * d <= 0.0:
                step = d * g * PLATEAU_STEP_FRACTION
            elif abs(step) > g * NEWTON_CAP_FRACTION:
                step = d * g * NEWTON_CAP_FRACTION
        else:
            step = d * g * PLATEAU_STEP_FRACTION
        target = min(max(y + step, lo), hi)
        step = target - y
        if step == 0.0:
            return y, iters, abs(fp) <= tol and fv > 0.0, False
        alpha = 1.0
        accepted = False
        for _ in range(MAX_BACKTRACKS):
            y_new = y + alpha * step
            f_new = f.eval_value(y_new)
            if f_new >= fv + ARMIJO_C1 * alpha * fp * step:
                accepted = True
                break
            alpha *= BACKTRACK_FACTOR
        if not accepted:
            return _scan(f, y, d, tol, iters)
        y_prev = y
        y = y_new
        fv, fp, fpp = f.eval_all(y)
        if fp * d < -tol:
            mode, bis_iters, conv = _bisect(f, y_prev, y, d, tol)
            return mode, iters + bis_iters, conv, False
        if abs(y - y_prev) > g * MIDPOINT_CHECK_FRACTION:
            # long step: F' may have flipped twice across a support edge,
            # silently skipping a maximum in the first half
            mid = 0.5 * (y_prev + y)
            if f.eval_d1(mid) * d < -tol:
                mode, bis_iters, conv = _bisect(f, y_prev, mid, d, tol)
                return mode, iters + bis_iters, conv, False
    return _scan(f, y, d, tol, iters)


def _pick_closer(start: float,
                 cands: list[tuple[float, int, bool, bool]]
                 ) -> tuple[float, int, bool, bool]:
    """Closest candidate mode; equidistant picks the smaller intensity."""
    iters = sum(c[1] for c in cands)
    best = None
    for mode, _, conv, scan in cands:
        if best is None:
            best = (mode, conv, scan)
            continue
        dist, best_dist = abs(mode - start), abs(best[0] - start)
        if dist < best_dist or (dist == best_dist and mode < best[0]):
            best = (mode, conv, scan)
    any_scan = any(c[3] for c in cands)
    return best[0], iters, best[1], any_scan


def nearest_mode(f: DensityField, start: float, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> ModeResult:
    """Local maximum of the field nearest to `start` (see module docstring)."""
    if not np.isfinite(start):
        raise ValueError("start must be finite")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    fv, fp, fpp = f.eval_all(start)
    if fv <= 0.0:
        # outlier start: no density here; enter the support on both sides
        g = f.g
        ys = f._ys
        idx = int(np.searchsorted(ys, start))
        cands = []
        if idx < ys.size:
            entry = (ys[idx] - g) + g * 2.0 ** -20
            cands.append(_ascend(f, entry, +1.0, tol, max_iter))
        if idx > 0:
            entry = (ys[idx - 1] + g) - g * 2.0 ** -20
            cands.append(_ascend(f, entry, -1.0, tol, max_iter))
        mode, iters, conv, scan = _pick_closer(start, cands)
        return ModeResult(mode=mode, iterations=iters, direction="both",
                          converged=conv, field_value=f.eval_value(mode),
                          used_scan=scan)
    if abs(fp) <= tol:
        if fpp < 0.0:
            return ModeResult(mode=start, iterations=0, direction="stay",
                              converged=True, field_value=fv, used_scan=False)
        cands = [_ascend(f, start, +1.0, tol, max_iter),
                 _ascend(f, start, -1.0, tol, max_iter)]
        mode, iters, conv, scan = _pick_closer(start, cands)
        return ModeResult(mode=mode, iterations=iters, direction="both",
                          converged=conv, field_value=f.eval_value(mode),
                          used_scan=scan)
    d = 1.0 if fp > 0.0 else -1.0
    mode, iters, conv, scan = _ascend(f, start, d, tol, max_iter)
    return ModeResult(mode=mode, iterations=iters,
                      direction="up" if d > 0 else "down",
                      converged=conv, field_value=f.eval_value(mode),
                      used_scan=scan)
