"""Window estimates, automatic bandwidth, and whole-image smoothing."""

import numpy as np
import pytest

from tmsmooth.grid_image import Image
from tmsmooth.smoother import (DegenerateScaleError, SmootherParams,
                               auto_scale, median_smooth, smooth,
                               window_iqr_grid, window_mode_estimate)
from tmsmooth.lts_trim import trim_values
from tmsmooth.mode_density import DEFAULT_TOL

from conftest import ref_field, ref_lattice_weights, ref_lts_center

# 25 window values, row-major; centre entry (index 12) is 66
WINDOW25 = [12, 40, 208, 63, 89, 27, 250, 71, 44, 96, 58, 80, 66,
            90, 101, 73, 35, 244, 84, 50, 96, 61, 77, 55, 68]


# -- parameter validation -----------------------------------------------------


@pytest.mark.parametrize("kwargs", [
    {"radius_px": 0},
    {"bandwidth": 0.0},
    {"bandwidth": -3.0},
    {"trim_fraction": 0.5},
    {"trim_fraction": -0.1},
    {"tol": 0.0},
    {"max_iter": 0},
    {"border": "wrap"},
])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        SmootherParams(**kwargs)


# -- automatic bandwidth ------------------------------------------------------


def test_auto_scale_rejects_constant_image():
    img = Image(np.full((6, 6), 100.0))
    with pytest.raises(DegenerateScaleError):
        auto_scale(img, radius_px=2)


def test_auto_scale_hand_example():
    # 1x5 ramp, radius 1: window IQRs are [10, 20, 20, 20, 10] with the
    # ceiling-rank quartiles, and the lower median of the sorted IQRs is 20
    img = Image(np.array([[0.0, 10.0, 20.0, 30.0, 40.0]]))
    assert auto_scale(img, radius_px=1) == 20.0


def ref_iqr(block):
    s = np.sort(np.asarray(block, dtype=float).ravel())
    k = s.size
    q1 = int(np.ceil(0.25 * k)) - 1
    q3 = int(np.ceil(0.75 * k)) - 1
    return float(s[q3] - s[q1])


def test_window_iqr_grid_matches_reference(rng):
    px = rng.integers(0, 256, size=(8, 9)).astype(float)
    img = Image(px)
    for w in (1, 2):
        got = window_iqr_grid(img, w)
        for i in range(8):
            for j in range(9):
                blk = px[max(0, i - w):i + w + 1, max(0, j - w):j + w + 1]
                assert got[i, j] == ref_iqr(blk)


def test_smooth_records_bandwidth_mode(rng):
    px = rng.integers(0, 256, size=(6, 6)).astype(float)
    img = Image(px)
    _, rep = smooth(img, SmootherParams(radius_px=2))
    assert rep.bandwidth_mode == "auto"
    assert rep.bandwidth == auto_scale(img, 2)
    _, rep = smooth(img, SmootherParams(radius_px=2, bandwidth=17.0))
    assert rep.bandwidth_mode == "fixed"
    assert rep.bandwidth == 17.0


# -- single-window estimates --------------------------------------------------


def test_window_estimate_frozen_trimmed():
    # trim drops the three bright strays; the remaining density's nearest
    # stationary maximum above the centre start sits at 77.7496 (the last
    # converged iterate may sit anywhere inside the tol/|F''| slack, so the
    # position check is loose and the derivative check is the sharp one)
    params = SmootherParams(radius_px=2, trim_fraction=0.15)
    est = window_mode_estimate(WINDOW25, params, 30.0)
    assert est == pytest.approx(77.74961586219449, abs=1e-3)
    center, keep, _, r = trim_values(np.asarray(WINDOW25, float), 0.15)
    assert r == 3
    assert sorted(np.nonzero(~keep)[0].tolist()) == [2, 6, 17]
    assert center == pytest.approx(65.27272727272727, abs=1e-12)
    assert ref_lts_center(WINDOW25, 3) == pytest.approx(center, abs=1e-12)
    wts = ref_lattice_weights(2)
    F, F1, F2 = ref_field(np.asarray(WINDOW25, float)[keep], wts[keep], 30.0)
    assert abs(F1(est)) <= DEFAULT_TOL
    assert F2(est) < 0.0


def test_window_estimate_frozen_untrimmed_matches_trimmed():
    # the dropped strays are farther than one bandwidth from the estimate,
    # so their kernels vanish there and the plain mode agrees
    trimmed = window_mode_estimate(
        WINDOW25, SmootherParams(radius_px=2, trim_fraction=0.15), 30.0)
    plain = window_mode_estimate(
        WINDOW25, SmootherParams(radius_px=2, trim_fraction=0.0), 30.0)
    assert plain == pytest.approx(77.74961586219449, abs=1e-3)
    assert plain == pytest.approx(trimmed, abs=1e-9)


def test_window_estimate_frozen_variant():
    # raising one entry from 44 to 46 moves enough mass below the kernel
    # cut that the stationary point lands at 74.089 instead
    vals = list(WINDOW25)
    vals[8] = 46
    est = window_mode_estimate(
        vals, SmootherParams(radius_px=2, trim_fraction=0.15), 30.0)
    assert est == pytest.approx(74.08896948788838, abs=1e-3)


def test_window_estimate_size_check():
    with pytest.raises(ValueError):
        window_mode_estimate([1.0] * 24, SmootherParams(radius_px=2), 10.0)


def test_window_estimate_matches_smooth_center(rng):
    for _ in range(10):
        px = rng.integers(0, 256, size=(5, 5)).astype(float)
        params = SmootherParams(radius_px=2, bandwidth=40.0)
        out, _ = smooth(Image(px), params)
        est = window_mode_estimate(px.ravel(), params, 40.0)
        assert out.pixels[2, 2] == pytest.approx(est, abs=1e-9)


# -- whole-image behaviour ----------------------------------------------------


def test_constant_image_is_fixed_point():
    img = Image(np.full((7, 7), 42.0))
    out, rep = smooth(img, SmootherParams(radius_px=2, bandwidth=10.0))
    assert np.array_equal(out.pixels, img.pixels)
    assert rep.nonconverged_pixels == 0


def test_binary_image_is_fixed_point_without_trim():
    # levels 0/255 with bandwidth 25: the two kernel groups never overlap,
    # so each start sits exactly on its own group's stationary maximum
    rng = np.random.default_rng(99)
    px = np.where(rng.random((12, 12)) < 0.4, 0.0, 255.0)
    img = Image(px)
    out, rep = smooth(img, SmootherParams(radius_px=2, bandwidth=25.0,
                                          trim_fraction=0.0))
    assert np.array_equal(out.pixels, px)
    assert rep.trimmed_total == 0
    assert rep.median_fallback_pixels == 0


def test_smooth_report_fields(rng):
    px = rng.integers(0, 256, size=(6, 7)).astype(float)
    out, rep = smooth(Image(px), SmootherParams(radius_px=2, bandwidth=30.0))
    assert (rep.height, rep.width) == (6, 7)
    assert out.pixels.shape == (6, 7)
    assert rep.radius_px == 2
    assert rep.trim_fraction == 0.15
    assert rep.interior_trim_count == 3  # floor(25 * 0.15)
    assert rep.trimmed_total >= rep.interior_trim_count
    assert rep.wall_time_s >= 0.0
    d = rep.to_dict()
    assert d["border"] == "clip"
    assert set(d) >= {"bandwidth", "scan_pixels", "nonconverged_pixels"}


def test_translation_equivariance_with_fixed_bandwidth(rng):
    # integer pixels plus an exactly representable shift keep all kernel
    # residuals bit-identical, so the outputs track the shift closely
    px = rng.integers(0, 256, size=(9, 9)).astype(float)
    params = SmootherParams(radius_px=2, bandwidth=30.0)
    base, _ = smooth(Image(px), params)
    shifted, _ = smooth(Image(px + 37.25), params)
    assert np.allclose(shifted.pixels, base.pixels + 37.25,
                       rtol=0, atol=1e-9)


def test_median_fallback_when_kept_entries_carry_no_weight():
    # aggressive trim keeps only outer-ring entries (zero spatial weight):
    # the pixel falls back to the window's lower median
    px = np.full((5, 5), 1e6)
    ring = [50.0, 51, 52, 53, 54, 55, 56, 57, 58, 59, 60, 61, 62,
            5000.0, 5001.0, 5002.0]
    border = [(i, j) for i in range(5) for j in range(5)
              if i in (0, 4) or j in (0, 4)]
    for (i, j), v in zip(border, ring):
        px[i, j] = v
    out, rep = smooth(Image(px), SmootherParams(radius_px=2, bandwidth=20.0,
                                                trim_fraction=0.45))
    assert rep.median_fallback_pixels >= 1
    assert out.pixels[2, 2] == 62.0  # lower median of the 25 window values


# -- median baseline ----------------------------------------------------------


def test_median_smooth_hand_examples():
    img = Image(np.array([[10.0, 0.0, 50.0, 40.0, 30.0]]))
    clip = median_smooth(img, radius_px=1, border="clip")
    assert clip.pixels.tolist() == [[0.0, 10.0, 40.0, 40.0, 30.0]]
    rep = median_smooth(img, radius_px=1, border="replicate")
    assert rep.pixels.tolist() == [[10.0, 10.0, 40.0, 40.0, 30.0]]


def test_median_smooth_rejects_bad_radius():
    with pytest.raises(ValueError):
        median_smooth(Image(np.zeros((3, 3))), radius_px=0)
