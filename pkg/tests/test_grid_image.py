"""Design grid, window extraction, and PGM round trips."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tmsmooth.grid_image import (GridGeometry, Image, PgmParseError,
                                 design_point, parse_pgm, pgm_bytes,
                                 quantize, read_pgm, window_at, write_pgm)


def test_design_point_examples():
    assert design_point(0, 0, GridGeometry(2, 2)) == (0.25, 0.25)
    assert design_point(2, 1, GridGeometry(4, 4)) == (0.625, 0.375)
    assert design_point(0, 0, GridGeometry(1, 1)) == (0.5, 0.5)


def test_design_point_bounds():
    with pytest.raises(ValueError):
        design_point(4, 0, GridGeometry(4, 4))
    with pytest.raises(ValueError):
        design_point(0, -1, GridGeometry(4, 4))


def test_image_validation():
    with pytest.raises(ValueError):
        Image(np.array([1.0, 2.0]))  # 1-D
    with pytest.raises(ValueError):
        Image(np.array([[np.nan]]))
    img = Image(np.zeros((2, 3)))
    assert (img.height, img.width) == (2, 3)
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1.0  # read-only view


def test_window_counts_clip():
    img = Image(np.arange(49, dtype=float).reshape(7, 7))
    assert len(window_at(img, 3, 3, 2)) == 25
    assert len(window_at(img, 0, 0, 2)) == 9
    assert len(window_at(img, 0, 3, 2)) == 15
    assert len(window_at(img, 6, 6, 1)) == 4


def test_window_replicate_is_full_and_clamped():
    img = Image(np.arange(9, dtype=float).reshape(3, 3))
    win = window_at(img, 0, 0, 2, border="replicate")
    assert len(win) == 25
    # corner pixel replicated into the out-of-range quadrant
    assert win.values[0] == img.pixels[0, 0]
    assert win.center_value == img.pixels[0, 0]


def test_window_offsets_lattice():
    img = Image(np.arange(25, dtype=float).reshape(5, 5))
    win = window_at(img, 2, 2, 2)
    u1, u2 = win.offsets[:, 0], win.offsets[:, 1]
    assert sorted(set(u1.tolist())) == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert sorted(set(u2.tolist())) == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert win.center_value == 12.0
    # row-major entry order
    assert win.values[0] == 0.0 and win.values[-1] == 24.0


def test_quantize_rounds_half_away_from_zero_after_clamp():
    img = Image(np.array([[-5.0, 0.49, 0.5, 254.5, 300.0, 17.0]]))
    q = quantize(img)
    assert q.dtype == np.uint8
    assert q.tolist() == [[0, 0, 1, 255, 255, 17]]


def test_pgm_ascii_example():
    data = b"P2\n# tiny\n2 2\n255\n0 255\n17 3\n"
    img = parse_pgm(data)
    assert img.pixels.tolist() == [[0.0, 255.0], [17.0, 3.0]]


def test_pgm_binary_roundtrip(tmp_path):
    arr = np.arange(30, dtype=float).reshape(5, 6) * 8.0
    path = tmp_path / "x.pgm"
    write_pgm(Image(arr), path, binary=True)
    back = read_pgm(path)
    assert np.array_equal(back.pixels, np.clip(np.floor(arr + 0.5), 0, 255))


def test_pgm_ascii_line_width(tmp_path):
    arr = np.full((9, 9), 200.0)
    data = pgm_bytes(Image(arr), binary=False)
    assert all(len(line) <= 70 for line in data.split(b"\n"))


def test_parse_errors_carry_offsets():
    with pytest.raises(PgmParseError) as exc:
        parse_pgm(b"P7\n1 1\n255\n0\n")
    assert exc.value.offset == 0
    with pytest.raises(PgmParseError) as exc:
        parse_pgm(b"P2\n1 1\n0\n0\n")
    assert exc.value.offset == 7  # maxval token position
    with pytest.raises(PgmParseError):
        parse_pgm(b"P2\n2 2\n255\n0 0 0\n")  # truncated raster
    with pytest.raises(PgmParseError):
        parse_pgm(b"P2\n1 1\n255\n0 9\n")  # trailing data
    with pytest.raises(PgmParseError):
        parse_pgm(b"P2\n1 1\n255\n300\n")  # sample above maxval
    with pytest.raises(PgmParseError):
        parse_pgm(b"P5\n2 1\n255\nA")  # short binary raster


def test_binary_sample_above_maxval_rejected():
    data = b"P5\n2 1\n10\n" + bytes([5, 200])
    with pytest.raises(PgmParseError) as exc:
        parse_pgm(data)
    assert exc.value.offset == len(data) - 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.booleans(),
       st.integers(0, 10_000))
def test_roundtrip_is_identity_on_quantized_images(h, w, binary, seed):
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(h, w)).astype(float)
    data = pgm_bytes(Image(arr), binary=binary)
    back = parse_pgm(data)
    assert np.array_equal(back.pixels, arr)
    # a second trip is byte-identical: quantization is a fixpoint
    assert pgm_bytes(back, binary=binary) == data
