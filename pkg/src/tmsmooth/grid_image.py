"""Image container, design-point grid geometry, windows, and PGM I/O.

Pixels live on the regular design grid: pixel (i, j) of an n_rows x n_cols
image (0-based row-major indices) sits at ((i + 1/2) / n_rows,
(j + 1/2) / n_cols) in the unit square.  Local windows collect every
in-bounds pixel within a Chebyshev radius measured in pixels, together
with its normalised spatial offset from the window centre.

PGM support covers the plain (P2) and raw 8-bit (P5) variants with
maxval <= 255.  Parse failures raise PgmParseError carrying the byte
offset of the offending token.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PgmParseError(ValueError):
    """Malformed PGM input.  `offset` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Image:
    """Immutable grayscale image with real-valued intensities.

    `pixels` is a read-only float64 array of shape (height, width).
    Intensities are not restricted to [0, 255]; clamping happens only when
    writing 8-bit PGM output.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be 2-D and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image intensities must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def to_array(self) -> np.ndarray:
        """Writable copy of the pixel data."""
        return self.pixels.copy()


@dataclass(frozen=True)
class GridGeometry:
    """Dimensions of the design grid."""

    n_rows: int
    n_cols: int

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("grid dimensions must be >= 1")


def design_point(i: int, j: int, geom: GridGeometry) -> tuple[float, float]:
    """Design-grid coordinates of pixel (i, j), 0-based indices."""
    if not (0 <= i < geom.n_rows and 0 <= j < geom.n_cols):
        raise ValueError(f"pixel ({i}, {j}) outside {geom.n_rows}x{geom.n_cols} grid")
    return ((i + 0.5) / geom.n_rows, (j + 0.5) / geom.n_cols)


@dataclass(frozen=True)
class Window:
    """Local pixel window around a centre pixel.

    Entries are ordered by (row, column).  `rows`/`cols` hold the entry
    indices (for replicate padding these are the conceptual, possibly
    out-of-bounds positions), `values` the intensities, and `offsets` the
    spatial offsets (centre - entry) / h, one row per entry, each component
    in [-1, 1].  `h` is the per-axis spatial bandwidth radius_px / n.
    """

    center: tuple[int, int]
    radius_px: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    offsets: np.ndarray
    h: tuple[float, float]

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def center_value(self) -> float:
        i0, j0 = self.center
        hit = (self.rows == i0) & (self.cols == j0)
        return float(self.values[hit][0])


def window_at(img: Image, i0: int, j0: int, radius_px: int,
              border: str = "clip") -> Window:
    """Window of Chebyshev radius `radius_px` centred at pixel (i0, j0).

    border="clip" keeps only in-bounds entries (windows shrink at the
    image edge); border="replicate" always returns the full
    (2*radius_px + 1)^2 lattice, reading out-of-bounds entries from the
    nearest valid pixel.
    """
    H, W = img.height, img.width
    if not (0 <= i0 < H and 0 <= j0 < W):
        raise ValueError(f"centre ({i0}, {j0}) outside {H}x{W} image")
    if radius_px < 0:
        raise ValueError("radius_px must be >= 0")
    if border not in ("clip", "replicate"):
        raise ValueError(f"unknown border mode {border!r}")
    w = radius_px
    if border == "clip":
        r_lo, r_hi = max(0, i0 - w), min(H - 1, i0 + w)
        c_lo, c_hi = max(0, j0 - w), min(W - 1, j0 + w)
        rows_1d = np.arange(r_lo, r_hi + 1)
        cols_1d = np.arange(c_lo, c_hi + 1)
        values = img.pixels[r_lo:r_hi + 1, c_lo:c_hi + 1].ravel()
        src_rows_1d, src_cols_1d = rows_1d, cols_1d
    else:
        rows_1d = np.arange(i0 - w, i0 + w + 1)
        cols_1d = np.arange(j0 - w, j0 + w + 1)
        src_rows_1d = np.clip(rows_1d, 0, H - 1)
        src_cols_1d = np.clip(cols_1d, 0, W - 1)
        values = img.pixels[np.ix_(src_rows_1d, src_cols_1d)].ravel()
    rows = np.repeat(rows_1d, len(cols_1d))
    cols = np.tile(cols_1d, len(rows_1d))
    if w > 0:
        off_r = (i0 - rows) / w
        off_c = (j0 - cols) / w
    else:
        off_r = np.zeros(1)
        off_c = np.zeros(1)
    offsets = np.column_stack([off_r, off_c])
    return Window(center=(i0, j0), radius_px=w, rows=rows, cols=cols,
                  values=values, offsets=offsets,
                  h=(w / H, w / W))


# --- PGM ------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\x0b\x0c"


class _Tokenizer:
    """Header tokenizer: whitespace-separated tokens, '#' comments to EOL."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_separators(self):
        data, n = self.data, len(self.data)
        while self.pos < n:
            b = data[self.pos:self.pos + 1]
            if b == b"#":
                nl = data.find(b"\n", self.pos)
                self.pos = n if nl < 0 else nl + 1
            elif b in _WHITESPACE:
                self.pos += 1
            else:
                return

    def next_token(self) -> tuple[bytes, int]:
        self.skip_separators()
        start = self.pos
        if start >= len(self.data):
            raise PgmParseError("unexpected end of file", start)
        end = start
        while end < len(self.data):
            b = self.data[end:end + 1]
            if b in _WHITESPACE or b == b"#":
                break
            end += 1
        self.pos = end
        return self.data[start:end], start

    def next_int(self, what: str) -> tuple[int, int]:
        tok, at = self.next_token()
        if not tok.isdigit():
            raise PgmParseError(f"expected {what}, got {tok!r}", at)
        return int(tok), at

    def at_end(self) -> bool:
        self.skip_separators()
        return self.pos >= len(self.data)


def parse_pgm(data: bytes) -> Image:
    """Parse PGM bytes (P2 or P5, maxval 1..255) into an Image."""
    tok = _Tokenizer(data)
    if len(data) < 2:
        raise PgmParseError("not a PGM file", 0)
    magic = data[0:2]
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(f"unsupported magic {magic!r}", 0)
    tok.pos = 2
    width, at_w = tok.next_int("width")
    height, at_h = tok.next_int("height")
    if width < 1 or height < 1:
        raise PgmParseError(f"invalid dimensions {width}x{height}", at_w)
    maxval, at_m = tok.next_int("maxval")
    if not (1 <= maxval <= 255):
        raise PgmParseError(f"maxval {maxval} outside 1..255", at_m)
    n = width * height
    if magic == b"P5":
        if tok.pos >= len(data):
            raise PgmParseError("missing raster separator", tok.pos)
        sep = data[tok.pos:tok.pos + 1]
        if sep not in _WHITESPACE:
            raise PgmParseError("expected single whitespace before raster", tok.pos)
        start = tok.pos + 1
        raster = data[start:start + n]
        if len(raster) < n:
            raise PgmParseError(
                f"truncated raster: expected {n} bytes, got {len(raster)}",
                len(data))
        if len(data) > start + n:
            raise PgmParseError("trailing data after raster", start + n)
        arr = np.frombuffer(raster, dtype=np.uint8).astype(float)
        if np.any(arr > maxval):
            bad = int(np.argmax(arr > maxval))
            raise PgmParseError(f"sample exceeds maxval {maxval}", start + bad)
    else:
        vals = np.empty(n, dtype=float)
        for k in range(n):
            v, at = tok.next_int("sample")
            if v > maxval:
                raise PgmParseError(f"sample {v} exceeds maxval {maxval}", at)
            vals[k] = v
        if not tok.at_end():
            raise PgmParseError("trailing data after samples", tok.pos)
        arr = vals
    return Image(arr.reshape(height, width))


def read_pgm(path) -> Image:
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def quantize(img: Image) -> np.ndarray:
    """Clamp to [0, 255] and round half away from zero to uint8."""
    clamped = np.clip(img.pixels, 0.0, 255.0)
    return np.floor(clamped + 0.5).astype(np.uint8)


def pgm_bytes(img: Image, binary: bool = True) -> bytes:
    """Serialise as PGM (P5 when binary, else P2) with maxval 255."""
    q = quantize(img)
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n255\n"
    if binary:
        return header.encode("ascii") + q.tobytes()
    lines = []
    line: list[str] = []
    length = 0
    for v in q.ravel():
        tok = str(int(v))
        add = len(tok) + (1 if line else 0)
        if length + add > 70:
            lines.append(" ".join(line))
            line, length = [tok], len(tok)
        else:
            line.append(tok)
            length += add
    if line:
        lines.append(" ".join(line))
    return header.encode("ascii") + ("\n".join(lines) + "\n").encode("ascii")


def write_pgm(img: Image, path, binary: bool = True) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(img, binary=binary))
