"""8-bit grayscale rasters and binary PGM (P5) reading/writing.

Only the binary Netpbm grayscale flavor is supported: magic ``P5``,
whitespace-separated width/height/maxval tokens with ``#`` comments allowed
up to the maxval token, a single whitespace byte, then raw pixel rows.
Files are always written in the canonical form ``P5\\n<w> <h>\\n255\\n`` so
that identical images produce identical bytes.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import BadHeader, BadMagic, TruncatedData

_WHITESPACE = b" \t\n\r\x0b\x0c"


class GrayImage:
    """Immutable 8-bit grayscale raster, row-major.

    ``pixels`` is a read-only numpy array of shape ``(height, width)`` and
    dtype ``uint8``; any integer array in [0, 255] is accepted and copied.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels) -> None:
        arr = np.asarray(pixels)
        if arr.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image dimensions must be positive, got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"pixels must be integers, got dtype {arr.dtype}")
        if arr.dtype != np.uint8:
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("pixel intensities must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        else:
            arr = arr.copy()
        arr.flags.writeable = False
        self._pixels = arr

    @classmethod
    def from_flat(cls, width: int, height: int, values) -> "GrayImage":
        """Build an image from a flat row-major intensity sequence."""
        flat = np.asarray(list(values) if not isinstance(values, np.ndarray) else values)
        if flat.size != width * height:
            raise ValueError(
                f"expected {width * height} pixels for {width}x{height}, got {flat.size}"
            )
        return cls(flat.reshape(height, width))

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    def tobytes(self) -> bytes:
        """Raw row-major pixel bytes, no header."""
        return self._pixels.tobytes()

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self._pixels.shape == other._pixels.shape and bool(
            np.array_equal(self._pixels, other._pixels)
        )

    def __hash__(self):
        return hash((self.width, self.height, self._pixels.tobytes()))

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height})"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next header token, skipping whitespace and '#' comments."""
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in _WHITESPACE:
            pos += 1
        elif c == ord("#"):
            nl = data.find(b"\n", pos)
            pos = n if nl < 0 else nl + 1
        else:
            break
    start = pos
    while pos < n and data[pos] not in _WHITESPACE:
        pos += 1
    if start == pos:
        raise BadHeader("PGM header ended before all fields were read")
    return data[start:pos], pos


def _int_field(token: bytes, name: str) -> int:
    if not token.isdigit():
        raise BadHeader(f"non-numeric {name} field {token!r}")
    return int(token)


def read_pgm(data: bytes) -> GrayImage:
    """Decode a binary PGM (P5) byte string into a GrayImage.

    Raises BadMagic for anything that is not P5, BadHeader for malformed
    dimension/maxval fields, TruncatedData if pixel bytes are missing.
    Trailing bytes after the pixel data are ignored.
    """
    if data[:2] != b"P5":
        raise BadMagic(f"expected PGM magic 'P5', got {data[:2]!r}")
    pos = 2
    width_tok, pos = _next_token(data, pos)
    height_tok, pos = _next_token(data, pos)
    maxval_tok, pos = _next_token(data, pos)
    width = _int_field(width_tok, "width")
    height = _int_field(height_tok, "height")
    maxval = _int_field(maxval_tok, "maxval")
    if width < 1 or height < 1:
        raise BadHeader(f"image dimensions must be positive, got {width}x{height}")
    if not 0 < maxval <= 255:
        raise BadHeader(f"maxval must be in [1, 255], got {maxval}")
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise BadHeader("missing whitespace between maxval and pixel data")
    pos += 1
    count = width * height
    raw = data[pos : pos + count]
    if len(raw) < count:
        raise TruncatedData(f"expected {count} pixel bytes, found {len(raw)}")
    pixels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    return GrayImage(pixels)


def write_pgm(img: GrayImage) -> bytes:
    """Encode a GrayImage as canonical binary PGM bytes."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.tobytes()


def load_pgm(path: str | os.PathLike) -> GrayImage:
    """Read a PGM file from disk."""
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path: str | os.PathLike, img: GrayImage) -> None:
    """Write a PGM file to disk (single write, canonical header)."""
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))
