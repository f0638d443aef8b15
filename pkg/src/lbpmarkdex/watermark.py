"""Reversible difference-expansion watermarking of grayscale images.

Pixels are paired horizontally in row-major scan order (an odd trailing
column is never touched). Each pair (x, y) maps to its average and
difference

    l = floor((x + y) / 2),  h = x - y

with floor toward minus infinity throughout. The pair reconstructs inside
[0, 255] exactly when |h| <= min(2*(255 - l), 2*l + 1), which yields three
zones:

    Expandable      |2h + b|           within bound for b in {0, 1}
    ChangeableOnly  |2*floor(h/2) + b| within bound for b in {0, 1}, not expandable
    Unchangeable    everything else

Expandable pairs carry a bit by expansion (h' = 2h + b), changeable-only
pairs by plain LSB substitution (h' = 2*floor(h/2) + b, original LSB saved
in the stream). Both operations keep the pair changeable, and untouched
pairs keep their zone, so the extractor can recompute the writable slots
from the watermarked image alone.

On-pixels bitstream (the interoperability surface between embed and
extract), written MSB-first into the LSBs of writable pairs in scan order:

    [1 bit]   location-map flag: 0 = raw bitmap, 1 = run-length encoded
    [32 bits] big-endian length of the encoded map body, in bits
    [map]     raw: one bit per pair, 1 = expanded;
              RLE: alternating big-endian 16-bit run lengths, first run
              counts zeros; a run longer than 65535 is split by emitting
              65535 followed by a zero-length run of the other symbol
    [C bits]  original LSBs of the changeable-only pairs, scan order
    [data]    payload bytes, MSB-first
    [pad]     zero bits to fill the remaining writable slots
"""

from __future__ import annotations

import enum
import struct
from typing import NamedTuple

import numpy as np

from .errors import ImageTooNarrow, MalformedStream, OutOfRange, PayloadTooLarge
from .image_io import GrayImage

_HEADER_BITS = 33  # flag bit + 32-bit map length


class DiffPair(NamedTuple):
    """Average/difference form of a horizontal pixel pair."""

    l: int
    h: int


class ZoneClass(enum.Enum):
    """What a pair can carry without leaving [0, 255]."""

    EXPANDABLE = "expandable"
    CHANGEABLE_ONLY = "changeable_only"
    UNCHANGEABLE = "unchangeable"


def forward_transform(x: int, y: int) -> DiffPair:
    """Map pixel values (x, y) to their average/difference pair."""
    if not (0 <= x <= 255 and 0 <= y <= 255):
        raise OutOfRange(f"pixel values ({x}, {y}) outside [0, 255]")
    return DiffPair(l=(x + y) // 2, h=x - y)


def reconstruction_bound(l: int) -> int:
    """Largest |h| that keeps both reconstructed pixels inside [0, 255]."""
    return min(2 * (255 - l), 2 * l + 1)


def inverse_transform(p: DiffPair) -> tuple[int, int]:
    """Recover the pixel values from an average/difference pair.

    Raises OutOfRange when |h| exceeds the reconstruction bound, i.e. when
    the pair does not correspond to two in-range pixels.
    """
    if abs(p.h) > reconstruction_bound(p.l):
        raise OutOfRange(
            f"|h|={abs(p.h)} exceeds bound {reconstruction_bound(p.l)} at l={p.l}"
        )
    return p.l + (p.h + 1) // 2, p.l - p.h // 2


def classify(p: DiffPair) -> ZoneClass:
    """Zone of a pair: can it be expanded, only LSB-written, or neither."""
    bound = reconstruction_bound(p.l)
    if abs(2 * p.h) <= bound and abs(2 * p.h + 1) <= bound:
        return ZoneClass.EXPANDABLE
    base = 2 * (p.h // 2)
    if abs(base) <= bound and abs(base + 1) <= bound:
        return ZoneClass.CHANGEABLE_ONLY
    return ZoneClass.UNCHANGEABLE


# ---------------------------------------------------------------------------
# Location map encoding


def rle_encode_map(bits: np.ndarray) -> bytes:
    """Run-length encode a location map (alternating u16 runs, zeros first).

    A run longer than 65535 is emitted as 65535, then a zero-length run of
    the opposite symbol, then the remainder, so the decoder never needs a
    continuation rule.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    words: list[int] = []
    expected = 0
    if bits.size:
        changes = np.flatnonzero(np.diff(bits)) + 1
        starts = np.concatenate(([0], changes))
        ends = np.concatenate((changes, [bits.size]))
        for value, start, end in zip(bits[starts], starts, ends):
            if int(value) != expected:
                words.append(0)
                expected ^= 1
            length = int(end - start)
            while length > 0xFFFF:
                words.append(0xFFFF)
                words.append(0)
                length -= 0xFFFF
            words.append(length)
            expected ^= 1
    return struct.pack(f">{len(words)}H", *words)


def rle_decode_map(body: bytes, n_bits: int) -> np.ndarray:
    """Inverse of rle_encode_map; raises MalformedStream on bad input."""
    if len(body) % 2 != 0:
        raise MalformedStream(f"RLE map body of {len(body)} bytes is not word-aligned")
    bits = np.zeros(n_bits, dtype=np.uint8)
    pos = 0
    symbol = 0
    for (run,) in struct.iter_unpack(">H", body):
        if pos + run > n_bits:
            raise MalformedStream(f"RLE runs cover more than the {n_bits} map bits")
        if symbol:
            bits[pos : pos + run] = 1
        pos += run
        symbol ^= 1
    if pos != n_bits:
        raise MalformedStream(f"RLE runs cover {pos} of {n_bits} map bits")
    return bits


def encode_location_map(bits: np.ndarray) -> tuple[int, np.ndarray]:
    """Pick the smaller of raw and RLE encodings.

    Returns (flag, body_bits) where flag is 0 for raw and 1 for RLE and
    body_bits is a 0/1 uint8 array.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    rle = rle_encode_map(bits)
    if 8 * len(rle) < bits.size:
        return 1, np.unpackbits(np.frombuffer(rle, dtype=np.uint8))
    return 0, bits


# ---------------------------------------------------------------------------
# Whole-image helpers


def _pair_arrays(img: GrayImage) -> tuple[np.ndarray, np.ndarray]:
    """(l, h) arrays of shape (height, floor(width/2))."""
    p = img.pixels.astype(np.int64)
    n = img.width // 2
    x = p[:, 0 : 2 * n : 2]
    y = p[:, 1 : 2 * n : 2]
    return (x + y) // 2, x - y


def _zone_masks(l: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(expandable, changeable) boolean masks; changeable includes expandable."""
    bound = np.minimum(2 * (255 - l), 2 * l + 1)
    expandable = (np.abs(2 * h) <= bound) & (np.abs(2 * h + 1) <= bound)
    base = 2 * (h // 2)
    changeable = (np.abs(base) <= bound) & (np.abs(base + 1) <= bound)
    return expandable, changeable


def _encoded_map(expandable: np.ndarray) -> tuple[int, np.ndarray]:
    return encode_location_map(expandable.ravel().astype(np.uint8))


def capacity(img: GrayImage) -> int:
    """Payload bits the image can carry, clamped at zero.

    Writable slots are the expandable plus changeable-only pairs; the map
    header, encoded map and saved original LSBs are overhead, leaving
    E - (33 + map bits) net payload bits.
    """
    l, h = _pair_arrays(img)
    if l.size == 0:
        return 0
    expandable, changeable = _zone_masks(l, h)
    _, body = _encoded_map(expandable)
    net = int(expandable.sum()) - (_HEADER_BITS + body.size)
    return max(0, net)


def embed(img: GrayImage, data: bytes) -> GrayImage:
    """Hide data in the image losslessly; extract() undoes it exactly.

    Raises ImageTooNarrow when the image has no pairs (width < 2) and
    PayloadTooLarge when the stream (map, saved LSBs and data) does not fit
    in the writable slots.
    """
    if img.width < 2:
        raise ImageTooNarrow(f"width {img.width} offers no pixel pairs")
    l, h = _pair_arrays(img)
    expandable, changeable = _zone_masks(l, h)
    change_only = changeable & ~expandable
    slots = int(changeable.sum())
    flag, map_body = _encoded_map(expandable)
    saved = (h[change_only] % 2).astype(np.uint8)
    need = _HEADER_BITS + map_body.size + saved.size + 8 * len(data)
    if need > slots:
        raise PayloadTooLarge(
            f"stream needs {need} bits but the image offers {slots} writable slots "
            f"({8 * len(data)} payload bits vs capacity {capacity(img)})"
        )
    length_field = np.unpackbits(
        np.frombuffer(struct.pack(">I", map_body.size), dtype=np.uint8)
    )
    data_bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    stream = np.concatenate(
        [
            np.array([flag], dtype=np.uint8),
            length_field,
            map_body,
            saved,
            data_bits,
            np.zeros(slots - need, dtype=np.uint8),
        ]
    )
    carried = np.zeros(l.shape, dtype=np.int64)
    carried[changeable] = stream
    h_new = np.where(
        expandable, 2 * h + carried, np.where(change_only, 2 * (h // 2) + carried, h)
    )
    x = l + (h_new + 1) // 2
    y = l - h_new // 2
    if x.size and (x.min() < 0 or x.max() > 255 or y.min() < 0 or y.max() > 255):
        raise AssertionError("zone classification let a pixel leave [0, 255]")
    out = img.pixels.copy()
    n = img.width // 2
    out[:, 0 : 2 * n : 2] = x
    out[:, 1 : 2 * n : 2] = y
    return GrayImage(out)


def extract(img: GrayImage) -> tuple[bytes, GrayImage]:
    """Read back the data region and restore the original image.

    The image must come from embed(); anything else raises MalformedStream
    (or yields garbage data that downstream framing rejects). The returned
    bytes include the zero padding after the payload, so callers delimit
    the real content themselves.
    """
    l, h_marked = _pair_arrays(img)
    _, changeable = _zone_masks(l, h_marked)
    slots = int(changeable.sum())
    if slots < _HEADER_BITS:
        raise MalformedStream(
            f"{slots} writable slots cannot hold a {_HEADER_BITS}-bit stream header"
        )
    stream = (h_marked[changeable] % 2).astype(np.uint8)
    flag = int(stream[0])
    (map_len,) = struct.unpack(">I", np.packbits(stream[1:33]).tobytes())
    n_pairs = l.size
    if _HEADER_BITS + map_len > slots:
        raise MalformedStream(
            f"declared map body of {map_len} bits exceeds the {slots}-slot stream"
        )
    body = stream[_HEADER_BITS : _HEADER_BITS + map_len]
    if flag == 0:
        if map_len != n_pairs:
            raise MalformedStream(
                f"raw map is {map_len} bits for {n_pairs} pairs"
            )
        map_bits = body
    else:
        if map_len % 16 != 0:
            raise MalformedStream(f"RLE map body of {map_len} bits is not word-aligned")
        map_bits = rle_decode_map(np.packbits(body).tobytes(), n_pairs)
    expanded = map_bits.astype(bool).reshape(l.shape)
    if np.any(expanded & ~changeable):
        raise MalformedStream("location map marks a pair that holds no stream bit")
    change_only = changeable & ~expanded
    n_saved = int(change_only.sum())
    saved_start = _HEADER_BITS + map_len
    if saved_start + n_saved > slots:
        raise MalformedStream(
            f"stream too short for {n_saved} saved LSBs after the location map"
        )
    saved_flat = np.zeros(l.shape, dtype=np.int64).ravel()
    saved_flat[change_only.ravel()] = stream[saved_start : saved_start + n_saved]
    saved = saved_flat.reshape(l.shape)
    data_bits = stream[saved_start + n_saved :]
    data = np.packbits(data_bits[: 8 * (data_bits.size // 8)]).tobytes()
    h = np.where(
        expanded,
        h_marked // 2,
        np.where(change_only, 2 * (h_marked // 2) + saved, h_marked),
    )
    x = l + (h + 1) // 2
    y = l - h // 2
    if x.size and (x.min() < 0 or x.max() > 255 or y.min() < 0 or y.max() > 255):
        raise MalformedStream("restored pixels leave [0, 255]; stream is corrupt")
    out = img.pixels.copy()
    n = img.width // 2
    out[:, 0 : 2 * n : 2] = x
    out[:, 1 : 2 * n : 2] = y
    return data, GrayImage(out)
