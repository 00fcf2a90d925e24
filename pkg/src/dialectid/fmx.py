"""FMX: a 12-byte-header binary container for 2-D float32 feature matrices.

Layout (all little-endian)::

    offset 0   4 bytes   magic b"FMX1"
    offset 4   uint32    rows
    offset 8   uint32    cols
    offset 12  float32[rows*cols], row-major

File size is always ``12 + 4 * rows * cols``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

MAGIC = b"FMX1"
HEADER = struct.Struct("<4sII")
DEFAULT_MAX_ELEMENTS = 2**28


class FeatureKind(str, Enum):
    FB40 = "FB40"
    MFCC13 = "MFCC13"
    MFCC39 = "MFCC39"
    PROSODY = "PROSODY"
    EMBEDDING = "EMBEDDING"


class FmxError(ValueError):
    pass


@dataclass
class FeatureMatrix:
    """A frames x dims matrix of frame-level features."""

    values: np.ndarray
    feature_kind: FeatureKind = FeatureKind.EMBEDDING
    frame_shift_s: float = 0.010

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {v.shape}")
        self.values = v
        self.feature_kind = FeatureKind(self.feature_kind)

    @property
    def dims(self) -> int:
        return self.values.shape[1]

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, FeatureMatrix):
        return matrix.values
    return np.asarray(matrix)


def to_bytes(matrix) -> bytes:
    """Encode a matrix; raises FmxError before producing anything if non-finite."""
    values = _as_array(matrix)
    if values.ndim != 2:
        raise FmxError(f"expected a 2-D matrix, got shape {values.shape}")
    with np.errstate(over="ignore"):
        payload = np.ascontiguousarray(values, dtype="<f4")
    if not np.all(np.isfinite(payload)):
        raise FmxError("matrix contains non-finite values")
    rows, cols = payload.shape
    return HEADER.pack(MAGIC, rows, cols) + payload.tobytes()


def from_bytes(data: bytes, feature_kind=FeatureKind.EMBEDDING,
               max_elements: int = DEFAULT_MAX_ELEMENTS) -> FeatureMatrix:
    if len(data) < HEADER.size:
        raise FmxError("truncated header")
    magic, rows, cols = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FmxError(f"bad magic {magic!r}")
    n = rows * cols
    if n > max_elements:
        raise FmxError(f"declared size {rows}x{cols} exceeds limit of {max_elements} elements")
    expected = HEADER.size + 4 * n
    if len(data) < expected:
        raise FmxError(f"truncated payload: expected {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise FmxError(f"trailing bytes: expected {expected} bytes, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", count=n, offset=HEADER.size)
    values = values.reshape(rows, cols).astype(np.float32)
    if not np.all(np.isfinite(values)):
        raise FmxError("payload contains NaN or Inf")
    return FeatureMatrix(values, feature_kind)


def write_fmx(matrix, destination) -> int:
    """Write ``matrix`` to a path or binary stream. Returns bytes written."""
    data = to_bytes(matrix)
    if hasattr(destination, "write"):
        destination.write(data)
    else:
        with open(destination, "wb") as fh:
            fh.write(data)
    return len(data)


def read_fmx(source, feature_kind=FeatureKind.EMBEDDING,
             max_elements: int = DEFAULT_MAX_ELEMENTS) -> FeatureMatrix:
    """Read one FMX matrix from a path or binary stream.

    Only the header-declared amount of payload is read, so a corrupt header
    cannot trigger an oversized allocation beyond ``max_elements``.
    """
    if hasattr(source, "read"):
        return _read_stream(source, feature_kind, max_elements)
    with open(source, "rb") as fh:
        matrix = _read_stream(fh, feature_kind, max_elements)
        if fh.read(1):
            raise FmxError("trailing bytes after payload")
        return matrix


def _read_stream(fh, feature_kind, max_elements) -> FeatureMatrix:
    head = fh.read(HEADER.size)
    if len(head) < HEADER.size:
        raise FmxError("truncated header")
    magic, rows, cols = HEADER.unpack(head)
    if magic != MAGIC:
        raise FmxError(f"bad magic {magic!r}")
    if rows * cols > max_elements:
        raise FmxError(f"declared size {rows}x{cols} exceeds limit of {max_elements} elements")
    payload = fh.read(4 * rows * cols)
    return from_bytes(head + payload, feature_kind, max_elements)


def read_fmx_sequence(fh, count: int) -> list[FeatureMatrix]:
    """Read ``count`` consecutive FMX blocks from an open binary stream."""
    return [_read_stream(fh, FeatureKind.EMBEDDING, DEFAULT_MAX_ELEMENTS) for _ in range(count)]
