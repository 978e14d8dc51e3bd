"""RGT1 tensor files and validated in-memory datasets.

The on-disk format is deliberately tiny and bit-exact::

    bytes 0..3   magic "RGT1"
    byte  4      dtype code: 0 = float32, 1 = int64
    byte  5      ndim (1 or 2)
    next  8*ndim little-endian u64 dimension sizes
    rest         raw little-endian row-major payload, exact length

float32 payloads must be finite; loading rejects NaN/Inf. Loaded arrays
are treated as immutable and may be shared across worker threads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadMagic,
    InvalidTensor,
    LabelOutOfRange,
    NonFiniteValues,
    ShapeMismatch,
    SimplexViolation,
    TruncatedPayload,
    UnknownDtype,
)

MAGIC = b"RGT1"

_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.int64): 1}
_CODE_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<i8")}

# Row sums of float32 softmax exports routinely miss 1.0 by ~1e-4; only
# gross corruption is rejected.
SIMPLEX_ATOL = 1e-3


def _check_tensor(arr: np.ndarray) -> np.ndarray:
    if arr.dtype not in _DTYPE_CODES:
        raise InvalidTensor(f"unsupported dtype {arr.dtype}; use float32 or int64")
    if arr.ndim not in (1, 2):
        raise InvalidTensor(f"tensors must have 1 or 2 dimensions, got {arr.ndim}")
    if any(dim < 1 for dim in arr.shape):
        raise InvalidTensor(f"all dimensions must be >= 1, got shape {arr.shape}")
    if arr.dtype == np.float32 and not np.isfinite(arr).all():
        raise InvalidTensor("float32 tensor contains NaN or Inf")
    return np.ascontiguousarray(arr)


def save_tensor(path, arr: np.ndarray) -> None:
    """Write a 1-D or 2-D float32/int64 array to `path` in RGT1 format."""
    arr = _check_tensor(arr)
    header = MAGIC + struct.pack("<BB", _DTYPE_CODES[arr.dtype], arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def load_tensor(path) -> np.ndarray:
    """Read an RGT1 file back into a numpy array (inverse of save_tensor)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise BadMagic(f"{path}: expected magic {MAGIC!r}, got {blob[:4]!r}")
    if len(blob) < 6:
        raise TruncatedPayload(f"{path}: header cut short at {len(blob)} bytes")
    code, ndim = struct.unpack_from("<BB", blob, 4)
    if code not in _CODE_DTYPES:
        raise UnknownDtype(f"{path}: unknown dtype code {code}")
    if ndim not in (1, 2):
        raise TruncatedPayload(f"{path}: ndim must be 1 or 2, got {ndim}")
    dtype = _CODE_DTYPES[code]
    dims_end = 6 + 8 * ndim
    if len(blob) < dims_end:
        raise TruncatedPayload(f"{path}: header declares {ndim} dims but file ends early")
    shape = struct.unpack_from(f"<{ndim}Q", blob, 6)
    if any(dim < 1 for dim in shape):
        raise TruncatedPayload(f"{path}: zero-sized dimension in {shape}")
    count = int(np.prod(shape))
    expected = dims_end + count * dtype.itemsize
    if len(blob) != expected:
        raise TruncatedPayload(
            f"{path}: payload is {len(blob) - dims_end} bytes, "
            f"shape {shape} needs {count * dtype.itemsize}"
        )
    arr = np.frombuffer(blob, dtype=dtype, count=count, offset=dims_end).reshape(shape)
    if dtype.kind == "f" and not np.isfinite(arr).all():
        raise NonFiniteValues(f"{path}: float32 payload contains NaN or Inf")
    # native byte order, writable copy
    return arr.astype(dtype.newbyteorder("="))


@dataclass(frozen=True)
class DatasetHandle:
    """Validated bundle of features, probabilities, and (optional) labels.

    Immutable after construction; safe for concurrent reads. `row_norms`
    caches float64 L2 norms of the feature rows for kernel computation.
    """

    features: np.ndarray
    probs: np.ndarray
    labels: np.ndarray | None
    row_norms: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return self.probs.shape[1]

    def take(self, indices: np.ndarray) -> "DatasetHandle":
        """Sub-handle over a row subset (already-validated data, no re-checks)."""
        indices = np.asarray(indices)
        return DatasetHandle(
            features=self.features[indices],
            probs=self.probs[indices],
            labels=None if self.labels is None else self.labels[indices],
            row_norms=self.row_norms[indices],
        )


def validate_dataset(
    features: np.ndarray,
    probs: np.ndarray,
    labels: np.ndarray | None = None,
) -> DatasetHandle:
    """Cross-check the three inputs and bundle them into a DatasetHandle.

    Verifies row-count agreement, that every probability row lies on the
    simplex (entries in [0, 1], sum within ``SIMPLEX_ATOL`` of 1), and that
    labels fall in [0, C). `labels` may be omitted for unlabeled query sets.

    Raises
    ------
    ShapeMismatch, SimplexViolation, LabelOutOfRange
    """
    features = np.asarray(features, dtype=np.float32)
    probs = np.asarray(probs, dtype=np.float32)
    if features.ndim != 2 or probs.ndim != 2:
        raise ShapeMismatch(
            f"features and probs must be 2-D, got {features.ndim}-D and {probs.ndim}-D"
        )
    if features.shape[0] != probs.shape[0]:
        raise ShapeMismatch(
            f"features have {features.shape[0]} rows but probs have {probs.shape[0]}"
        )
    if features.shape[0] < 1 or features.shape[1] < 1:
        raise ShapeMismatch(f"features must be at least 1x1, got {features.shape}")
    if not np.isfinite(features).all():
        raise ShapeMismatch("features contain NaN or Inf")
    if probs.min(initial=0.0) < 0.0 or probs.max(initial=0.0) > 1.0:
        worst = int(np.abs(probs - 0.5).max(axis=1).argmax())
        raise SimplexViolation(f"probability entries outside [0, 1] (worst row {worst})")
    row_sums = probs.sum(axis=1, dtype=np.float64)
    err = np.abs(row_sums - 1.0)
    worst = int(err.argmax())
    if err[worst] > SIMPLEX_ATOL:
        raise SimplexViolation(
            f"probability row {worst} sums to {row_sums[worst]:.6f}, "
            f"outside 1 +/- {SIMPLEX_ATOL}"
        )
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1:
            raise ShapeMismatch(f"labels must be 1-D, got {labels.ndim}-D")
        if labels.shape[0] != features.shape[0]:
            raise ShapeMismatch(
                f"features have {features.shape[0]} rows but labels have {labels.shape[0]}"
            )
        n_classes = probs.shape[1]
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            bad = int(np.argmax((labels < 0) | (labels >= n_classes)))
            raise LabelOutOfRange(
                f"label {labels[bad]} at row {bad} outside [0, {n_classes})"
            )
    norms = np.linalg.norm(features.astype(np.float64), axis=1)
    return DatasetHandle(features=features, probs=probs, labels=labels, row_norms=norms)
