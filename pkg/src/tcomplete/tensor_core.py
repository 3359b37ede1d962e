"""Dense third-order tensor container helpers.

Tensors are plain ``numpy.ndarray`` objects of shape ``(n1, n2, n3)`` and
dtype float64. ``t[:, :, i]`` is the i-th frontal slice and ``t[i, j, :]``
a tube fiber. The on-disk layout (see :func:`write_tensor`) stores the
first index fastest, so each frontal slice is a contiguous column-major
block.
"""

from __future__ import annotations

import struct

import numpy as np

TENSOR_MAGIC = b"TNS3"
MASK_MAGIC = b"MSK3"

_HEADER = struct.Struct("<QQQ")


def as_tensor(data) -> np.ndarray:
    """Coerce ``data`` to a float64 array of rank 3."""
    t = np.asarray(data, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={t.ndim}")
    return t


def check_finite(t: np.ndarray, name: str = "tensor") -> None:
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name} contains non-finite entries")


def _require_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise ValueError(f"incompatible shapes: {sorted(shapes)}")


def frobenius_norm(t: np.ndarray) -> float:
    """Square root of the sum of squared entries."""
    return float(np.linalg.norm(np.asarray(t, dtype=np.float64).ravel()))


def inner_product(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of elementwise products of two same-shaped tensors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _require_same_shape(a, b)
    return float(np.vdot(a.ravel(), b.ravel()))


def project_mask(t: np.ndarray, mask: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Replace the entries of ``t`` on the observed set with those of ``m``.

    The output equals ``m`` where ``mask`` is True and ``t`` elsewhere, so
    applying it twice with the same mask and data is a no-op.
    """
    t = np.asarray(t, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    _require_same_shape(t, mask, m)
    return np.where(mask, m, t)


def sampling_ratio(mask: np.ndarray) -> float:
    mask = np.asarray(mask, dtype=bool)
    return float(np.count_nonzero(mask)) / mask.size


# ---------------------------------------------------------------------------
# Binary formats. Both share an identical 28-byte header: 4 magic bytes and
# three unsigned little-endian 64-bit dims. Payload entries are laid out
# first-index-fastest (Fortran order over (n1, n2, n3)).
# ---------------------------------------------------------------------------


def write_tensor(t: np.ndarray, path) -> None:
    """Write a float64 tensor in the TNS3 binary format."""
    t = as_tensor(t)
    check_finite(t)
    with open(path, "wb") as fh:
        fh.write(TENSOR_MAGIC)
        fh.write(_HEADER.pack(*t.shape))
        fh.write(np.asfortranarray(t).tobytes(order="F"))


def read_tensor(path) -> np.ndarray:
    """Read a tensor written by :func:`write_tensor`."""
    dims, payload = _read_payload(path, TENSOR_MAGIC, 8)
    t = np.frombuffer(payload, dtype="<f8").reshape(dims, order="F")
    t = np.ascontiguousarray(t)
    check_finite(t, name=str(path))
    return t


def write_mask(mask: np.ndarray, path) -> None:
    """Write a boolean mask in the MSK3 binary format (one byte per entry)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 3:
        raise ValueError(f"expected a third-order mask, got ndim={mask.ndim}")
    with open(path, "wb") as fh:
        fh.write(MASK_MAGIC)
        fh.write(_HEADER.pack(*mask.shape))
        fh.write(mask.astype(np.uint8).tobytes(order="F"))


def read_mask(path) -> np.ndarray:
    dims, payload = _read_payload(path, MASK_MAGIC, 1)
    raw = np.frombuffer(payload, dtype=np.uint8)
    if not np.all((raw == 0) | (raw == 1)):
        raise ValueError(f"{path}: mask bytes must be 0 or 1")
    return np.ascontiguousarray(raw.reshape(dims, order="F").astype(bool))


def _read_payload(path, magic: bytes, itemsize: int):
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head != magic:
            raise ValueError(f"{path}: bad magic {head!r}, expected {magic!r}")
        dims = _HEADER.unpack(fh.read(_HEADER.size))
        if any(d < 1 for d in dims):
            raise ValueError(f"{path}: non-positive dims {dims}")
        n = dims[0] * dims[1] * dims[2]
        payload = fh.read()
    if len(payload) != n * itemsize:
        raise ValueError(
            f"{path}: payload holds {len(payload)} bytes, expected {n * itemsize}"
        )
    return dims, payload
