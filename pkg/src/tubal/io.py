"""Binary tensor (``T3B1``) and mask (``MSK1``) files.

Both formats are little-endian.  Entries are stored with the first index
fastest and the time index slowest (column-major frontal slices, one slice
after another).

``T3B1``: magic, ``m, n, k`` as uint32, ``dt`` as float64, then
``m*n*k`` float64 values.

``MSK1``: magic, kind byte (0 trace, 1 element), ``m, n, k`` as uint32,
then one 0/1 byte per entry (``m*n`` bytes for trace masks).
"""
import struct

import numpy as np

from .errors import ReadError
from .sampling import ELEMENT, TRACE, ObservationMask

T3B_MAGIC = b"T3B1"
MSK_MAGIC = b"MSK1"
_T3B_HEAD = struct.Struct("<4s3Id")
_MSK_HEAD = struct.Struct("<4sB3I")
_KIND_CODE = {TRACE: 0, ELEMENT: 1}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


def write_t3b(path, t, dt=0.0):
    t = np.asarray(t, dtype="<f8")
    if t.ndim != 3:
        raise ValueError(f"expected a 3-way tensor, got shape {t.shape}")
    with open(path, "wb") as fh:
        fh.write(_T3B_HEAD.pack(T3B_MAGIC, *t.shape, float(dt)))
        fh.write(t.tobytes(order="F"))


def read_t3b(path):
    """Return ``(tensor, dt)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _T3B_HEAD.size:
        raise ReadError(f"{path}: file too short for a T3B1 header")
    magic, m, n, k, dt = _T3B_HEAD.unpack_from(raw)
    if magic != T3B_MAGIC:
        raise ReadError(f"{path}: bad magic {magic!r}")
    want = _T3B_HEAD.size + 8 * m * n * k
    if len(raw) != want:
        raise ReadError(f"{path}: size {len(raw)} does not match header ({want} bytes)")
    data = np.frombuffer(raw, dtype="<f8", offset=_T3B_HEAD.size)
    return data.reshape((m, n, k), order="F").astype(np.float64), dt


def write_msk(path, mask, k=0):
    """Write ``mask``; ``k`` records the time length for trace masks."""
    arr = mask.array
    dims = arr.shape if arr.ndim == 3 else arr.shape + (int(k),)
    with open(path, "wb") as fh:
        fh.write(_MSK_HEAD.pack(MSK_MAGIC, _KIND_CODE[mask.kind], *dims))
        fh.write(arr.astype(np.uint8).tobytes(order="F"))


def read_msk(path, seed=0, rate=None):
    """Return ``(mask, k)`` where ``k`` is the recorded time length."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _MSK_HEAD.size:
        raise ReadError(f"{path}: file too short for an MSK1 header")
    magic, code, m, n, k = _MSK_HEAD.unpack_from(raw)
    if magic != MSK_MAGIC:
        raise ReadError(f"{path}: bad magic {magic!r}")
    if code not in _CODE_KIND:
        raise ReadError(f"{path}: unknown mask kind {code}")
    kind = _CODE_KIND[code]
    shape = (m, n) if kind == TRACE else (m, n, k)
    want = _MSK_HEAD.size + int(np.prod(shape))
    if len(raw) != want:
        raise ReadError(f"{path}: size {len(raw)} does not match header ({want} bytes)")
    payload = np.frombuffer(raw, dtype=np.uint8, offset=_MSK_HEAD.size)
    if payload.size and payload.max() > 1:
        raise ReadError(f"{path}: mask payload must be 0/1 bytes")
    arr = payload.reshape(shape, order="F").astype(bool)
    if rate is None:
        rate = float(arr.mean()) if arr.size else 0.0
    return ObservationMask(kind, arr, seed=seed, rate=rate), k
