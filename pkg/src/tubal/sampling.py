"""Observation sets and the projection onto observed entries."""
from dataclasses import dataclass
import hashlib

import numpy as np

from .errors import DimMismatch, RateOutOfRange

TRACE = "trace"
ELEMENT = "element"


@dataclass(frozen=True, eq=False)
class ObservationMask:
    """An observed set.

    ``kind == "trace"`` masks are 2-D ``(m, n)`` and observe whole tubes;
    ``kind == "element"`` masks are 3-D ``(m, n, k)``.  For trace masks the
    time length ``k`` is not part of the mask.
    """

    kind: str
    array: np.ndarray
    seed: int = 0
    rate: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.array, dtype=bool)
        want = 2 if self.kind == TRACE else 3
        if self.kind not in (TRACE, ELEMENT) or arr.ndim != want:
            raise DimMismatch(f"{self.kind!r} mask needs a {want}-D array, got {arr.shape}")
        object.__setattr__(self, "array", arr)

    @property
    def is_trace(self):
        return self.kind == TRACE

    @property
    def count(self):
        return int(np.count_nonzero(self.array))

    def check(self, shape):
        if tuple(self.array.shape) != tuple(shape[: self.array.ndim]):
            raise DimMismatch(f"mask shape {self.array.shape} does not fit tensor {tuple(shape)}")

    def dense(self, k=None):
        """Boolean ``(m, n, k)`` indicator."""
        if self.is_trace:
            if k is None:
                raise ValueError("k is required to expand a trace mask")
            return np.broadcast_to(self.array[:, :, None], self.array.shape + (k,))
        return self.array

    def observed_fraction(self):
        return self.count / self.array.size

    def transpose(self):
        """Mask of the t-transposed problem."""
        if self.is_trace:
            arr = self.array.T
        else:
            k = self.array.shape[2]
            arr = self.array.transpose(1, 0, 2)[:, :, (-np.arange(k)) % k]
        return ObservationMask(self.kind, arr.copy(), self.seed, self.rate)

    def digest(self):
        """Short content hash, used to show that paired runs share a mask."""
        h = hashlib.sha1(self.kind.encode())
        h.update(np.asarray(self.array.shape, dtype=np.int64).tobytes())
        h.update(np.packbits(self.array.ravel(order="F")).tobytes())
        return h.hexdigest()[:12]


def _count_for(rate, total):
    if not 0.0 < rate <= 1.0:
        raise RateOutOfRange(f"rate {rate} outside (0, 1]")
    return int(np.floor(rate * total + 0.5))


def _choose(total, count, seed):
    flat = np.zeros(total, dtype=bool)
    flat[np.random.default_rng(seed).permutation(total)[:count]] = True
    return flat


def random_trace_mask(m, n, rate, seed):
    """Observe ``round(rate * m * n)`` whole traces chosen without replacement."""
    count = _count_for(rate, m * n)
    arr = _choose(m * n, count, seed).reshape(m, n)
    return ObservationMask(TRACE, arr, seed=int(seed), rate=float(rate))


def random_element_mask(m, n, k, rate, seed):
    """Observe ``round(rate * m * n * k)`` individual entries."""
    count = _count_for(rate, m * n * k)
    arr = _choose(m * n * k, count, seed).reshape(m, n, k)
    return ObservationMask(ELEMENT, arr, seed=int(seed), rate=float(rate))


def random_mask(shape, rate, seed, mode=TRACE):
    m, n, k = shape
    if mode == TRACE:
        return random_trace_mask(m, n, rate, seed)
    if mode == ELEMENT:
        return random_element_mask(m, n, k, rate, seed)
    raise ValueError(f"unknown sampling mode {mode!r}")


def full_mask(shape, mode=TRACE):
    m, n, k = shape
    arr = np.ones((m, n) if mode == TRACE else (m, n, k), dtype=bool)
    return ObservationMask(mode, arr, seed=0, rate=1.0)


def project(t, mask):
    """Keep observed entries of ``t`` and zero the rest."""
    t = np.asarray(t)
    if t.ndim != 3:
        raise DimMismatch(f"expected a 3-way tensor, got shape {t.shape}")
    mask.check(t.shape)
    if mask.is_trace:
        return np.where(mask.array[:, :, None], t, 0.0)
    return np.where(mask.array, t, 0.0)


def project_spectral(s, mask):
    """Projection of a spectrum by a trace mask (commutes with the tube DFT)."""
    if not mask.is_trace:
        raise ValueError("only trace masks act slice-wise on spectra")
    mask.check(s.shape)
    return np.where(mask.array[:, :, None], s, 0)


def coverage_report(mask):
    """Rows (inlines) and columns (xlines) with no observed trace.

    Such fibres cannot be reconstructed by a factorisation and come back as
    zeros from the solver.
    """
    traces = mask.array if mask.is_trace else mask.array.any(axis=2)
    return {
        "empty_rows": [int(i) for i in np.flatnonzero(~traces.any(axis=1))],
        "empty_cols": [int(j) for j in np.flatnonzero(~traces.any(axis=0))],
        "rate_actual": mask.count / mask.array.size,
    }
