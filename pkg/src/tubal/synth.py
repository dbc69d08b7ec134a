"""Synthetic post-stack volumes: Ricker wavelets on dipping planar reflectors."""
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import FreqAboveNyquist, PlaneOutOfVolume, RankOutOfRange
from .talgebra import t_svd, truncate_tubes


@dataclass(frozen=True)
class Plane:
    """Reflector at time sample ``t0 + dip_x * i + dip_y * j`` of trace ``(i, j)``."""

    t0: float
    dip_x: float = 0.0
    dip_y: float = 0.0
    amplitude: float = 1.0


def default_planes(dims=(64, 64, 256)):
    """Two distinct dipping events, scaled from the 64 x 64 x 256 layout to ``dims``."""
    m, n, k = dims
    tscale = k / 256.0
    return [
        Plane(t0=64 * tscale, dip_x=0.5 * tscale * 64 / m, dip_y=0.0, amplitude=1.0),
        Plane(t0=160 * tscale, dip_x=-0.25 * tscale * 64 / m,
              dip_y=0.25 * tscale * 64 / n, amplitude=0.8),
    ]


@dataclass
class SynthConfig:
    dims: tuple = (64, 64, 256)
    dt: float = 0.001
    freq: float = 40.0
    planes: list | None = None
    truncate_rank: int | None = 2
    seed: int = 0
    wavelet_length: int | None = None

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if len(self.dims) != 3 or min(self.dims) < 1:
            raise ValueError(f"dims must be three positive integers, got {self.dims}")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        _check_nyquist(self.freq, self.dt)
        if self.planes is None:
            self.planes = default_planes(self.dims)


def _check_nyquist(f, dt):
    if not 0.0 < f < 0.5 / dt:
        raise FreqAboveNyquist(f"frequency {f} Hz outside (0, {0.5 / dt}) Hz for dt={dt}")


def default_wavelet_length(f, dt):
    """Shortest odd length covering six periods of the dominant frequency."""
    n = int(np.ceil(6.0 / (f * dt)))
    return n + 1 - n % 2


def ricker(f, dt, length=None):
    """Ricker wavelet ``(1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2)`` centred on the middle sample."""
    _check_nyquist(f, dt)
    if length is None:
        length = default_wavelet_length(f, dt)
    t = (np.arange(length) - (length - 1) / 2.0) * dt
    a = (np.pi * f * t) ** 2
    return (1.0 - 2.0 * a) * np.exp(-a)


def reflectivity(cfg):
    """Spike series of every plane with sub-sample times split linearly between neighbours."""
    m, n, k = cfg.dims
    refl = np.zeros((m, n, k))
    ii, jj = np.meshgrid(np.arange(m), np.arange(n), indexing="ij")
    for plane in cfg.planes:
        tau = plane.t0 + plane.dip_x * ii + plane.dip_y * jj
        inside = (tau >= 0) & (tau <= k - 1)
        if not inside.any():
            raise PlaneOutOfVolume(f"{plane} never crosses the time window [0, {k - 1}]")
        lo = np.floor(tau[inside]).astype(int)
        frac = tau[inside] - lo
        hi = np.minimum(lo + 1, k - 1)
        ix, jx = ii[inside], jj[inside]
        np.add.at(refl, (ix, jx, lo), plane.amplitude * (1.0 - frac))
        np.add.at(refl, (ix, jx, hi), plane.amplitude * frac * (lo + 1 <= k - 1))
    return refl


def dipping_planes_volume(cfg):
    m, n, k = cfg.dims
    if not cfg.planes:
        return np.zeros((m, n, k))
    w = ricker(cfg.freq, cfg.dt, cfg.wavelet_length)
    vol = fftconvolve(reflectivity(cfg), w[None, None, :], mode="same", axes=2)
    return np.ascontiguousarray(vol)


def make_low_tubal_rank(t, r):
    """Project ``t`` onto tubal rank ``r`` by truncating its t-SVD."""
    t = np.asarray(t, dtype=np.float64)
    if not 1 <= r <= min(t.shape[:2]):
        raise RankOutOfRange(f"r={r} outside [1, {min(t.shape[:2])}]")
    return truncate_tubes(t_svd(t), r, trim=True).compose()


def synthesize(cfg=None):
    """Volume described by ``cfg``, truncated to ``cfg.truncate_rank`` if set."""
    cfg = cfg or SynthConfig()
    vol = dipping_planes_volume(cfg)
    if cfg.truncate_rank is not None:
        vol = make_low_tubal_rank(vol, cfg.truncate_rank)
    return vol
