"""Reconstruction error and convergence-speed measures."""
from collections import namedtuple

import numpy as np

from .errors import DimMismatch, TooFewPoints, ZeroReference

RSE_FLOOR = 1e-16

ConvergenceRate = namedtuple("ConvergenceRate", "slope r2 clamped")


def rse(estimate, truth):
    """Relative error ``||estimate - truth||_F / ||truth||_F``."""
    estimate = np.asarray(estimate, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if estimate.shape != truth.shape:
        raise DimMismatch(f"shapes differ: {estimate.shape} vs {truth.shape}")
    ref = np.linalg.norm(truth)
    if ref == 0.0:
        raise ZeroReference("reference tensor has zero norm")
    return float(np.linalg.norm(estimate - truth) / ref)


def convergence_rate(history):
    """Least-squares line through ``log10(rse)`` against iteration number.

    The slope is in decades per iteration (negative when converging).
    Non-positive entries are clamped to ``1e-16`` and flagged in ``clamped``.
    """
    h = np.asarray(history, dtype=np.float64)
    if h.ndim != 1 or h.size < 3:
        raise TooFewPoints("need at least three RSE values")
    if not np.all(np.isfinite(h)):
        raise ValueError("RSE history contains NaN or Inf")
    clamped = bool(np.any(h < RSE_FLOOR))
    y = np.log10(np.maximum(h, RSE_FLOOR))
    x = np.arange(h.size, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    slope = float(xc @ yc / (xc @ xc))
    ss_tot = float(yc @ yc)
    if ss_tot == 0.0:
        return ConvergenceRate(slope, 1.0, clamped)
    resid = yc - slope * xc
    return ConvergenceRate(slope, 1.0 - float(resid @ resid) / ss_tot, clamped)
