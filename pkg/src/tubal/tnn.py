"""Tensor-nuclear-norm completion by ADMM, the baseline for the solver comparisons.

The tensor nuclear norm used here is ``(1/k) * sum_l ||fft slice l||_*``,
for which the proximal operator of ``tau * TNN`` is singular value
soft-thresholding by ``tau`` on every frequency slice.
"""
from dataclasses import dataclass
import logging
from time import perf_counter

import numpy as np

from .altmin import MAX_ITERS, STALL, TOL, SolveReport
from .errors import DimMismatch, EmptyMask, NonFiniteInput
from .sampling import project
from .talgebra import _as_tensor, n_half, self_conjugate_slices

log = logging.getLogger(__name__)


@dataclass
class TnnConfig:
    rho: float = 1e-2
    rho_growth: float = 1.1
    rho_max: float = 1e3
    max_iters: int = 500
    tol_rse: float = 1e-4
    tol_primal: float = 1e-7
    stop_on: str = "observed"

    def __post_init__(self):
        if self.stop_on not in ("observed", "truth"):
            raise ValueError(f"stop_on must be 'observed' or 'truth', got {self.stop_on!r}")
        if self.rho <= 0 or self.rho_max < self.rho or self.rho_growth < 1.0:
            raise ValueError("need 0 < rho <= rho_max and rho_growth >= 1")
        if self.tol_rse <= 0 or self.tol_primal <= 0 or self.max_iters < 1:
            raise ValueError("tolerances and max_iters must be positive")


def _slice_svds(h, k):
    stack = h.transpose(2, 0, 1)
    real_idx = list(self_conjugate_slices(k))
    cplx_idx = [i for i in range(stack.shape[0]) if i not in real_idx]
    out = []
    for idx, data in ((real_idx, stack[real_idx].real), (cplx_idx, stack[cplx_idx])):
        if idx:
            out.append((idx, np.linalg.svd(data, full_matrices=False)))
    return out


def svt_tubes(t, tau):
    """Soft-threshold the singular values of every frequency slice of ``t`` by ``tau``."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    t = _as_tensor(t)
    k = t.shape[2]
    h = np.fft.rfft(t, axis=2)
    out = np.empty((h.shape[2],) + t.shape[:2], dtype=np.complex128)
    for idx, (u, s, vh) in _slice_svds(h, k):
        shrunk = np.maximum(s - tau, 0.0)
        out[idx] = (u * shrunk[:, None, :]) @ vh
    return np.fft.irfft(out.transpose(1, 2, 0), n=k, axis=2)


def tensor_nuclear_norm(t):
    t = _as_tensor(t)
    k = t.shape[2]
    h = np.fft.rfft(t, axis=2)
    total = 0.0
    for idx, (_, s, _) in _slice_svds(h, k):
        weight = np.array([1.0 if i in self_conjugate_slices(k) else 2.0 for i in idx])
        total += float(weight @ s.sum(axis=1))
    return total / k


def complete_tnn(t_omega, mask, cfg=None, truth=None):
    """Minimise the tensor nuclear norm subject to matching the observed entries.

    ADMM on ``min TNN(X)  s.t.  X = Z,  P(Z) = P(T)``; the returned estimate is
    the data-consistent iterate ``Z``.  The report's objective is the
    observed-entry misfit of the low-rank iterate ``X``.  Besides the RSE
    tolerance, the run stops once both the step ``||Z_new - Z||`` and the
    splitting gap ``||X - Z||`` fall below ``tol_primal`` relative to ``||Z||``.
    """
    cfg = cfg or TnnConfig()
    start = perf_counter()
    t_omega = _as_tensor(t_omega)
    mask.check(t_omega.shape)
    if not np.all(np.isfinite(t_omega)):
        raise NonFiniteInput("observations contain NaN or Inf")
    if mask.count == 0:
        raise EmptyMask("no observed entries")
    if truth is not None:
        truth = _as_tensor(truth, "truth")
        if truth.shape != t_omega.shape:
            raise DimMismatch(f"truth {truth.shape} vs data {t_omega.shape}")
        truth_norm = np.linalg.norm(truth)
    elif cfg.stop_on == "truth":
        raise ValueError("stop_on='truth' needs a truth tensor")
    obs = mask.dense(t_omega.shape[2])
    t_omega = project(t_omega, mask)
    obs_norm = np.linalg.norm(t_omega)
    report = SolveReport(rse_history=[] if truth is not None else None)

    if mask.count == mask.array.size:
        # the constraint set is the single point P(T) = T
        report.iters_run = 1
        report.objective_history.append(0.0)
        report.elapsed.append(perf_counter() - start)
        if truth is not None:
            report.rse_history.append(float(np.linalg.norm(t_omega - truth) / truth_norm))
        report.terminated_by = TOL
        report.wall_time = perf_counter() - start
        return t_omega, report

    z = t_omega.copy()
    dual = np.zeros_like(z)
    rho = cfg.rho
    for it in range(1, cfg.max_iters + 1):
        x = svt_tubes(z - dual / rho, 1.0 / rho)
        z_new = np.where(obs, t_omega, x + dual / rho)
        dual += rho * (x - z_new)
        misfit = np.linalg.norm(project(x, mask) - t_omega)
        obj = float(misfit / obs_norm) if obs_norm > 0 else float(misfit)
        z_scale = max(np.linalg.norm(z_new), np.finfo(float).tiny)
        change = max(np.linalg.norm(z_new - z), np.linalg.norm(x - z_new)) / z_scale
        z = z_new
        rho = min(rho * cfg.rho_growth, cfg.rho_max)
        report.objective_history.append(obj)
        report.elapsed.append(perf_counter() - start)
        if truth is not None:
            report.rse_history.append(float(np.linalg.norm(z - truth) / truth_norm))
        report.iters_run = it
        log.debug("iter %d misfit %.3e change %.3e", it, obj, change)
        gauge = report.rse_history[-1] if cfg.stop_on == "truth" else obj
        if gauge < cfg.tol_rse:
            report.terminated_by = TOL
            break
        if change < cfg.tol_primal:
            report.terminated_by = STALL
            break
    else:
        report.terminated_by = MAX_ITERS
    report.wall_time = perf_counter() - start
    return z, report
