"""Tensor-tubal algebra: tube DFTs, t-product, t-transpose and t-SVD.

Tensors are plain ``(m, n, k)`` float64 arrays whose third axis holds the
tubes (seismic traces).  Spectral tensors are complex arrays of the same
shape holding the unnormalised DFT of every tube, so that
``||fft_tubes(t)||_F**2 == k * ||t||_F**2``.

Routines that start from real data only touch the ``k // 2 + 1``
non-redundant frequency slices and rebuild the rest by conjugate mirroring,
which keeps every time-domain result exactly real.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NonFiniteInput, RankOutOfRange, SymmetryViolation

SYMMETRY_RTOL = 1e-9


def _as_tensor(t, name="t"):
    a = np.asarray(t, dtype=np.float64)
    if a.ndim != 3:
        raise DimMismatch(f"{name} must be a 3-way array, got shape {a.shape}")
    return a


def n_half(k):
    """Number of non-redundant frequency slices of a real length-``k`` tube."""
    return k // 2 + 1


def self_conjugate_slices(k):
    """Indices of slices that equal their own mirror (DC, and Nyquist for even k)."""
    return (0, k // 2) if k % 2 == 0 else (0,)


def mirror_half(h, k):
    """Rebuild a full conjugate-symmetric spectrum from its first ``k//2 + 1`` slices."""
    full = np.empty(h.shape[:-1] + (k,), dtype=np.complex128)
    nh = n_half(k)
    full[..., :nh] = h[..., :nh]
    if k > 1:
        tail = np.arange(nh, k)
        full[..., tail] = np.conj(h[..., k - tail])
    return full


def fft_tubes(t):
    """Unnormalised DFT of every tube ``t[i, j, :]``."""
    return np.fft.fft(_as_tensor(t), axis=2)


def symmetry_defect(s):
    """Relative size of the conjugate-symmetry violation of a spectral tensor."""
    s = np.asarray(s)
    k = s.shape[2]
    scale = np.linalg.norm(s)
    if scale == 0.0:
        return 0.0
    mirrored = np.conj(s[:, :, (-np.arange(k)) % k])
    return float(np.linalg.norm(s - mirrored) / scale)


def ifft_tubes(s, rtol=SYMMETRY_RTOL):
    """Inverse of :func:`fft_tubes` for spectra of real tensors.

    Raises
    ------
    SymmetryViolation
        If ``s`` is not conjugate-symmetric along its third axis to within
        ``rtol`` (relative Frobenius norm).
    """
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim != 3:
        raise DimMismatch(f"spectral tensor must be 3-way, got shape {s.shape}")
    defect = symmetry_defect(s)
    if defect > rtol:
        raise SymmetryViolation(f"spectrum is not conjugate-symmetric (defect {defect:.3e})")
    k = s.shape[2]
    return np.fft.irfft(s[:, :, : n_half(k)], n=k, axis=2)


def spectral_transpose(s):
    """t-transpose expressed on spectra: conjugate transpose of every frontal slice."""
    return np.conj(np.asarray(s)).transpose(1, 0, 2)


def slice_products(a, b):
    """Frontal-slice-wise matrix product of two spectral stacks ``(.., .., h)``."""
    return np.einsum("isl,sjl->ijl", a, b, optimize=True)


def t_product(x, y):
    """t-product ``x * y`` of an ``n1 x n2 x k`` and an ``n2 x n3 x k`` tensor."""
    x = _as_tensor(x, "x")
    y = _as_tensor(y, "y")
    if x.shape[1] != y.shape[0] or x.shape[2] != y.shape[2]:
        raise DimMismatch(f"cannot t-multiply {x.shape} by {y.shape}")
    k = x.shape[2]
    prod = slice_products(np.fft.rfft(x, axis=2), np.fft.rfft(y, axis=2))
    return np.fft.irfft(prod, n=k, axis=2)


def t_transpose(x):
    """Transpose every frontal slice and reverse the order of slices 2..k."""
    x = _as_tensor(x, "x")
    k = x.shape[2]
    return x.transpose(1, 0, 2)[:, :, (-np.arange(k)) % k].copy()


def t_identity(m, k):
    """The ``m x m x k`` t-identity: identity first slice, zeros elsewhere."""
    eye = np.zeros((m, m, k))
    eye[:, :, 0] = np.eye(m)
    return eye


@dataclass(frozen=True)
class TSvdResult:
    """Factors of ``t = U * S * V^T``.

    ``sigma`` holds the singular values of the non-redundant frequency
    slices, shape ``(k // 2 + 1, rho)``, sorted descending within a slice.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    sigma: np.ndarray

    @property
    def rho(self):
        return self.S.shape[0]

    def tube_norms(self):
        """l2 norms of the diagonal tubes ``S(i, i, :)``."""
        diag = self.S[np.arange(self.rho), np.arange(self.rho), :]
        return np.linalg.norm(diag, axis=1)

    def compose(self):
        return t_product(t_product(self.U, self.S), t_transpose(self.V))


def _fix_phase(u, v):
    # make the largest-magnitude entry of every left singular vector real >= 0
    idx = np.argmax(np.abs(u), axis=-2)
    lead = np.take_along_axis(u, idx[..., None, :], axis=-2)
    mag = np.abs(lead)
    phase = np.where(mag > 0, lead / np.where(mag > 0, mag, 1.0), 1.0)
    return u * np.conj(phase), v * np.conj(phase)


def _slice_svd(h, k):
    """SVD of every non-redundant frequency slice of a half spectrum ``(m, n, nh)``."""
    stack = np.ascontiguousarray(h.transpose(2, 0, 1))
    m, n = stack.shape[1:]
    rho = min(m, n)
    u = np.empty((stack.shape[0], m, rho), dtype=np.complex128)
    v = np.empty((stack.shape[0], n, rho), dtype=np.complex128)
    sig = np.empty((stack.shape[0], rho))
    real_idx = list(self_conjugate_slices(k))
    cplx_idx = [i for i in range(stack.shape[0]) if i not in real_idx]
    ur, sr, vhr = np.linalg.svd(stack[real_idx].real, full_matrices=False)
    u[real_idx], v[real_idx] = ur, vhr.transpose(0, 2, 1)
    sig[real_idx] = sr
    if cplx_idx:
        uc, sc, vhc = np.linalg.svd(stack[cplx_idx], full_matrices=False)
        u[cplx_idx], v[cplx_idx] = uc, np.conj(vhc).transpose(0, 2, 1)
        sig[cplx_idx] = sc
    u, v = _fix_phase(u, v)
    return u, sig, v


def t_svd(t, r=None):
    """t-SVD computed slice-wise in the Fourier domain.

    Parameters
    ----------
    t : ndarray, shape (m, n, k)
    r : int, optional
        Keep only the first ``r`` singular tubes (``1 <= r <= min(m, n)``).
    """
    t = _as_tensor(t)
    if not np.all(np.isfinite(t)):
        raise NonFiniteInput("t_svd input contains NaN or Inf")
    m, n, k = t.shape
    rho = min(m, n)
    if r is not None and not 1 <= r <= rho:
        raise RankOutOfRange(f"r={r} outside [1, {rho}]")
    u, sig, v = _slice_svd(np.fft.rfft(t, axis=2), k)
    if r is not None:
        u, sig, v = u[:, :, :r], sig[:, :r], v[:, :, :r]
        rho = r
    U = np.fft.irfft(u.transpose(1, 2, 0), n=k, axis=2)
    V = np.fft.irfft(v.transpose(1, 2, 0), n=k, axis=2)
    tubes = np.fft.irfft(sig.T, n=k, axis=1)
    S = np.zeros((rho, rho, k))
    S[np.arange(rho), np.arange(rho), :] = tubes
    return TSvdResult(U=U, S=S, V=V, sigma=sig)


def truncate_tubes(res, r, trim=False):
    """Zero the singular tubes beyond the first ``r``.

    With ``trim=True`` the factors are cut to width ``r`` as well.
    """
    if not 1 <= r <= res.rho:
        raise RankOutOfRange(f"r={r} outside [1, {res.rho}]")
    if trim:
        return TSvdResult(U=res.U[:, :r].copy(), S=res.S[:r, :r].copy(),
                          V=res.V[:, :r].copy(), sigma=res.sigma[:, :r].copy())
    S = res.S.copy()
    S[r:, r:, :] = 0.0
    sigma = res.sigma.copy()
    sigma[:, r:] = 0.0
    return TSvdResult(U=res.U, S=S, V=res.V, sigma=sigma)


def singular_tube_norms(t):
    """Sorted (descending) l2 norms of the singular tubes of ``t``."""
    t = _as_tensor(t)
    k = t.shape[2]
    h = np.fft.rfft(t, axis=2).transpose(2, 0, 1)
    sig = np.empty((h.shape[0], min(t.shape[:2])))
    real_idx = list(self_conjugate_slices(k))
    cplx_idx = [i for i in range(h.shape[0]) if i not in real_idx]
    sig[real_idx] = np.linalg.svd(h[real_idx].real, compute_uv=False)
    if cplx_idx:
        sig[cplx_idx] = np.linalg.svd(h[cplx_idx], compute_uv=False)
    # Parseval over the full spectrum: mirrored slices count twice
    weight = np.full(h.shape[0], 2.0)
    weight[real_idx] = 1.0
    return np.sqrt(weight @ sig**2 / k)


def tubal_rank(t, rel_tol=1e-6):
    """Count singular tubes whose norm exceeds ``rel_tol`` times the largest.

    Returns
    -------
    rank : int
    norms : ndarray
        All singular-tube norms, descending, for manual inspection.
    """
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    norms = singular_tube_norms(t)
    if norms.size == 0 or norms[0] == 0.0:
        return 0, norms
    return int(np.count_nonzero(norms > rel_tol * norms[0])), norms


def singular_tube_cdf(t, merge_tol=1e-12):
    """Empirical CDF of the singular-tube norms as ``(norm, fraction)`` steps.

    Norms closer than ``merge_tol * max_norm`` are treated as one atom, so a
    tensor with all tube norms equal produces a single point.
    """
    norms = np.sort(singular_tube_norms(t))
    rho = norms.size
    if rho == 0:
        return []
    atol = merge_tol * max(norms[-1], np.finfo(float).tiny)
    points = []
    for i, v in enumerate(norms, start=1):
        if points and v - points[-1][2] <= atol:
            points[-1] = (points[-1][0], i / rho, points[-1][2])
        else:
            points.append((float(v), i / rho, v))
    return [(norm, frac) for norm, frac, _ in points]
