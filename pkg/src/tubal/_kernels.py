"""Assembly kernels for the alternating least-squares updates.

Each kernel has a numba version and a numpy version with identical
semantics; :func:`trace_gram` and :func:`element_design` dispatch on the
active backend.
"""
import numpy as np

from . import _backend

if _backend.HAVE_NUMBA:
    from numba import njit, prange
else:  # pragma: no cover
    njit = prange = None


# --- trace masks: per-slice, per-column normal equations -------------------

def _trace_gram_numpy(xh, w, th):
    g = np.einsum("ij,ial,ibl->ljab", w, xh.conj(), xh, optimize=True)
    rhs = np.einsum("ij,ial,ijl->lja", w, xh.conj(), th, optimize=True)
    return g, rhs


def _trace_gram_numba_impl(xh, w, th):
    m, r, h = xh.shape
    n = w.shape[1]
    g = np.zeros((h, n, r, r), dtype=np.complex128)
    rhs = np.zeros((h, n, r), dtype=np.complex128)
    for l in prange(h):
        for j in range(n):
            for i in range(m):
                if w[i, j] != 0.0:
                    wij = w[i, j]
                    tij = th[i, j, l]
                    for a in range(r):
                        xa = np.conj(xh[i, a, l]) * wij
                        rhs[l, j, a] += xa * tij
                        for b in range(r):
                            g[l, j, a, b] += xa * xh[i, b, l]
    return g, rhs


# --- element masks: explicit design matrix of one lateral slice ------------

def _element_design_numpy(x, ii, tt):
    m, r, k = x.shape
    lag = (tt[:, None] - np.arange(k)[None, :]) % k
    a = x[ii[:, None, None], np.arange(r)[None, :, None], lag[:, None, :]]
    return a.reshape(len(ii), r * k)


def _element_design_numba_impl(x, ii, tt):
    m, r, k = x.shape
    nobs = ii.shape[0]
    a = np.empty((nobs, r * k), dtype=x.dtype)
    for p in prange(nobs):
        i = ii[p]
        t = tt[p]
        for s in range(r):
            for u in range(k):
                a[p, s * k + u] = x[i, s, (t - u) % k]
    return a


if _backend.HAVE_NUMBA:
    _trace_gram_numba = njit(parallel=True, cache=True)(_trace_gram_numba_impl)
    _element_design_numba = njit(parallel=True, cache=True)(_element_design_numba_impl)


def trace_gram(xh, w, th):
    """Normal equations of the column-wise least squares under a trace mask.

    Parameters
    ----------
    xh : complex ndarray, shape (m, r, h)
        Factor spectrum on the ``h`` frequency slices being solved.
    w : float ndarray, shape (m, n)
        0/1 trace mask.
    th : complex ndarray, shape (m, n, h)
        Masked data spectrum.

    Returns
    -------
    g : complex ndarray, shape (h, n, r, r)
    rhs : complex ndarray, shape (h, n, r)
    """
    xh = np.ascontiguousarray(xh, dtype=np.complex128)
    w = np.ascontiguousarray(w, dtype=np.float64)
    th = np.ascontiguousarray(th, dtype=np.complex128)
    if _backend.get_backend() == "numba":
        return _trace_gram_numba(xh, w, th)
    return _trace_gram_numpy(xh, w, th)


def element_design(x, ii, tt):
    """Rows of the circular-convolution operator ``y -> (x * y)(i, t)``.

    Row ``p`` maps the ``r*k`` entries of one lateral slice ``y(:, j, :)``
    (flattened with time fastest) to the value of ``x * y`` at
    ``(ii[p], j, tt[p])``.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    ii = np.ascontiguousarray(ii, dtype=np.int64)
    tt = np.ascontiguousarray(tt, dtype=np.int64)
    if _backend.get_backend() == "numba":
        return _element_design_numba(x, ii, tt)
    return _element_design_numpy(x, ii, tt)
