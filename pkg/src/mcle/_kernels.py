"""Hot numeric kernels for the dual solver.

Two interchangeable backends solve the box-constrained dual QP on the
selected training subset:

* ``numba``: @njit-compiled loops (default when numba imports cleanly)
* ``numpy``: vectorized pure-numpy fallback

Select explicitly with the environment variable ``MCLE_BACKEND=numpy`` or
``MCLE_BACKEND=numba``.  Both backends implement the identical update rule
(maximal-violating-pair working set, ties broken by lowest index), so they
converge to the same optimum; bit-level float trajectories may differ.
"""

from __future__ import annotations

import os

import numpy as np

_EPS_QUAD = 1e-12


# ---------------------------------------------------------------------------
# Pure-numpy reference implementations
# ---------------------------------------------------------------------------

def _smo_constrained_np(K, y, alpha, C, tol, max_passes):
    """Pairwise dual ascent keeping sum(alpha * y) = 0.

    Returns (bias, n_updates, converged).  `alpha` is updated in place.
    """
    n = K.shape[0]
    g = y * (K @ (alpha * y)) - 1.0  # gradient of 0.5 a'Qa - e'a
    m_up = 0.0
    m_low = 0.0
    it = 0
    converged = False
    neg_inf = -np.inf
    while True:
        v = -y * g
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        has_up = bool(up.any())
        has_low = bool(low.any())
        m_up = float(np.max(np.where(up, v, neg_inf))) if has_up else np.nan
        m_low = float(np.min(np.where(low, v, np.inf))) if has_low else np.nan
        if not (has_up and has_low):
            converged = True
            break
        if m_up - m_low <= tol:
            converged = True
            break
        if it >= max_passes:
            break
        i = int(np.argmax(np.where(up, v, neg_inf)))
        j = int(np.argmin(np.where(low, v, np.inf)))
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad < _EPS_QUAD:
            quad = _EPS_QUAD
        d = (v[i] - v[j]) / quad
        d = min(d, C - alpha[i] if y[i] > 0 else alpha[i])
        d = min(d, alpha[j] if y[j] > 0 else C - alpha[j])
        alpha[i] = min(C, max(0.0, alpha[i] + y[i] * d))
        alpha[j] = min(C, max(0.0, alpha[j] - y[j] * d))
        g += y * d * (K[:, i] - K[:, j])
        it += 1
    if np.isnan(m_up) and np.isnan(m_low):
        b = float(y[0]) if n else 0.0
    elif np.isnan(m_low):
        b = m_up
    elif np.isnan(m_up):
        b = m_low
    else:
        b = 0.5 * (m_up + m_low)
    return b, it, converged


def _cd_unconstrained_np(K, y, alpha, C, tol, max_passes):
    """Single-coordinate dual ascent with the equality constraint dropped.

    Returns (0.0, n_updates, converged); the bias is fixed at zero.
    """
    n = K.shape[0]
    g = y * (K @ (alpha * y)) - 1.0
    it = 0
    converged = False
    while True:
        viol = np.where(alpha <= 0.0, np.maximum(0.0, -g),
                        np.where(alpha >= C, np.maximum(0.0, g), np.abs(g)))
        i = int(np.argmax(viol))
        if n == 0 or viol[i] <= tol:
            converged = True
            break
        if it >= max_passes:
            break
        if K[i, i] < _EPS_QUAD:
            new = C if g[i] < 0.0 else 0.0
        else:
            new = min(C, max(0.0, alpha[i] - g[i] / K[i, i]))
        delta = new - alpha[i]
        alpha[i] = new
        g += y * K[:, i] * (y[i] * delta)
        it += 1
    return 0.0, it, converged


# ---------------------------------------------------------------------------
# Numba backend
# ---------------------------------------------------------------------------

def _build_numba_kernels():
    from numba import njit

    @njit(cache=True)
    def smo_constrained(K, y, alpha, C, tol, max_passes):
        n = K.shape[0]
        g = np.empty(n)
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += K[i, j] * alpha[j] * y[j]
            g[i] = y[i] * s - 1.0
        it = 0
        converged = False
        m_up = np.nan
        m_low = np.nan
        while True:
            i_up = -1
            i_low = -1
            m_up = -np.inf
            m_low = np.inf
            for i in range(n):
                v = -y[i] * g[i]
                if (y[i] > 0 and alpha[i] < C) or (y[i] < 0 and alpha[i] > 0):
                    if v > m_up:
                        m_up = v
                        i_up = i
                if (y[i] > 0 and alpha[i] > 0) or (y[i] < 0 and alpha[i] < C):
                    if v < m_low:
                        m_low = v
                        i_low = i
            if i_up < 0 or i_low < 0:
                converged = True
                if i_up < 0:
                    m_up = np.nan
                if i_low < 0:
                    m_low = np.nan
                break
            if m_up - m_low <= tol:
                converged = True
                break
            if it >= max_passes:
                break
            i = i_up
            j = i_low
            quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
            if quad < _EPS_QUAD:
                quad = _EPS_QUAD
            d = (m_up - m_low) / quad
            if y[i] > 0:
                if d > C - alpha[i]:
                    d = C - alpha[i]
            else:
                if d > alpha[i]:
                    d = alpha[i]
            if y[j] > 0:
                if d > alpha[j]:
                    d = alpha[j]
            else:
                if d > C - alpha[j]:
                    d = C - alpha[j]
            ai = alpha[i] + y[i] * d
            aj = alpha[j] - y[j] * d
            alpha[i] = min(C, max(0.0, ai))
            alpha[j] = min(C, max(0.0, aj))
            for k in range(n):
                g[k] += y[k] * d * (K[k, i] - K[k, j])
            it += 1
        if np.isnan(m_up) and np.isnan(m_low):
            b = y[0] if n else 0.0
        elif np.isnan(m_low):
            b = m_up
        elif np.isnan(m_up):
            b = m_low
        else:
            b = 0.5 * (m_up + m_low)
        return b, it, converged

    @njit(cache=True)
    def cd_unconstrained(K, y, alpha, C, tol, max_passes):
        n = K.shape[0]
        g = np.empty(n)
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += K[i, j] * alpha[j] * y[j]
            g[i] = y[i] * s - 1.0
        it = 0
        converged = False
        while True:
            best = -1.0
            i_best = -1
            for i in range(n):
                if alpha[i] <= 0.0:
                    v = -g[i] if g[i] < 0.0 else 0.0
                elif alpha[i] >= C:
                    v = g[i] if g[i] > 0.0 else 0.0
                else:
                    v = abs(g[i])
                if v > best:
                    best = v
                    i_best = i
            if i_best < 0 or best <= tol:
                converged = True
                break
            if it >= max_passes:
                break
            i = i_best
            if K[i, i] < _EPS_QUAD:
                new = C if g[i] < 0.0 else 0.0
            else:
                new = min(C, max(0.0, alpha[i] - g[i] / K[i, i]))
            delta = new - alpha[i]
            alpha[i] = new
            for k in range(n):
                g[k] += y[k] * K[k, i] * (y[i] * delta)
            it += 1
        return 0.0, it, converged

    return smo_constrained, cd_unconstrained


def _select_backend():
    requested = os.environ.get("MCLE_BACKEND", "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(f"MCLE_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numpy":
        return "numpy", _smo_constrained_np, _cd_unconstrained_np
    try:
        smo, cd = _build_numba_kernels()
        return "numba", smo, cd
    except ImportError:
        if requested == "numba":
            raise
        return "numpy", _smo_constrained_np, _cd_unconstrained_np


BACKEND, _smo_constrained, _cd_unconstrained = _select_backend()


def active_backend() -> str:
    """Name of the kernel backend in use ('numba' or 'numpy')."""
    return BACKEND


def solve_dual(K, y, alpha, C, tol, max_passes, constrained=True):
    """Solve the selected-subset dual QP in place.

    K: gram matrix over selected samples, y: labels in {-1,+1},
    alpha: warm-start duals (modified in place).  Returns
    (bias, n_updates, converged).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if K.shape[0] == 0:
        return 0.0, 0, True
    if constrained:
        b, it, conv = _smo_constrained(K, y, alpha, C, tol, max_passes)
    else:
        b, it, conv = _cd_unconstrained(K, y, alpha, C, tol, max_passes)
    return float(b), int(it), bool(conv)
