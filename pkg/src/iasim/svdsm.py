"""SVD-based spatial multiplexing for the single-pair TDMA benchmark.

The active pair's channel H = U S V^H is decomposed into
min(nt, nr) parallel scalar links whose gains are the singular values.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class SmSolution:
    """Unitary factors and ordered singular values of one channel."""

    u_mat: np.ndarray
    s: np.ndarray
    v_mat: np.ndarray
    n_min: int
    n_max: int


def _phase_convention(u: np.ndarray, vh: np.ndarray):
    """Make the first significant entry of each right singular vector
    real nonnegative, absorbing the rotation into U."""
    n = vh.shape[0]
    for i in range(n):
        row = vh[i]
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size == 0:
            continue
        ph = row[nz[0]] / abs(row[nz[0]])
        vh[i] = row * ph.conj()
        if i < u.shape[1]:
            u[:, i] = u[:, i] * ph
    return u, vh


def svd_decompose(h: np.ndarray) -> SmSolution:
    """Exact SVD with descending singular values and a fixed phase gauge."""
    h = np.asarray(h, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise ValueError("channel matrix contains non-finite entries")
    u, s, vh = np.linalg.svd(h)
    u, vh = _phase_convention(u, vh)
    nr, nt = h.shape
    return SmSolution(u_mat=u, s=s, v_mat=vh.conj().T,
                      n_min=min(nt, nr), n_max=max(nt, nr))


def sm_equivalent_channels(sol: SmSolution) -> np.ndarray:
    """Amplitude gains of the parallel scalar links (one per eigenmode)."""
    return sol.s[: sol.n_min].copy()
