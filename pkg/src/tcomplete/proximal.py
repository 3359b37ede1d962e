"""Proximal operators used by the completion solvers.

:func:`tsvt` is the proximal map of the tensor nuclear norm: it solves

    min_X  tau * ||X||_* + (1/2) * ||a - X||_F^2

by soft-thresholding the singular values of every Fourier slice.
:func:`group_shrink` is the proximal map of the summed 2-vector l2 norm
used for isotropic total variation: each entry pair shrinks toward zero
by ``kappa`` in magnitude without changing direction.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .fourier import dft_mode3, half_slice_count, idft_mode3, mirror_fill
from .tprod import _is_self_conjugate, _slice_svd


class GradientPair(NamedTuple):
    """Two same-shaped tensors holding the per-direction difference stacks."""

    d1: np.ndarray
    d2: np.ndarray


def tsvt(a: np.ndarray, tau: float) -> np.ndarray:
    """Tensor singular value thresholding with threshold ``tau > 0``."""
    out, _ = tsvt_with_value(a, tau)
    return out


def tsvt_with_value(a: np.ndarray, tau: float) -> tuple[np.ndarray, float]:
    """:func:`tsvt` plus the tensor nuclear norm of the result.

    The norm comes for free from the thresholded singular values, which
    saves the solver a second SVD sweep when logging objective values.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={a.ndim}")
    if not tau > 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    n1, n2, n3 = a.shape
    half = half_slice_count(n3)
    ah = dft_mode3(a)
    dh = np.zeros_like(ah)
    total = 0.0
    for k in range(half):
        u, sig, vt = _slice_svd(ah[:, :, k], k, n3, full_matrices=False)
        kept = np.maximum(sig - tau, 0.0)
        slab = (u * kept) @ vt
        if _is_self_conjugate(k, n3):
            slab = slab.real
            total += float(np.sum(kept))
        else:
            total += 2.0 * float(np.sum(kept))
        dh[:, :, k] = slab
    return idft_mode3(mirror_fill(dh)), total / n3


def group_shrink(d1: np.ndarray, d2: np.ndarray, kappa: float) -> GradientPair:
    """Shrink each entry pair ``(d1[i,j,k], d2[i,j,k])`` toward zero.

    The pair's Euclidean magnitude drops by ``kappa`` (floored at zero)
    while its direction is preserved; zero pairs stay zero.
    """
    d1 = np.asarray(d1, dtype=np.float64)
    d2 = np.asarray(d2, dtype=np.float64)
    if d1.shape != d2.shape:
        raise ValueError(f"incompatible shapes: {d1.shape} vs {d2.shape}")
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    mag = np.sqrt(d1**2 + d2**2)
    scale = np.divide(
        np.maximum(mag - kappa, 0.0),
        mag,
        out=np.zeros_like(mag),
        where=mag > 0,
    )
    return GradientPair(scale * d1, scale * d2)


def group_l2_sum(pair: GradientPair) -> float:
    """Sum over entries of the pairwise Euclidean magnitudes."""
    return float(np.sum(np.sqrt(pair.d1**2 + pair.d2**2)))
