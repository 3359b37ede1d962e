"""The t-product algebra for third-order tensors.

The t-product multiplies tensors through circular convolution along the
third mode, which the tube DFT turns into independent matrix products per
frontal slice. Everything here (t-product, conjugate transpose, t-SVD,
tubal/average rank, spectral and nuclear norms) runs slice-wise in the
Fourier domain, computing only the first ``n3 // 2 + 1`` slices and
mirroring the rest.

:func:`bcirc`, :func:`bdiag`, :func:`unfold` and :func:`fold` materialize
the equivalent block-structured matrices. They cost O(n3^2) memory and are
meant for small instances and test oracles, not production paths.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .fourier import dft_mode3, half_slice_count, idft_mode3, mirror_fill


class TSVDFactors(NamedTuple):
    """Orthogonal ``u``, f-diagonal ``s``, orthogonal ``v`` with
    ``a == u * s * conj_transpose(v)`` under the t-product."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def _check_third_order(a: np.ndarray, name: str = "tensor") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 3:
        raise ValueError(f"{name} must be third-order, got ndim={a.ndim}")
    return a


def _is_self_conjugate(k: int, n3: int) -> bool:
    # Fourier slices that are their own conjugate mirror (and hence real
    # when the original tensor is real): DC, plus the Nyquist slice for
    # even n3.
    return k == 0 or (n3 % 2 == 0 and k == n3 // 2)


def unfold(a: np.ndarray) -> np.ndarray:
    """Stack frontal slices vertically into an (n1*n3) x n2 matrix."""
    a = _check_third_order(a)
    n1, n2, n3 = a.shape
    return a.transpose(2, 0, 1).reshape(n1 * n3, n2)


def fold(m: np.ndarray, shape: tuple[int, int, int]) -> np.ndarray:
    """Inverse of :func:`unfold` for the given tensor shape."""
    n1, n2, n3 = shape
    m = np.asarray(m)
    if m.shape != (n1 * n3, n2):
        raise ValueError(f"cannot fold shape {m.shape} into {shape}")
    return np.ascontiguousarray(m.reshape(n3, n1, n2).transpose(1, 2, 0))


def bcirc(a: np.ndarray) -> np.ndarray:
    """Block-circulant matrix of the frontal slices, (n1*n3) x (n2*n3).

    Block row i, block column j holds slice ``(i - j) mod n3``, so the
    first block column equals ``unfold(a)``.
    """
    a = _check_third_order(a)
    n1, n2, n3 = a.shape
    out = np.zeros((n1 * n3, n2 * n3), dtype=a.dtype)
    for i in range(n3):
        for j in range(n3):
            out[i * n1:(i + 1) * n1, j * n2:(j + 1) * n2] = a[:, :, (i - j) % n3]
    return out


def bdiag(a: np.ndarray) -> np.ndarray:
    """Block-diagonal matrix with the frontal slices on the diagonal."""
    a = _check_third_order(a)
    n1, n2, n3 = a.shape
    out = np.zeros((n1 * n3, n2 * n3), dtype=a.dtype)
    for k in range(n3):
        out[k * n1:(k + 1) * n1, k * n2:(k + 1) * n2] = a[:, :, k]
    return out


def identity_tensor(l: int, n3: int) -> np.ndarray:
    """Identity of the t-product: slice 0 is the l x l identity, rest zero."""
    if l < 1 or n3 < 1:
        raise ValueError(f"dims must be >= 1, got l={l}, n3={n3}")
    e = np.zeros((l, l, n3))
    e[:, :, 0] = np.eye(l)
    return e


def conj_transpose(a: np.ndarray) -> np.ndarray:
    """Transpose every frontal slice and reverse the order of slices 1..n3-1.

    Satisfies ``bcirc(conj_transpose(a)) == bcirc(a).T`` and makes the
    t-product behave like matrix multiplication under transposition.
    """
    a = _check_third_order(a)
    n3 = a.shape[2]
    order = np.r_[0, np.arange(n3 - 1, 0, -1)]
    return np.ascontiguousarray(a.transpose(1, 0, 2)[:, :, order])


def tprod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """t-product of ``a`` (n1 x k x n3) and ``b`` (k x n2 x n3).

    Equivalent to ``fold(bcirc(a) @ unfold(b))`` but computed with one
    tube FFT pass and per-slice matrix products on the first
    ``n3 // 2 + 1`` Fourier slices; the remaining product slices follow by
    conjugate mirroring.
    """
    a = _check_third_order(a, "left operand")
    b = _check_third_order(b, "right operand")
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ValueError(f"cannot t-multiply shapes {a.shape} and {b.shape}")
    n1, _, n3 = a.shape
    n2 = b.shape[1]
    half = half_slice_count(n3)
    ah = dft_mode3(a).transpose(2, 0, 1)
    bh = dft_mode3(b).transpose(2, 0, 1)
    ch = np.zeros((n3, n1, n2), dtype=np.complex128)
    ch[:half] = ah[:half] @ bh[:half]
    return idft_mode3(mirror_fill(ch.transpose(1, 2, 0)))


def _slice_svd(slab: np.ndarray, k: int, n3: int, full_matrices: bool):
    # Self-conjugate slices of a real tensor's spectrum are real; running
    # the real SVD there keeps the factors exactly real, which the mirror
    # construction needs.
    if _is_self_conjugate(k, n3):
        slab = slab.real
    try:
        return np.linalg.svd(slab, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"SVD did not converge on Fourier slice {k}"
        ) from exc


def tsvd(a: np.ndarray) -> TSVDFactors:
    """t-SVD: factor ``a`` into orthogonal * f-diagonal * orthogonal.

    Each of the first ``n3 // 2 + 1`` Fourier slices gets a full complex
    SVD; the remaining factor slices are conjugate mirrors. ``u`` is
    n1 x n1 x n3, ``s`` n1 x n2 x n3 with descending nonnegative diagonal
    in the Fourier domain, ``v`` n2 x n2 x n3.
    """
    a = _check_third_order(a)
    n1, n2, n3 = a.shape
    half = half_slice_count(n3)
    ah = dft_mode3(a)
    uh = np.zeros((n1, n1, n3), dtype=np.complex128)
    sh = np.zeros((n1, n2, n3), dtype=np.complex128)
    vh = np.zeros((n2, n2, n3), dtype=np.complex128)
    r = min(n1, n2)
    for k in range(half):
        u, sig, vt = _slice_svd(ah[:, :, k], k, n3, full_matrices=True)
        uh[:, :, k] = u
        sh[np.arange(r), np.arange(r), k] = sig
        vh[:, :, k] = vt.conj().T
    return TSVDFactors(
        u=idft_mode3(mirror_fill(uh)),
        s=idft_mode3(mirror_fill(sh)),
        v=idft_mode3(mirror_fill(vh)),
    )


def _half_singular_values(a: np.ndarray) -> list[np.ndarray]:
    """Singular values of Fourier slices 0 .. n3 // 2 (mirror slices share
    them, so this is the full spectrum of a real tensor up to multiplicity)."""
    a = _check_third_order(a)
    n3 = a.shape[2]
    ah = dft_mode3(a)
    out = []
    for k in range(half_slice_count(n3)):
        slab = ah[:, :, k].real if _is_self_conjugate(k, n3) else ah[:, :, k]
        try:
            out.append(np.linalg.svd(slab, compute_uv=False))
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"SVD did not converge on Fourier slice {k}"
            ) from exc
    return out


def _slice_multiplicity(k: int, n3: int) -> int:
    return 1 if _is_self_conjugate(k, n3) else 2


def default_rank_tol(a: np.ndarray) -> float:
    """Numerical-rank threshold: max(n1, n2) * float64 machine epsilon."""
    n1, n2, _ = a.shape
    return max(n1, n2) * np.finfo(np.float64).eps


def spectral_norm(a: np.ndarray) -> float:
    """Largest singular value across the Fourier slices (the operator norm
    of the block-circulant matrix)."""
    sv = _half_singular_values(a)
    return float(max((s[0] if s.size else 0.0) for s in sv)) if sv else 0.0


def nuclear_norm(a: np.ndarray) -> float:
    """Sum of all Fourier-slice nuclear norms, divided by n3."""
    n3 = a.shape[2]
    total = sum(
        _slice_multiplicity(k, n3) * float(np.sum(s))
        for k, s in enumerate(_half_singular_values(a))
    )
    return total / n3


def tubal_rank(a: np.ndarray, tol: float | None = None) -> int:
    """Number of singular tubes whose norm exceeds ``tol`` times the
    largest singular value."""
    a = _check_third_order(a)
    if tol is None:
        tol = default_rank_tol(a)
    elif tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    n1, n2, n3 = a.shape
    sv = _half_singular_values(a)
    smax = max((s[0] if s.size else 0.0) for s in sv)
    if smax == 0.0:
        return 0
    # Tube norms of the f-diagonal factor, via Parseval along tubes:
    # ||s(i,i,:)||_2 == ||s_hat(i,i,:)||_2 / sqrt(n3).
    sumsq = np.zeros(min(n1, n2))
    for k, s in enumerate(sv):
        sumsq += _slice_multiplicity(k, n3) * s**2
    tube_norms = np.sqrt(sumsq / n3)
    return int(np.count_nonzero(tube_norms > tol * smax))


def average_rank(a: np.ndarray, tol: float | None = None) -> float:
    """Rank of the block-circulant matrix divided by n3, i.e. the mean
    numerical rank of the Fourier slices."""
    a = _check_third_order(a)
    if tol is None:
        tol = default_rank_tol(a)
    elif tol < 0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    n3 = a.shape[2]
    sv = _half_singular_values(a)
    smax = max((s[0] if s.size else 0.0) for s in sv)
    if smax == 0.0:
        return 0.0
    total = sum(
        _slice_multiplicity(k, n3) * int(np.count_nonzero(s > tol * smax))
        for k, s in enumerate(sv)
    )
    return total / n3
