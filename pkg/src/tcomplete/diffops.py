"""Periodic difference operators and the closed-form data+TV solver.

All operators are circulant, applied per frontal slice: direction 1
differences run along the second tensor index (right-multiplication by an
n2 x n2 circulant), direction 2 along the first index (left-multiplication
by an n1 x n1 circulant). First-order operators are forward differences
with wraparound; the second-order operator is the halved periodic
three-point Laplacian stencil, which is symmetric.

Because circulants diagonalize under the DFT, the regularized normal
equations ``(beta1 * I + beta2 * D'D) x = rhs`` decouple entrywise in the
2D Fourier domain of each slice; :func:`solve_tv_normal_equations` solves
them exactly with two FFT passes per slice.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .fourier import IMAG_RESIDUE_TOL, SymmetryError


class DiffOrder(enum.Enum):
    """Order of the difference operator pair used by the TV penalty."""

    FIRST = 1
    SECOND = 2


@dataclass(frozen=True)
class OperatorSpectra:
    """DFT eigenvalues of the two circulants for a given slice shape.

    ``lambda1`` (length n1) belongs to the left-acting operator,
    ``lambda2`` (length n2) to the right-acting one. Entry 0 is always 0:
    difference operators annihilate constants.
    """

    lambda1: np.ndarray
    lambda2: np.ndarray
    order: DiffOrder


def _first_column(n: int, order: DiffOrder, direction: int) -> np.ndarray:
    if n < 2:
        raise ValueError(f"difference operators need n >= 2, got {n}")
    if direction not in (1, 2):
        raise ValueError(f"direction must be 1 or 2, got {direction}")
    col = np.zeros(n)
    if order is DiffOrder.FIRST:
        col[0] = -1.0
        if direction == 1:
            col[1] += 1.0  # subdiagonal + top-right corner
        else:
            col[n - 1] += 1.0  # superdiagonal + bottom-left corner
    elif order is DiffOrder.SECOND:
        col[0] = -1.0
        col[1] += 0.5
        col[n - 1] += 0.5
    else:
        raise TypeError(f"order must be a DiffOrder, got {order!r}")
    return col


def build_circulant(n: int, order: DiffOrder, direction: int) -> np.ndarray:
    """Materialize the n x n circulant difference matrix."""
    col = _first_column(n, order, direction)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]


def _roll_diff(t: np.ndarray, order: DiffOrder, axis: int, transpose: bool) -> np.ndarray:
    if order is DiffOrder.SECOND:
        return 0.5 * (np.roll(t, 1, axis=axis) + np.roll(t, -1, axis=axis)) - t
    shift = 1 if transpose else -1
    return np.roll(t, shift, axis=axis) - t


def _check_diff_dims(t: np.ndarray, direction: int) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={t.ndim}")
    axis = 1 if direction == 1 else 0
    if direction not in (1, 2):
        raise ValueError(f"direction must be 1 or 2, got {direction}")
    if t.shape[axis] < 2:
        raise ValueError(
            f"direction {direction} needs dim {t.shape[axis]} >= 2 (shape {t.shape})"
        )
    return t


def apply_diff(t: np.ndarray, order: DiffOrder, direction: int) -> np.ndarray:
    """Apply the difference operator to every frontal slice.

    Uses wraparound index shifts; identical to multiplying each slice by
    :func:`build_circulant` on the appropriate side.
    """
    t = _check_diff_dims(t, direction)
    return _roll_diff(t, order, 1 if direction == 1 else 0, transpose=False)


def apply_diff_transpose(t: np.ndarray, order: DiffOrder, direction: int) -> np.ndarray:
    """Apply the transpose of the difference operator to every slice.

    Adjoint of :func:`apply_diff` under the elementwise inner product;
    for :attr:`DiffOrder.SECOND` the operator is symmetric, so this equals
    :func:`apply_diff`.
    """
    t = _check_diff_dims(t, direction)
    return _roll_diff(t, order, 1 if direction == 1 else 0, transpose=True)


def compute_spectra(n1: int, n2: int, order: DiffOrder) -> OperatorSpectra:
    """DFT eigenvalues of the left (n1) and right (n2) circulants.

    Each spectrum is the DFT of the circulant's first column. Closed
    forms: first order |lambda_k|^2 == 4 sin^2(pi k / n); second order
    lambda_k == cos(2 pi k / n) - 1 (real, so stored with the imaginary
    part dropped).
    """
    lambda1 = np.fft.fft(_first_column(n1, order, 2))
    lambda2 = np.fft.fft(_first_column(n2, order, 1))
    if order is DiffOrder.SECOND:
        lambda1 = lambda1.real
        lambda2 = lambda2.real
    return OperatorSpectra(lambda1=lambda1, lambda2=lambda2, order=order)


def solve_tv_normal_equations(
    rhs: np.ndarray, beta1: float, beta2: float, spectra: OperatorSpectra
) -> np.ndarray:
    """Solve ``(beta1 I + beta2 D1'D1 + beta2 D2'D2) x = rhs`` per slice.

    ``D1``/``D2`` are the difference operators whose spectra are given.
    Each frontal slice is 2D-DFTed, divided entrywise by
    ``beta1 + beta2 (|lambda1_i|^2 + |lambda2_j|^2)`` (strictly positive,
    so the system is always uniquely solvable), and transformed back.
    Cost: O(n3 n1 n2 log(n1 n2)).
    """
    if not beta1 > 0 or not beta2 > 0:
        raise ValueError(f"penalty weights must be > 0, got {beta1}, {beta2}")
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={rhs.ndim}")
    n1, n2, _ = rhs.shape
    if spectra.lambda1.shape != (n1,) or spectra.lambda2.shape != (n2,):
        raise ValueError(
            f"spectra sized for ({spectra.lambda1.size}, {spectra.lambda2.size}) "
            f"slices, tensor has ({n1}, {n2})"
        )
    denom = beta1 + beta2 * (
        np.abs(spectra.lambda1)[:, None] ** 2 + np.abs(spectra.lambda2)[None, :] ** 2
    )
    freq = np.fft.fft2(rhs, axes=(0, 1)) / denom[:, :, None]
    out = np.fft.ifft2(freq, axes=(0, 1))
    scale = np.linalg.norm(out.ravel())
    residue = np.linalg.norm(out.imag.ravel())
    if residue > IMAG_RESIDUE_TOL * max(scale, np.finfo(np.float64).tiny):
        raise SymmetryError(
            f"imaginary residue {residue:.3e} exceeds "
            f"{IMAG_RESIDUE_TOL:.1e} of norm {scale:.3e}"
        )
    return np.ascontiguousarray(out.real)


def total_variation(t: np.ndarray, order: DiffOrder) -> float:
    """Isotropic TV: sum over entries of the two-direction gradient magnitude."""
    d1 = apply_diff(t, order, 1)
    d2 = apply_diff(t, order, 2)
    return float(np.sum(np.sqrt(d1**2 + d2**2)))
