"""DFT along tube fibers (the third mode) and conjugate-symmetry helpers.

A real tensor transforms to a complex one whose frontal slices obey the
usual FFT symmetry of real signals: slice 0 is real, and slice ``k``
(0-based, k >= 1) is the conjugate of slice ``n3 - k``. Downstream code
exploits this by operating only on the first ``n3 // 2 + 1`` slices and
mirroring the rest with :func:`mirror_fill`.

Conventions: unnormalized forward kernel ``exp(-2*pi*1j*j*k/n3)``, inverse
scaled by ``1/n3``, so ``||t||_F == ||dft_mode3(t)||_F / sqrt(n3)``.
"""

from __future__ import annotations

import numpy as np

#: Relative Frobenius bound on the imaginary residue tolerated by
#: :func:`idft_mode3` before it declares an upstream symmetry bug.
IMAG_RESIDUE_TOL = 1e-8


class SymmetryError(ValueError):
    """Inverse transform input was not conjugate-symmetric along tubes."""


def half_slice_count(n3: int) -> int:
    """Number of Fourier slices that determine the rest: ``n3 // 2 + 1``."""
    return n3 // 2 + 1


def dft_mode3(t: np.ndarray) -> np.ndarray:
    """DFT of every tube ``t[i, j, :]``; returns a complex tensor."""
    t = np.asarray(t)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={t.ndim}")
    return np.fft.fft(t, axis=2)


def idft_mode3(c: np.ndarray, tol: float = IMAG_RESIDUE_TOL) -> np.ndarray:
    """Inverse tube DFT, returning the real tensor.

    The true inverse must be real up to floating-point noise; an imaginary
    residue above ``tol * ||result||_F`` means the input lost its conjugate
    symmetry somewhere upstream and raises :class:`SymmetryError`.
    """
    c = np.asarray(c)
    if c.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={c.ndim}")
    inv = np.fft.ifft(c, axis=2)
    scale = np.linalg.norm(inv.ravel())
    residue = np.linalg.norm(inv.imag.ravel())
    if residue > tol * max(scale, np.finfo(np.float64).tiny):
        raise SymmetryError(
            f"imaginary residue {residue:.3e} exceeds {tol:.1e} of norm {scale:.3e}"
        )
    return np.ascontiguousarray(inv.real)


def mirror_fill(c: np.ndarray, computed_upto: int | None = None) -> np.ndarray:
    """Complete a half-computed spectrum by conjugate mirroring.

    Slices ``0 .. n3 // 2`` (0-based) must already be populated; the
    remaining slices are overwritten with the conjugates of their mirrors
    so that slice ``k`` equals ``conj(slice n3 - k)`` exactly. For even
    ``n3`` the slice at ``n3 // 2`` is its own mirror and is forced real.

    ``computed_upto`` (1-based count of populated leading slices) defaults
    to ``n3 // 2 + 1`` and only needs to be passed when more slices were
    filled than strictly required.
    """
    c = np.array(c, dtype=np.complex128, copy=True)
    if c.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={c.ndim}")
    n3 = c.shape[2]
    half = half_slice_count(n3)
    if computed_upto is None:
        computed_upto = half
    if not half <= computed_upto <= n3:
        raise ValueError(
            f"computed_upto={computed_upto} outside [{half}, {n3}] for n3={n3}"
        )
    if n3 % 2 == 0:
        c[:, :, n3 // 2] = c[:, :, n3 // 2].real
    for k in range(half, n3):
        c[:, :, k] = np.conj(c[:, :, n3 - k])
    return c
