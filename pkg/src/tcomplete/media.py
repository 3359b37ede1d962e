"""Image-stack loading/saving, seeded masks, and reconstruction metrics.

Stacks are third-order tensors in [0, 1]: one RGB image maps to
``(height, width, 3)``, a sequence of grayscale frames to
``(height, width, n_frames)``. Supported formats are 8-bit PNG and binary
PGM/PPM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from PIL import Image

from .tensor_core import check_finite

PathLike = Union[str, Path]


@dataclass(frozen=True)
class MetricReport:
    """Reconstruction quality of ``recovered`` against ``original``.

    ``rse_paper`` is the squared error ratio with the *recovered* norm in
    the denominator; ``rse_standard`` is the usual relative error
    ``||original - recovered||_F / ||original||_F``. ``psnr`` uses the
    mean squared error and the original's peak value ``max_val``; it is
    ``inf`` for exact reconstructions.
    """

    rse_paper: float
    rse_standard: float
    psnr: float
    max_val: float


def _load_frame(path: PathLike) -> tuple[np.ndarray, bool]:
    with Image.open(path) as img:
        if img.mode == "P":
            img = img.convert("RGB")
        if img.mode not in ("L", "RGB"):
            raise ValueError(
                f"{path}: unsupported image mode {img.mode!r} "
                "(need 8-bit grayscale or RGB)"
            )
        arr = np.asarray(img, dtype=np.float64) / 255.0
    return arr, arr.ndim == 3


def load_stack(paths: Union[PathLike, Sequence[PathLike]]) -> np.ndarray:
    """Load one RGB image or a list of same-sized grayscale frames as a tensor."""
    if isinstance(paths, (str, Path)):
        paths = [paths]
    paths = [Path(p) for p in paths]
    if not paths:
        raise ValueError("no input images given")
    if len(paths) == 1:
        frame, is_rgb = _load_frame(paths[0])
        stack = frame if is_rgb else frame[:, :, None]
    else:
        frames = []
        for path in paths:
            frame, is_rgb = _load_frame(path)
            if is_rgb:
                raise ValueError(f"{path}: multi-frame input must be grayscale")
            frames.append(frame)
        sizes = {f.shape for f in frames}
        if len(sizes) > 1:
            raise ValueError(f"frames disagree on size: {sorted(sizes)}")
        stack = np.stack(frames, axis=2)
    return np.ascontiguousarray(stack)


def _quantize(t: np.ndarray) -> np.ndarray:
    clamped = np.clip(t, 0.0, 1.0)
    # round half away from zero, i.e. 0.5 -> 128 after scaling
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8)


def save_stack(t: np.ndarray, path: PathLike) -> list[Path]:
    """Clamp to [0, 1], quantize to 8 bits, and write image file(s).

    A tensor with n3 == 3 becomes a single RGB file at ``path``; any other
    depth writes one grayscale file per frontal slice, named with a
    zero-padded slice index inserted before the suffix. Returns the paths
    written.
    """
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got ndim={t.ndim}")
    check_finite(t, "stack")
    path = Path(path)
    data = _quantize(t)
    if t.shape[2] == 3:
        Image.fromarray(data, mode="RGB").save(path)
        return [path]
    suffix = path.suffix or ".png"
    width = max(3, len(str(t.shape[2] - 1)))
    written = []
    for k in range(t.shape[2]):
        frame_path = path.with_name(f"{path.stem}_{k:0{width}d}{suffix}")
        Image.fromarray(data[:, :, k], mode="L").save(frame_path)
        written.append(frame_path)
    return written


def generate_mask(
    dims: Sequence[int], sr: float, seed: int
) -> np.ndarray:
    """Boolean observation mask with exactly round(sr * n) True entries.

    Entries are drawn uniformly without replacement from a PCG64 generator
    seeded with ``seed``, so identical arguments always reproduce the same
    mask. The flat draw order follows the first-index-fastest layout.
    """
    n1, n2, n3 = (int(d) for d in dims)
    if min(n1, n2, n3) < 1:
        raise ValueError(f"dims must be positive, got {(n1, n2, n3)}")
    if not 0.0 < sr <= 1.0:
        raise ValueError(f"sampling ratio must be in (0, 1], got {sr}")
    total = n1 * n2 * n3
    count = int(math.floor(sr * total + 0.5))
    flat = np.zeros(total, dtype=bool)
    picks = np.random.default_rng(seed).permutation(total)[:count]
    flat[picks] = True
    return flat.reshape((n1, n2, n3), order="F")


def metrics(recovered: np.ndarray, original: np.ndarray) -> MetricReport:
    """Compute both RSE variants and the MSE-normalized PSNR in dB."""
    recovered = np.asarray(recovered, dtype=np.float64)
    original = np.asarray(original, dtype=np.float64)
    if recovered.shape != original.shape:
        raise ValueError(
            f"shape mismatch: recovered {recovered.shape}, original {original.shape}"
        )
    orig_norm = float(np.linalg.norm(original.ravel()))
    if orig_norm == 0.0:
        raise ValueError("original tensor is zero; relative metrics undefined")
    err = float(np.linalg.norm((original - recovered).ravel()))
    rec_norm = float(np.linalg.norm(recovered.ravel()))
    rse_paper = math.inf if rec_norm == 0.0 else (err / rec_norm) ** 2
    rse_standard = err / orig_norm
    max_val = float(original.max())
    if err == 0.0:
        psnr = math.inf
    elif max_val == 0.0:
        psnr = -math.inf
    else:
        psnr = 10.0 * math.log10(max_val * max_val * original.size / (err * err))
    return MetricReport(
        rse_paper=rse_paper, rse_standard=rse_standard, psnr=psnr, max_val=max_val
    )
