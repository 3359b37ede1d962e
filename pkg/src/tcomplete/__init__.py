"""Low-rank plus total-variation completion of third-order tensors.

The package implements the t-product algebra (Fourier-domain tensor SVD,
nuclear/spectral norms, rank measures), the proximal operators of the
tensor nuclear norm and the isotropic TV penalty, periodic difference
operators with an exact FFT normal-equation solver, and ADMM drivers that
combine them to fill in missing entries of image stacks.
"""

__version__ = "0.1.0"

from .diffops import (
    DiffOrder,
    OperatorSpectra,
    apply_diff,
    apply_diff_transpose,
    build_circulant,
    compute_spectra,
    solve_tv_normal_equations,
    total_variation,
)
from .fourier import SymmetryError, dft_mode3, half_slice_count, idft_mode3, mirror_fill
from .media import MetricReport, generate_mask, load_stack, metrics, save_stack
from .proximal import GradientPair, group_l2_sum, group_shrink, tsvt, tsvt_with_value
from .solver import (
    IterationRecord,
    Method,
    SolverConfig,
    SolverState,
    admm_step,
    objective,
    solve,
    write_iteration_log,
)
from .tensor_core import (
    frobenius_norm,
    inner_product,
    project_mask,
    read_mask,
    read_tensor,
    sampling_ratio,
    write_mask,
    write_tensor,
)
from .tprod import (
    TSVDFactors,
    average_rank,
    bcirc,
    bdiag,
    conj_transpose,
    fold,
    identity_tensor,
    nuclear_norm,
    spectral_norm,
    tprod,
    tsvd,
    tubal_rank,
    unfold,
)

__all__ = [
    "DiffOrder",
    "GradientPair",
    "IterationRecord",
    "Method",
    "MetricReport",
    "OperatorSpectra",
    "SolverConfig",
    "SolverState",
    "SymmetryError",
    "TSVDFactors",
    "__version__",
    "admm_step",
    "apply_diff",
    "apply_diff_transpose",
    "average_rank",
    "bcirc",
    "bdiag",
    "build_circulant",
    "compute_spectra",
    "conj_transpose",
    "dft_mode3",
    "fold",
    "frobenius_norm",
    "generate_mask",
    "group_l2_sum",
    "group_shrink",
    "half_slice_count",
    "identity_tensor",
    "idft_mode3",
    "inner_product",
    "load_stack",
    "metrics",
    "mirror_fill",
    "nuclear_norm",
    "objective",
    "project_mask",
    "read_mask",
    "read_tensor",
    "sampling_ratio",
    "save_stack",
    "solve",
    "solve_tv_normal_equations",
    "spectral_norm",
    "total_variation",
    "tprod",
    "tsvd",
    "tsvt",
    "tsvt_with_value",
    "tubal_rank",
    "unfold",
    "write_iteration_log",
    "write_mask",
    "write_tensor",
]
