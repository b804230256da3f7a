"""Spectral-angle and probability unaries with Potts MRF smoothing.

Thin re-export of the compiled extension. Cubes are (H, W, B) float arrays,
label maps (H, W) int arrays with 0 = unlabeled, unary fields and
probability fields (H, W, C).
"""

from _samrf import (
    SamrfError,
    alpha_expansion,
    esam,
    exact_minimize,
    filter_classes,
    kernel_matrix,
    load_cube,
    load_labels,
    lr_probabilities,
    make_split,
    max_flow,
    neglog_unary,
    normalize_bands,
    overall_accuracy,
    partition_function,
    render_ppm,
    run_trial,
    sam_unary,
    se_kernel,
    select_beta,
    spectral_angle,
    total_energy,
    train_lr,
    unary_argmin,
)

__all__ = [
    "SamrfError",
    "alpha_expansion",
    "esam",
    "exact_minimize",
    "filter_classes",
    "kernel_matrix",
    "load_cube",
    "load_labels",
    "lr_probabilities",
    "make_split",
    "max_flow",
    "neglog_unary",
    "normalize_bands",
    "overall_accuracy",
    "partition_function",
    "render_ppm",
    "run_trial",
    "sam_unary",
    "se_kernel",
    "select_beta",
    "spectral_angle",
    "total_energy",
    "train_lr",
    "unary_argmin",
]
