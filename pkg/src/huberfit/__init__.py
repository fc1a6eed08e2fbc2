"""Robust regression and scale estimation with Huber's criterion.

Dense joint fits, K-sparse recovery by hard thresholding, a patch-based
image denoiser, and a seeded contamination benchmark.
"""

from .bench import ExperimentConfig, EpsSummary, TrialOutcome, generate_trial, run_experiment, write_csv
from .denoise import (
    Dictionary,
    GrayImage,
    PatchGrid,
    add_impulsive_noise,
    build_dictionary,
    denoise_image,
    load_dictionary,
    psnr,
    read_pgm,
    save_dictionary,
    write_pgm,
)
from .hubniht import SparseModel, SparseProblem, fit_sparse, hard_threshold, reconstruct
from .hubreg import (
    DegenerateScaleError,
    FitResult,
    RegressionProblem,
    SolverConfig,
    StepState,
    TraceRecord,
    criterion,
    fit,
    mad_scale,
    pseudo_residual,
    regression_direction,
    regression_step_size,
    scale_multiplier,
    scale_step_size,
)
from .linalg import (
    Pseudoinverse,
    RankDeficientError,
    apply_pinv,
    factorize,
    weighted_inner,
    weighted_norm_sq,
)
from .loss import THRESHOLD_85, THRESHOLD_95, HuberKernel, chi2_cdf, consistency_factor

__version__ = "0.1.0"

__all__ = [
    "THRESHOLD_85",
    "THRESHOLD_95",
    "DegenerateScaleError",
    "Dictionary",
    "EpsSummary",
    "ExperimentConfig",
    "FitResult",
    "GrayImage",
    "HuberKernel",
    "PatchGrid",
    "Pseudoinverse",
    "RankDeficientError",
    "RegressionProblem",
    "SolverConfig",
    "SparseModel",
    "SparseProblem",
    "StepState",
    "TraceRecord",
    "TrialOutcome",
    "add_impulsive_noise",
    "apply_pinv",
    "build_dictionary",
    "chi2_cdf",
    "consistency_factor",
    "criterion",
    "denoise_image",
    "factorize",
    "fit",
    "fit_sparse",
    "generate_trial",
    "hard_threshold",
    "load_dictionary",
    "mad_scale",
    "psnr",
    "pseudo_residual",
    "read_pgm",
    "reconstruct",
    "regression_direction",
    "regression_step_size",
    "run_experiment",
    "save_dictionary",
    "scale_multiplier",
    "scale_step_size",
    "weighted_inner",
    "weighted_norm_sq",
    "write_csv",
    "write_pgm",
]
