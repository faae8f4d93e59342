"""Eigenvalue estimation from bilinear Gaussian sketches."""
from .fastpsd import FastSketchConfig, apply_sparse_embedding, fast_psd_spectrum, symmetrize_block
from .lowerbound import (
    DistinguishingOutcome,
    WishartSample,
    advantage_curve,
    lr_distinguisher,
    projection_corner_gaussianity,
    sample_random_projection,
    sample_wishart,
    tv_limit,
    tv_monte_carlo,
    wishart_log_density_ratio,
)
from .matrix import (
    ConvergenceError,
    ResourceLimitError,
    SymmetricMatrix,
    frobenius_norm,
    operator_norm,
    sample_gaussian,
    sample_sparse_embedding,
    singular_values,
    sym_eig,
    trace,
)
from .sketch import (
    SketchOutcome,
    SpectrumEstimate,
    baseline_gah,
    bias_probe,
    estimate_spectrum,
    negation_conjugate,
    singular_value_concentration,
    sketch_size,
)

__version__ = "0.1.0"
