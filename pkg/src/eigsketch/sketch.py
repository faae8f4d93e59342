"""Trace-corrected bilinear Gaussian sketch and the sign-blind GAH^T baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .matrix import (
    ResourceLimitError,
    SymmetricMatrix,
    as_symmetric,
    eigvalsh_desc,
    frobenius_norm,
    sample_gaussian,
    singular_values,
    sort_descending,
    sub_seed,
    trace,
)

MAX_SKETCH_DIM = 2**16
SKETCH_CONSTANT = 4.0


def sketch_size(epsilon: float, constant: float = SKETCH_CONSTANT) -> int:
    """Default sketching dimension ceil(constant / epsilon^2)."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return math.ceil(constant / epsilon**2)


@dataclass(frozen=True)
class SketchOutcome:
    S: SymmetricMatrix = field(repr=False)
    trace_S: float
    raw_eigs: np.ndarray = field(repr=False)
    seed: int
    k: int


@dataclass(frozen=True)
class SpectrumEstimate:
    values: np.ndarray
    k: int
    seed: int
    tag: str
    outcome: SketchOutcome | None = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.values)


def _check_sketch_args(A: SymmetricMatrix, k: int, max_k: int):
    if k < 1:
        raise ValueError(f"sketch dimension must be >= 1, got {k}")
    if k > max_k:
        raise ResourceLimitError(f"sketch dimension {k} exceeds the limit {max_k}")
    if A.dim < 1:
        raise ValueError("matrix dimension must be positive")


def sketch(A, k: int, seed: int, max_k: int = MAX_SKETCH_DIM) -> SketchOutcome:
    """Form S = G A G^T with G ~ N(0, 1/k)^{k x d} and diagonalize it."""
    A = as_symmetric(A)
    _check_sketch_args(A, k, max_k)
    G = sample_gaussian(k, A.dim, seed).entries
    S = G @ np.asarray(A @ G.T)
    # floating-point GAG^T is symmetric only to rounding
    S = SymmetricMatrix.from_dense((S + S.T) / 2)
    return SketchOutcome(S, trace(S), eigvalsh_desc(S.to_dense()), seed, k)


def corrected_values(outcome: SketchOutcome, d: int) -> np.ndarray:
    """Shift sketched eigenvalues by -Tr(S)/k and zero-fill to length d.

    When k > d the sketch has rank at most d; the k - d eigenvalues of S
    closest to zero are structural and are dropped before the shift is
    applied, so the output always has d entries.
    """
    k = outcome.k
    raw = outcome.raw_eigs
    alpha = raw - outcome.trace_S / k
    if k <= d:
        out = np.concatenate([alpha, np.zeros(d - k)])
    else:
        keep = np.sort(np.argsort(np.abs(raw), kind="stable")[k - d:])
        out = alpha[keep]
    return sort_descending(out)


def estimate_spectrum(A, k: int, seed: int, max_k: int = MAX_SKETCH_DIM) -> SpectrumEstimate:
    """Estimate every eigenvalue of symmetric ``A`` from one k x k sketch.

    Each eigenvalue of S = G A G^T is shifted by -Tr(S)/k, the remaining
    d - k estimates are 0, and the d values are returned sorted
    non-increasing.  With k = O(1/eps^2) all estimates are within
    eps * ||A||_F of the true eigenvalues with constant probability.
    """
    A = as_symmetric(A)
    outcome = sketch(A, k, seed, max_k)
    return SpectrumEstimate(corrected_values(outcome, A.dim), k, seed, "corrected", outcome)


def negation_conjugate(est: SpectrumEstimate) -> SpectrumEstimate:
    return replace(est, values=-est.values[::-1], outcome=None)


def baseline_gah(A, k: int, seed: int, max_k: int = MAX_SKETCH_DIM) -> SpectrumEstimate:
    """Raw singular values of G A H^T with independent Gaussian G, H.

    Sign-blind by construction: A and -A give identical output.  G and H are
    drawn from sub-seeds (seed, 0) and (seed, 1).
    """
    A = as_symmetric(A)
    _check_sketch_args(A, k, max_k)
    d = A.dim
    G = sample_gaussian(k, d, sub_seed(seed, 0)).entries
    H = sample_gaussian(k, d, sub_seed(seed, 1)).entries
    sv = singular_values(G @ np.asarray(A @ H.T))
    values = np.concatenate([sv, np.zeros(max(d - k, 0))])[:d]
    return SpectrumEstimate(sort_descending(values), k, seed, "baseline")


@dataclass(frozen=True)
class BiasProbe:
    raw_top: float
    corrected_top: float
    predicted_bias: float


def bias_probe(A, k: int, seed: int) -> BiasProbe:
    """Compare the top raw sketched eigenvalue with its trace-corrected value.

    Sketched eigenvalues cluster around Tr(A)/k, reported as ``predicted_bias``.
    """
    A = as_symmetric(A)
    est = estimate_spectrum(A, k, seed)
    return BiasProbe(
        raw_top=float(est.outcome.raw_eigs[0]),
        corrected_top=float(est.values[0]),
        predicted_bias=trace(A) / k,
    )


@dataclass(frozen=True)
class ConcentrationRecord:
    max_abs_dev: float
    deviations: np.ndarray = field(repr=False)  # (trials, ell)

    @property
    def per_trial(self) -> np.ndarray:
        return self.deviations.max(axis=1)


def singular_value_concentration(B, k: int, ell: int, trials: int, seed: int) -> ConcentrationRecord:
    """Deviation of the top ``ell`` squared singular values of G B from those of B.

    ``B`` must have unit Frobenius norm.  Trial t uses G drawn from
    ``sub_seed(seed, t)``; deviations are |sigma_j(GB)^2 - sigma_j(B)^2|.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise ValueError("B must be a matrix")
    if abs(frobenius_norm(B) - 1.0) > 1e-6:
        raise ValueError("B must have unit Frobenius norm (normalize before calling)")
    if ell < 1 or ell > min(k, B.shape[1]):
        raise ValueError(f"need 1 <= ell <= min(k, cols), got ell={ell}")
    if trials < 1:
        raise ValueError("trials must be positive")
    target = singular_values(B)[:ell] ** 2
    devs = np.empty((trials, ell))
    for t in range(trials):
        G = sample_gaussian(k, B.shape[0], sub_seed(seed, t)).entries
        devs[t] = np.abs(singular_values(G @ B)[:ell] ** 2 - target)
    return ConcentrationRecord(float(devs.max()), devs)
