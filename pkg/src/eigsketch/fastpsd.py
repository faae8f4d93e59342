"""Input-sparsity-time spectrum estimation for sparse PSD matrices.

Pipeline: M = S A T^T with two independent sparse embeddings (m x d each),
symmetrize to the 2m x 2m block matrix [[0, M], [M^T, 0]] whose eigenvalues
are +-sigma(M), then run the trace-corrected Gaussian sketch on that small
matrix.  The top m estimates, clamped at zero, approximate the eigenvalues
of A.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .matrix import (
    SparseEmbeddingMatrix,
    SymmetricMatrix,
    as_symmetric,
    frobenius_norm,
    sample_sparse_embedding,
    sort_descending,
    sub_seed,
    sym_eig,
)
from .sketch import SpectrumEstimate, estimate_spectrum

log = logging.getLogger(__name__)

OUTER_CONSTANT = 16.0
PSD_CHECK_MAX_DIM = 2048


@dataclass(frozen=True)
class FastSketchConfig:
    m: int
    k: int
    seed: int
    s: int = 4

    def __post_init__(self):
        if min(self.m, self.k, self.s) < 1:
            raise ValueError(f"m, k and s must be positive: {self}")
        if self.m < self.k:
            raise ValueError(f"outer dimension m={self.m} must be >= inner dimension k={self.k}")

    @classmethod
    def for_epsilon(cls, epsilon: float, seed: int, s: int = 4, outer_constant: float = OUTER_CONSTANT):
        from .sketch import sketch_size

        k = sketch_size(epsilon)
        m = max(math.ceil(outer_constant / epsilon**2), k)
        return cls(m=m, k=k, seed=seed, s=s)


def _coo(A):
    A = A.sparse if isinstance(A, SymmetricMatrix) else sp.csr_matrix(A)
    return A.tocoo()


def apply_sparse_embedding(E: SparseEmbeddingMatrix, A, side: str = "left") -> np.ndarray:
    """Dense E @ A (``side="left"``) or A @ E^T (``side="right"``).

    Every nonzero of A is scattered into s output cells, so the work is
    O(s * nnz(A)) plus the cost of allocating the dense result.
    """
    A = _coo(A)
    if A.shape[0] != E.cols or A.shape[1] != E.cols:
        raise ValueError(f"dimension mismatch: embedding has {E.cols} columns, A is {A.shape}")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    m, s = E.rows, E.s
    if side == "left":
        # (E A)[p, j] += sign * A[i, j] for each row position p of column i of E
        out_rows = E.positions[A.row]
        w = E.signs[A.row] * A.data[:, None]
        flat = out_rows * A.shape[1] + A.col[:, None]
        out = np.bincount(flat.ravel(), weights=w.ravel(), minlength=m * A.shape[1])
        return out.reshape(m, A.shape[1])
    out_cols = E.positions[A.col]
    w = E.signs[A.col] * A.data[:, None]
    flat = A.row[:, None] * m + out_cols
    out = np.bincount(flat.ravel(), weights=w.ravel(), minlength=A.shape[0] * m)
    return out.reshape(A.shape[0], m)


def two_sided_embedding(S: SparseEmbeddingMatrix, A, T: SparseEmbeddingMatrix) -> np.ndarray:
    """M = S A T^T as a dense m_S x m_T array in O(s_S * s_T * nnz(A)) work."""
    A = _coo(A)
    if S.cols != A.shape[0] or T.cols != A.shape[1]:
        raise ValueError("dimension mismatch between embeddings and A")
    rows = S.positions[A.row][:, :, None]  # (nnz, sS, 1)
    cols = T.positions[A.col][:, None, :]  # (nnz, 1, sT)
    w = S.signs[A.row][:, :, None] * T.signs[A.col][:, None, :] * A.data[:, None, None]
    flat = rows * T.rows + cols
    out = np.bincount(flat.ravel(), weights=w.ravel(), minlength=S.rows * T.rows)
    return out.reshape(S.rows, T.rows)


def symmetrize_block(M) -> SymmetricMatrix:
    """The (p + q) x (p + q) matrix [[0, M], [M^T, 0]] for a p x q matrix M.

    Its eigenvalues are +-sigma_i(M) plus |p - q| zeros.
    """
    M = np.asarray(M, dtype=float)
    p, q = M.shape
    out = np.zeros((p + q, p + q))
    out[:p, p:] = M
    out[p:, :p] = M.T
    return SymmetricMatrix.from_dense(out)


def _check_psd(A: SymmetricMatrix):
    if A.dim > PSD_CHECK_MAX_DIM:
        log.debug("skipping PSD check for d=%d", A.dim)
        return
    w, _ = sym_eig(A)
    if w[-1] < -1e-6 * frobenius_norm(A):
        warnings.warn(
            f"input is not PSD (smallest eigenvalue {w[-1]:.3e}); the fast path has no guarantee",
            RuntimeWarning,
            stacklevel=3,
        )


def fast_psd_spectrum(A, cfg: FastSketchConfig, debug: bool = False) -> SpectrumEstimate:
    """Estimate the spectrum of a sparse PSD matrix through sparse embeddings.

    S and T are drawn from sub-seeds (seed, 0) and (seed, 1); the inner
    Gaussian sketch uses (seed, 2).  If ``m > d`` the embeddings cannot
    compress anything and the dense sketch of A is used instead.
    """
    A = as_symmetric(A)
    d = A.dim
    if debug:
        _check_psd(A)
    if cfg.m > d:
        log.info("outer dimension m=%d exceeds d=%d; using the dense sketch directly", cfg.m, d)
        est = estimate_spectrum(A, min(cfg.k, d), sub_seed(cfg.seed, 2))
        vals = sort_descending(np.maximum(est.values, 0.0))
        return replace(est, values=vals, seed=cfg.seed, tag="fast-psd")
    S = sample_sparse_embedding(cfg.m, d, sub_seed(cfg.seed, 0), cfg.s)
    T = sample_sparse_embedding(cfg.m, d, sub_seed(cfg.seed, 1), cfg.s)
    M = two_sided_embedding(S, A, T)
    inner = estimate_spectrum(symmetrize_block(M), cfg.k, sub_seed(cfg.seed, 2))
    # the block spectrum is +-sigma pairs; the target is PSD so negatives are noise
    top = np.maximum(inner.values[: cfg.m], 0.0)
    values = np.concatenate([top, np.zeros(d - cfg.m)])
    return SpectrumEstimate(sort_descending(values), cfg.k, cfg.seed, "fast-psd", inner.outcome)
