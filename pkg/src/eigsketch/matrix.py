"""Matrix containers, seeded random generators and spectral primitives.

Every random draw in the package goes through :func:`rng_from_seed`, which
wraps numpy's PCG64 bit generator.  Normal variates come from
``Generator.standard_normal`` (numpy's ziggurat sampler), so a seed
reproduces bit-identical matrices on the same numpy build.  Matching draws
across numpy versions or platforms is not promised.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import norm as sparse_norm

SYMMETRY_RTOL = 1e-8


class ConvergenceError(RuntimeError):
    """An iterative spectral routine did not converge."""


class ResourceLimitError(RuntimeError):
    """A requested size exceeds the configured limit."""


def rng_from_seed(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sub_seed(seed: int, *keys: int) -> int:
    """Derive an independent 64-bit seed from ``seed`` and a key path.

    Uses ``SeedSequence(seed, spawn_key=keys)``, so ``sub_seed(s, 0, t)`` and
    ``sub_seed(s, 1, t)`` give statistically independent streams.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _check_finite(values, what="matrix"):
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} contains non-finite values")


class SymmetricMatrix:
    """Immutable real symmetric d x d matrix, stored dense or sparse (CSR).

    Use :meth:`from_dense` or :meth:`from_triples` rather than the raw
    constructor.  The dense constructor symmetrizes via (M + M^T)/2 when the
    asymmetry is at rounding level and rejects anything larger.
    """

    __slots__ = ("_dense", "_sparse", "dim")
    __array_ufunc__ = None  # make ndarray @ SymmetricMatrix defer to __rmatmul__

    def __init__(self, dense=None, sparse=None):
        if (dense is None) == (sparse is None):
            raise ValueError("exactly one of dense/sparse storage is required")
        self._dense = dense
        self._sparse = sparse
        self.dim = (dense if dense is not None else sparse).shape[0]

    @classmethod
    def from_dense(cls, values, rtol: float = SYMMETRY_RTOL) -> "SymmetricMatrix":
        M = np.array(values, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {M.shape}")
        if M.shape[0] == 0:
            raise ValueError("matrix dimension must be positive")
        _check_finite(M)
        asym = np.max(np.abs(M - M.T))
        if asym > rtol * max(np.linalg.norm(M), np.finfo(float).tiny):
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        if asym > 0:
            M = (M + M.T) / 2
        M.setflags(write=False)
        return cls(dense=M)

    @classmethod
    def from_triples(cls, rows, cols, values, dim: int) -> "SymmetricMatrix":
        """Build a sparse matrix from coordinate triples.

        Only one triangle is read: each (i, j, v) is folded into the upper
        triangle and mirrored.  Duplicate coordinates are summed, so passing
        both (i, j) and (j, i) counts the entry twice.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        if dim <= 0:
            raise ValueError("matrix dimension must be positive")
        if not (rows.shape == cols.shape == values.shape):
            raise ValueError("rows, cols and values must have the same length")
        _check_finite(values)
        if rows.size and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= dim):
            raise ValueError("coordinate out of range")
        lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
        upper = sp.coo_matrix((values, (lo, hi)), shape=(dim, dim)).tocsr()
        upper.sum_duplicates()
        diag = sp.diags(upper.diagonal())
        full = (upper + upper.T - diag).tocsr()
        full.eliminate_zeros()
        full.sort_indices()
        return cls(sparse=full)

    @classmethod
    def from_scipy(cls, mat) -> "SymmetricMatrix":
        """Wrap a scipy sparse matrix that is already symmetric."""
        mat = sp.csr_matrix(mat, dtype=float)
        if mat.shape[0] != mat.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {mat.shape}")
        _check_finite(mat.data)
        diff = abs(mat - mat.T)
        asym = diff.max() if diff.nnz else 0.0
        if asym > SYMMETRY_RTOL * max(sparse_norm(mat), np.finfo(float).tiny):
            raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        upper = sp.triu(mat).tocoo()
        return cls.from_triples(upper.row, upper.col, upper.data, mat.shape[0])

    @property
    def is_sparse(self) -> bool:
        return self._sparse is not None

    @property
    def shape(self):
        return (self.dim, self.dim)

    @property
    def nnz(self) -> int:
        if self.is_sparse:
            return self._sparse.nnz
        return int(np.count_nonzero(self._dense))

    @property
    def sparse(self) -> sp.csr_matrix:
        if self.is_sparse:
            return self._sparse
        return sp.csr_matrix(self._dense)

    def to_dense(self) -> np.ndarray:
        if self.is_sparse:
            return self._sparse.toarray()
        return self._dense

    def __matmul__(self, other):
        if self.is_sparse:
            return self._sparse @ other
        return self._dense @ other

    def __rmatmul__(self, other):
        if self.is_sparse:
            return (self._sparse.T @ other.T).T
        return other @ self._dense

    def scaled(self, c: float) -> "SymmetricMatrix":
        if self.is_sparse:
            return SymmetricMatrix(sparse=(self._sparse * c).tocsr())
        out = self._dense * c
        out.setflags(write=False)
        return SymmetricMatrix(dense=out)

    def __neg__(self):
        return self.scaled(-1.0)

    def __mul__(self, c):
        return self.scaled(float(c))

    __rmul__ = __mul__

    def __repr__(self):
        kind = f"sparse, nnz={self.nnz}" if self.is_sparse else "dense"
        return f"SymmetricMatrix(dim={self.dim}, {kind})"


def as_symmetric(A) -> SymmetricMatrix:
    if isinstance(A, SymmetricMatrix):
        return A
    if sp.issparse(A):
        return SymmetricMatrix.from_scipy(A)
    return SymmetricMatrix.from_dense(A)


@dataclass(frozen=True)
class GaussianSketchMatrix:
    """k x d matrix with i.i.d. N(0, 1/k) entries drawn from ``seed``."""

    rows: int
    cols: int
    seed: int
    entries: np.ndarray = field(repr=False)


def sample_gaussian(k: int, d: int, seed: int) -> GaussianSketchMatrix:
    if k < 1 or d < 1:
        raise ValueError(f"sketch dimensions must be positive, got ({k}, {d})")
    G = rng_from_seed(seed).standard_normal((k, d))
    G /= np.sqrt(k)
    G.setflags(write=False)
    return GaussianSketchMatrix(k, d, seed, G)


def sort_descending(values) -> np.ndarray:
    """Non-increasing sort; ties keep their original order."""
    values = np.asarray(values, dtype=float)
    return values[np.argsort(-values, kind="stable")]


def sym_eig(A):
    """Eigen-decomposition of a symmetric matrix, eigenvalues non-increasing.

    Returns ``(values, Q)`` with ``A = Q diag(values) Q^T``.  Backed by LAPACK
    ``syevd`` through :func:`numpy.linalg.eigh`.
    """
    M = as_symmetric(A).to_dense()
    try:
        w, Q = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc
    order = np.argsort(-w, kind="stable")
    return w[order], Q[:, order]


def eigvalsh_desc(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of a dense symmetric array, non-increasing, no validation."""
    try:
        w = np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc
    return sort_descending(w)


def singular_values(B) -> np.ndarray:
    B = B.toarray() if sp.issparse(B) else np.asarray(B, dtype=float)
    if B.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {B.shape}")
    _check_finite(B)
    if min(B.shape) == 0:
        return np.zeros(0)
    try:
        s = np.linalg.svd(B, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"SVD failed: {exc}") from exc
    return sort_descending(s)


def frobenius_norm(A) -> float:
    if isinstance(A, SymmetricMatrix):
        A = A.sparse if A.is_sparse else A.to_dense()
    if sp.issparse(A):
        return float(sparse_norm(A))
    return float(np.linalg.norm(np.asarray(A, dtype=float)))


def operator_norm(A) -> float:
    """Largest absolute eigenvalue (symmetric input)."""
    w, _ = sym_eig(A)
    return float(max(abs(w[0]), abs(w[-1])))


def trace(A) -> float:
    if isinstance(A, SymmetricMatrix):
        A = A.sparse if A.is_sparse else A.to_dense()
    return float(A.diagonal().sum())


def haar_frame(d: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """First r columns of a Haar-distributed d x d orthogonal matrix.

    QR of a Gaussian d x r matrix, with columns flipped so R has a positive
    diagonal; without the flip the distribution is not rotation invariant.
    """
    Z = rng.standard_normal((d, r))
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def haar_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    return haar_frame(d, d, rng)


@dataclass(frozen=True)
class SparseEmbeddingMatrix:
    """m x d sparse embedding with exactly ``s`` nonzeros of size 1/sqrt(s) per column.

    Rows are split into ``s`` contiguous blocks and each column picks one row
    per block, so the ``s`` positions in a column are always distinct.
    """

    rows: int
    cols: int
    s: int
    seed: int
    positions: np.ndarray = field(repr=False)  # (d, s) row indices
    signs: np.ndarray = field(repr=False)  # (d, s) entries +-1/sqrt(s)

    @property
    def matrix(self) -> sp.csc_matrix:
        d, s = self.positions.shape
        indptr = np.arange(0, d * s + 1, s)
        return sp.csc_matrix(
            (self.signs.ravel(), self.positions.ravel(), indptr), shape=(self.rows, self.cols)
        )

    def apply_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ValueError(f"expected vector of length {self.cols}, got {x.shape}")
        w = (self.signs * x[:, None]).ravel()
        return np.bincount(self.positions.ravel(), weights=w, minlength=self.rows)


def sample_sparse_embedding(m: int, d: int, seed: int, s: int = 4) -> SparseEmbeddingMatrix:
    if m < 1 or d < 1 or s < 1:
        raise ValueError(f"embedding dimensions must be positive, got m={m}, d={d}, s={s}")
    if s > m:
        raise ValueError(f"need s <= m, got s={s}, m={m}")
    rng = rng_from_seed(seed)
    edges = np.linspace(0, m, s + 1).astype(np.int64)
    starts, widths = edges[:-1], np.diff(edges)
    offsets = np.floor(rng.random((d, s)) * widths).astype(np.int64)
    positions = starts + offsets
    signs = np.where(rng.random((d, s)) < 0.5, -1.0, 1.0) / np.sqrt(s)
    positions.setflags(write=False)
    signs.setflags(write=False)
    return SparseEmbeddingMatrix(m, d, s, seed, positions, signs)
