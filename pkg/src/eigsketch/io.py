"""Readers and writers for the two on-disk matrix formats.

Dense files hold whitespace-separated rows, one row per line.  Sparse files
use MatrixMarket ``coordinate real symmetric`` (lower triangle stored).
Both readers reject asymmetric input.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .matrix import SymmetricMatrix


def read_dense(path) -> SymmetricMatrix:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: empty matrix file")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged rows")
    return SymmetricMatrix.from_dense(np.array(rows))


def write_dense(path, A) -> None:
    M = A.to_dense() if isinstance(A, SymmetricMatrix) else np.asarray(A)
    np.savetxt(path, M, fmt="%.17g")


def read_matrix_market(path) -> SymmetricMatrix:
    try:
        M = scipy.io.mmread(str(path))
    except Exception as exc:  # scipy raises plain ValueError/IndexError on malformed headers
        raise ValueError(f"{path}: cannot parse MatrixMarket file: {exc}") from exc
    if not sp.issparse(M):
        M = sp.csr_matrix(M)
    return SymmetricMatrix.from_scipy(M)


def write_matrix_market(path, A: SymmetricMatrix) -> None:
    scipy.io.mmwrite(str(path), A.sparse, symmetry="symmetric", precision=17)


def read_matrix(path, fmt: str) -> SymmetricMatrix:
    if fmt == "dense":
        return read_dense(path)
    if fmt == "mm":
        return read_matrix_market(path)
    raise ValueError(f"unknown matrix format {fmt!r}")
