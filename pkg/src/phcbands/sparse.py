"""Complex sparse matrices and direct LU solves.

Matrices are scipy CSR with complex128 entries throughout; factorizations go
through SuperLU.  This module is the only place the solver touches a sparse
backend, so everything downstream sees a fixed, deterministic contract:
duplicate triplets are summed, linear combinations follow input order, and a
factorization whose smallest pivot falls below ``PIVOT_RATIO_FLOOR`` times
the largest is reported as singular instead of silently producing garbage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import SuperLU, splu

PIVOT_RATIO_FLOOR = 1e-14


class SingularMatrixError(RuntimeError):
    """Matrix is exactly or numerically singular."""


def from_triplets(n_rows: int, n_cols: int, triplets: Iterable[tuple[int, int, complex]]) -> sp.csr_matrix:
    """Build a CSR matrix from (row, col, value) triplets, summing duplicates."""
    rows, cols, vals = [], [], []
    for row, col, val in triplets:
        if not (0 <= row < n_rows and 0 <= col < n_cols):
            raise ValueError(f"triplet index ({row}, {col}) outside {n_rows} x {n_cols}")
        rows.append(row)
        cols.append(col)
        vals.append(val)
    mat = sp.coo_matrix(
        (np.asarray(vals, dtype=np.complex128), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n_rows, n_cols),
    ).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def from_triplet_arrays(n_rows: int, n_cols: int, rows, cols, vals) -> sp.csr_matrix:
    """Array-based variant of :func:`from_triplets` for bulk assembly."""
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    vals = np.asarray(vals, dtype=np.complex128).ravel()
    if rows.size and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
        raise ValueError(f"triplet index outside {n_rows} x {n_cols}")
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n_rows, n_cols)).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def combine(coeffs: Sequence[complex], mats: Sequence[sp.spmatrix]) -> sp.csr_matrix:
    """Scalar linear combination sum_j coeffs[j] * mats[j] in input order."""
    if len(coeffs) != len(mats):
        raise ValueError(f"got {len(coeffs)} coefficients for {len(mats)} matrices")
    if not mats:
        raise ValueError("combine needs at least one matrix")
    shape = mats[0].shape
    acc = None
    for coeff, mat in zip(coeffs, mats):
        if mat.shape != shape:
            raise ValueError(f"shape mismatch in combine: {mat.shape} vs {shape}")
        term = sp.csr_matrix(mat, dtype=np.complex128) * complex(coeff)
        acc = term if acc is None else (acc + term).tocsr()
    acc.sum_duplicates()
    acc.sort_indices()
    return acc


@dataclass
class LUFactorization:
    """SuperLU factorization with its pivot magnitudes recorded."""

    shape: tuple[int, int]
    min_pivot: float
    max_pivot: float
    _lu: SuperLU = field(repr=False)


def factorize(mat: sp.spmatrix) -> LUFactorization:
    """LU-factorize a square sparse matrix.

    Raises SingularMatrixError for exactly singular input and for pivots
    smaller than PIVOT_RATIO_FLOOR times the largest pivot.
    """
    n_rows, n_cols = mat.shape
    if n_rows != n_cols:
        raise ValueError(f"factorize needs a square matrix, got {mat.shape}")
    csc = sp.csc_matrix(mat, dtype=np.complex128)
    try:
        lu = splu(csc)
    except RuntimeError as exc:
        raise SingularMatrixError(f"sparse LU failed: {exc}") from exc
    pivots = np.abs(lu.U.diagonal())
    max_pivot = float(pivots.max()) if pivots.size else 0.0
    min_pivot = float(pivots.min()) if pivots.size else 0.0
    if max_pivot == 0.0 or min_pivot <= PIVOT_RATIO_FLOOR * max_pivot:
        raise SingularMatrixError(
            f"numerically singular matrix: pivot ratio {min_pivot:.3e} / {max_pivot:.3e}"
        )
    return LUFactorization(shape=mat.shape, min_pivot=min_pivot, max_pivot=max_pivot, _lu=lu)


def solve(fact: LUFactorization, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for a previously factorized A."""
    b = np.asarray(b, dtype=np.complex128)
    if b.shape != (fact.shape[0],):
        raise ValueError(f"right-hand side has shape {b.shape}, expected ({fact.shape[0]},)")
    return fact._lu.solve(b)


def frobenius_norm(mat: sp.spmatrix) -> float:
    data = sp.csr_matrix(mat).data
    return float(np.sqrt(np.sum(np.abs(data) ** 2))) if data.size else 0.0
