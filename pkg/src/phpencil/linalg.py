"""Dense complex matrix kernels shared by the whole package.

Conventions: all matrices are dense ``numpy`` arrays promoted to
``complex128``; ``vec`` stacks columns (Fortran order), so the Kronecker
identity ``vec(B X A^T) = kron(A, B) vec(X)`` holds with ``numpy.kron``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class NumericalError(Exception):
    """Base class for numerical failures raised by this package."""


class SingularMatrixError(NumericalError):
    """A matrix required to be nonsingular is singular to working precision.

    Carries the condition estimate sigma_max/sigma_min when available.
    """

    def __init__(self, message, condition=None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class SingularPencilError(NumericalError):
    """det(s*E - A) vanishes identically to working precision."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Promote to a 2-d complex128 array and reject non-finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def vec(m) -> np.ndarray:
    """Stack the columns of a matrix into one vector."""
    return as_matrix(m, "vec argument").flatten(order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec` for a ``rows x cols`` matrix."""
    v = np.asarray(v, dtype=np.complex128)
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape {v.size} entries to {rows}x{cols}")
    return v.reshape((rows, cols), order="F")


def kron(a, b) -> np.ndarray:
    """Kronecker product, satisfying vec(B X A^T) = kron(A, B) vec(X)."""
    return np.kron(as_matrix(a, "kron left factor"), as_matrix(b, "kron right factor"))


def herm_skew_split(y) -> tuple[np.ndarray, np.ndarray]:
    """Split a square matrix into Hermitian and skew-Hermitian parts.

    Returns ``(W, V)`` with ``W = (Y + Y^H)/2`` and ``V = Y - W``, so the
    reconstruction ``W + V`` reproduces ``Y`` bit for bit.
    """
    y = as_matrix(y, "herm_skew_split argument")
    if y.shape[0] != y.shape[1]:
        raise ValueError(f"herm_skew_split needs a square matrix, got {y.shape}")
    w = (y + y.conj().T) / 2.0
    v = y - w
    return w, v


def frobenius_list(mats) -> float:
    """Frobenius norm of a list of matrices, sqrt(sum of squared norms)."""
    total = 0.0
    for m in mats:
        total += float(np.linalg.norm(np.asarray(m)) ** 2)
    return float(np.sqrt(total))


@dataclass(frozen=True)
class Inertia:
    """Counts of positive, negative and zero eigenvalues of a Hermitian matrix."""

    positive: int
    negative: int
    zero: int

    def astuple(self) -> tuple[int, int, int]:
        return (self.positive, self.negative, self.zero)

    @property
    def order(self) -> int:
        return self.positive + self.negative + self.zero


def inertia(h, tol: float = 1e-10) -> Inertia:
    """Eigenvalue sign counts of a Hermitian matrix.

    Eigenvalues within ``tol * ||H||_2`` of zero count as zero.  Raises
    ``ValueError`` when the input is not Hermitian to relative tolerance
    ``tol``.
    """
    h = as_matrix(h, "inertia argument")
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"inertia needs a square matrix, got {h.shape}")
    asym = np.linalg.norm(h - h.conj().T)
    scale_f = np.linalg.norm(h)
    if asym > tol * max(scale_f, np.finfo(float).tiny):
        raise ValueError(
            f"matrix is not Hermitian: ||H - H^H||_F = {asym:.3e} "
            f"exceeds {tol:.1e} * ||H||_F"
        )
    eigs = np.linalg.eigvalsh((h + h.conj().T) / 2.0)
    scale2 = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    thresh = tol * scale2
    pos = int(np.count_nonzero(eigs > thresh))
    neg = int(np.count_nonzero(eigs < -thresh))
    return Inertia(pos, neg, h.shape[0] - pos - neg)


@dataclass(frozen=True)
class SingularTriple:
    """Smallest singular value with unit left/right singular vectors."""

    sigma: float
    u: np.ndarray
    v: np.ndarray


def smallest_singular_triple(m) -> SingularTriple:
    """Smallest singular triple (sigma, u, v) with ``M v = sigma u``."""
    m = as_matrix(m, "singular triple argument")
    u_mat, s, vh = np.linalg.svd(m, full_matrices=False)
    return SingularTriple(float(s[-1]), u_mat[:, -1].copy(), vh[-1, :].conj().copy())


@dataclass(frozen=True)
class PolarFactors:
    """Polar decomposition M = unitary @ hermitian with hermitian PSD."""

    unitary: np.ndarray
    hermitian: np.ndarray


def polar_factor(m) -> PolarFactors:
    """Polar decomposition of a nonsingular square matrix via the SVD.

    ``unitary = U V^H`` and ``hermitian = V S V^H = (M^H M)^(1/2)``.
    """
    m = as_matrix(m, "polar argument")
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"polar_factor needs a square matrix, got {m.shape}")
    u_mat, s, vh = np.linalg.svd(m)
    if s[0] == 0.0 or s[-1] < 1e-13 * s[0]:
        raise SingularMatrixError(
            "polar_factor: input singular to working precision",
            condition=np.inf if s[-1] == 0.0 else s[0] / s[-1],
        )
    unitary = u_mat @ vh
    hermitian = vh.conj().T @ np.diag(s) @ vh
    return PolarFactors(unitary, hermitian)


def solve_dense(a, b) -> np.ndarray:
    """Solve ``A x = b`` by LU with partial pivoting plus one refinement step.

    ``b`` may be a vector or a matrix of stacked right-hand sides.  Raises
    :class:`SingularMatrixError` when ``sigma_min(A) < 1e-14 * sigma_max(A)``.
    """
    a = as_matrix(a, "solve_dense matrix")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"solve_dense needs a square matrix, got {a.shape}")
    b_arr = np.asarray(b, dtype=np.complex128)
    vector_rhs = b_arr.ndim == 1
    b2 = b_arr.reshape(-1, 1) if vector_rhs else b_arr
    if b2.shape[0] != a.shape[0]:
        raise ValueError(f"shape mismatch: A is {a.shape}, b is {b_arr.shape}")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < 1e-14 * sv[0]:
        raise SingularMatrixError(
            "solve_dense: matrix singular to working precision",
            condition=np.inf if sv[-1] == 0.0 else sv[0] / sv[-1],
        )
    lu, piv = sla.lu_factor(a)
    x = sla.lu_solve((lu, piv), b2)
    # one step of iterative refinement for the ill-conditioned Kronecker systems
    residual = b2 - a @ x
    x = x + sla.lu_solve((lu, piv), residual)
    return x[:, 0] if vector_rhs else x
