"""Even pencils s*Ecal - Acal of order 2n + m.

For a descriptor system the blocks are

    Ecal = [[0, E, 0], [-E^H, 0, 0], [0, 0, 0]]
    Acal = [[0, A, B], [A^H, 0, C^H], [B^H, C, D^H + D]]

with Ecal skew-Hermitian and Acal Hermitian.  This module builds the pencil
in both the descriptor and the port-Hamiltonian block conventions, models
the admissible block-sparse perturbations (zero blocks untouched, symmetry
preserved), and provides spectral and passivity diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .linalg import Inertia, as_matrix, frobenius_list, inertia
from .systems import DescriptorSystem, PHSystem, ph_to_descriptor

_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class EvenPencil:
    """Pair (Ecal skew-Hermitian, Acal Hermitian) with block sizes (n, n, m)."""

    Ecal: np.ndarray
    Acal: np.ndarray
    n: int
    m: int

    def __post_init__(self):
        object.__setattr__(self, "Ecal", as_matrix(self.Ecal, "Ecal"))
        object.__setattr__(self, "Acal", as_matrix(self.Acal, "Acal"))
        order = 2 * self.n + self.m
        if self.Ecal.shape != (order, order) or self.Acal.shape != (order, order):
            raise ValueError(
                f"pencil matrices must be {order}x{order} for n={self.n}, m={self.m}"
            )
        e_norm = float(np.linalg.norm(self.Ecal))
        a_norm = float(np.linalg.norm(self.Acal))
        if np.linalg.norm(self.Ecal + self.Ecal.conj().T) > _SYMMETRY_TOL * e_norm:
            raise ValueError("Ecal is not skew-Hermitian to working precision")
        if np.linalg.norm(self.Acal - self.Acal.conj().T) > _SYMMETRY_TOL * a_norm:
            raise ValueError("Acal is not Hermitian to working precision")
        k = 2 * self.n
        if np.any(self.Ecal[k:, :] != 0) or np.any(self.Ecal[:, k:] != 0):
            raise ValueError("third block row/column of Ecal must be exactly zero")

    @property
    def order(self) -> int:
        return 2 * self.n + self.m

    def scale(self) -> float:
        """Frobenius norm of the pair, ||(Ecal, Acal)||_F."""
        return frobenius_list([self.Ecal, self.Acal])


def split_blocks(mat: np.ndarray, n: int, m: int) -> list[list[np.ndarray]]:
    """3x3 block view of an order-(2n+m) matrix with sizes (n, n, m)."""
    cuts = [0, n, 2 * n, 2 * n + m]
    return [
        [mat[cuts[i]:cuts[i + 1], cuts[j]:cuts[j + 1]] for j in range(3)]
        for i in range(3)
    ]


def build_even_pencil(sys: DescriptorSystem) -> EvenPencil:
    """Even pencil of the descriptor system, blocks as in the module docstring."""
    n, m = sys.n, sys.m
    zn = np.zeros((n, n), dtype=np.complex128)
    znm = np.zeros((n, m), dtype=np.complex128)
    zm = np.zeros((m, m), dtype=np.complex128)
    ecal = np.block([
        [zn, sys.E, znm],
        [-sys.E.conj().T, zn, znm],
        [znm.conj().T, znm.conj().T, zm],
    ])
    acal = np.block([
        [zn, sys.A, sys.B],
        [sys.A.conj().T, zn, sys.C.conj().T],
        [sys.B.conj().T, sys.C, sys.D.conj().T + sys.D],
    ])
    return EvenPencil(ecal, acal, n, m)


def build_ph_even_pencil(ph: PHSystem) -> EvenPencil:
    """Even pencil in the port-Hamiltonian block convention.

    Acal = [[R, J, -G], [J^H, -R, P], [-G^H, P^H, -S]]; Ecal is the same as
    in the descriptor convention.  The pair equals the congruence of the
    descriptor pencil by Xhat = diag(X, I_m/sqrt(2)), X = [[I, I], [I, -I]]/sqrt(2),
    with both matrices negated; the negation cancels in the eigenvalue
    problem, so the two pencils have identical spectra.
    """
    n, m = ph.n, ph.m
    zn = np.zeros((n, n), dtype=np.complex128)
    znm = np.zeros((n, m), dtype=np.complex128)
    zm = np.zeros((m, m), dtype=np.complex128)
    ecal = np.block([
        [zn, ph.E, znm],
        [-ph.E.conj().T, zn, znm],
        [znm.conj().T, znm.conj().T, zm],
    ])
    acal = np.block([
        [ph.R, ph.J, -ph.G],
        [ph.J.conj().T, -ph.R, ph.P],
        [-ph.G.conj().T, ph.P.conj().T, -ph.S],
    ])
    return EvenPencil(ecal, acal, n, m)


def congruence_basis(n: int, m: int) -> np.ndarray:
    """Xhat = diag(([[I, I], [I, -I]])/sqrt(2), I_m/sqrt(2)) linking the two pencils."""
    eye = np.eye(n)
    x = np.block([[eye, eye], [eye, -eye]]) / np.sqrt(2.0)
    return sla.block_diag(x, np.eye(m) / np.sqrt(2.0)).astype(np.complex128)


@dataclass(frozen=True)
class StructuredPerturbation:
    """Admissible block perturbation of an even pencil.

    dE11, dE22 are skew-Hermitian, dA11, dA22, dA33 Hermitian; dE12, dA12,
    dA13, dA23 are free.  The assembled pair keeps the zero third block
    row/column of Ecal and the even symmetry.
    """

    dE11: np.ndarray
    dE12: np.ndarray
    dE22: np.ndarray
    dA11: np.ndarray
    dA12: np.ndarray
    dA13: np.ndarray
    dA22: np.ndarray
    dA23: np.ndarray
    dA33: np.ndarray

    def __post_init__(self):
        for name in ("dE11", "dE12", "dE22", "dA11", "dA12", "dA13", "dA22", "dA23", "dA33"):
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        n = self.dE11.shape[0]
        m = self.dA33.shape[0]
        expected = {
            "dE11": (n, n), "dE12": (n, n), "dE22": (n, n),
            "dA11": (n, n), "dA12": (n, n), "dA22": (n, n),
            "dA13": (n, m), "dA23": (n, m), "dA33": (m, m),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{name} has shape {got}, expected {shape}")

    @property
    def n(self) -> int:
        return self.dE11.shape[0]

    @property
    def m(self) -> int:
        return self.dA33.shape[0]

    def norm(self) -> float:
        """Frobenius norm of the assembled pair (off-diagonal blocks count twice)."""
        sq = (
            np.linalg.norm(self.dE11) ** 2
            + 2.0 * np.linalg.norm(self.dE12) ** 2
            + np.linalg.norm(self.dE22) ** 2
            + np.linalg.norm(self.dA11) ** 2
            + 2.0 * np.linalg.norm(self.dA12) ** 2
            + 2.0 * np.linalg.norm(self.dA13) ** 2
            + np.linalg.norm(self.dA22) ** 2
            + 2.0 * np.linalg.norm(self.dA23) ** 2
            + np.linalg.norm(self.dA33) ** 2
        )
        return float(np.sqrt(sq))


def _check_symmetry(mat: np.ndarray, name: str, skew: bool) -> None:
    defect = mat + mat.conj().T if skew else mat - mat.conj().T
    bound = 1e-13 * float(np.linalg.norm(mat))
    if np.linalg.norm(defect) > bound:
        kind = "skew-Hermitian" if skew else "Hermitian"
        raise ValueError(f"{name} must be {kind} (defect {np.linalg.norm(defect):.3e})")


def assemble_perturbation(p: StructuredPerturbation) -> tuple[np.ndarray, np.ndarray]:
    """Full (Delta_Ecal, Delta_Acal) matrices from the block data."""
    _check_symmetry(p.dE11, "dE11", skew=True)
    _check_symmetry(p.dE22, "dE22", skew=True)
    _check_symmetry(p.dA11, "dA11", skew=False)
    _check_symmetry(p.dA22, "dA22", skew=False)
    _check_symmetry(p.dA33, "dA33", skew=False)
    n, m = p.n, p.m
    znm = np.zeros((n, m), dtype=np.complex128)
    zm = np.zeros((m, m), dtype=np.complex128)
    d_ecal = np.block([
        [p.dE11, p.dE12, znm],
        [-p.dE12.conj().T, p.dE22, znm],
        [znm.conj().T, znm.conj().T, zm],
    ])
    d_acal = np.block([
        [p.dA11, p.dA12, p.dA13],
        [p.dA12.conj().T, p.dA22, p.dA23],
        [p.dA13.conj().T, p.dA23.conj().T, p.dA33],
    ])
    return d_ecal, d_acal


def perturbed_pencil(pencil: EvenPencil, p: StructuredPerturbation) -> EvenPencil:
    """Even pencil with the structured perturbation added."""
    d_ecal, d_acal = assemble_perturbation(p)
    return EvenPencil(pencil.Ecal + d_ecal, pencil.Acal + d_acal, pencil.n, pencil.m)


def random_structured_perturbation(
    n: int, m: int, norm: float, seed: int
) -> StructuredPerturbation:
    """Random admissible perturbation rescaled to assembled norm ``norm``."""
    if norm < 0.0:
        raise ValueError("norm must be nonnegative")
    rng = np.random.Generator(np.random.Philox(key=seed))

    def crandn(rows, cols):
        z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
        return z / np.sqrt(2.0)

    def skew(rows):
        z = crandn(rows, rows)
        return (z - z.conj().T) / 2.0

    def herm(rows):
        z = crandn(rows, rows)
        return (z + z.conj().T) / 2.0

    p = StructuredPerturbation(
        dE11=skew(n), dE12=crandn(n, n), dE22=skew(n),
        dA11=herm(n), dA12=crandn(n, n), dA13=crandn(n, m),
        dA22=herm(n), dA23=crandn(n, m), dA33=herm(m),
    )
    total = p.norm()
    factor = 0.0 if norm == 0.0 else norm / total
    return StructuredPerturbation(
        dE11=factor * p.dE11, dE12=factor * p.dE12, dE22=factor * p.dE22,
        dA11=factor * p.dA11, dA12=factor * p.dA12, dA13=factor * p.dA13,
        dA22=factor * p.dA22, dA23=factor * p.dA23, dA33=factor * p.dA33,
    )


@dataclass(frozen=True)
class PencilDiagnostics:
    regular: bool
    finite_eigenvalues: np.ndarray
    infinite_count: int
    index_at_most_one: bool
    imaginary_axis_eigenvalues: np.ndarray
    passivity_verdict: bool


def _is_regular(ecal: np.ndarray, acal: np.ndarray, tol: float) -> bool:
    """Max-rank test of s*Ecal - Acal at three deterministic random shifts."""
    rng = np.random.default_rng(0xC0FFEE)
    radius = (1.0 + np.linalg.norm(acal, 2)) / (1.0 + np.linalg.norm(ecal, 2))
    for _ in range(3):
        shift = radius * np.exp(2j * np.pi * rng.random())
        sv = np.linalg.svd(shift * ecal - acal, compute_uv=False)
        if sv[0] > 0.0 and sv[-1] > tol * sv[0]:
            return True
    return False


def _index_at_most_one(ecal: np.ndarray, acal: np.ndarray, tol: float) -> bool:
    """Rank of Acal compressed to the kernel of Ecal (via eigenvectors of i*Ecal)."""
    herm = 1j * ecal
    eigvals, eigvecs = np.linalg.eigh((herm + herm.conj().T) / 2.0)
    scale = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
    kernel = eigvecs[:, np.abs(eigvals) <= tol * scale]
    if kernel.shape[1] == 0:
        return True
    compressed = kernel.conj().T @ acal @ kernel
    sv = np.linalg.svd(compressed, compute_uv=False)
    a_scale = float(np.linalg.norm(acal, 2))
    return bool(sv[-1] > tol * a_scale)


def pencil_eigenvalues(p: EvenPencil, tol: float = 1e-10) -> PencilDiagnostics:
    """Generalized eigenvalues and passivity-relevant structure flags.

    Eigenvalues with |beta| <= tol * max(||Ecal||, ||Acal||) in QZ coordinates
    count as infinite; imaginary-axis membership uses |Re lam| <= tol * (1 + |lam|).
    A singular pencil yields regular=False with empty eigenvalue lists.
    """
    if not _is_regular(p.Ecal, p.Acal, tol):
        empty = np.zeros(0, dtype=np.complex128)
        return PencilDiagnostics(
            regular=False,
            finite_eigenvalues=empty,
            infinite_count=0,
            index_at_most_one=False,
            imaginary_axis_eigenvalues=empty.copy(),
            passivity_verdict=False,
        )
    alpha, beta = sla.eig(p.Acal, p.Ecal, right=False, homogeneous_eigvals=True)
    scale = max(np.linalg.norm(p.Ecal, 2), np.linalg.norm(p.Acal, 2))
    finite_mask = np.abs(beta) > tol * scale
    finite = alpha[finite_mask] / beta[finite_mask]
    infinite_count = int(np.count_nonzero(~finite_mask))
    on_axis = finite[np.abs(finite.real) <= tol * (1.0 + np.abs(finite))]
    index_ok = _index_at_most_one(p.Ecal, p.Acal, tol)
    return PencilDiagnostics(
        regular=True,
        finite_eigenvalues=finite,
        infinite_count=infinite_count,
        index_at_most_one=index_ok,
        imaginary_axis_eigenvalues=on_axis,
        passivity_verdict=bool(on_axis.size == 0 and index_ok),
    )


def inertia_checks(p: EvenPencil, omega: float = 0.0) -> tuple[Inertia, Inertia]:
    """Inertia of i*Ecal and of the Hermitian matrix Acal - i*omega*Ecal.

    For a strictly passive system with E > 0 these are {n, n, m} and
    {n + m, n, 0} for every real omega.
    """
    first = inertia(1j * p.Ecal)
    second = inertia(p.Acal - 1j * float(omega) * p.Ecal)
    return first, second


@dataclass(frozen=True)
class IndexOneReport:
    Shat: np.ndarray
    sigma_min: float
    index_at_most_one: bool


def index_one_matrix(
    sys: DescriptorSystem, r: int, tol: float = 1e-10
) -> IndexOneReport:
    """Index test for E = diag(E11, 0) with E11 (r x r) positive definite.

    Shat = [[0, A22, B2], [A22^H, 0, C2^H], [B2^H, C2, D + D^H]] is the
    compression of Acal to the kernel of Ecal; the pencil has index at most
    one iff Shat is nonsingular (sigma_min > tol * ||Shat||_2).
    """
    n = sys.n
    if not 0 <= r <= n:
        raise ValueError(f"partition size r={r} out of range for n={n}")
    e11 = sys.E[:r, :r]
    padded = np.zeros_like(sys.E)
    padded[:r, :r] = e11
    defect = float(np.linalg.norm(sys.E - padded))
    if defect > tol * max(float(np.linalg.norm(sys.E)), np.finfo(float).tiny):
        raise ValueError(
            f"E is not in partitioned diag(E11, 0) form (defect {defect:.3e})"
        )
    if r > 0:
        eigs = np.linalg.eigvalsh((e11 + e11.conj().T) / 2.0)
        if eigs[0] <= tol * float(np.max(np.abs(eigs))):
            raise ValueError("E11 block must be positive definite")
    k = n - r
    a22 = sys.A[r:, r:]
    b2 = sys.B[r:, :]
    c2 = sys.C[:, r:]
    zk = np.zeros((k, k), dtype=np.complex128)
    shat = np.block([
        [zk, a22, b2],
        [a22.conj().T, zk, c2.conj().T],
        [b2.conj().T, c2, sys.D + sys.D.conj().T],
    ])
    sv = np.linalg.svd(shat, compute_uv=False)
    sigma_min = float(sv[-1])
    return IndexOneReport(shat, sigma_min, bool(sigma_min > tol * float(sv[0])))


def enforce_feedthrough(sys: DescriptorSystem, mu: float) -> DescriptorSystem:
    """Shift the feedthrough, D <- D + (mu/2) I, raising lam_min(D + D^H) by mu."""
    if mu < 0.0:
        raise ValueError("mu must be nonnegative")
    return DescriptorSystem(
        E=sys.E, A=sys.A, B=sys.B, C=sys.C,
        D=sys.D + (mu / 2.0) * np.eye(sys.m),
    )


def hamiltonian_matrix(sys: DescriptorSystem) -> np.ndarray:
    """Hamiltonian matrix whose spectrum is the finite spectrum of the even pencil.

    H = blkdiag(E^-1 A, -(E^-1 A)^H)
        - [[E^-1 B], [-C^H]] (D^H + D)^-1 [C, (E^-1 B)^H]

    Requires E nonsingular and D + D^H positive definite.
    """
    from .linalg import solve_dense

    eia = solve_dense(sys.E, sys.A)
    eib = solve_dense(sys.E, sys.B)
    dd = sys.D.conj().T + sys.D
    dd_inv_block = solve_dense(dd, np.hstack([sys.C, eib.conj().T]))
    left = np.vstack([eib, -sys.C.conj().T])
    block_diag = sla.block_diag(eia, -eia.conj().T)
    return block_diag - left @ dd_inv_block
