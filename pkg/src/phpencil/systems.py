"""Descriptor and port-Hamiltonian system models.

``DescriptorSystem`` holds E x' = A x + B u, y = C x + D u.  ``PHSystem``
holds the energy-based form x' driven by (J - R) with the symmetry blocks
V = [[J, G], [-G^H, N]] skew-Hermitian and W = [[R, P], [P^H, S]] Hermitian
positive semidefinite.  Conversions between the two are exact linear maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from .linalg import (
    SingularPencilError,
    as_matrix,
    frobenius_list,
    smallest_singular_triple,
    solve_dense,
)


@dataclass(frozen=True)
class DescriptorSystem:
    """Generalized state-space system (E, A, B, C, D) with m inputs/outputs."""

    E: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        for name in ("E", "A", "B", "C", "D"):
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        n = self.E.shape[0]
        m = self.D.shape[0]
        if n < 1 or m < 1:
            raise ValueError("state and input dimensions must be at least 1")
        expected = {"E": (n, n), "A": (n, n), "B": (n, m), "C": (m, n), "D": (m, m)}
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{name} has shape {got}, expected {shape}")

    @property
    def n(self) -> int:
        return self.E.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[0]


@dataclass(frozen=True)
class PHSystem:
    """Port-Hamiltonian blocks (E, J, R, G, P, S, N).

    The symmetry conditions (J, N skew-Hermitian; E, W = [[R,P],[P^H,S]]
    Hermitian PSD) are *not* enforced on construction; see
    :func:`validate_ph`.  This keeps :func:`descriptor_to_ph` total.
    """

    E: np.ndarray
    J: np.ndarray
    R: np.ndarray
    G: np.ndarray
    P: np.ndarray
    S: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        for name in ("E", "J", "R", "G", "P", "S", "N"):
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        n = self.E.shape[0]
        m = self.S.shape[0]
        if n < 1 or m < 1:
            raise ValueError("state and input dimensions must be at least 1")
        expected = {
            "E": (n, n), "J": (n, n), "R": (n, n),
            "G": (n, m), "P": (n, m), "S": (m, m), "N": (m, m),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{name} has shape {got}, expected {shape}")

    @property
    def n(self) -> int:
        return self.E.shape[0]

    @property
    def m(self) -> int:
        return self.S.shape[0]

    def structure_matrix(self) -> np.ndarray:
        """V = [[J, G], [-G^H, N]], skew-Hermitian for a valid system."""
        return np.block([[self.J, self.G], [-self.G.conj().T, self.N]])

    def dissipation_matrix(self) -> np.ndarray:
        """W = [[R, P], [P^H, S]], Hermitian PSD for a valid system."""
        return np.block([[self.R, self.P], [self.P.conj().T, self.S]])


@dataclass(frozen=True)
class Violation:
    name: str
    residual: float
    tolerance: float


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: list[Violation]


def validate_ph(ph: PHSystem, tol: float = 1e-10) -> ValidationReport:
    """Check the port-Hamiltonian symmetry conditions to relative tolerance.

    Checks, in order: V skew-Hermitian, W positive semidefinite,
    E Hermitian, E positive semidefinite.  Each failed check contributes a
    (name, residual, tolerance) entry.
    """
    violations: list[Violation] = []

    v_mat = ph.structure_matrix()
    res = float(np.linalg.norm(v_mat + v_mat.conj().T))
    bound = tol * float(np.linalg.norm(v_mat))
    if res > bound:
        violations.append(Violation("V_skew_hermitian", res, bound))

    w_mat = ph.dissipation_matrix()
    w_eigs = np.linalg.eigvalsh((w_mat + w_mat.conj().T) / 2.0)
    w_scale = float(np.max(np.abs(w_eigs))) if w_eigs.size else 0.0
    lam_min = float(w_eigs[0])
    if lam_min < -tol * w_scale:
        violations.append(Violation("W_positive_semidefinite", max(0.0, -lam_min), tol * w_scale))

    res = float(np.linalg.norm(ph.E - ph.E.conj().T))
    bound = tol * float(np.linalg.norm(ph.E))
    if res > bound:
        violations.append(Violation("E_hermitian", res, bound))

    e_eigs = np.linalg.eigvalsh((ph.E + ph.E.conj().T) / 2.0)
    e_scale = float(np.max(np.abs(e_eigs))) if e_eigs.size else 0.0
    lam_min = float(e_eigs[0])
    if lam_min < -tol * e_scale:
        violations.append(Violation("E_positive_semidefinite", max(0.0, -lam_min), tol * e_scale))

    return ValidationReport(passed=not violations, violations=violations)


def ph_to_descriptor(ph: PHSystem) -> DescriptorSystem:
    """A = J - R, B = G - P, C = (G + P)^H, D = S - N; E carried over."""
    return DescriptorSystem(
        E=ph.E.copy(),
        A=ph.J - ph.R,
        B=ph.G - ph.P,
        C=(ph.G + ph.P).conj().T,
        D=ph.S - ph.N,
    )


def descriptor_to_ph(sys: DescriptorSystem) -> PHSystem:
    """Closed-form Hermitian/skew splits inverting :func:`ph_to_descriptor`."""
    a_h = sys.A.conj().T
    d_h = sys.D.conj().T
    c_h = sys.C.conj().T
    return PHSystem(
        E=sys.E.copy(),
        J=(sys.A - a_h) / 2.0,
        R=-(sys.A + a_h) / 2.0,
        G=(sys.B + c_h) / 2.0,
        P=(c_h - sys.B) / 2.0,
        S=(sys.D + d_h) / 2.0,
        N=(d_h - sys.D) / 2.0,
    )


def transfer_eval(sys: DescriptorSystem, s: complex) -> np.ndarray:
    """Transfer function D + C (s E - A)^(-1) B at the point s."""
    x = solve_dense(s * sys.E - sys.A, sys.B)
    return sys.D + sys.C @ x


def popov_eval(sys: DescriptorSystem, omega: float) -> np.ndarray:
    """Popov function T(i w) + T(i w)^H, exactly Hermitian by construction."""
    t = transfer_eval(sys, 1j * float(omega))
    return t + t.conj().T


def _finite_eigenvalues(E: np.ndarray, A: np.ndarray, tol: float) -> np.ndarray:
    """Finite generalized eigenvalues of s E - A via QZ coordinates.

    Raises :class:`SingularPencilError` when the pencil is singular
    (rank-deficient at three deterministic pseudo-random shifts).
    """
    scale_e = float(np.linalg.norm(E, 2))
    scale_a = float(np.linalg.norm(A, 2))
    rng = np.random.default_rng(0x5EED)
    radius = (1.0 + scale_a) / (1.0 + scale_e)
    regular = False
    for _ in range(3):
        shift = radius * np.exp(2j * np.pi * rng.random())
        m = shift * E - A
        sv = np.linalg.svd(m, compute_uv=False)
        if sv[0] > 0.0 and sv[-1] > 1e-12 * sv[0]:
            regular = True
            break
    if not regular:
        raise SingularPencilError("pencil s*E - A is singular to working precision")
    alpha, beta = sla.eig(A, E, right=False, homogeneous_eigvals=True)
    finite = np.abs(beta) > tol * max(scale_e, scale_a)
    return alpha[finite] / beta[finite]


def controllability_observability_check(
    sys: DescriptorSystem, tol: float = 1e-8
) -> ValidationReport:
    """Hautus rank tests at every finite generalized eigenvalue of (E, A).

    Controllability: sigma_n([lam E - A, B]) > tol * sigma_max.
    Observability:   sigma_n([lam E - A; C]) > tol * sigma_max, which is the
    rank of [lam E^H - A^H, C^H] evaluated at the matching point.
    """
    violations: list[Violation] = []
    for lam in _finite_eigenvalues(sys.E, sys.A, tol=1e-10):
        ctrb = np.hstack([lam * sys.E - sys.A, sys.B])
        sv = np.linalg.svd(ctrb, compute_uv=False)
        if sv[-1] <= tol * sv[0]:
            violations.append(
                Violation(f"controllability at lambda={lam:.6g}", float(sv[-1]), tol * float(sv[0]))
            )
        obsv = np.vstack([lam * sys.E - sys.A, sys.C])
        sv = np.linalg.svd(obsv, compute_uv=False)
        if sv[-1] <= tol * sv[0]:
            violations.append(
                Violation(f"observability at lambda={lam:.6g}", float(sv[-1]), tol * float(sv[0]))
            )
    return ValidationReport(passed=not violations, violations=violations)


def _complex_normal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return z / math.sqrt(2.0)


def random_strictly_passive(
    n: int,
    m: int,
    seed: int,
    epsilon: float = 0.1,
    target_rho: float | None = None,
    rho_slack: float = 3.0,
    max_calibration_iter: int = 40,
) -> PHSystem:
    """Seeded strictly passive port-Hamiltonian system.

    E = F F^H + eps I and W = M M^H + eps I are Hermitian positive definite,
    J and N are random skew-Hermitian, G is a free random block.  The PRNG is
    Philox (counter based), so results are a pure function of the seed.

    With ``target_rho`` set, the dissipation block is decoupled (P = 0) and
    R is rescaled by bisection until the stability radius of the induced
    (E, A) pencil is within a factor ``rho_slack`` of the target.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be at least 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    f = _complex_normal(rng, n, n)
    e_mat = f @ f.conj().T + epsilon * np.eye(n)
    if target_rho is None:
        m_fac = _complex_normal(rng, n + m, n + m)
        w_mat = m_fac @ m_fac.conj().T + epsilon * np.eye(n + m)
        r_mat = w_mat[:n, :n]
        p_mat = w_mat[:n, n:]
        s_mat = w_mat[n:, n:]
    else:
        # decoupled dissipation so rescaling R preserves W > 0
        m1 = _complex_normal(rng, n, n)
        m2 = _complex_normal(rng, m, m)
        r_mat = m1 @ m1.conj().T + epsilon * np.eye(n)
        s_mat = m2 @ m2.conj().T + epsilon * np.eye(m)
        p_mat = np.zeros((n, m), dtype=np.complex128)
    j_raw = _complex_normal(rng, n, n)
    j_mat = (j_raw - j_raw.conj().T) / 2.0
    n_raw = _complex_normal(rng, m, m)
    n_mat = (n_raw - n_raw.conj().T) / 2.0
    g_mat = _complex_normal(rng, n, m)
    ph = PHSystem(E=e_mat, J=j_mat, R=r_mat, G=g_mat, P=p_mat, S=s_mat, N=n_mat)
    if target_rho is None:
        return ph
    return _calibrate_stability_radius(ph, target_rho, rho_slack, max_calibration_iter)


def _calibrate_stability_radius(
    ph: PHSystem, target: float, slack: float, max_iter: int
) -> PHSystem:
    """Rescale R by bisection until rho(E, J - alpha R) is near the target."""
    from .stability import stability_radius  # deferred; stability sits above systems

    if target <= 0.0:
        raise ValueError("target_rho must be positive")

    def rho_of(alpha: float) -> float:
        sys = ph_to_descriptor(replace(ph, R=alpha * ph.R))
        return stability_radius(sys.E, sys.A).rho

    def within(r: float) -> bool:
        return target / slack <= r <= target * slack

    alpha = 1.0
    rho = rho_of(alpha)
    used = 1
    if within(rho):
        return replace(ph, R=alpha * ph.R)
    # bracket the target by growing or shrinking alpha geometrically
    lo, hi = alpha, alpha
    rho_lo, rho_hi = rho, rho
    while rho_hi < target and used < max_iter:
        hi *= 8.0
        rho_hi = rho_of(hi)
        used += 1
        if within(rho_hi):
            return replace(ph, R=hi * ph.R)
    while rho_lo > target and used < max_iter:
        lo /= 8.0
        rho_lo = rho_of(lo)
        used += 1
        if within(rho_lo):
            return replace(ph, R=lo * ph.R)
    best_alpha, best_rho = (lo, rho_lo) if abs(math.log(max(rho_lo, 1e-300) / target)) < abs(
        math.log(max(rho_hi, 1e-300) / target)
    ) else (hi, rho_hi)
    while used < max_iter:
        mid = math.sqrt(lo * hi)
        rho_mid = rho_of(mid)
        used += 1
        if abs(math.log(max(rho_mid, 1e-300) / target)) < abs(
            math.log(max(best_rho, 1e-300) / target)
        ):
            best_alpha, best_rho = mid, rho_mid
        if within(rho_mid):
            return replace(ph, R=mid * ph.R)
        if rho_mid < target:
            lo = mid
        else:
            hi = mid
    return replace(ph, R=best_alpha * ph.R)
