"""Stability radius rho(E, A) = inf_w sigma_n(A - i w E) / sqrt(1 + w^2).

The infimum is located on a symmetric logarithmic frequency grid, refined by
golden-section search, and compared against the w -> infinity limit, which
equals sigma_min(E).  The minimizing rank-one pencil perturbation places a
generalized eigenvalue on the imaginary axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    NumericalError,
    SingularTriple,
    as_matrix,
    smallest_singular_triple,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class InfiniteFrequencyError(NumericalError):
    """The minimizing frequency is infinite; no rank-one destabilizer exists."""


@dataclass(frozen=True)
class StabilityRadiusResult:
    """rho with the minimizing frequency, singular triple and search trace.

    ``omega_star`` is ``math.inf`` when the infimum is attained in the
    high-frequency limit (value sigma_min(E)).  ``offending_eigenvalue`` is
    set instead of a search when the pencil already has an eigenvalue on the
    imaginary axis or in the right half plane (then rho = 0).
    """

    rho: float
    omega_star: float
    triple: SingularTriple | None
    grid_trace: list[tuple[float, float]]
    offending_eigenvalue: complex | None = None


def _ratio(E: np.ndarray, A: np.ndarray, omega: float) -> float:
    sv = np.linalg.svd(A - 1j * omega * E, compute_uv=False)
    return float(sv[-1]) / math.sqrt(1.0 + omega * omega)


def _boundary_eigenvalue(E: np.ndarray, A: np.ndarray, tol: float) -> complex | None:
    """A finite eigenvalue on the imaginary axis or in the right half plane."""
    from .systems import _finite_eigenvalues

    for lam in _finite_eigenvalues(E, A, tol=1e-10):
        if lam.real > -tol * (1.0 + abs(lam)):
            return complex(lam)
    return None


def stability_radius(
    E,
    A,
    grid_points: int = 200,
    omega_min: float = 1e-8,
    omega_max: float = 1e8,
    refine_rel_width: float = 1e-10,
    axis_tol: float = 1e-10,
) -> StabilityRadiusResult:
    """Distance of the pencil s E - A to the imaginary axis in the (E, A) data.

    The search set is {0} plus ``grid_points`` log-spaced frequencies per
    sign in [omega_min, omega_max], refined by golden-section search around
    the grid minimizer to relative width ``refine_rel_width``, plus the
    w -> infinity limit sigma_min(E).  Ties favour the smallest |w|.  When
    the pencil already has an eigenvalue on or right of the imaginary axis,
    rho = 0 is returned together with the offending eigenvalue.
    """
    E = as_matrix(E, "E")
    A = as_matrix(A, "A")
    offending = _boundary_eigenvalue(E, A, axis_tol)
    if offending is not None:
        return StabilityRadiusResult(
            rho=0.0,
            omega_star=float(offending.imag),
            triple=None,
            grid_trace=[],
            offending_eigenvalue=offending,
        )

    grid = np.logspace(math.log10(omega_min), math.log10(omega_max), grid_points)
    omegas = np.concatenate([-grid[::-1], [0.0], grid])
    values = [_ratio(E, A, w) for w in omegas]
    trace = list(zip(omegas.tolist(), values))

    best_idx = min(range(len(omegas)), key=lambda i: (values[i], abs(omegas[i])))
    lo = omegas[max(best_idx - 1, 0)]
    hi = omegas[min(best_idx + 1, len(omegas) - 1)]
    best_omega, best_value = _golden_refine(
        E, A, float(lo), float(hi), float(omegas[best_idx]), values[best_idx],
        refine_rel_width,
    )
    trace.append((best_omega, best_value))

    limit_value = float(np.linalg.svd(E, compute_uv=False)[-1])
    if limit_value < best_value:
        triple = smallest_singular_triple(E)
        return StabilityRadiusResult(
            rho=limit_value, omega_star=math.inf, triple=triple, grid_trace=trace
        )
    triple = smallest_singular_triple(A - 1j * best_omega * E)
    return StabilityRadiusResult(
        rho=best_value, omega_star=best_omega, triple=triple, grid_trace=trace
    )


def _golden_refine(E, A, lo, hi, seed_omega, seed_value, rel_width):
    """Golden-section minimization of the frequency ratio on [lo, hi]."""
    best_omega, best_value = seed_omega, seed_value
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _ratio(E, A, c)
    fd = _ratio(E, A, d)
    width_tol = rel_width * max(1.0, abs(seed_omega))
    for _ in range(200):
        if fc < best_value or (fc == best_value and abs(c) < abs(best_omega)):
            best_omega, best_value = c, fc
        if fd < best_value or (fd == best_value and abs(d) < abs(best_omega)):
            best_omega, best_value = d, fd
        if abs(b - a) <= width_tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _ratio(E, A, c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _ratio(E, A, d)
    return best_omega, best_value


def destabilizing_perturbation(
    res: StabilityRadiusResult,
) -> tuple[np.ndarray, np.ndarray]:
    """Minimal rank-one (Delta_E, Delta_A) placing an eigenvalue at i*omega_star.

    Delta_A = -sigma u v^H / (1 + w^2) and Delta_E = -i w sigma u v^H / (1 + w^2)
    for the smallest singular triple at the minimizing frequency, so that
    (A + Delta_A) - i w (E + Delta_E) annihilates v.  The pair has Frobenius
    norm sigma / sqrt(1 + w^2) = rho.
    """
    if res.triple is None:
        raise ValueError("no singular triple available (rho = 0 early return)")
    if not math.isfinite(res.omega_star):
        raise InfiniteFrequencyError(
            "minimizing frequency is infinite; rank-one destabilizer undefined"
        )
    w = res.omega_star
    sigma = res.triple.sigma
    outer = np.outer(res.triple.u, res.triple.v.conj())
    denom = 1.0 + w * w
    delta_a = -sigma * outer / denom
    delta_e = -1j * w * sigma * outer / denom
    return delta_e, delta_a


@dataclass(frozen=True)
class KroneckerSigmaReport:
    """sigma_min of K1, K2 against the sqrt(2) * rho upper bound."""

    sigma_min_1: float
    sigma_min_2: float
    rho: float
    ratio_1: float
    ratio_2: float
    bound_holds: bool


def kronecker_sigma_estimate(E, A, rho_result: StabilityRadiusResult) -> KroneckerSigmaReport:
    """Check sigma_min(K_i(E, A)) <= sqrt(2) * rho(E, A) * (1 + 1e-8)."""
    from .restore import build_K  # deferred: restore depends on pencil/systems

    pair = build_K(E, A)
    bound = math.sqrt(2.0) * rho_result.rho * (1.0 + 1e-8)
    denom = math.sqrt(2.0) * rho_result.rho
    ratio_1 = pair.sigma_min_1 / denom if denom > 0 else math.inf
    ratio_2 = pair.sigma_min_2 / denom if denom > 0 else math.inf
    return KroneckerSigmaReport(
        sigma_min_1=pair.sigma_min_1,
        sigma_min_2=pair.sigma_min_2,
        rho=rho_result.rho,
        ratio_1=ratio_1,
        ratio_2=ratio_2,
        bound_holds=bool(pair.sigma_min_1 <= bound and pair.sigma_min_2 <= bound),
    )
