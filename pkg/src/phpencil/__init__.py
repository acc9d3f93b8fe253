"""Even matrix pencils of port-Hamiltonian descriptor systems.

Builds the even pencils used in passivity analysis, perturbs them within the
admissible block structure, restores the exact pencil structure by a
congruence transformation near the identity, and computes stability radii
with convergence certificates and backward errors.
"""

from .linalg import (
    Inertia,
    NumericalError,
    PolarFactors,
    SingularMatrixError,
    SingularPencilError,
    SingularTriple,
    frobenius_list,
    herm_skew_split,
    inertia,
    kron,
    polar_factor,
    smallest_singular_triple,
    solve_dense,
    unvec,
    vec,
)
from .pencil import (
    EvenPencil,
    IndexOneReport,
    PencilDiagnostics,
    StructuredPerturbation,
    assemble_perturbation,
    build_even_pencil,
    build_ph_even_pencil,
    congruence_basis,
    enforce_feedthrough,
    hamiltonian_matrix,
    index_one_matrix,
    inertia_checks,
    pencil_eigenvalues,
    perturbed_pencil,
    random_structured_perturbation,
)
from .restore import (
    ConvergenceCertificate,
    ConvergenceError,
    DescriptorBackwardError,
    IterationState,
    KroneckerPair,
    PhBackwardError,
    RestorationError,
    RestorationResult,
    assemble_Z,
    build_K,
    convergence_certificate,
    descriptor_errors_to_ph,
    full_restoration,
    iterate_restoration,
    polar_restore,
    residual_delta,
    solve_linear_step,
)
from .stability import (
    InfiniteFrequencyError,
    KroneckerSigmaReport,
    StabilityRadiusResult,
    destabilizing_perturbation,
    kronecker_sigma_estimate,
    stability_radius,
)
from .systems import (
    DescriptorSystem,
    PHSystem,
    ValidationReport,
    Violation,
    controllability_observability_check,
    descriptor_to_ph,
    ph_to_descriptor,
    popov_eval,
    random_strictly_passive,
    transfer_eval,
    validate_ph,
)

__version__ = "0.1.0"
