"""gausslab: constrained pure Gaussian state ensembles.

Symplectic primitives, marginal-constraint machinery, closed-form Renyi and
von Neumann entropies, replica-space determinant identities, a truncated
Fock-space oracle, and Monte Carlo samplers for the constrained ensemble.
"""

__version__ = "0.1.0"

from .constraints import (
    ConstraintSpec,
    HawkingModel,
    build_constraint_matrix,
    constraint_residual,
    hat_projection,
    hawking_constraints,
    hawking_mode_count,
    load_spec,
    save_spec,
    scenario_one,
)
from .entropy import (
    EntropyReport,
    entropy_mixed,
    entropy_report,
    entropy_single,
    finite_n_purity,
    page_slope,
    renyi_trace_mixed,
    renyi_trace_single,
)
from .replica import (
    ReplicaMatrices,
    build_replica_matrices,
    delta_j,
    final_identity_check,
    j_geometric_identity_check,
    master_determinant,
    prefactor_integral,
    prefactor_integral_mc,
    saddle_point_solution,
    saddle_residuals,
    toeplitz_cofactor,
)
from .sampling import (
    ObservableStat,
    SampleBatch,
    SamplerConfig,
    ambient_observables,
    estimate_observables,
    feasible_start,
    mode_pair_correlation,
    sample_ambient,
    sample_manifold,
    sample_values,
    save_batch,
    write_stats_csv,
)
from .symplectic import (
    build_omega,
    covariance_from_symplectic,
    is_pure,
    is_symplectic,
    random_symplectic,
    random_symplectic_orthogonal,
    restrict,
    state_hamiltonian,
    symplectic_spectrum,
    two_mode_squeezer,
)

__all__ = [name for name in dir() if not name.startswith("_")]
