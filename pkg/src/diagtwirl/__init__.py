"""diagtwirl: exact second-moment superoperators of random diagonal-unitary
ensembles, their closed-form repeated compositions, finite circuit and
disordered-Hamiltonian realisations, and design-quality certificates."""

from .ensembles import (
    DEFAULT_J_STAR,
    EnsembleSpec,
    HamiltonianSegment,
    ZLayerAssignment,
    circuit_unitary,
    ell_for_epsilon,
    ensemble_moment_exact,
    ensemble_moment_mc,
    enumerate_z_layers,
    gate_count,
    hamiltonian_moment_exact,
    hamiltonian_segment,
    hamiltonian_unitary,
    layer_unitary,
    sample_z_layer,
)
from .linalg import (
    CanonicalOps,
    Dim,
    PairBasisIndex,
    SizeError,
    canonical_ops,
    pair_basis,
    partial_trace,
    tensor_product,
    trace_norm,
    walsh_hadamard,
)
from .metrics import (
    ConvergenceRow,
    DesignErrorBracket,
    convergence_table,
    frame_potential,
    lower_certificate,
    lower_exact_value,
    proof_bracket,
    theorem1_bounds,
)
from .moments import (
    FCoefficientTable,
    InternalConsistencyError,
    MomentMap,
    RecurrenceCoefficients,
    c_ell_map,
    choi,
    compose,
    f_coeff,
    g_haar,
    g_x_exact,
    g_z_exact,
    identity_map,
    moment_matrix,
    p_ell,
    q_ell,
    r_map,
    r_pow_closed,
    recurrence_coeffs,
)

__version__ = "0.1.0"
