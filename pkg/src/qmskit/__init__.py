"""Analysis, dilation, and Monte Carlo validation of quantum Markov
semigroups on finite-dimensional Hilbert spaces.

The package certifies dephasing structure, computes the obstruction to a
self-adjoint coupling representation, constructs classical (Wiener and
Poisson driven) dilations where they exist, and validates everything
numerically against the exact semigroup and against trajectory averages.
"""

from ._backend import backend_name
from .dephasing import (
    CouplingMatrixF,
    DephasingReport,
    ProjectorFamily,
    block_eigenvalues,
    center_coupling_columns,
    coupling_matrix,
    family_commutant_check,
    find_stable_basis,
    is_dephasing_family,
    is_invariant_projector,
    is_maximally_dephasing,
    max_rank_check,
    obstruction,
    self_adjoint_representation,
)
from .dilation import (
    CircleFit,
    ClassicalModel,
    ClassicalityKind,
    ClassicalityVerdict,
    DiffusionChannel,
    JumpChannel,
    LineFit,
    admits_diffusive_dilation,
    classical_to_generator,
    classical_to_slh,
    jump_dephasing_coefficients,
    km_rank1_classical_test,
    obstruction_from_phases,
    verify_classical_model,
)
from .errors import (
    DimensionMismatch,
    InvalidFamily,
    InvalidModel,
    InvalidState,
    NotApplicable,
    NotCommuting,
    NotDiagonal,
    NotHermitian,
    NotInvariant,
    NotMaximallyDephasing,
    NotNormal,
    NotProjector,
    NotSimultaneouslyDiagonalizable,
    Obstructed,
    QmsError,
)
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    herm_eig,
    matrix_exp,
    null_space,
    numerical_rank,
    simultaneous_diagonalize,
    unvec,
    vec,
)
from .model import (
    DampingOperator,
    EuclideanTransform,
    GeneratorSpec,
    SlhTriple,
    ValidationReport,
    center,
    complex_damping,
    concatenation,
    euclidean_transform,
    is_minimal,
    reduce_to_minimal,
    require_density,
    series_product,
    validate,
)
from .semigroup import (
    HEISENBERG,
    SCHRODINGER,
    StationaryReport,
    Superoperator,
    apply_dual,
    apply_generator,
    choi_matrix,
    dissipator,
    evolve,
    is_bistochastic,
    purity_trajectory,
    stationary_states,
    to_superoperator,
)
from .trajectories import (
    AUTO,
    EXACT_COMMUTING,
    TROTTERIZED,
    ComparisonReport,
    EmpiricalChannel,
    SimulationConfig,
    compare_to_semigroup,
    ensemble_average,
    sample_trajectory,
    trajectory_rng,
    write_comparison_csv,
)

__version__ = "0.1.0"
