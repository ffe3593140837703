"""phasecart: quantum phase diagrams of finite matter-radiation systems.

Exact truncated diagonalization, coherent-state and symmetry-adapted (SAS)
variational surfaces, separatrix detection and transition-order
classification, level reduction to 2-level subsystems, and
fidelity-controlled reduced bases for n-level atoms coupled to l field modes.
"""

from .config import (
    CONFIG_LEVELS,
    CONFIG_TRANSITIONS,
    ConfigurationError,
    DimensionalParams,
    InvalidParameterError,
    Mode,
    ModelConfig,
    from_dimensional,
    parse_config_text,
    read_config_file,
    two_level,
)
from .basis import BasisIndex, enumerate_basis, excitation_weights, occupations
from .operators import (
    BasisMismatchError,
    SparseOperator,
    build_hamiltonian,
    constants_of_motion,
    hamiltonian_terms,
    number_operator,
    parity_operator,
    parity_projector,
    population_operator,
    sector_blocks,
    transition_operator,
)
from .solver import (
    DENSE_LIMIT,
    EigenResult,
    SolverError,
    StateVector,
    TruncationError,
    block_ground_energy,
    block_ground_state,
    converge_cutoff,
    expectation,
    fidelity,
    fluctuation,
    ground_state,
    lowest_eigenpairs,
    susceptibility,
)
from .coherent import (
    CoherentParams,
    CriticalPoint,
    CutoffError,
    OptimizationError,
    XiSeparatrix,
    coherent_energy,
    coherent_state,
    critical_coupling_2level,
    critical_points_2level,
    energy_surface_2level,
    minimize_coherent,
    minimize_surface,
    triple_point,
    xi_separatrix,
)
from .sas import (
    DegenerateProjectionError,
    SasMinimum,
    SasParams,
    coherent_overlap,
    minimize_number_projected,
    minimize_sas,
    number_projected_state,
    sas_energy,
    sas_energy_2level,
    sas_overlap,
    sas_state,
)
from .scan import (
    GridAxis,
    PathError,
    PhaseDiagram,
    Separatrix,
    classify_order,
    detect_separatrix,
    label_regions,
    scan,
    write_csv,
)
from .reduction import (
    ReductionNode,
    TwoLevelSubsystem,
    compose_diagram,
    reduce_once,
    reduce_tree,
    tree_csv,
    tree_text,
    two_level_subsystems,
)
from .reduced_basis import (
    E10,
    E15,
    ErrorSurface,
    OrderRangeError,
    ReducedBasis,
    build_reduced_basis,
    dimension_report,
    error_surface,
    max_order,
    photon_cutoffs,
)
from .analysis import (
    BracketError,
    PowerLawFit,
    QUANTUM_EXPONENT,
    ScalingSeries,
    fit_power_law,
    mu_critical_vs_N,
    write_fit_report,
)

__version__ = "0.1.0"
