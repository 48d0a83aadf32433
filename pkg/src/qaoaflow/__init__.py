"""QAOA and recursive-QAOA engine with a diagonal-cost statevector simulator."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .ansatz import (
    AnsatzSpec,
    MixerSpec,
    PerLayerAngles,
    VariationalParams,
    expand_params,
    expansion_matrix,
    init_params,
    param_count,
)
from .errors import (
    ConfigError,
    DomainError,
    InputError,
    InternalError,
    QAOAFlowError,
    SizeLimitError,
    UnsupportedTermError,
    WorkflowError,
)
from .optimizers import (
    OptimizationLog,
    OptimizerConfig,
    grad_finite_difference,
    grad_parameter_shift,
    grad_spsa,
    optimize,
)
from .problems import (
    IsingProblem,
    SpinAssignment,
    brute_force_solve,
    maxcut_to_ising,
    random_ising,
)
from .rqaoa import (
    EliminationRecord,
    RQAOAConfig,
    RQAOAResult,
    RQAOAWorkflow,
    compute_correlations,
    reconstruct_solution,
    reduce_problem,
    run_rqaoa,
    select_eliminations,
)
from .simulator import (
    BackendConfig,
    DiagonalCost,
    MeasurementOutcomes,
    StateVector,
    VectorBackend,
    apply_cost_layer,
    apply_mixer_layer,
    expectation_exact,
    expectation_from_samples,
    precompute_diagonal,
    prepare_initial_state,
    run_circuit,
    sample,
)
from .workflows import (
    QAOAResult,
    QAOAWorkflow,
    landscape_scan,
    load_run_config,
    lowest_cost_bitstring,
    run_qaoa,
    top_k_bitstrings,
)

__version__ = "0.1.0"
