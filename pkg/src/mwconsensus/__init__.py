"""Privacy-preserving average consensus on matrix-weighted networks.

A deterministic simulation engine plus a verification lab: agents with
lifted vector states reach the exact average of their initial states
through periodic rank-2 positive semi-definite edge weights, while
honest-but-curious agents learn at most two linear functionals of any
neighbor's state per step.  The package simulates the protocol, certifies
its convergence spectrally, and verifies the constructive
indistinguishability argument behind its privacy guarantee.
"""

from .adversary import (
    AlternativeWorld,
    InferenceResult,
    ObservationLog,
    PrivacyReport,
    capture_run,
    construct_alternative_world,
    infer_isolated,
    recover_functionals,
    verify_indistinguishability,
)
from .analysis import (
    ErrorTrace,
    MuCheck,
    NullspaceUnionCheck,
    SuiteReport,
    TransitionProduct,
    check_lambda_bound,
    check_mu_criterion,
    check_nullspace_union,
    characterize_H,
    consensus_deflated_mu,
    error_trace,
    mu_contraction_check,
    mu_equivalence_suite,
    nullspace_union_suite,
    period_nullspace_suite,
    step_size_bound_suite,
    transition,
)
from .config import RunConfig, build_setup, load_config, parse_config
from .engine import (
    Message,
    NetworkState,
    RunSetup,
    ScheduledWeights,
    StaticWeights,
    Trajectory,
    average,
    lift,
    make_message,
    real_block,
    run,
    run_provider,
    step,
    virtual_block,
    write_trajectory_csv,
)
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    assemble_laplacian,
    consensus_subspace,
    is_psd,
    null_space,
    projector,
    rank_of,
    subspace_equal,
    subspace_intersection,
    sym_eigen,
)
from .topology import Topology, has_positive_spanning_tree
from .weights import (
    OrthoVectorSet,
    WeightSchedule,
    build_ortho_set,
    edge_weight,
    laplacian_at,
    rho,
    sample_coefficients,
    union_weight,
)

__version__ = "0.1.0"
