"""Exact transport certificates for ergodicity properties of finite Markov kernels."""
from .errors import InputError, SemcertError, SingularSolve, SolverFailure
from .kernel import ErgodicDecomposition, Kernel, apply_function, invariant_measures, push_measure, step
from .metric_space import (
    CostMatrix,
    Distribution,
    MetricSpace,
    capped_lipschitz_cost,
    metric_cost,
    mismatch_cost,
    separating_family,
    validate_space,
)
from .transport import (
    Coupling,
    TransportResult,
    glue,
    kantorovich_dual_value,
    max_closeness,
    maximal_coupling,
    tv_distance,
    wasserstein,
)

__version__ = "0.1.0"
