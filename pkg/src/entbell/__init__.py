"""Entropic quadrangle Bell tests for noisy qutrit pairs.

Builds the noisy entangled state family, parametrizes local measurements by
beam-splitter meshes, evaluates distance-based quadrangle Bell inequalities
under Shannon and Tsallis entropies, and searches measurement phases for
maximal violations and critical visibilities.
"""

__version__ = "0.1.0"

from .entropy import (
    DistanceKind,
    EntropyKind,
    covariance_distance,
    entropic_distance,
    entropy,
    mutual_information,
    renyi,
    shannon,
    tsallis,
)
from .inequality import (
    QuadrangleReport,
    QuadrangleSettings,
    evaluate_chsh_covariance,
    evaluate_quadrangle,
)
from .linalg import (
    PhaseSettings,
    conjugate_by_local_unitaries,
    mach_zehnder_matrix,
    reck_pair_order,
    reck_unitary,
    tensor_product,
)
from .quantum import (
    JointDistribution,
    NoisyStateParams,
    NumericalCorruptionError,
    joint_distribution,
    make_state,
    marginal,
)
from .search import (
    CriticalVisibilityResult,
    MetricAuditRow,
    MonotonicityError,
    OptimizationResult,
    OptimizerConfig,
    SweepRow,
    TriangleCounterexample,
    critical_visibility,
    metric_audit,
    minimize_violation,
    renyi_triangle_counterexample,
    sweep_beta,
    sweep_q,
    triangle_counterexample,
)

__all__ = [
    "__version__",
    "DistanceKind",
    "EntropyKind",
    "covariance_distance",
    "entropic_distance",
    "entropy",
    "mutual_information",
    "renyi",
    "shannon",
    "tsallis",
    "QuadrangleReport",
    "QuadrangleSettings",
    "evaluate_chsh_covariance",
    "evaluate_quadrangle",
    "PhaseSettings",
    "conjugate_by_local_unitaries",
    "mach_zehnder_matrix",
    "reck_pair_order",
    "reck_unitary",
    "tensor_product",
    "JointDistribution",
    "NoisyStateParams",
    "NumericalCorruptionError",
    "joint_distribution",
    "make_state",
    "marginal",
    "CriticalVisibilityResult",
    "MetricAuditRow",
    "MonotonicityError",
    "OptimizationResult",
    "OptimizerConfig",
    "SweepRow",
    "TriangleCounterexample",
    "critical_visibility",
    "metric_audit",
    "minimize_violation",
    "renyi_triangle_counterexample",
    "sweep_beta",
    "sweep_q",
    "triangle_counterexample",
]
