"""Quadrangle Bell tests built from distance measures.

Four measurement settings A, A' (Alice) and B, B' (Bob) define four jointly
measurable cross-party pairs.  Chaining two triangle inequalities gives

    d(A, B') <= d(A, B) + d(B, A') + d(A', B')

for any distance measure that is a metric on jointly measurable observables,
under the local-realistic assumption that distances exist for all pairs.  A
negative value of R - L (right side minus left side) is a Bell violation.
Plugging in the covariance distance for qubit settings turns the same chain
into the CHSH test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .entropy import DistanceKind, EntropyKind, covariance_distance, entropic_distance
from .linalg import PhaseSettings
from .quantum import JointDistribution, joint_distribution

VIOLATION_EPS = 1e-9


@dataclass(frozen=True)
class QuadrangleSettings:
    """The four measurement settings entering one quadrangle evaluation."""

    a: PhaseSettings
    a_prime: PhaseSettings
    b: PhaseSettings
    b_prime: PhaseSettings

    def __post_init__(self) -> None:
        dims = {s.dim for s in (self.a, self.a_prime, self.b, self.b_prime)}
        if len(dims) != 1:
            raise ValueError(f"all four settings must share one dimension, got {dims}")

    @property
    def dim(self) -> int:
        return self.a.dim

    def as_tuple(self) -> tuple[PhaseSettings, PhaseSettings, PhaseSettings, PhaseSettings]:
        return (self.a, self.a_prime, self.b, self.b_prime)


@dataclass(frozen=True)
class QuadrangleReport:
    """L, R and the four individual distances of one quadrangle evaluation.

    ``violation`` is R - L; a value below -1e-9 counts as a Bell violation.
    """

    d_ab: float
    d_ba_prime: float
    d_a_prime_b_prime: float
    d_ab_prime: float

    @property
    def lhs(self) -> float:
        return self.d_ab_prime

    @property
    def rhs(self) -> float:
        return self.d_ab + self.d_ba_prime + self.d_a_prime_b_prime

    @property
    def violation(self) -> float:
        return self.rhs - self.lhs

    @property
    def violated(self) -> bool:
        return self.violation < -VIOLATION_EPS

    def distances(self) -> tuple[float, float, float, float]:
        return (self.d_ab, self.d_ba_prime, self.d_a_prime_b_prime, self.d_ab_prime)


def _cross_pair_joints(
    rho: np.ndarray, settings: QuadrangleSettings
) -> tuple[JointDistribution, JointDistribution, JointDistribution, JointDistribution]:
    a, ap, b, bp = settings.as_tuple()
    return (
        joint_distribution(rho, a, b),
        joint_distribution(rho, ap, b),
        joint_distribution(rho, ap, bp),
        joint_distribution(rho, a, bp),
    )


def evaluate_quadrangle(
    rho: np.ndarray,
    settings: QuadrangleSettings,
    dkind: DistanceKind,
    ekind: EntropyKind,
) -> QuadrangleReport:
    """Evaluate the quadrangle for one state, four settings and one distance.

    The three right-hand distances are d(A,B), d(B,A'), d(A',B') and the left
    side is d(A,B'); all four pairs are cross-party and therefore jointly
    measurable.  The covariance distance is admitted only for qubit settings.
    """
    d = settings.dim
    if dkind is DistanceKind.COVARIANCE:
        if d != 2:
            raise ValueError("covariance distance requires qubit settings (dim 2)")

        def dist(joint: JointDistribution) -> float:
            return covariance_distance(joint)

    else:

        def dist(joint: JointDistribution) -> float:
            return entropic_distance(joint, dkind, ekind)

    j_ab, j_apb, j_apbp, j_abp = _cross_pair_joints(rho, settings)
    return QuadrangleReport(
        d_ab=dist(j_ab),
        d_ba_prime=dist(j_apb),
        d_a_prime_b_prime=dist(j_apbp),
        d_ab_prime=dist(j_abp),
    )


def evaluate_chsh_covariance(
    rho: np.ndarray, settings: QuadrangleSettings
) -> QuadrangleReport:
    """Covariance-distance quadrangle on a two-qubit state: the CHSH test.

    Expanding the four distances shows violation = 2 - CHSH value, so a
    negative violation is exactly CHSH > 2.
    """
    if settings.dim != 2:
        raise ValueError(f"CHSH evaluation needs dim-2 settings, got {settings.dim}")
    if rho.shape != (4, 4):
        raise ValueError(f"CHSH evaluation needs a 4x4 state, got {rho.shape}")
    return evaluate_quadrangle(rho, settings, DistanceKind.COVARIANCE, EntropyKind("shannon"))
