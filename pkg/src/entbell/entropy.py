"""Entropies and entropy-based distance measures between observables.

Three entropy families are supported: Shannon (natural logarithm), Tsallis
with parameter q >= 1 (the regime in which the distances below are genuine
metrics), and Renyi with q > 0, q != 1 (admitted only to demonstrate that
its distance combinations fail the triangle inequality).  Four distances are
derived from the joint distribution of two jointly measured observables,
plus the covariance distance for binary +-1 outcomes.

All functions also accept batches of distributions stacked along leading
axes; the scalar API is a thin wrapper over the batched arithmetic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .quantum import JointDistribution

PROB_FLOOR = 1e-15
SNAP_TOL = 1e-12
Q_ONE_TOL = 1e-9


@dataclass(frozen=True)
class EntropyKind:
    """An entropy functional: family name plus deformation parameter q."""

    family: str
    q: float = 1.0

    def __post_init__(self) -> None:
        if self.family == "shannon":
            pass
        elif self.family == "tsallis":
            if self.q < 1.0:
                raise ValueError(f"tsallis requires q >= 1, got q={self.q}")
        elif self.family == "renyi":
            if self.q <= 0.0 or abs(self.q - 1.0) < Q_ONE_TOL:
                raise ValueError(f"renyi requires q > 0 and q != 1, got q={self.q}")
        else:
            raise ValueError(f"unknown entropy family {self.family!r}")

    @property
    def effectively_shannon(self) -> bool:
        """True when the q -> 1 limit applies and the Shannon formula is used."""
        return self.family == "shannon" or (
            self.family == "tsallis" and abs(self.q - 1.0) < Q_ONE_TOL
        )

    def label(self) -> str:
        if self.family == "shannon":
            return "shannon"
        return f"{self.family}(q={self.q:g})"


def shannon() -> EntropyKind:
    return EntropyKind("shannon")


def tsallis(q: float) -> EntropyKind:
    return EntropyKind("tsallis", float(q))


def renyi(q: float) -> EntropyKind:
    return EntropyKind("renyi", float(q))


class DistanceKind(enum.Enum):
    """Distance measures applicable to a joint outcome distribution."""

    D1 = "d1"
    D1_NORM = "d1n"
    D2 = "d2"
    D2_NORM = "d2n"
    COVARIANCE = "cov"

    @property
    def normalized(self) -> bool:
        return self in (DistanceKind.D1_NORM, DistanceKind.D2_NORM)


ENTROPIC_DISTANCES = (
    DistanceKind.D1,
    DistanceKind.D1_NORM,
    DistanceKind.D2,
    DistanceKind.D2_NORM,
)


def _as_prob_array(dist: "np.ndarray | JointDistribution") -> np.ndarray:
    if isinstance(dist, JointDistribution):
        return dist.table
    p = np.asarray(dist, dtype=float)
    if p.min() < -SNAP_TOL:
        raise ValueError(f"negative probability {p.min()} in distribution")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"distribution sums to {total}, expected 1")
    return np.where(p < 0.0, 0.0, p)


def batch_entropy(p: np.ndarray, kind: EntropyKind) -> np.ndarray:
    """Entropy of distributions stacked along the last axis.

    Probabilities below 1e-15 contribute exactly zero to every family.
    """
    masked = np.where(p >= PROB_FLOOR, p, 1.0)
    if kind.effectively_shannon:
        h = -(np.where(p >= PROB_FLOOR, p, 0.0) * np.log(masked)).sum(axis=-1)
    else:
        power = np.where(p >= PROB_FLOOR, masked ** kind.q, 0.0).sum(axis=-1)
        if kind.family == "tsallis":
            h = (1.0 - power) / (kind.q - 1.0)
        else:
            h = np.log(power) / (1.0 - kind.q)
    return np.where((h < 0.0) & (h >= -SNAP_TOL), 0.0, h)


def entropy(dist: "np.ndarray | JointDistribution", kind: EntropyKind) -> float:
    """Entropy of a probability vector or joint table (tables are flattened)."""
    p = _as_prob_array(dist)
    return float(batch_entropy(p.reshape(-1), kind))


def mutual_information(joint: JointDistribution, kind: EntropyKind) -> float:
    """H(X) + H(Y) - H(X, Y), all three terms under the same entropy kind.

    For Tsallis q > 1 this subtractive form is nonzero even for independent
    variables; that is the definition under which the distance measures below
    are metrics, so no q-deformed alternative is offered.
    """
    t = joint.table
    hx = batch_entropy(t.sum(axis=1), kind)
    hy = batch_entropy(t.sum(axis=0), kind)
    hxy = batch_entropy(t.reshape(-1), kind)
    return float(hx + hy - hxy)


def batch_entropic_distance(
    tables: np.ndarray, dkind: DistanceKind, ekind: EntropyKind
) -> np.ndarray:
    """The selected entropic distance for a (..., dx, dy) stack of tables."""
    if dkind is DistanceKind.COVARIANCE:
        raise ValueError("covariance distance is not an entropic distance")
    hx = batch_entropy(tables.sum(axis=-1), ekind)
    hy = batch_entropy(tables.sum(axis=-2), ekind)
    hxy = batch_entropy(tables.reshape(tables.shape[:-2] + (-1,)), ekind)
    mi = hx + hy - hxy
    if dkind is DistanceKind.D1:
        dist = hxy - mi
    elif dkind is DistanceKind.D2:
        dist = np.maximum(hx, hy) - mi
    else:
        denom = hxy if dkind is DistanceKind.D1_NORM else np.maximum(hx, hy)
        # 0/0 means both variables are deterministic, i.e. equal in the
        # metric sense: the distance is 0.
        safe = np.where(denom == 0.0, 1.0, denom)
        dist = np.where(denom == 0.0, 0.0, 1.0 - mi / safe)
    dist = np.where((dist < 0.0) & (dist >= -SNAP_TOL), 0.0, dist)
    if dkind.normalized:
        dist = np.where((dist > 1.0) & (dist <= 1.0 + SNAP_TOL), 1.0, dist)
    return dist


def entropic_distance(
    joint: JointDistribution, dkind: DistanceKind, ekind: EntropyKind
) -> float:
    """Distance between the two observables of one joint distribution."""
    return float(batch_entropic_distance(joint.table, dkind, ekind))


def covariance_distance(joint: JointDistribution) -> float:
    """1 - <XY> for binary observables labelled +1 (index 0) and -1 (index 1)."""
    t = joint.table
    if t.shape != (2, 2):
        raise ValueError(f"covariance distance needs a 2x2 table, got {t.shape}")
    correlator = t[0, 0] - t[0, 1] - t[1, 0] + t[1, 1]
    return float(1.0 - correlator)
