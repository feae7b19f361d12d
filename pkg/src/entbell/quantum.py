"""Noisy entangled qudit pairs and their measurement outcome statistics.

The state family is a visibility-weighted mixture of a partially entangled
pure state with bipartite white noise.  Outcome statistics for a pair of
local settings are the diagonal of the rotated density matrix in the path
mode basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import PhaseSettings, conjugate_by_local_unitaries, reck_unitary

CLIP_TOL = 1e-12
CORRUPTION_TOL = 1e-9
NORMALIZATION_TOL = 1e-10


class NumericalCorruptionError(RuntimeError):
    """A computed probability table is too negative to be rounding noise."""


@dataclass(frozen=True)
class NoisyStateParams:
    """Parameters of the noisy two-qudit state.

    ``beta`` weights the third Schmidt coefficient (beta = 1 is maximally
    entangled, beta = 0 is a two-dimensional maximally entangled state
    embedded in the qutrit pair); ``visibility`` is the mixing weight of the
    pure state against white noise.
    """

    beta: float = 1.0
    visibility: float = 1.0
    dim: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if self.dim not in (2, 3):
            raise ValueError(f"supported local dimensions are 2 and 3, got {self.dim}")

    def schmidt_coefficients(self) -> np.ndarray:
        """Normalized Schmidt coefficients of the pure part of the state."""
        c = np.array([1.0, 1.0, self.beta]) if self.dim == 3 else np.array([1.0, 1.0])
        return c / math.sqrt(float(c @ c))


@dataclass(frozen=True)
class JointDistribution:
    """Nonnegative d_A x d_B outcome probability table summing to one."""

    table: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2:
            raise ValueError(f"joint table must be 2-D, got shape {t.shape}")
        if t.min() < -CLIP_TOL:
            raise ValueError(f"negative probability {t.min()} in joint table")
        t = np.where(t < 0.0, 0.0, t)
        total = t.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"joint table sums to {total}, expected 1")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def rows(self) -> int:
        return self.table.shape[0]

    @property
    def cols(self) -> int:
        return self.table.shape[1]

    def marginal_a(self) -> np.ndarray:
        return self.table.sum(axis=1)

    def marginal_b(self) -> np.ndarray:
        return self.table.sum(axis=0)


def make_state(params: NoisyStateParams) -> np.ndarray:
    """Density matrix V |psi><psi| + (1 - V)/d^2 * I on the d*d product space.

    |psi> has Schmidt coefficients (1, 1, beta) (normalized) across the path
    modes of the two parties; white noise means the maximally mixed state of
    the full bipartite space, so its weight is 1/d^2 per outcome pair.
    """
    d = params.dim
    coeffs = params.schmidt_coefficients()
    psi = np.zeros(d * d, dtype=np.complex128)
    for k in range(d):
        psi[k * d + k] = coeffs[k]
    rho = params.visibility * np.outer(psi, psi.conj())
    rho += (1.0 - params.visibility) / (d * d) * np.eye(d * d)
    return rho


def joint_distribution(
    rho: np.ndarray, settings_a: PhaseSettings, settings_b: PhaseSettings
) -> JointDistribution:
    """Outcome probability table for measuring ``rho`` with the two settings.

    The state is conjugated by the local unitaries of the settings and the
    diagonal is read out in the path mode basis.  Diagonal entries that are
    negative by no more than rounding noise are clipped to zero and the table
    is renormalized; anything more negative raises
    :class:`NumericalCorruptionError`.
    """
    da, db = settings_a.dim, settings_b.dim
    if rho.shape != (da * db, da * db):
        raise ValueError(
            f"state dimension {rho.shape} does not match settings dims {da}x{db}"
        )
    u_a = reck_unitary(settings_a)
    u_b = reck_unitary(settings_b)
    rotated = conjugate_by_local_unitaries(rho, u_a, u_b)
    p = np.real(np.diag(rotated)).copy()
    if p.min() < -CORRUPTION_TOL:
        raise NumericalCorruptionError(
            f"probability {p.min()} below the corruption threshold -{CORRUPTION_TOL}"
        )
    p = np.where(p < 0.0, 0.0, p)
    p /= p.sum()
    return JointDistribution(table=p.reshape(da, db))


def marginal(joint: JointDistribution, party: str) -> np.ndarray:
    """Single-party outcome probabilities: row sums for A, column sums for B."""
    if party == "A":
        return joint.marginal_a()
    if party == "B":
        return joint.marginal_b()
    raise ValueError(f"party must be 'A' or 'B', got {party!r}")
