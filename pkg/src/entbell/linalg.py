"""Small dense complex linear algebra and the beam-splitter mesh parametrization.

Any d-dimensional local measurement basis is encoded by a triangular mesh of
two-mode Mach-Zehnder blocks T(p, q) followed by a layer of single-mode phase
shifts.  The mesh acts on path modes labelled 1..d; block (p, q) with p > q
mixes modes p and q and carries two angles (phi, omega).  Matrices are plain
``numpy`` complex128 arrays throughout; all dimensions in this package are
tiny (at most 9x9), so dense storage is used everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

UNITARITY_TOL = 1e-12


def fold_angle(angle: float) -> float:
    """Fold an angle into the canonical range [0, 2*pi)."""
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {angle!r}")
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    return a if a < TWO_PI else 0.0


def reck_pair_order(dim: int) -> list[tuple[int, int]]:
    """Mode pairs (p, q), p > q, in the fixed mesh product order.

    The mesh multiplies blocks as T(d, d-1) * T(d, d-2) * ... * T(2, 1); this
    returns the (p, q) labels in exactly that sequence.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    return [(p, q) for p in range(dim, 1, -1) for q in range(p - 1, 0, -1)]


@dataclass(frozen=True)
class PhaseSettings:
    """All phase-shift angles defining one party's measurement setting.

    ``mz_params`` holds one (p, q, phi, omega) tuple per mode pair, in the
    fixed product order of :func:`reck_pair_order`; ``alphas`` holds the d
    output phase shifts.  Angles are folded into [0, 2*pi) on construction.
    """

    dim: int
    mz_params: tuple[tuple[int, int, float, float], ...]
    alphas: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        expected = reck_pair_order(self.dim)
        got = [(p, q) for p, q, _, _ in self.mz_params]
        if got != expected:
            raise ValueError(
                f"mz_params pairs {got} must follow the fixed product order {expected}"
            )
        alphas = self.alphas if self.alphas else (0.0,) * self.dim
        if len(alphas) != self.dim:
            raise ValueError(f"need {self.dim} alpha phases, got {len(alphas)}")
        folded = tuple(
            (p, q, fold_angle(phi), fold_angle(omega))
            for p, q, phi, omega in self.mz_params
        )
        object.__setattr__(self, "mz_params", folded)
        object.__setattr__(self, "alphas", tuple(fold_angle(a) for a in alphas))

    @classmethod
    def from_pairs(
        cls,
        dim: int,
        angles: "list[tuple[float, float]] | tuple[tuple[float, float], ...]",
        alphas: "tuple[float, ...] | None" = None,
    ) -> "PhaseSettings":
        """Build settings from (phi, omega) pairs given in canonical order."""
        order = reck_pair_order(dim)
        if len(angles) != len(order):
            raise ValueError(f"need {len(order)} angle pairs for dim={dim}, got {len(angles)}")
        params = tuple(
            (p, q, float(phi), float(omega))
            for (p, q), (phi, omega) in zip(order, angles)
        )
        return cls(dim=dim, mz_params=params, alphas=tuple(alphas) if alphas else ())

    @classmethod
    def diagonal(cls, dim: int) -> "PhaseSettings":
        """The setting with every omega = pi/2: measurement in the input basis."""
        return cls.from_pairs(dim, [(0.0, math.pi / 2)] * (dim * (dim - 1) // 2))

    def angle_vector(self) -> np.ndarray:
        """Flat (phi, omega) angles in canonical pair order, alphas excluded."""
        out = np.empty(2 * len(self.mz_params))
        for k, (_, _, phi, omega) in enumerate(self.mz_params):
            out[2 * k] = phi
            out[2 * k + 1] = omega
        return out


def mach_zehnder_matrix(dim: int, p: int, q: int, phi: float, omega: float) -> np.ndarray:
    """The d x d two-mode block T(p, q) acting on path modes p and q (1-based).

    Elements: T[p,p] = e^{i phi} sin(omega), T[q,q] = -sin(omega),
    T[p,q] = e^{i phi} cos(omega), T[q,p] = cos(omega); every other mode
    passes through unchanged.  The result is unitary for any angles.
    """
    if not (1 <= q < p <= dim):
        raise ValueError(f"require 1 <= q < p <= dim, got p={p}, q={q}, dim={dim}")
    t = np.eye(dim, dtype=np.complex128)
    s, c = math.sin(omega), math.cos(omega)
    e = complex(math.cos(phi), math.sin(phi))
    pi, qi = p - 1, q - 1
    t[pi, pi] = e * s
    t[qi, qi] = -s
    t[pi, qi] = e * c
    t[qi, pi] = c
    return t


def reck_unitary(settings: PhaseSettings) -> np.ndarray:
    """Local unitary U = (T(d,d-1) * ... * T(2,1) * D)^-1 for the given angles.

    D = diag(e^{i alpha_i}).  The product of unitaries is unitary, so the
    inverse is taken as the conjugate transpose.
    """
    d = settings.dim
    prod = np.eye(d, dtype=np.complex128)
    for p, q, phi, omega in settings.mz_params:
        prod = prod @ mach_zehnder_matrix(d, p, q, phi, omega)
    prod = prod * np.exp(1j * np.asarray(settings.alphas))[np.newaxis, :]
    return prod.conj().T


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; block (i, j) of the result equals a[i, j] * b."""
    return np.kron(a, b)


def conjugate_by_local_unitaries(
    rho: np.ndarray, u_a: np.ndarray, u_b: np.ndarray
) -> np.ndarray:
    """Return (U_A (x) U_B) rho (U_A (x) U_B)^dagger.

    ``rho`` must be a density matrix on the product space of the two local
    unitaries; Hermiticity, trace and spectrum are preserved.
    """
    da, db = u_a.shape[0], u_b.shape[0]
    if rho.shape != (da * db, da * db):
        raise ValueError(
            f"state dimension {rho.shape} does not match local dims {da}x{db}"
        )
    u = tensor_product(u_a, u_b)
    return u @ rho @ u.conj().T


def max_abs(a: np.ndarray) -> float:
    """Largest entry magnitude; the norm used for unitarity checks."""
    return float(np.abs(a).max())


def unitarity_defect(u: np.ndarray) -> float:
    """max-norm of U U^dagger - I."""
    return max_abs(u @ u.conj().T - np.eye(u.shape[0]))
