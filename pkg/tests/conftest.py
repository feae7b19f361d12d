import numpy as np
import pytest

from entbell import _kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the search kernels once so no test pays JIT latency."""
    _kernels.warm_up()


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random full-rank density matrix (Wishart normalized to unit trace)."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_settings(rng: np.random.Generator, dim: int):
    from entbell import PhaseSettings

    npairs = dim * (dim - 1) // 2
    pairs = [tuple(rng.uniform(0.0, 2.0 * np.pi, 2)) for _ in range(npairs)]
    alphas = tuple(rng.uniform(0.0, 2.0 * np.pi, dim))
    return PhaseSettings.from_pairs(dim, pairs, alphas=alphas)
