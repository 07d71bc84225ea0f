import numpy as np
import pytest


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def with_nonnegative_first_row(u: np.ndarray) -> np.ndarray:
    first = u[0, :]
    return u * (np.abs(first) / first)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (z + z.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
