"""Dense complex matrix arithmetic on numpy arrays.

Every matrix is carried as a 2-D ``numpy.complex128`` array. The Hermitian
eigensolver is a cyclic complex Jacobi iteration so that eigenvalue ordering
and convergence behaviour are fully determined by this module.
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import numpy.typing as npt

from src.config import Config
from src.utils.errors import (
    ConvergenceError,
    DimensionMismatchError,
    NonFiniteError,
    NotHermitianError,
    NotPositiveSemidefiniteError,
)

logger = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending and the unitary whose columns are the eigenvectors."""

    eigenvalues: npt.NDArray[np.float64]
    eigenvectors: ComplexMatrix
    sweeps: int = 0

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a: Any) -> ComplexMatrix:
    """Coerce ``a`` into a finite 2-D complex128 array (1-D input becomes a column)."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionMismatchError(f"Expected a non-empty 2-D matrix, got shape {m.shape}.")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("Matrix contains NaN or Inf entries.")
    return m


def require_square(a: ComplexMatrix, what: str = "matrix") -> int:
    rows, cols = a.shape
    if rows != cols:
        raise DimensionMismatchError(f"The {what} must be square, got {rows}x{cols}.")
    return rows


def identity(n: int) -> ComplexMatrix:
    return np.eye(n, dtype=np.complex128)


def frobenius(a: ComplexMatrix) -> float:
    return float(np.linalg.norm(a, "fro"))


def matmul(a: Any, b: Any) -> ComplexMatrix:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(f"Cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}.")
    return a @ b


def adjoint(a: Any) -> ComplexMatrix:
    return as_matrix(a).conj().T.copy()


def hermitian_residual(a: ComplexMatrix) -> float:
    return frobenius(a - a.conj().T)


def _offdiag_norm(h: ComplexMatrix) -> float:
    return float(np.linalg.norm(h - np.diag(np.diag(h))))


def _rotate(h: ComplexMatrix, v: ComplexMatrix, p: int, q: int) -> None:
    # Zero h[p, q] in place with the unitary diag(1, e^{-i phi}) times a real rotation.
    hpq = h[p, q]
    mod = abs(hpq)
    phase = hpq / mod
    theta = (h[q, q].real - h[p, p].real) / (2.0 * mod)
    sign = 1.0 if theta >= 0 else -1.0
    t = sign / (abs(theta) + np.hypot(theta, 1.0))
    c = 1.0 / np.hypot(t, 1.0)
    s = t * c
    jb = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=np.complex128)

    idx = [p, q]
    h[:, idx] = h[:, idx] @ jb
    h[idx, :] = jb.conj().T @ h[idx, :]
    h[p, q] = 0.0
    h[q, p] = 0.0
    h[p, p] = h[p, p].real
    h[q, q] = h[q, q].real
    v[:, idx] = v[:, idx] @ jb


def _descending_order(eigenvalues: np.ndarray, vecs: ComplexMatrix, gap: float) -> np.ndarray:
    """Descending order; eigenvalues closer than `gap` form one level, ordered by arg of the first component."""
    by_value = np.argsort(-eigenvalues, kind="stable")
    levels = np.zeros(eigenvalues.size, dtype=np.int64)
    for pos in range(1, by_value.size):
        step = eigenvalues[by_value[pos - 1]] - eigenvalues[by_value[pos]] > gap
        levels[by_value[pos]] = levels[by_value[pos - 1]] + int(step)
    return np.lexsort((np.angle(vecs[0, :]), levels))


def hermitian_eig(h: Any, tol: Optional[float] = None) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix by cyclic Jacobi sweeps.

    The Hermitian check is ``||h - h*||_F <= tol * max(1, ||h||_F)``; the
    iteration then runs on the exactly Hermitian part ``(h + h*) / 2``.
    Eigenvalues come back descending. Values within
    ``DEGENERACY_TOL * max(1, ||h||_F)`` of each other count as one level and are
    ordered by the argument of each eigenvector's first component.
    """
    tol = Config.HERMITIAN_TOL if tol is None else tol
    h = as_matrix(h)
    n = require_square(h, "Hermitian input")
    scale = frobenius(h)

    residual = hermitian_residual(h)
    if residual > tol * max(1.0, scale):
        raise NotHermitianError(f"Matrix is not Hermitian: ||H - H*||_F = {residual:.3e} exceeds {tol:.1e}.")

    work = 0.5 * (h + h.conj().T)
    vecs = identity(n)
    threshold = Config.JACOBI_OFFDIAG_REL * scale
    skip = threshold / max(n, 1)

    sweeps = 0
    while _offdiag_norm(work) > threshold:
        if sweeps >= Config.JACOBI_MAX_SWEEPS:
            raise ConvergenceError(
                f"Jacobi iteration did not converge in {Config.JACOBI_MAX_SWEEPS} sweeps "
                f"(off-diagonal norm {_offdiag_norm(work):.3e}, target {threshold:.3e})."
            )
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(work[p, q]) > skip:
                    _rotate(work, vecs, p, q)
        sweeps += 1

    eigenvalues = np.real(np.diag(work)).copy()
    order = _descending_order(eigenvalues, vecs, Config.DEGENERACY_TOL * max(1.0, scale))
    logger.debug("Jacobi converged after %d sweeps for n=%d", sweeps, n)
    return EigenDecomposition(eigenvalues=eigenvalues[order], eigenvectors=vecs[:, order], sweeps=sweeps)


def psd_sqrt(h: Any, tol: Optional[float] = None) -> ComplexMatrix:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues with ``|lambda| <= PSD_CLAMP_REL * max(1, ||h||_F)`` are set to
    zero; negative eigenvalues down to ``-max(tol, PSD_CLAMP_REL * ||h||_F)`` are
    clamped, anything below is rejected.
    """
    tol = Config.HERMITIAN_TOL if tol is None else tol
    decomposition = hermitian_eig(h, tol)
    scale = frobenius(as_matrix(h))
    lam = decomposition.eigenvalues.copy()

    floor = max(tol, Config.PSD_CLAMP_REL * scale)
    if lam.size and lam[-1] < -floor:
        raise NotPositiveSemidefiniteError(
            f"Matrix is not positive semidefinite: smallest eigenvalue {lam[-1]:.3e} is below {-floor:.1e}."
        )
    snap = Config.PSD_CLAMP_REL * max(1.0, scale)
    clamped = np.abs(lam) <= snap
    if np.any(lam[~clamped] < 0):
        logger.debug("Clamping %d slightly negative eigenvalues to zero", int(np.sum(lam[~clamped] < 0)))
    lam[clamped | (lam < 0)] = 0.0

    v = decomposition.eigenvectors
    root = (v * np.sqrt(lam)) @ v.conj().T
    return 0.5 * (root + root.conj().T)
