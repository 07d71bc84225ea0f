"""Defect operators of contractions and the isometry/projection checks built on them.

For a contraction ``T`` (n x k, ``||T|| <= 1``) the defect operators are
``D_T = (I_k - T*T)^(1/2)`` and ``D_T* = (I_n - TT*)^(1/2)``. When ``T`` is an
isometry ``C``, ``D_T`` vanishes, ``D_T*`` is the projection onto the
orthogonal complement of the columns, and ``I - D_T* = sum c_i c_i*``.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.config import Config
from src.utils.errors import ContractionError, FlagFrameError
from src.utils.helpers import VerificationReport, unitarity_residual
from src.utils.linalg import ComplexMatrix, as_matrix, frobenius, hermitian_eig, identity, psd_sqrt

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Contraction:
    matrix: ComplexMatrix
    operator_norm: float = field(init=False)

    def __post_init__(self):
        t = as_matrix(self.matrix)
        object.__setattr__(self, "matrix", t)
        gram = t.conj().T @ t
        top = float(hermitian_eig(gram).eigenvalues[0])
        norm = math.sqrt(max(top, 0.0))
        if norm > 1.0 + Config.CONTRACTION_NORM_SLACK:
            raise ContractionError(f"Operator norm {norm:.15g} exceeds 1; not a contraction.")
        object.__setattr__(self, "operator_norm", norm)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.matrix.shape


def defect_operators(t: Contraction) -> Tuple[ComplexMatrix, ComplexMatrix]:
    m = t.matrix
    n, k = m.shape
    d_t = psd_sqrt(identity(k) - m.conj().T @ m)
    d_t_star = psd_sqrt(identity(n) - m @ m.conj().T)
    return d_t, d_t_star


def intertwining_residual(t: Contraction) -> Tuple[float, float]:
    m = t.matrix
    d_t, d_t_star = defect_operators(t)
    left = frobenius(m @ d_t - d_t_star @ m)
    right = frobenius(m.conj().T @ d_t_star - d_t @ m.conj().T)
    return left, right


def verify_main_theorem(c, tol: Optional[float] = None, completion=None) -> VerificationReport:
    """Check that the columns of ``c`` are orthonormal and span the range of ``I - D_T*``.

    Every failure is recorded in the report instead of raised. When the
    completing unitary ``A`` is passed, the report also carries
    ``||A diag(I_k, 0) A* - C C*||``.
    """
    tol = Config.VERIFY_TOL if tol is None else tol
    report = VerificationReport(suite="main-theorem")
    try:
        c = as_matrix(c)
    except FlagFrameError as e:
        report.fail("isometry", e)
        return report

    n, k = c.shape
    bound = tol * n
    report.metrics.update({"n": n, "k": k})
    report.add("isometry", unitarity_residual(c), bound, "||C*C - I_k||_F")

    try:
        d_star = psd_sqrt(identity(n) - c @ c.conj().T)
    except FlagFrameError as e:
        logger.debug("Defect operator unavailable: %s", e)
        for name in ("kernel", "eigenvector", "outer-product", "rank"):
            report.fail(name, e)
        return report

    complement = identity(n) - d_star
    report.add("kernel", frobenius(d_star @ c), bound, "||D_T* C||_F")
    report.add("eigenvector", frobenius(complement @ c - c), bound, "||(I - D_T*) C - C||_F")
    report.add("outer-product", frobenius(complement - c @ c.conj().T), bound, "||(I - D_T*) - sum c_i c_i*||_F")

    try:
        eigenvalues = hermitian_eig(d_star).eigenvalues
        rank = int(np.sum(eigenvalues > 0.5))
        report.metrics["rank_defect"] = rank
        report.add("rank", abs(rank - (n - k)), 0.0, f"rank D_T* = {rank}, expected {n - k}")
    except FlagFrameError as e:
        report.fail("rank", e)

    if completion is not None:
        try:
            a = as_matrix(completion)
            selector = np.zeros((n, n), dtype=np.complex128)
            selector[:k, :k] = np.eye(k)
            report.add("completion", frobenius(a @ selector @ a.conj().T - c @ c.conj().T), bound,
                       "||A diag(I_k, 0) A* - C C*||_F")
        except (FlagFrameError, ValueError) as e:
            report.fail("completion", e)

    return report
