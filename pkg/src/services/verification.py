import logging
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from src.config import Config
from src.services.contractions import verify_main_theorem
from src.services.hermitian import induced_quadratic_coefficients, quadratic_residual
from src.services.parameterization import SchemeTag, compose, factorize
from src.utils.errors import FlagFrameError, SchemeError
from src.utils.helpers import (
    VerificationReport,
    count_near,
    distinct_levels,
    idempotence_residual,
    multiset_deviation,
    unitarity_residual,
)
from src.utils.linalg import ComplexMatrix, as_matrix, frobenius, hermitian_eig, hermitian_residual

logger = logging.getLogger(__name__)


def _require_square(report: VerificationReport, m: ComplexMatrix) -> bool:
    rows, cols = m.shape
    if rows != cols:
        report.add("square", abs(rows - cols), 0.0, f"{rows}x{cols}")
        return False
    return True


def verify_unitary(m: ComplexMatrix, tol: float, **_: Any) -> VerificationReport:
    report = VerificationReport(suite="unitary")
    rows, cols = m.shape
    report.metrics.update({"rows": rows, "cols": cols})
    report.add("square", abs(rows - cols), 0.0, f"{rows}x{cols}")
    report.add("unitarity", unitarity_residual(m), tol * rows, "||U*U - I||_F")
    return report


def verify_isometry(m: ComplexMatrix, tol: float, **_: Any) -> VerificationReport:
    report = VerificationReport(suite="isometry")
    n, k = m.shape
    report.metrics.update({"n": n, "k": k})
    report.add("isometry", unitarity_residual(m), tol * n, "||C*C - I_k||_F")
    return report


def verify_projection(m: ComplexMatrix, tol: float, k: Optional[int] = None, **_: Any) -> VerificationReport:
    report = VerificationReport(suite="projection")
    if not _require_square(report, m):
        return report
    n = m.shape[0]
    bound = tol * n
    trace = float(np.trace(m).real)
    expected_rank = int(round(trace)) if k is None else k
    report.metrics.update({"n": n, "trace": trace, "k": expected_rank})

    report.add("hermitian", hermitian_residual(m), bound, "||P - P*||_F")
    report.add("idempotence", idempotence_residual(m), bound, "||P^2 - P||_F")
    report.add("trace", abs(trace - expected_rank), bound, f"|Tr P - {expected_rank}|")
    try:
        eigenvalues = hermitian_eig(m).eigenvalues
        ones = count_near(eigenvalues, 1.0, bound)
        report.metrics["unit_eigenvalues"] = ones
        report.add("rank", abs(ones - expected_rank), 0.0, f"{ones} eigenvalues at 1, expected {expected_rank}")
    except FlagFrameError as e:
        report.fail("rank", e)
    return report


def verify_quadratic(
    m: ComplexMatrix,
    tol: float,
    p_coef: Optional[float] = None,
    q_coef: Optional[float] = None,
    **_: Any,
) -> VerificationReport:
    report = VerificationReport(suite="quadratic")
    if not _require_square(report, m):
        return report
    n = m.shape[0]
    try:
        if p_coef is None or q_coef is None:
            eigenvalues = hermitian_eig(m).eigenvalues
            levels = distinct_levels(eigenvalues, tol * n * max(1.0, float(np.max(np.abs(eigenvalues)))))
            report.metrics["levels"] = len(levels)
            p_coef, q_coef = induced_quadratic_coefficients(levels[0], levels[-1])
        report.metrics.update({"p": p_coef, "q": q_coef})
        report.add("quadratic", quadratic_residual(m, p_coef, q_coef), tol * n * max(1.0, frobenius(m)),
                   "||rho^2 - 2p rho + (p^2 - q^2) I||_F")
    except FlagFrameError as e:
        report.fail("quadratic", e)
    return report


def verify_hermitian(
    m: ComplexMatrix,
    tol: float,
    eigenvalues: Optional[Sequence[float]] = None,
    **_: Any,
) -> VerificationReport:
    report = VerificationReport(suite="hermitian")
    if not _require_square(report, m):
        return report
    n = m.shape[0]
    scale = max(1.0, frobenius(m))
    report.metrics.update({"n": n, "trace": float(np.trace(m).real)})
    report.add("hermitian", hermitian_residual(m), tol * scale, "||H - H*||_F")
    try:
        decomposition = hermitian_eig(m)
        report.add("reconstruction", frobenius(m - decomposition.reconstruct()), tol * scale, "||H - V D V*||_F")
        report.metrics["min_eigenvalue"] = float(decomposition.eigenvalues[-1])
        if eigenvalues is not None:
            report.add("spectrum", multiset_deviation(decomposition.eigenvalues, eigenvalues),
                       tol * max(1.0, float(np.max(np.abs(eigenvalues)))), "max |lambda_i - expected_i|")
    except FlagFrameError as e:
        report.fail("reconstruction", e)
    return report


def verify_main(m: ComplexMatrix, tol: float, k: Optional[int] = None, **_: Any) -> VerificationReport:
    n, cols = m.shape
    if k is not None and cols == n and k < n:
        return verify_main_theorem(m[:, :k], tol, completion=m)
    return verify_main_theorem(m, tol)


def verify_round_trip(
    m: ComplexMatrix,
    tol: float,
    scheme: Optional[str] = None,
    k: Optional[int] = None,
    **_: Any,
) -> VerificationReport:
    report = VerificationReport(suite="round-trip")
    tag = SchemeTag(scheme or SchemeTag.FULL_UNITARY)
    stiefel = tag in (SchemeTag.STIEFEL_REDUCED, SchemeTag.STIEFEL_FULL)
    if not stiefel and not _require_square(report, m):
        return report
    if tag == SchemeTag.GRASSMANN:
        report.fail("round-trip", SchemeError("Grassmann points have no round trip through factorize."))
        return report
    n = m.shape[0]
    report.metrics["scheme"] = tag.value
    try:
        params = factorize(m, tag, k)
        cols = params.scheme.k if stiefel else m.shape[1]
        rebuilt = compose(params)[:, :cols]
        report.metrics["parameters"] = params.parameter_count
        report.add("round-trip", frobenius(rebuilt - m[:, :cols]), tol * n, "||compose(factorize(M)) - M||_F")
    except FlagFrameError as e:
        report.fail("round-trip", e)
    return report


SUITES: Dict[str, Callable[..., VerificationReport]] = {
    "unitary": verify_unitary,
    "projection": verify_projection,
    "isometry": verify_isometry,
    "quadratic": verify_quadratic,
    "main-theorem": verify_main,
    "hermitian": verify_hermitian,
    "round-trip": verify_round_trip,
}


def run_suite(name: str, matrix, tol: Optional[float] = None, **options: Any) -> VerificationReport:
    if name not in SUITES:
        raise SchemeError(f"Unknown verification suite: {name}. Available suites: {', '.join(SUITES)}")
    tol = Config.VERIFY_TOL if tol is None else tol
    m = as_matrix(matrix)
    logger.debug("Running %s suite on a %dx%d matrix", name, m.shape[0], m.shape[1])
    return SUITES[name](m, tol, **options)
