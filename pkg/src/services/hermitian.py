"""Eigenvalue cascades and assembly of Hermitian operators from a spectrum and a frame.

A cascade of m values spends m - 1 angles: ``total * (cos^2 t1,
sin^2 t1 cos^2 t2, ..., prod sin^2)``, and its terms always sum to ``total``.
Indefinite spectra glue a positive and a negative cascade together.

For the traceless and indefinite kinds the angle ranges are the ones that
keep the trace exact (n - 2 angles). Read literally, the closed forms this
construction comes from list one more angle per cascade and give
``|h| cosh^2`` to the first eigenvalue with no angle factor; that reading
over-counts parameters and is not implemented.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from src.config import Config
from src.services.manifolds import GrassmannPoint, grassmann_projection
from src.services.parameterization import HALF_PI, ParamSet, SchemeTag, compose
from src.utils.errors import ParameterRangeError, SchemeError, SpectrumError
from src.utils.linalg import ComplexMatrix, as_matrix, frobenius, hermitian_residual, identity, require_square

logger = logging.getLogger(__name__)


class SpectrumKind(str, Enum):
    POSITIVE_TRACE = "positive-trace"
    TRACELESS = "traceless"
    INDEFINITE_TRACE = "indefinite-trace"
    DEGENERATE_K = "degenerate-k"
    TWO_LEVEL = "two-level"
    TWO_LEVEL_INDEFINITE = "two-level-indefinite"


SIMPLE_KINDS = (SpectrumKind.POSITIVE_TRACE, SpectrumKind.TRACELESS, SpectrumKind.INDEFINITE_TRACE)
TWO_LEVEL_KINDS = (SpectrumKind.TWO_LEVEL, SpectrumKind.TWO_LEVEL_INDEFINITE)


def expected_angle_count(kind: SpectrumKind, n: int, k: Optional[int] = None) -> int:
    if kind == SpectrumKind.POSITIVE_TRACE:
        return n - 1
    if kind in (SpectrumKind.TRACELESS, SpectrumKind.INDEFINITE_TRACE):
        return n - 2
    if kind == SpectrumKind.DEGENERATE_K:
        if k is None:
            raise SpectrumError("degenerate-k spectra need the multiplicity k.")
        return n - k
    if kind == SpectrumKind.TWO_LEVEL:
        return 1
    return 0


@dataclass(frozen=True)
class SpectrumSpec:
    n: int
    kind: SpectrumKind
    h: float = 1.0
    p: Optional[int] = None
    k: Optional[int] = None
    angles: Tuple[float, ...] = field(default_factory=tuple)
    theta_hyp: float = 0.0
    normalize: bool = False

    def __post_init__(self):
        try:
            kind = SpectrumKind(self.kind)
        except ValueError:
            raise SpectrumError(f"Unknown spectrum kind: {self.kind!r}.")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        n = self.n
        if not isinstance(n, int) or n < 1:
            raise SpectrumError(f"Dimension must be a positive integer, got {n!r}.")

        if kind in (SpectrumKind.TRACELESS, SpectrumKind.INDEFINITE_TRACE):
            if n < 2 or self.p is None or not 1 <= self.p <= n - 1:
                raise SpectrumError(f"{kind.value} needs 1 <= p <= n-1, got p={self.p!r}, n={n}.")
        if kind == SpectrumKind.DEGENERATE_K and (self.k is None or not 1 <= self.k <= n):
            raise SpectrumError(f"degenerate-k needs 1 <= k <= n, got k={self.k!r}.")
        if kind in TWO_LEVEL_KINDS and (self.k is None or not 1 <= self.k <= n - 1):
            raise SpectrumError(f"{kind.value} needs 1 <= k <= n-1, got k={self.k!r}, n={n}.")

        if kind in (SpectrumKind.INDEFINITE_TRACE, SpectrumKind.TWO_LEVEL_INDEFINITE):
            if self.h == 0:
                raise SpectrumError(f"{kind.value} needs a nonzero h.")
            if not math.isfinite(self.theta_hyp) or self.theta_hyp < 0:
                raise SpectrumError(f"Hyperbolic parameter must be nonnegative, got {self.theta_hyp!r}.")
        elif self.h <= 0:
            raise SpectrumError(f"{kind.value} needs h > 0, got {self.h!r}.")

        expected = expected_angle_count(kind, n, self.k)
        if len(self.angles) != expected:
            raise SpectrumError(f"{kind.value} with n={n} takes {expected} angles, got {len(self.angles)}.")
        _check_angles(self.angles)

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        if self.kind == SpectrumKind.DEGENERATE_K:
            return (self.k,) + (1,) * (self.n - self.k)
        if self.kind in TWO_LEVEL_KINDS:
            return (self.k, self.n - self.k)
        return (1,) * self.n


@dataclass(frozen=True)
class HermitianOperator:
    matrix: ComplexMatrix
    spectrum: SpectrumSpec
    frame_params: ParamSet
    eigenvalues: Tuple[float, ...] = ()

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


def _check_angles(angles: Sequence[float]) -> None:
    for a in angles:
        if not math.isfinite(a) or a < -Config.ANGLE_TOL or a > HALF_PI + Config.ANGLE_TOL:
            raise ParameterRangeError(f"Cascade angle {a!r} lies outside [0, pi/2].")


def cascade(total: float, angles: Sequence[float]) -> np.ndarray:
    _check_angles(angles)
    values = np.empty(len(angles) + 1, dtype=np.float64)
    prefix = float(total)
    for i, theta in enumerate(angles):
        c2 = math.cos(theta) ** 2
        values[i] = prefix * c2
        prefix *= 1.0 - c2
    values[-1] = prefix
    return values


def eigenvalues_positive(h: float, angles: Sequence[float]) -> np.ndarray:
    if h <= 0:
        raise SpectrumError(f"Positive-trace spectra need h > 0, got {h}.")
    return cascade(h, angles)


def eigenvalues_traceless(h: float, p: int, angles: Sequence[float]) -> np.ndarray:
    n = len(angles) + 2
    if h <= 0:
        raise SpectrumError(f"Traceless spectra need a positive scale h, got {h}.")
    if not 1 <= p <= n - 1:
        raise SpectrumError(f"Positive-eigenvalue count p={p} must lie in [1, {n - 1}].")
    return np.concatenate((cascade(h, angles[:p - 1]), cascade(-h, angles[p - 1:])))


def eigenvalues_indefinite(h: float, p: int, theta_hyp: float, angles: Sequence[float]) -> np.ndarray:
    n = len(angles) + 2
    if h == 0:
        raise SpectrumError("Indefinite spectra need a nonzero trace h.")
    if not 1 <= p <= n - 1:
        raise SpectrumError(f"Positive-eigenvalue count p={p} must lie in [1, {n - 1}].")
    if theta_hyp < 0:
        raise SpectrumError(f"Hyperbolic parameter must be nonnegative, got {theta_hyp}.")
    ch2, sh2 = math.cosh(theta_hyp) ** 2, math.sinh(theta_hyp) ** 2
    # h < 0 swaps the cosh/sinh roles so that the trace stays h
    positive_total, negative_total = (abs(h) * ch2, abs(h) * sh2) if h > 0 else (abs(h) * sh2, abs(h) * ch2)
    return np.concatenate((cascade(positive_total, angles[:p - 1]), cascade(-negative_total, angles[p - 1:])))


def _rescale(values: np.ndarray, h: float) -> np.ndarray:
    total = float(np.sum(values))
    if total == 0:
        logger.warning("Cannot normalize a spectrum with zero trace; leaving it unchanged")
        return values
    return values * (h / total)


def spectrum_eigenvalues(spec: SpectrumSpec) -> np.ndarray:
    """Eigenvalue list of a spectrum, each repeated by its multiplicity, in cascade order."""
    kind = spec.kind
    if kind == SpectrumKind.POSITIVE_TRACE:
        values = eigenvalues_positive(spec.h, spec.angles)
    elif kind == SpectrumKind.TRACELESS:
        values = eigenvalues_traceless(spec.h, spec.p, spec.angles)
    elif kind == SpectrumKind.INDEFINITE_TRACE:
        values = eigenvalues_indefinite(spec.h, spec.p, spec.theta_hyp, spec.angles)
    elif kind == SpectrumKind.DEGENERATE_K:
        profile = cascade(spec.h, spec.angles)
        values = np.concatenate((np.full(spec.k, profile[0]), profile[1:]))
    elif kind == SpectrumKind.TWO_LEVEL:
        c2 = math.cos(spec.angles[0]) ** 2
        values = np.concatenate((np.full(spec.k, spec.h * c2), np.full(spec.n - spec.k, spec.h * (1.0 - c2))))
    else:
        ch2, sh2 = math.cosh(spec.theta_hyp) ** 2, math.sinh(spec.theta_hyp) ** 2
        top, bottom = (spec.h * ch2, -spec.h * sh2) if spec.h > 0 else (abs(spec.h) * sh2, -abs(spec.h) * ch2)
        values = np.concatenate((np.full(spec.k, top), np.full(spec.n - spec.k, bottom)))

    if len(values) != spec.n:
        raise SpectrumError(f"Spectrum produced {len(values)} eigenvalues for n={spec.n}.")
    if spec.normalize and kind in (SpectrumKind.POSITIVE_TRACE, SpectrumKind.DEGENERATE_K, SpectrumKind.TWO_LEVEL):
        values = _rescale(values, spec.h)
    return values


def _required_scheme(spec: SpectrumSpec) -> Tuple[SchemeTag, ...]:
    if spec.kind in SIMPLE_KINDS:
        return SchemeTag.FLAG, SchemeTag.SPECIAL_ORTHOGONAL
    if spec.kind == SpectrumKind.DEGENERATE_K:
        return (SchemeTag.STIEFEL_REDUCED,)
    return (SchemeTag.GRASSMANN,)


def assemble(spec: SpectrumSpec, frame: ParamSet) -> HermitianOperator:
    allowed = _required_scheme(spec)
    scheme = frame.scheme
    if scheme.tag not in allowed:
        raise SchemeError(
            f"A {spec.kind.value} spectrum needs a {' or '.join(t.value for t in allowed)} frame, got {scheme.tag.value}."
        )
    if scheme.n != spec.n:
        raise SpectrumError(f"Frame dimension {scheme.n} does not match spectrum dimension {spec.n}.")

    values = spectrum_eigenvalues(spec)
    if spec.kind in TWO_LEVEL_KINDS:
        point = GrassmannPoint(spec.n, spec.k, frame)
        projection = grassmann_projection(point)
        matrix = values[0] * projection + values[-1] * (identity(spec.n) - projection)
    else:
        if spec.kind == SpectrumKind.DEGENERATE_K and scheme.k != spec.k:
            raise SchemeError(f"Degenerate eigenvalue of multiplicity {spec.k} needs a Stiefel frame with k={spec.k}, got k={scheme.k}.")
        u = compose(frame)
        matrix = (u * values) @ u.conj().T

    matrix = 0.5 * (matrix + matrix.conj().T)
    logger.debug("Assembled %s operator, n=%d, trace=%.6g", spec.kind.value, spec.n, float(np.trace(matrix).real))
    return HermitianOperator(matrix=matrix, spectrum=spec, frame_params=frame, eigenvalues=tuple(float(x) for x in values))


def induced_quadratic_coefficients(lambda_1: float, lambda_2: float) -> Tuple[float, float]:
    return 0.5 * (lambda_1 + lambda_2), 0.5 * (lambda_1 - lambda_2)


def quadratic_residual(rho, p_coef: float, q_coef: float) -> float:
    """Frobenius norm of rho^2 - 2 p rho + (p^2 - q^2) I; zero exactly on two-level operators."""
    rho = as_matrix(rho)
    n = require_square(rho, "operator")
    residual = hermitian_residual(rho)
    if residual > Config.HERMITIAN_TOL * max(1.0, frobenius(rho)):
        raise SpectrumError(f"Operator is not Hermitian: ||rho - rho*||_F = {residual:.3e}.")
    constant = p_coef * p_coef - q_coef * q_coef
    if constant < -Config.DEGENERACY_TOL * max(1.0, p_coef * p_coef, q_coef * q_coef):
        raise SpectrumError(f"Need p^2 - q^2 >= 0, got {constant:.6g}.")
    return frobenius(rho @ rho - 2.0 * p_coef * rho + constant * identity(n))


def random_spectrum(
    kind: SpectrumKind,
    n: int,
    rng: np.random.Generator,
    h: float = 1.0,
    p: Optional[int] = None,
    k: Optional[int] = None,
    normalize: bool = False,
    theta_hyp: Optional[float] = None,
) -> SpectrumSpec:
    kind = SpectrumKind(kind)
    angles = rng.uniform(0.0, HALF_PI, expected_angle_count(kind, n, k))
    if theta_hyp is None:
        theta_hyp = float(rng.uniform(0.0, 1.0)) if kind in (SpectrumKind.INDEFINITE_TRACE, SpectrumKind.TWO_LEVEL_INDEFINITE) else 0.0
    return SpectrumSpec(n=n, kind=kind, h=h, p=p, k=k, angles=tuple(angles), theta_hyp=theta_hyp, normalize=normalize)
