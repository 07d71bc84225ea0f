"""Ordered-product parameterization of unitary, flag and Stiefel matrices.

A unitary is written as a left-to-right product of embedded factors ``B_m``,
each generated by one complex unit vector in spherical coordinates. The
first column of ``B_m`` is the generating vector itself; column ``k + 1`` is
its derivative with respect to the k-th angle after the first ``k - 1``
angles are set to pi/2. Phases multiply whole rows.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.config import Config
from src.utils.errors import (
    DimensionMismatchError,
    FactorizationError,
    LayoutError,
    NotUnitaryError,
    ParameterRangeError,
    SchemeError,
)
from src.utils.helpers import unitarity_residual
from src.utils.linalg import ComplexMatrix, as_matrix, identity, require_square

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi


class Convention(str, Enum):
    FULL = "full"
    REDUCED_FIRST = "reduced-first"
    REDUCED_PI = "reduced-pi"


class SchemeTag(str, Enum):
    FULL_UNITARY = "full"
    FLAG = "flag"
    STIEFEL_REDUCED = "stiefel-reduced"
    STIEFEL_FULL = "stiefel-full"
    GRASSMANN = "grassmann"
    SPECIAL_ORTHOGONAL = "orthogonal"


def normalize_phase(phi: float) -> float:
    wrapped = math.fmod(float(phi), TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    return 0.0 if wrapped >= TWO_PI else wrapped


@dataclass(frozen=True)
class Scheme:
    tag: SchemeTag
    n: int
    k: Optional[int] = None

    def __post_init__(self):
        try:
            tag = SchemeTag(self.tag)
        except ValueError:
            raise SchemeError(f"Unknown scheme tag: {self.tag!r}.")
        object.__setattr__(self, "tag", tag)

        is_valid, message = Config.validate_dimensions(tag.value, self.n, self.k)
        if not is_valid:
            raise SchemeError(message)
        if tag in (SchemeTag.FULL_UNITARY, SchemeTag.FLAG, SchemeTag.SPECIAL_ORTHOGONAL):
            object.__setattr__(self, "k", None)
        elif tag == SchemeTag.GRASSMANN and self.k > self.n // 2:
            raise SchemeError(
                f"Grassmann scheme needs k <= n//2 (got k={self.k}, n={self.n}); "
                f"build k > n/2 through the complement path."
            )

    @property
    def label(self) -> str:
        return self.tag.value if self.k is None else f"{self.tag.value}(n={self.n}, k={self.k})"


@dataclass(frozen=True)
class SphericalVector:
    """Angles in [0, pi/2] and phases in [0, 2pi) describing a unit vector of C^dim.

    ``real`` marks the special orthogonal chart, which stores no phases; the
    leading sign of a ReducedPi vector is kept.
    """

    dim: int
    angles: Tuple[float, ...] = ()
    phases: Tuple[float, ...] = ()
    convention: Convention = Convention.FULL
    real: bool = False

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ParameterRangeError(f"Vector dimension must be a positive integer, got {self.dim!r}.")
        object.__setattr__(self, "convention", Convention(self.convention))

        angles = tuple(float(a) for a in self.angles)
        if len(angles) != self.dim - 1:
            raise LayoutError(f"A {self.dim}-vector needs {self.dim - 1} angles, got {len(angles)}.")
        clipped = []
        for a in angles:
            if not math.isfinite(a) or a < -Config.ANGLE_TOL or a > HALF_PI + Config.ANGLE_TOL:
                raise ParameterRangeError(f"Angle {a!r} lies outside [0, pi/2].")
            clipped.append(min(max(a, 0.0), HALF_PI))
        object.__setattr__(self, "angles", tuple(clipped))

        phases = tuple(float(p) for p in self.phases)
        expected = self.phase_count(self.dim, self.convention, self.real)
        if len(phases) != expected:
            raise LayoutError(
                f"A {self.dim}-vector with {self.convention.value} convention needs {expected} phases, got {len(phases)}."
            )
        if not all(math.isfinite(p) for p in phases):
            raise ParameterRangeError("Phases must be finite.")
        object.__setattr__(self, "phases", tuple(normalize_phase(p) for p in phases))

    @staticmethod
    def phase_count(dim: int, convention: Convention, real: bool = False) -> int:
        if real:
            return 0
        return dim if Convention(convention) == Convention.FULL else dim - 1

    @property
    def parameter_count(self) -> int:
        return len(self.angles) + len(self.phases)

    def phase_factors(self) -> np.ndarray:
        lead = -1.0 if self.convention == Convention.REDUCED_PI else 1.0
        if self.real:
            factors = np.ones(self.dim, dtype=np.complex128)
            factors[0] = lead
            return factors
        tail = np.exp(1j * np.asarray(self.phases, dtype=np.float64))
        if self.convention == Convention.FULL:
            return tail.astype(np.complex128)
        return np.concatenate(([lead], tail)).astype(np.complex128)


@dataclass(frozen=True)
class Embedding:
    style: str
    offset: int

    @classmethod
    def bottom_right(cls, k: int) -> "Embedding":
        return cls("bottom-right", k)

    @classmethod
    def centered(cls, k: int) -> "Embedding":
        return cls("centered", k)


@dataclass(frozen=True)
class FactorSlot:
    dim: int
    convention: Convention
    embedding: Embedding
    real: bool = False

    @property
    def parameter_count(self) -> int:
        return (self.dim - 1) + SphericalVector.phase_count(self.dim, self.convention, self.real)

    @property
    def is_closing(self) -> bool:
        return self.dim == 1 and self.convention == Convention.REDUCED_PI


@dataclass(frozen=True)
class ParamSet:
    scheme: Scheme
    vectors: Tuple[SphericalVector, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(self.vectors))
        layout = factor_layout(self.scheme)
        if len(layout) != len(self.vectors):
            raise LayoutError(
                f"Scheme {self.scheme.label} with n={self.scheme.n} has {len(layout)} factors, got {len(self.vectors)} vectors."
            )
        for i, (slot, v) in enumerate(zip(layout, self.vectors)):
            if v.dim != slot.dim or v.convention != slot.convention or v.real != slot.real:
                raise LayoutError(
                    f"Factor {i}: expected dim={slot.dim}, {slot.convention.value}, real={slot.real}; "
                    f"got dim={v.dim}, {v.convention.value}, real={v.real}."
                )

    @property
    def parameter_count(self) -> int:
        return sum(v.parameter_count for v in self.vectors)

    def flatten(self) -> List[float]:
        """Factor-major, angles before phases within a factor."""
        values: List[float] = []
        for v in self.vectors:
            values.extend(v.angles)
            values.extend(v.phases)
        return values

    @classmethod
    def from_flat(cls, scheme: Scheme, values: Sequence[float]) -> "ParamSet":
        layout = factor_layout(scheme)
        needed = sum(slot.parameter_count for slot in layout)
        if len(values) != needed:
            raise LayoutError(f"Scheme {scheme.label} needs {needed} parameters, got {len(values)}.")
        vectors, pos = [], 0
        for slot in layout:
            n_angles = slot.dim - 1
            n_phases = slot.parameter_count - n_angles
            angles = values[pos:pos + n_angles]
            phases = values[pos + n_angles:pos + n_angles + n_phases]
            pos += slot.parameter_count
            vectors.append(SphericalVector(slot.dim, tuple(angles), tuple(phases), slot.convention, slot.real))
        return cls(scheme, tuple(vectors))


def realize_vector(v: SphericalVector) -> ComplexMatrix:
    m = v.dim
    magnitudes = np.empty(m, dtype=np.float64)
    prefix = 1.0
    for j, theta in enumerate(v.angles):
        magnitudes[j] = prefix * math.cos(theta)
        prefix *= math.sin(theta)
    magnitudes[m - 1] = prefix
    return (v.phase_factors() * magnitudes).reshape(m, 1)


def _real_frame(angles: Sequence[float]) -> np.ndarray:
    m = len(angles) + 1
    sines = [math.sin(a) for a in angles]
    cosines = [math.cos(a) for a in angles]
    frame = np.zeros((m, m), dtype=np.float64)

    prefix = 1.0
    for j in range(m - 1):
        frame[j, 0] = prefix * cosines[j]
        prefix *= sines[j]
    frame[m - 1, 0] = prefix

    for a in range(m - 1):
        col = a + 1
        frame[a, col] = -sines[a]
        running = cosines[a]
        for j in range(a + 1, m - 1):
            frame[j, col] = running * cosines[j]
            running *= sines[j]
        frame[m - 1, col] = running
    return frame


def build_B(v: SphericalVector) -> ComplexMatrix:
    return v.phase_factors().reshape(-1, 1) * _real_frame(v.angles)


def embed_block(b: ComplexMatrix, n: int, style: Embedding) -> ComplexMatrix:
    b = as_matrix(b)
    m = require_square(b, "block")
    k = style.offset
    if style.style == "bottom-right":
        expected = n - k
    elif style.style == "centered":
        expected = n - 2 * k
    else:
        raise LayoutError(f"Unknown embedding style: {style.style!r}.")
    if k < 0 or m != expected:
        raise DimensionMismatchError(
            f"A {m}x{m} block does not fit {style.style} embedding with offset {k} in dimension {n}."
        )
    out = identity(n)
    out[k:k + m, k:k + m] = b
    return out


def closing_factor(n: int) -> ComplexMatrix:
    out = identity(n)
    out[n - 1, n - 1] = -1.0
    return out


def _flag_slots(n: int, count: int, real: bool) -> List[FactorSlot]:
    slots = [FactorSlot(n, Convention.REDUCED_FIRST, Embedding.bottom_right(0), real)]
    for j in range(1, count):
        slots.append(FactorSlot(n - j, Convention.REDUCED_PI, Embedding.bottom_right(j), real))
    if n >= 2 and count == n - 1:
        slots.append(FactorSlot(1, Convention.REDUCED_PI, Embedding.bottom_right(n - 1), real))
    return slots


def factor_layout(scheme: Scheme) -> List[FactorSlot]:
    n, tag = scheme.n, scheme.tag
    if tag == SchemeTag.FULL_UNITARY:
        return [FactorSlot(n - j, Convention.FULL, Embedding.bottom_right(j)) for j in range(n)]
    if tag == SchemeTag.STIEFEL_FULL:
        return [FactorSlot(n - j, Convention.FULL, Embedding.bottom_right(j)) for j in range(scheme.k)]
    if tag == SchemeTag.FLAG:
        return _flag_slots(n, max(n - 1, 1), real=False)
    if tag == SchemeTag.SPECIAL_ORTHOGONAL:
        return _flag_slots(n, max(n - 1, 1), real=True)
    if tag == SchemeTag.STIEFEL_REDUCED:
        return _flag_slots(n, max(min(scheme.k, n - 1), 1), real=False)
    if tag == SchemeTag.GRASSMANN:
        slots = [FactorSlot(n, Convention.REDUCED_FIRST, Embedding.bottom_right(0))]
        for j in range(1, scheme.k):
            slots.append(FactorSlot(n - 2 * j, Convention.REDUCED_PI, Embedding.centered(j)))
        return slots
    raise SchemeError(f"No factor layout for scheme {tag!r}.")


def param_count(scheme: Scheme) -> int:
    n, k, tag = scheme.n, scheme.k, scheme.tag
    if tag == SchemeTag.FULL_UNITARY:
        return n * n
    if tag == SchemeTag.FLAG:
        return n * (n - 1)
    if tag == SchemeTag.STIEFEL_REDUCED:
        return k * (2 * n - k - 1)
    if tag == SchemeTag.STIEFEL_FULL:
        return k * (2 * n - k)
    if tag == SchemeTag.GRASSMANN:
        return 2 * k * (n - k)
    return n * (n - 1) // 2


def factor_matrices(p: ParamSet) -> List[ComplexMatrix]:
    n = p.scheme.n
    return [
        closing_factor(n) if slot.is_closing else embed_block(build_B(v), n, slot.embedding)
        for slot, v in zip(factor_layout(p.scheme), p.vectors)
    ]


def compose(p: ParamSet) -> ComplexMatrix:
    result = identity(p.scheme.n)
    for factor in factor_matrices(p):
        result = result @ factor
    if p.scheme.tag == SchemeTag.SPECIAL_ORTHOGONAL:
        result = result.real.astype(np.complex128)
    return result


def zero_params(scheme: Scheme) -> ParamSet:
    return ParamSet.from_flat(scheme, [0.0] * param_count(scheme))


def random_params(scheme: Scheme, rng: np.random.Generator) -> ParamSet:
    """Angles uniform on [0, pi/2], phases uniform on [0, 2pi). Not Haar distributed."""
    vectors = []
    for slot in factor_layout(scheme):
        angles = rng.uniform(0.0, HALF_PI, slot.dim - 1)
        phases = rng.uniform(0.0, TWO_PI, SphericalVector.phase_count(slot.dim, slot.convention, slot.real))
        vectors.append(SphericalVector(slot.dim, tuple(angles), tuple(phases), slot.convention, slot.real))
    return ParamSet(scheme, tuple(vectors))


def _fit_vector(column: np.ndarray, slot: FactorSlot) -> SphericalVector:
    m = slot.dim
    tol = Config.DEGENERACY_TOL
    magnitudes = np.abs(column)
    angles = [0.0] * (m - 1)
    identifiable = m
    for i in range(m - 1):
        rest = float(np.linalg.norm(column[i:]))
        if rest <= tol:
            identifiable = i
            logger.debug("Degenerate chart at level %d of a %d-vector; remaining angles set to 0", i, m)
            break
        angles[i] = math.atan2(float(np.linalg.norm(column[i + 1:])), float(magnitudes[i]))

    start = 0 if slot.convention == Convention.FULL else 1
    phases = []
    if not slot.real:
        for j in range(start, m):
            if j < identifiable and magnitudes[j] > tol:
                phases.append(normalize_phase(np.angle(column[j])))
            else:
                phases.append(0.0)
    return SphericalVector(m, tuple(angles), tuple(phases), slot.convention, slot.real)


def factorize(m, scheme_tag=SchemeTag.FULL_UNITARY, k: Optional[int] = None) -> ParamSet:
    """Recover canonical parameters by peeling one generating column per level.

    Stiefel schemes accept an n x k isometry or a square unitary (first k
    columns used). For reduced conventions each peeled column is rephased so
    that its leading entry is real with the sign the convention fixes; the
    result then composes to ``m @ D`` with ``D`` diagonal unitary, and ``D = I``
    whenever ``m`` came out of :func:`compose`.
    """
    tag = SchemeTag(scheme_tag)
    w = as_matrix(m).copy()
    n, cols = w.shape

    if tag == SchemeTag.GRASSMANN:
        raise SchemeError("Grassmann points are cosets; factorize a flag or Stiefel representative instead.")

    if tag in (SchemeTag.STIEFEL_REDUCED, SchemeTag.STIEFEL_FULL):
        if k is None:
            k = cols
        if cols < k:
            raise DimensionMismatchError(f"Need at least {k} columns for a Stiefel frame, got {cols}.")
        w = w[:, :k].copy()
        scheme = Scheme(tag, n, k)
    else:
        require_square(w, "input")
        scheme = Scheme(tag, n)

    residual = unitarity_residual(w)
    if residual > Config.UNITARITY_TOL * n:
        raise NotUnitaryError(
            f"Input columns are not orthonormal: ||M*M - I||_F = {residual:.3e} exceeds {Config.UNITARITY_TOL * n:.1e}."
        )

    if tag in (SchemeTag.FLAG, SchemeTag.SPECIAL_ORTHOGONAL):
        first_row = w[0, :]
        tol = Config.FIRST_ROW_TOL
        if np.any(np.abs(first_row.imag) > tol) or np.any(first_row.real < -tol):
            raise FactorizationError("Flag factorization needs a real nonnegative first row.")

    layout = factor_layout(scheme)
    vectors = []
    for level, slot in enumerate(layout):
        if level >= w.shape[1]:
            vectors.append(SphericalVector(slot.dim, (), (), slot.convention, slot.real))
            continue
        if slot.convention != Convention.FULL:
            head = w[level, level]
            if abs(head) > Config.DEGENERACY_TOL:
                sign = -1.0 if slot.convention == Convention.REDUCED_PI else 1.0
                correction = sign * abs(head) / head
                if abs(correction - 1.0) > Config.UNITARITY_TOL * n:
                    logger.warning("Rephasing column %d by %.6g rad to fix its leading sign", level, np.angle(correction))
                w[:, level] *= correction

        column = w[level:, level]
        if slot.real:
            tail = column[1:]
            if np.any(np.abs(tail.imag) > Config.FIRST_ROW_TOL) or np.any(tail.real < -Config.FIRST_ROW_TOL):
                raise FactorizationError(
                    f"Column {level} has entries no real orthogonal factor of this chart can produce."
                )

        v = _fit_vector(column, slot)
        vectors.append(v)
        block = build_B(v)
        w[level:, level:] = block.conj().T @ w[level:, level:]

    logger.debug("Factorized %dx%d input into %d factors (%s)", n, w.shape[1], len(vectors), scheme.label)
    return ParamSet(scheme, tuple(vectors))

