import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.services.parameterization import (
    ParamSet,
    Scheme,
    SchemeTag,
    SphericalVector,
    compose,
    random_params,
    zero_params,
)
from src.utils.errors import DimensionMismatchError, SchemeError
from src.utils.linalg import ComplexMatrix, identity

logger = logging.getLogger(__name__)

STIEFEL_VARIANTS = {SchemeTag.STIEFEL_REDUCED: "reduced", SchemeTag.STIEFEL_FULL: "full"}


@dataclass(frozen=True)
class StiefelFrame:
    n: int
    k: int
    matrix: ComplexMatrix
    variant: str


@dataclass(frozen=True)
class GrassmannPoint:
    """A k-plane of C^n. For k > n/2 the parameters describe the complementary (n-k)-plane."""

    n: int
    k: int
    params: ParamSet
    complemented: bool = False

    def __post_init__(self):
        if not 1 <= self.k <= self.n - 1:
            raise SchemeError(f"Grassmann points need 1 <= k <= n-1, got k={self.k}, n={self.n}.")
        scheme = self.params.scheme
        base_k = min(self.k, self.n - self.k)
        if scheme.tag != SchemeTag.GRASSMANN or scheme.n != self.n or scheme.k != base_k:
            raise SchemeError(
                f"Gr({self.k},{self.n}) needs Grassmann parameters with n={self.n}, k={base_k}; got {scheme.label}."
            )
        object.__setattr__(self, "complemented", self.k > self.n - self.k)

    @property
    def parameter_count(self) -> int:
        return self.params.parameter_count

    @classmethod
    def from_params(cls, params: ParamSet, k: Optional[int] = None) -> "GrassmannPoint":
        if params.scheme.tag != SchemeTag.GRASSMANN:
            raise SchemeError(f"Expected Grassmann parameters, got {params.scheme.tag.value}.")
        return cls(params.scheme.n, params.scheme.k if k is None else k, params)

    @classmethod
    def base_point(cls, n: int, k: int) -> "GrassmannPoint":
        return cls(n, k, zero_params(Scheme(SchemeTag.GRASSMANN, n, min(k, n - k))))

    @classmethod
    def random(cls, n: int, k: int, rng: np.random.Generator) -> "GrassmannPoint":
        return cls(n, k, random_params(Scheme(SchemeTag.GRASSMANN, n, min(k, n - k)), rng))


def stiefel_frame(p: ParamSet) -> StiefelFrame:
    variant = STIEFEL_VARIANTS.get(p.scheme.tag)
    if variant is None:
        raise SchemeError(f"A Stiefel frame needs a Stiefel scheme, got {p.scheme.tag.value}.")
    k = p.scheme.k
    return StiefelFrame(n=p.scheme.n, k=k, matrix=compose(p)[:, :k].copy(), variant=variant)


def projection_onto_columns(c: ComplexMatrix) -> ComplexMatrix:
    return c @ c.conj().T


def stiefel_projection(f: StiefelFrame) -> ComplexMatrix:
    return projection_onto_columns(f.matrix)


def grassmann_matrix(g: GrassmannPoint) -> ComplexMatrix:
    if g.complemented:
        raise SchemeError(
            f"Gr({g.k},{g.n}) is stored through its complement; only the projection is available for k > n/2."
        )
    return compose(g.params)


def grassmann_projection(g: GrassmannPoint) -> ComplexMatrix:
    base_k = g.params.scheme.k
    projection = projection_onto_columns(compose(g.params)[:, :base_k])
    if g.complemented:
        return identity(g.n) - projection
    return projection


def pin_trailing_parameters(params: ParamSet) -> ParamSet:
    """Set the last angle and the last phase of every generating vector to zero."""
    if params.scheme.tag != SchemeTag.GRASSMANN:
        raise SchemeError(f"Expected Grassmann parameters, got {params.scheme.tag.value}.")
    vectors = []
    for v in params.vectors:
        angles = list(v.angles)
        phases = list(v.phases)
        if angles:
            angles[-1] = 0.0
        if phases:
            phases[-1] = 0.0
        vectors.append(SphericalVector(v.dim, tuple(angles), tuple(phases), v.convention, v.real))
    return ParamSet(params.scheme, tuple(vectors))


def reduce_grassmann_params(params: ParamSet) -> ParamSet:
    """Drop one dimension: Gr(k, n) parameters become Gr(min(k, (n-1)//2), n-1) parameters.

    The last angle and phase of each generating vector are removed, and the
    last factor goes away when its block would shrink to 1x1. With the removed
    values at zero, the n-dimensional matrix minus its last row and column is
    the reduced matrix, times diag(I, -1, I) when a factor was dropped.
    """
    scheme = params.scheme
    if scheme.tag != SchemeTag.GRASSMANN:
        raise SchemeError(f"Expected Grassmann parameters, got {scheme.tag.value}.")
    n = scheme.n - 1
    k = min(scheme.k, n // 2)
    if k < 1:
        raise DimensionMismatchError(f"Cannot reduce Gr({scheme.k},{scheme.n}) below dimension 2.")

    nonzero = [v for v in params.vectors if v.angles[-1] != 0.0 or (v.phases and v.phases[-1] != 0.0)]
    if nonzero:
        logger.debug("Reducing Grassmann parameters with %d nonzero trailing coordinates", len(nonzero))

    vectors = []
    for v in params.vectors[:k]:
        vectors.append(SphericalVector(v.dim - 1, v.angles[:-1], v.phases[:-1], v.convention, v.real))
    return ParamSet(Scheme(SchemeTag.GRASSMANN, n, k), tuple(vectors))
