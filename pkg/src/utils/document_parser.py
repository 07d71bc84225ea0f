"""JSON matrix documents.

A document is a UTF-8 JSON object with a fixed key order. Floats are written
with 17 significant digits, so a save/load cycle reproduces every double
exactly and equal inputs give byte-identical files.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.config import Config
from src.services.parameterization import Convention, ParamSet, Scheme, SphericalVector, compose
from src.services.verification import run_suite
from src.utils.errors import DocumentError, FlagFrameError
from src.utils.linalg import ComplexMatrix, as_matrix, frobenius

logger = logging.getLogger(__name__)

DocumentKind = Literal["unitary", "hermitian", "projection", "isometry", "params"]


class FactorPayload(BaseModel):
    dim: int = Field(ge=1)
    convention: Convention
    real: bool = False
    angles: List[float] = Field(default_factory=list)
    phases: List[float] = Field(default_factory=list)


class ParamsPayload(BaseModel):
    scheme: str
    n: int = Field(ge=1)
    k: Optional[int] = None
    count: int = Field(ge=0)
    factors: List[FactorPayload] = Field(default_factory=list)

    @model_validator(mode="after")
    def _count_matches(self) -> "ParamsPayload":
        stored = sum(len(f.angles) + len(f.phases) for f in self.factors)
        if stored != self.count:
            raise ValueError(f"params.count is {self.count} but the factors hold {stored} values")
        return self


class SpectrumPayload(BaseModel):
    kind: str
    n: int
    h: float
    p: Optional[int] = None
    k: Optional[int] = None
    angles: List[float] = Field(default_factory=list)
    theta_hyp: float = 0.0
    normalize: bool = False
    eigenvalues: List[float] = Field(default_factory=list)


class DocumentMeta(BaseModel):
    tool_version: str = Config.TOOL_VERSION
    seed: Optional[int] = None
    rank: Optional[int] = None
    spectrum: Optional[SpectrumPayload] = None


class MatrixDocument(BaseModel):
    kind: DocumentKind
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    data: List[Tuple[float, float]]
    params: Optional[ParamsPayload] = None
    meta: DocumentMeta = Field(default_factory=DocumentMeta)

    @model_validator(mode="after")
    def _shape_matches(self) -> "MatrixDocument":
        if len(self.data) != self.rows * self.cols:
            raise ValueError(f"data holds {len(self.data)} entries, expected rows*cols = {self.rows * self.cols}")
        if not all(math.isfinite(re) and math.isfinite(im) for re, im in self.data):
            raise ValueError("data contains NaN or Inf")
        if self.kind == "params" and self.params is None:
            raise ValueError("a params document needs the params field")
        return self

    def to_matrix(self) -> ComplexMatrix:
        flat = np.array([complex(re, im) for re, im in self.data], dtype=np.complex128)
        return flat.reshape(self.rows, self.cols)

    def to_params(self) -> Optional[ParamSet]:
        return None if self.params is None else payload_to_params(self.params)


def matrix_to_data(m: ComplexMatrix) -> List[Tuple[float, float]]:
    return [(float(z.real), float(z.imag)) for z in np.asarray(m).reshape(-1)]


def params_to_payload(p: ParamSet) -> ParamsPayload:
    factors = [
        FactorPayload(dim=v.dim, convention=v.convention, real=v.real, angles=list(v.angles), phases=list(v.phases))
        for v in p.vectors
    ]
    return ParamsPayload(scheme=p.scheme.tag.value, n=p.scheme.n, k=p.scheme.k, count=p.parameter_count, factors=factors)


def payload_to_params(payload: ParamsPayload) -> ParamSet:
    scheme = Scheme(payload.scheme, payload.n, payload.k)
    vectors = [SphericalVector(f.dim, tuple(f.angles), tuple(f.phases), f.convention, f.real) for f in payload.factors]
    return ParamSet(scheme, tuple(vectors))


def build_document(
    kind: str,
    matrix,
    params: Optional[ParamSet] = None,
    seed: Optional[int] = None,
    rank: Optional[int] = None,
    spectrum: Optional[SpectrumPayload] = None,
) -> MatrixDocument:
    m = as_matrix(matrix)
    return MatrixDocument(
        kind=kind,
        rows=m.shape[0],
        cols=m.shape[1],
        data=matrix_to_data(m),
        params=None if params is None else params_to_payload(params),
        meta=DocumentMeta(seed=seed, rank=rank, spectrum=spectrum),
    )


def _emit(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DocumentError(f"Cannot serialize non-finite number {value!r}.")
        text = format(value, f".{Config.SERIALIZATION_DIGITS}g")
        # keep integral values (and -0.0) typed as floats on reload
        return text if any(ch in text for ch in ".e") else text + ".0"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_emit(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_emit(v) for v in value) + "]"
    raise DocumentError(f"Cannot serialize value of type {type(value).__name__}.")


def dumps_document(doc: MatrixDocument) -> str:
    return _emit(doc.model_dump(mode="json")) + "\n"


def loads_document(text: str) -> MatrixDocument:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"Document is not valid JSON: {e}")
    try:
        return MatrixDocument.model_validate(payload)
    except ValidationError as e:
        raise DocumentError(f"Document failed schema validation: {e.error_count()} error(s); {e.errors()[0]['msg']}")


class DocumentParser:
    def save(self, doc: MatrixDocument, path: Union[str, Path]) -> Path:
        target = Path(path)
        try:
            target.write_text(dumps_document(doc), encoding="utf-8")
        except OSError as e:
            raise DocumentError(f"Cannot write {target}: {e}")
        logger.debug("Wrote %s document (%dx%d) to %s", doc.kind, doc.rows, doc.cols, target)
        return target

    def load(self, path: Union[str, Path], validate: bool = False) -> MatrixDocument:
        source = Path(path)
        try:
            text = source.read_text(encoding="utf-8")
        except OSError as e:
            raise DocumentError(f"Cannot read {source}: {e}")
        doc = loads_document(text)
        if validate:
            is_valid, message = self.validate_document(doc)
            if not is_valid:
                raise DocumentError(f"{source}: {message}")
        return doc

    def validate_document(self, doc: MatrixDocument) -> Tuple[bool, str]:
        """Run the residual check that matches the declared kind."""
        try:
            if doc.kind == "params":
                params = doc.to_params()
                rebuilt = compose(params)[:, :doc.cols]
                residual = frobenius(rebuilt - doc.to_matrix())
                if residual > Config.UNITARITY_TOL * doc.rows:
                    return False, f"Stored matrix differs from its parameters by {residual:.3e}."
                return True, "Parameters reproduce the stored matrix."

            options: Dict[str, Any] = {"k": doc.meta.rank}
            if doc.meta.spectrum is not None:
                options["eigenvalues"] = doc.meta.spectrum.eigenvalues
            report = run_suite(doc.kind, doc.to_matrix(), **options)
        except FlagFrameError as e:
            return False, str(e)

        if report.passed:
            return True, f"Document passes the {doc.kind} check."
        failed = ", ".join(f"{r.name}={r.value:.3e}" for r in report.residuals if not r.passed)
        return False, f"Document fails the {doc.kind} check: {failed}"
