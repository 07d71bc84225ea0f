import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.utils.linalg import ComplexMatrix, frobenius, identity


@dataclass(frozen=True)
class Residual:
    name: str
    value: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.tolerance


@dataclass
class VerificationReport:
    suite: str
    residuals: List[Residual] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.residuals) and all(r.passed for r in self.residuals)

    def add(self, name: str, value: float, tolerance: float, detail: str = "") -> Residual:
        residual = Residual(name, float(value), float(tolerance), detail)
        self.residuals.append(residual)
        return residual

    def fail(self, name: str, error: Exception) -> Residual:
        return self.add(name, math.inf, 0.0, f"{type(error).__name__}: {error}")

    def get(self, name: str) -> Optional[Residual]:
        return next((r for r in self.residuals if r.name == name), None)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"residual": r.name, "value": r.value, "tolerance": r.tolerance,
             "status": "pass" if r.passed else "FAIL", "detail": r.detail}
            for r in self.residuals
        ]
        return create_report_dataframe(rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "residuals": [
                {"name": r.name, "value": r.value, "tolerance": r.tolerance, "passed": r.passed, "detail": r.detail}
                for r in self.residuals
            ],
            "metrics": dict(self.metrics),
        }


def unitarity_residual(m: ComplexMatrix) -> float:
    """||M*M - I||_F; for a tall matrix this is the isometry residual."""
    return frobenius(m.conj().T @ m - identity(m.shape[1]))


def idempotence_residual(p: ComplexMatrix) -> float:
    return frobenius(p @ p - p)


def sorted_descending(values: Sequence[float]) -> np.ndarray:
    return np.sort(np.asarray(values, dtype=np.float64))[::-1]


def multiset_deviation(actual: Sequence[float], expected: Sequence[float]) -> float:
    """Largest gap between two eigenvalue multisets after a descending sort."""
    a, b = sorted_descending(actual), sorted_descending(expected)
    if a.shape != b.shape:
        return math.inf
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def count_near(values: Sequence[float], target: float, tol: float) -> int:
    return int(np.sum(np.abs(np.asarray(values, dtype=np.float64) - target) <= tol))


def distinct_levels(values: Sequence[float], tol: float) -> List[float]:
    levels: List[float] = []
    for v in sorted_descending(values):
        if not levels or abs(levels[-1] - v) > tol:
            levels.append(float(v))
    return levels


def create_report_dataframe(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(rows) if rows else pd.DataFrame()


def create_spectrum_dataframe(eigenvalues: Sequence[float], multiplicities: Optional[Sequence[int]] = None) -> pd.DataFrame:
    frame = pd.DataFrame({"index": range(1, len(eigenvalues) + 1), "eigenvalue": list(eigenvalues)})
    if multiplicities is not None:
        frame["multiplicity"] = list(multiplicities)
    return frame
