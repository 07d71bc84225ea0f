import os
from dotenv import load_dotenv
from typing import List, Tuple, Any, Dict, Optional

load_dotenv()

_ENV_PREFIX = "FLAGFRAME_"


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(_ENV_PREFIX + name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"Environment variable {_ENV_PREFIX + name} must be a number, got {raw!r}.")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(_ENV_PREFIX + name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"Environment variable {_ENV_PREFIX + name} must be an integer, got {raw!r}.")


class Config:
    TOOL_VERSION: str = "1.0.0"

    # unitarity is checked against UNITARITY_TOL * n
    UNITARITY_TOL: float = _env_float("UNITARITY_TOL", 1e-10)
    HERMITIAN_TOL: float = _env_float("HERMITIAN_TOL", 1e-10)
    FIRST_ROW_TOL: float = _env_float("FIRST_ROW_TOL", 1e-10)
    VERIFY_TOL: float = _env_float("VERIFY_TOL", 1e-10)

    JACOBI_MAX_SWEEPS: int = _env_int("JACOBI_MAX_SWEEPS", 100)
    JACOBI_OFFDIAG_REL: float = _env_float("JACOBI_OFFDIAG_REL", 1e-14)
    PSD_CLAMP_REL: float = _env_float("PSD_CLAMP_REL", 1e-12)

    DEGENERACY_TOL: float = _env_float("DEGENERACY_TOL", 1e-12)
    ANGLE_TOL: float = _env_float("ANGLE_TOL", 1e-12)
    CONTRACTION_NORM_SLACK: float = _env_float("CONTRACTION_NORM_SLACK", 1e-12)

    SERIALIZATION_DIGITS: int = _env_int("SERIALIZATION_DIGITS", 17)
    DEFAULT_SEED: int = _env_int("DEFAULT_SEED", 0)
    LOG_LEVEL: str = os.getenv(_ENV_PREFIX + "LOG_LEVEL", "WARNING").upper()

    SUPPORTED_SCHEMES: List[str] = [
        "full", "flag", "stiefel-reduced", "stiefel-full", "grassmann", "orthogonal"
    ]
    SCHEMES_WITH_K: List[str] = ["stiefel-reduced", "stiefel-full", "grassmann"]
    DOCUMENT_KINDS: List[str] = ["unitary", "hermitian", "projection", "isometry", "params"]
    MAX_DIMENSION: int = _env_int("MAX_DIMENSION", 64)

    @staticmethod
    def get_numeric_settings() -> Dict[str, Any]:
        return {
            "tool_version": Config.TOOL_VERSION,
            "unitarity_tol": Config.UNITARITY_TOL,
            "hermitian_tol": Config.HERMITIAN_TOL,
            "first_row_tol": Config.FIRST_ROW_TOL,
            "verify_tol": Config.VERIFY_TOL,
            "jacobi_max_sweeps": Config.JACOBI_MAX_SWEEPS,
            "jacobi_offdiag_rel": Config.JACOBI_OFFDIAG_REL,
            "psd_clamp_rel": Config.PSD_CLAMP_REL,
            "degeneracy_tol": Config.DEGENERACY_TOL,
            "angle_tol": Config.ANGLE_TOL,
            "contraction_norm_slack": Config.CONTRACTION_NORM_SLACK,
            "serialization_digits": Config.SERIALIZATION_DIGITS,
            "default_seed": Config.DEFAULT_SEED,
        }

    @staticmethod
    def validate_dimensions(scheme: str, n: Any, k: Optional[Any] = None) -> Tuple[bool, str]:
        if scheme not in Config.SUPPORTED_SCHEMES:
            return False, f"Unsupported scheme: {scheme}. Supported schemes are: {', '.join(Config.SUPPORTED_SCHEMES)}"

        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            return False, f"Dimension n must be a positive integer, got {n!r}."
        if n > Config.MAX_DIMENSION:
            return False, f"Dimension n={n} exceeds the {Config.MAX_DIMENSION} limit."

        if scheme not in Config.SCHEMES_WITH_K:
            return True, "Dimensions are valid."

        if k is None:
            return False, f"Scheme '{scheme}' requires k."
        if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= n:
            return False, f"k must be an integer in [1, {n}], got {k!r}."
        if scheme == "grassmann" and k > n - 1:
            return False, f"Grassmann points need k <= n-1, got k={k}, n={n}."

        return True, "Dimensions are valid."
