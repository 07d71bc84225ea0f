import numpy as np
import pytest

from src.services.parameterization import Scheme, compose, random_params
from src.services.verification import SUITES, run_suite
from src.utils.errors import SchemeError
from tests.conftest import random_hermitian, random_unitary


def test_suite_names():
    assert set(SUITES) == {"unitary", "projection", "isometry", "quadratic", "main-theorem", "hermitian", "round-trip"}
    with pytest.raises(SchemeError):
        run_suite("orthogonality", np.eye(2))


def test_unitary_suite(rng):
    report = run_suite("unitary", random_unitary(4, rng))
    assert report.passed
    assert report.to_frame()["status"].tolist() == ["pass", "pass"]
    assert not run_suite("unitary", random_unitary(4, rng)[:, :3]).passed


def test_projection_suite_on_non_square_input(rng):
    report = run_suite("projection", random_unitary(4, rng)[:, :2])
    assert not report.passed
    assert report.get("square") is not None


def test_quadratic_with_explicit_coefficients():
    assert run_suite("quadratic", np.diag([3.0, 3.0, 1.0]), p_coef=2.0, q_coef=1.0).passed
    report = run_suite("quadratic", np.diag([3.0, 2.0, 1.0]), p_coef=2.0, q_coef=1.0)
    assert not report.passed
    assert report.get("quadratic").value == pytest.approx(1.0)


def test_quadratic_failure_is_recorded():
    report = run_suite("quadratic", np.array([[0.0, 1.0], [0.0, 0.0]]), p_coef=1.0, q_coef=0.5)
    assert not report.passed
    assert "SpectrumError" in report.get("quadratic").detail


def test_hermitian_suite_compares_spectrum(rng):
    u = random_unitary(4, rng)
    h = (u * np.array([2.0, 1.0, 0.5, -1.0])) @ u.conj().T
    assert run_suite("hermitian", h, eigenvalues=[-1.0, 0.5, 1.0, 2.0]).passed
    assert not run_suite("hermitian", h, eigenvalues=[2.0, 1.0, 0.5, 0.0]).passed
    assert run_suite("hermitian", random_hermitian(5, rng)).passed


@pytest.mark.parametrize("scheme,k", [("full", None), ("flag", None), ("stiefel-full", 2), ("stiefel-reduced", 3)])
def test_round_trip_suite(scheme, k, rng):
    u = compose(random_params(Scheme(scheme, 5, k), rng))
    m = u if k is None else u[:, :k]
    report = run_suite("round-trip", m, scheme=scheme)
    assert report.passed, report.to_dict()


def test_round_trip_is_not_offered_for_grassmann(rng):
    report = run_suite("round-trip", random_unitary(4, rng), scheme="grassmann")
    assert not report.passed


def test_main_theorem_suite_uses_completion(rng):
    u = random_unitary(5, rng)
    report = run_suite("main-theorem", u, k=2)
    assert report.passed
    assert report.get("completion") is not None


def test_quadratic_bound_follows_tolerance():
    rho = np.diag([0.7, 0.7, 0.3 + 1e-9, 0.3])
    assert run_suite("quadratic", rho, p_coef=0.5, q_coef=0.2).passed
    assert not run_suite("quadratic", rho, tol=1e-14, p_coef=0.5, q_coef=0.2).passed


def test_quadratic_levels_follow_tolerance():
    rho = np.diag([0.7, 0.7, 0.3 + 1e-11, 0.3])
    assert run_suite("quadratic", rho).metrics["levels"] == 2
    assert run_suite("quadratic", rho, tol=1e-14).metrics["levels"] == 3


def test_projection_rank_follows_tolerance():
    p = np.diag([1.0, 1.0 - 1e-11, 0.0])
    loose = run_suite("projection", p, k=2)
    assert loose.passed
    assert loose.metrics["unit_eigenvalues"] == 2

    tight = run_suite("projection", p, tol=1e-14, k=2)
    assert not tight.passed
    assert tight.metrics["unit_eigenvalues"] == 1
    assert tight.get("rank").value == 1
