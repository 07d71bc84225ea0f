import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from src.services.hermitian import (
    SpectrumKind,
    SpectrumSpec,
    assemble,
    cascade,
    eigenvalues_indefinite,
    eigenvalues_positive,
    eigenvalues_traceless,
    expected_angle_count,
    induced_quadratic_coefficients,
    quadratic_residual,
    random_spectrum,
    spectrum_eigenvalues,
)
from src.services.manifolds import GrassmannPoint
from src.services.parameterization import Scheme, random_params
from src.utils.errors import ParameterRangeError, SchemeError, SpectrumError
from src.utils.helpers import distinct_levels, multiset_deviation
from src.utils.linalg import frobenius, hermitian_eig


# --- cascades ---

def test_cascade_examples():
    assert_allclose(cascade(1.0, [math.pi / 4]), [0.5, 0.5])
    assert_allclose(cascade(2.0, [0.0, 0.7]), [2.0, 0.0, 0.0])
    assert_allclose(cascade(-3.0, []), [-3.0])
    assert_allclose(cascade(1.0, [math.pi / 2, math.pi / 2]), [0.0, 0.0, 1.0], atol=1e-30)


def test_cascade_rejects_angles_out_of_range():
    with pytest.raises(ParameterRangeError):
        cascade(1.0, [1.7])


@seed(3)
@settings(max_examples=50, deadline=None)
@given(
    total=st.floats(min_value=-50, max_value=50, allow_nan=False),
    angles=st.lists(st.floats(min_value=0, max_value=math.pi / 2), max_size=12),
)
def test_cascade_sums_to_total(total, angles):
    values = cascade(total, angles)
    assert len(values) == len(angles) + 1
    assert abs(np.sum(values) - total) <= 1e-12 * max(1.0, abs(total))
    assert np.all(values * math.copysign(1.0, total) >= -1e-15)


def test_positive_trace_example():
    assert_allclose(eigenvalues_positive(1.0, [math.pi / 3, math.pi / 4]), [0.25, 0.375, 0.375])
    with pytest.raises(SpectrumError):
        eigenvalues_positive(0.0, [0.1])


def test_traceless_example():
    values = eigenvalues_traceless(1.0, 2, [math.pi / 4, math.pi / 4])
    assert_allclose(values, [0.5, 0.5, -0.5, -0.5])
    with pytest.raises(SpectrumError):
        eigenvalues_traceless(1.0, 4, [0.1, 0.2])


@pytest.mark.parametrize("h", [2.0, -2.0])
def test_indefinite_trace_is_h(h):
    values = eigenvalues_indefinite(h, 1, 0.5, [0.4])
    assert np.sum(values) == pytest.approx(h)
    assert values[0] > 0 > values[-1]
    ch2, sh2 = math.cosh(0.5) ** 2, math.sinh(0.5) ** 2
    assert values[0] == pytest.approx(2.0 * (ch2 if h > 0 else sh2))


def test_expected_angle_counts():
    assert expected_angle_count(SpectrumKind.POSITIVE_TRACE, 5) == 4
    assert expected_angle_count(SpectrumKind.TRACELESS, 5) == 3
    assert expected_angle_count(SpectrumKind.DEGENERATE_K, 5, 2) == 3
    assert expected_angle_count(SpectrumKind.TWO_LEVEL, 5) == 1
    assert expected_angle_count(SpectrumKind.TWO_LEVEL_INDEFINITE, 5) == 0
    with pytest.raises(SpectrumError):
        expected_angle_count(SpectrumKind.DEGENERATE_K, 5)


# --- spectrum specs ---

def test_spectrum_spec_validation():
    with pytest.raises(SpectrumError):
        SpectrumSpec(n=3, kind="positive-trace", h=1.0, angles=(0.1,))
    with pytest.raises(SpectrumError):
        SpectrumSpec(n=3, kind="traceless", h=1.0, p=3, angles=(0.1,))
    with pytest.raises(SpectrumError):
        SpectrumSpec(n=3, kind="positive-trace", h=-1.0, angles=(0.1, 0.2))
    with pytest.raises(SpectrumError):
        SpectrumSpec(n=3, kind="indefinite-trace", h=0.0, p=1, angles=(0.1,))
    with pytest.raises(SpectrumError):
        SpectrumSpec(n=3, kind="two-level", h=1.0, k=3, angles=(0.1,))
    with pytest.raises(SpectrumError):
        SpectrumSpec(n=3, kind="no-such-kind")
    with pytest.raises(ParameterRangeError):
        SpectrumSpec(n=2, kind="positive-trace", h=1.0, angles=(2.0,))


def test_multiplicities():
    assert SpectrumSpec(n=5, kind="degenerate-k", k=2, angles=(0.1, 0.2, 0.3)).multiplicities == (2, 1, 1, 1)
    assert SpectrumSpec(n=5, kind="two-level", k=2, angles=(0.4,)).multiplicities == (2, 3)
    assert SpectrumSpec(n=3, kind="positive-trace", angles=(0.1, 0.2)).multiplicities == (1, 1, 1)


def test_degenerate_spectrum_repeats_leading_value():
    spec = SpectrumSpec(n=4, kind="degenerate-k", h=2.0, k=2, angles=(math.pi / 4, math.pi / 4))
    assert_allclose(spectrum_eigenvalues(spec), [1.0, 1.0, 0.5, 0.5])


def test_normalize_restores_trace():
    spec = SpectrumSpec(n=4, kind="degenerate-k", h=2.0, k=2, angles=(math.pi / 4, math.pi / 4), normalize=True)
    values = spectrum_eigenvalues(spec)
    assert np.sum(values) == pytest.approx(2.0)
    assert values[0] == pytest.approx(values[1])


def test_two_level_density():
    spec = SpectrumSpec(n=5, kind="two-level", h=1.0, k=2, angles=(0.6,), normalize=True)
    values = spectrum_eigenvalues(spec)
    assert np.sum(values) == pytest.approx(1.0)
    assert np.all(values >= 0)
    assert len(distinct_levels(values, 1e-12)) == 2


def test_two_level_indefinite_levels():
    spec = SpectrumSpec(n=4, kind="two-level-indefinite", h=1.0, k=1, theta_hyp=0.3)
    ch2, sh2 = math.cosh(0.3) ** 2, math.sinh(0.3) ** 2
    assert_allclose(spectrum_eigenvalues(spec), [ch2, -sh2, -sh2, -sh2])


# --- assembly ---

def _frame_for(spec, rng):
    if spec.kind == SpectrumKind.DEGENERATE_K:
        return random_params(Scheme("stiefel-reduced", spec.n, spec.k), rng)
    if spec.kind in (SpectrumKind.TWO_LEVEL, SpectrumKind.TWO_LEVEL_INDEFINITE):
        return GrassmannPoint.random(spec.n, spec.k, rng).params
    return random_params(Scheme("flag", spec.n), rng)


def _random_options(kind, n, rng):
    if kind == "traceless":
        return {"p": int(rng.integers(1, n))}
    if kind == "indefinite-trace":
        return {"p": int(rng.integers(1, n)), "h": float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0))}
    if kind == "degenerate-k":
        return {"k": int(rng.integers(1, n + 1)), "normalize": True}
    if kind == "two-level":
        return {"k": int(rng.integers(1, n)), "normalize": True}
    if kind == "two-level-indefinite":
        return {"k": int(rng.integers(1, n)), "h": 0.7}
    return {"h": float(rng.uniform(0.5, 2.0))}


TRACE_OF_KIND = {
    "positive-trace": lambda spec: spec.h,
    "traceless": lambda spec: 0.0,
    "indefinite-trace": lambda spec: spec.h,
    "degenerate-k": lambda spec: spec.h,
    "two-level": lambda spec: spec.h,
}


@pytest.mark.parametrize("kind", [k.value for k in SpectrumKind])
@pytest.mark.parametrize("n", range(2, 11))
def test_assembled_operator_has_requested_spectrum(kind, n, rng):
    for _ in range(3):
        spec = random_spectrum(kind, n, rng, **_random_options(kind, n, rng))
        op = assemble(spec, _frame_for(spec, rng))
        expected = spectrum_eigenvalues(spec)
        scale = max(1.0, float(np.max(np.abs(expected))))
        assert frobenius(op.matrix - op.matrix.conj().T) <= 1e-14 * max(1.0, frobenius(op.matrix))
        actual = hermitian_eig(op.matrix).eigenvalues
        assert multiset_deviation(actual, expected) <= 1e-10 * scale
        assert op.trace == pytest.approx(float(np.sum(expected)), abs=1e-12 * scale * n)
        if kind in TRACE_OF_KIND:
            assert abs(float(np.sum(expected)) - TRACE_OF_KIND[kind](spec)) <= 1e-12 * scale


def test_traceless_operator_from_orthogonal_frame_is_real(rng):
    spec = random_spectrum("traceless", 5, rng, p=2)
    op = assemble(spec, random_params(Scheme("orthogonal", 5), rng))
    assert np.all(np.abs(op.matrix.imag) <= 1e-15)
    assert op.trace == pytest.approx(0.0, abs=1e-12)


def test_two_level_operator_satisfies_quadratic(rng):
    spec = random_spectrum("two-level", 6, rng, k=2)
    op = assemble(spec, _frame_for(spec, rng))
    p_coef, q_coef = induced_quadratic_coefficients(op.eigenvalues[0], op.eigenvalues[-1])
    assert quadratic_residual(op.matrix, p_coef, q_coef) <= 1e-12


def test_two_level_quadratic_on_many_points(rng):
    for _ in range(200):
        n = int(rng.integers(2, 11))
        spec = random_spectrum("two-level", n, rng, k=int(rng.integers(1, n)), normalize=True)
        op = assemble(spec, _frame_for(spec, rng))
        p_coef, q_coef = induced_quadratic_coefficients(op.eigenvalues[0], op.eigenvalues[-1])
        assert quadratic_residual(op.matrix, p_coef, q_coef) <= 1e-12 * n, spec


def test_assemble_checks_the_frame(rng):
    spec = random_spectrum("positive-trace", 4, rng)
    with pytest.raises(SchemeError):
        assemble(spec, random_params(Scheme("grassmann", 4, 2), rng))
    with pytest.raises(SpectrumError):
        assemble(spec, random_params(Scheme("flag", 5), rng))
    degenerate = random_spectrum("degenerate-k", 5, rng, k=2)
    with pytest.raises(SchemeError):
        assemble(degenerate, random_params(Scheme("stiefel-reduced", 5, 3), rng))


# --- quadratic residual ---

def test_quadratic_residual_examples():
    assert quadratic_residual(np.diag([3.0, 3.0, 1.0]), 2.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert quadratic_residual(np.diag([3.0, 2.0, 1.0]), 2.0, 1.0) == pytest.approx(1.0)
    assert induced_quadratic_coefficients(3.0, 1.0) == (2.0, 1.0)


def test_quadratic_residual_rejects_bad_input():
    with pytest.raises(SpectrumError):
        quadratic_residual(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.5, 0.5)
    with pytest.raises(SpectrumError):
        quadratic_residual(np.eye(2), 0.0, 1.0)
