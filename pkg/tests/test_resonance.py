import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aperture_fp.greens import Geometry, PoleError, Truncation
from aperture_fp.operators import ALPHA_REFERENCE, assemble
from aperture_fp.resonance import (POLE_GUARD, ResonanceError, ResonanceFunctions, asymptotic_resonance,
                                   c_minus, c_plus, find_resonance, p_q, p_value, q_value,
                                   winding_number)


def second_derivative(f, x, h=1e-3):
    w = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
    return float(np.real(w @ f(x + h * np.arange(-3, 4)))) / h**2


@pytest.fixture(scope="module")
def funcs():
    return ResonanceFunctions(0.01)


@pytest.fixture(scope="module")
def odd1(funcs):
    return find_resonance("odd", 1, 0.01, funcs)


# --- the coefficient functions -------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
def test_c_vanishes_on_odd_multiples(n):
    k0 = (2 * n - 1) * np.pi
    assert abs(c_plus(k0)) < 1e-14
    assert abs(c_minus(2 * n * np.pi)) < 1e-14


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 6.0).filter(lambda k: abs(k - np.pi) > 0.05))
def test_stable_forms_equal_the_two_term_forms(k):
    assert complex(c_plus(k)) == pytest.approx(1 / (k * np.tan(k)) + 1 / (k * np.sin(k)), rel=1e-9)
    assert complex(c_minus(k)) == pytest.approx(1 / (k * np.tan(k)) - 1 / (k * np.sin(k)), rel=1e-9)


@pytest.mark.parametrize("k0", [np.pi, 3 * np.pi])
def test_c_slope_at_zero(k0):
    h = 1e-5
    slope = float(np.real(c_plus(k0 + h) - c_plus(k0 - h))) / (2 * h)
    assert slope == pytest.approx(-1 / (2 * k0), rel=1e-8)


@pytest.mark.parametrize("k0", [np.pi, 3 * np.pi])
def test_c_curvature_at_zero_is_one_over_k0_squared(k0):
    # d2/dk2 [cot(k/2)/k] at a zero of cot(k/2) is 1/k0^2, from the -2 c'/k term
    assert second_derivative(c_plus, k0) == pytest.approx(1 / k0**2, rel=1e-6)


@pytest.mark.xfail(strict=True, reason="the originally given curvature c''(k0) = 0 is not what c produces")
def test_c_curvature_stated_zero():
    assert abs(second_derivative(c_plus, np.pi)) <= 1e-9


def test_leading_scalars():
    alpha = ALPHA_REFERENCE
    p, q = p_q(1.0, 0.0, alpha)
    assert p == pytest.approx(c_plus(1.0) * alpha / np.pi, rel=1e-14)
    assert q == pytest.approx(c_minus(1.0) * alpha / np.pi, rel=1e-14)
    assert p_value(1.0, 0.0, alpha, form="original") == pytest.approx(c_plus(1.0) * alpha, rel=1e-14)
    with pytest.raises(ValueError):
        p_value(1.0, 0.0, alpha, form="other")


def test_pole_guard():
    with pytest.raises(PoleError):
        p_value(2 * np.pi + 0.05, 0.01, -3.8)
    with pytest.raises(PoleError):
        q_value(np.pi - 0.05, 0.01, -3.8)
    assert np.isfinite(p_value(2 * np.pi + 0.05, 0.01, -3.8, pole_guard=0.0))
    assert POLE_GUARD == 0.1


# --- expansions --------------------------------------------------------------------------

def test_asymptotic_examples():
    alpha = -3.82
    original = asymptotic_resonance("odd", 1, 0.01, alpha, "original")
    assert original == pytest.approx(np.pi + 2 * np.pi * 0.01 / alpha - 1j * np.pi * 1e-4, rel=1e-14)
    corrected = asymptotic_resonance("even", 1, 0.01, alpha, "corrected")
    k0 = 2 * np.pi
    shift = 2 * np.pi * k0 / alpha
    assert corrected == pytest.approx(k0 + shift * 0.01 + (shift**2 / k0 - 1j * k0**2) * 1e-4, rel=1e-14)


def test_asymptotic_regime_and_argument_checks():
    with pytest.raises(ValueError):
        asymptotic_resonance("odd", 3, 0.1, -3.8)
    with pytest.raises(ValueError):
        asymptotic_resonance("both", 1, 0.01, -3.8)
    with pytest.raises(ValueError):
        asymptotic_resonance("odd", 0, 0.01, -3.8)


# --- numerical roots ------------------------------------------------------------------------

def test_resonance_is_a_root(odd1, funcs):
    assert odd1.residual <= 1e-10
    assert abs(funcs.p(odd1.k_numeric)) <= 1e-9
    assert odd1.iterations < 20


def test_resonance_sits_below_the_real_axis_and_shifts_down(odd1):
    assert odd1.k_numeric.imag < 0
    assert odd1.k_numeric.real < np.pi  # alpha < 0 pulls the root below k0


def test_corrected_expansion_closer_than_original(odd1):
    assert abs(odd1.k_numeric - odd1.k_corrected) < abs(odd1.k_numeric - odd1.k_asymptotic)
    assert abs(odd1.k_numeric - odd1.k_corrected) < 5e-5


def test_root_is_simple(odd1, funcs):
    assert winding_number(funcs.p, odd1.k_numeric, 1e-4) == 1
    assert winding_number(funcs.p, odd1.k_numeric + 0.01, 1e-4) == 0


def test_symmetric_system_is_singular_at_the_root(odd1):
    ops = assemble(odd1.k_numeric, Geometry(0.01), Truncation(n_max=0))
    sv = np.linalg.svd(ops.lhs(1), compute_uv=False)
    sv_off = np.linalg.svd(assemble(odd1.k_numeric.real + 0.1, Geometry(0.01), Truncation(n_max=0)).lhs(1),
                           compute_uv=False)
    assert sv[-1] / sv[0] < 1e-6 * sv_off[-1] / sv_off[0]


def test_families_are_ordered():
    eps = 0.01
    funcs = ResonanceFunctions(eps)
    found = [find_resonance(f, n, eps, funcs) for f, n in (("odd", 1), ("even", 1), ("odd", 2))]
    roots = [r.k_numeric.real for r in found]
    assert roots == sorted(roots)
    # the shift 2 pi k0 eps / alpha grows with k0; the corrected expansion tracks it
    assert all(abs(r.k_numeric - r.k_corrected) < 1e-3 for r in found)


def test_frozen_moments_give_nearly_the_same_root(odd1):
    frozen = ResonanceFunctions(0.01, frozen_at=3.1)
    root = find_resonance("odd", 1, 0.01, frozen).k_numeric
    assert abs(root - odd1.k_numeric) < 1e-6


def test_search_failures():
    funcs = ResonanceFunctions(0.01)
    with pytest.raises(ResonanceError):
        find_resonance("odd", 1, 0.01, funcs, guess=2 * np.pi + 0.05)
    with pytest.raises(ValueError):
        find_resonance("odd", 1, 0.02, funcs)


def test_winding_number_counts_poles_negatively():
    assert winding_number(lambda z: 1 / (z - 0.2), 0.0, 1.0) == -1
    assert winding_number(lambda z: (z - 0.1) * (z + 0.1j), 0.0, 1.0) == 2
