import numpy as np
import pytest
from scipy import integrate, special as sps

from aperture_fp.greens import Geometry, PoleError, Truncation
from aperture_fp.operators import (FREE_SPACE_ALPHA, ApertureBasis, _alpha_raw, _single_layer_diag,
                                   alpha_ledger, assemble, compute_alpha, effective_moment,
                                   jacobi_gamma, leading_block, plunger_scalars, radial_function,
                                   riesz_block, single_layer_quadrature)

TRUNC = Truncation(m_max=100, n_max=2, radial_order=8)


def sine_rule(nodes=60):
    # R = sin(tau) removes the edge singularity: b(R) R dR = R^n P(1 - 2R^2) R dtau
    t, w = np.polynomial.legendre.leggauss(nodes)
    tau = 0.25 * np.pi * (t + 1.0)
    return np.sin(tau), 0.25 * np.pi * w


def radial_moments(n, order, power):
    radius, w = sine_rule()
    return np.array([np.sum(radius**n * sps.eval_jacobi(p, n, -0.5, 1 - 2 * radius**2)
                            * radius ** (power + 1) * w) for p in range(order)])


# --- basis ----------------------------------------------------------------------

def test_basis_layout_and_moments():
    basis = ApertureBasis(n_max=2, radial_order=5)
    assert basis.blocks == ((0, "even"), (1, "even"), (1, "odd"), (2, "even"), (2, "odd"))
    assert basis.size == 25
    mom = basis.moments()
    assert mom[0] == pytest.approx(2 * np.pi) and np.count_nonzero(mom) == 1
    assert 2 * np.pi * radial_moments(0, 5, 0) == pytest.approx(mom[:5], abs=1e-13)


@pytest.mark.parametrize("n", [0, 1, 3])
def test_radial_functions_orthogonal(n):
    radius, w = sine_rule(80)
    vals = np.stack([radius**n * sps.eval_jacobi(p, n, -0.5, 1 - 2 * radius**2) for p in range(6)])
    gram = (vals * radius * w) @ vals.T
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-13 * np.max(np.abs(gram))
    # the same functions as exposed by the module
    assert radial_function(n, 2, 0.3) == pytest.approx(
        0.3**n * sps.eval_jacobi(2, n, -0.5, 1 - 0.18) / np.sqrt(1 - 0.09), rel=1e-14)


@pytest.mark.parametrize("n,p,lam", [(0, 0, 3.0), (1, 2, 7.5), (2, 1, 0.4), (0, 5, 40.0)])
def test_hankel_transform_is_spherical_bessel(n, p, lam):
    integrand = lambda t: (radial_function(n, p, np.sin(t)) * sps.jv(n, lam * np.sin(t))
                           * np.sin(t) * np.cos(t))
    quad = integrate.quad(integrand, 0, np.pi / 2, epsabs=1e-14, limit=400)[0]
    assert quad == pytest.approx(jacobi_gamma(p) * sps.spherical_jn(n + 2 * p, lam), abs=1e-12)


# --- closed-form blocks against independent routes ---------------------------------

def test_riesz_even_powers_against_polynomial_moments():
    order = 4
    m0, m2, m4 = (2 * np.pi * radial_moments(0, order, k) for k in (0, 2, 4))
    rho2 = np.outer(m2, m0) + np.outer(m0, m2)
    assert riesz_block(2, 0, order) == pytest.approx(rho2, abs=1e-12)
    # angular average of (x.y)^2 is R^2 R'^2 / 2
    rho4 = np.outer(m4, m0) + 2 * np.outer(m2, m2) + np.outer(m0, m4) + 2 * np.outer(m2, m2)
    assert riesz_block(4, 0, order) == pytest.approx(rho4, abs=1e-11)
    # n = 1 only sees the -2 x.y cross term
    m1 = radial_moments(1, order, 1)
    assert riesz_block(2, 1, order) == pytest.approx(-2 * np.pi**2 * np.outer(m1, m1), abs=1e-12)


def test_riesz_distance_block_against_elliptic_quadrature():
    # the angle integral of |x - y| is 4 (R + R') E(4 R R' / (R + R')^2)
    t, w = np.polynomial.legendre.leggauss(400)
    tau = 0.25 * np.pi * (t + 1.0)
    radius, w = np.sin(tau), 0.25 * np.pi * w
    vals = np.stack([sps.eval_jacobi(p, 0, -0.5, 1 - 2 * radius**2) * radius * w for p in range(3)])
    a, b = radius[:, None], radius[None, :]
    kernel = 2 * np.pi * 4 * (a + b) * sps.ellipe(4 * a * b / (a + b) ** 2)
    assert riesz_block(1, 0, 3) == pytest.approx(vals @ kernel @ vals.T, abs=1e-6)


def test_riesz_power_must_be_positive():
    with pytest.raises(ValueError):
        riesz_block(0, 0, 3)


@pytest.mark.parametrize("n,order", [(0, 8), (1, 6), (2, 6), (0, 32)])
def test_single_layer_closed_form_matches_chord_quadrature(n, order):
    closed = np.diag(_single_layer_diag(n, order))
    quad = single_layer_quadrature(n, order)
    assert np.max(np.abs(closed - quad)) < 1e-11 * np.max(np.abs(closed))


# --- assembled operators -------------------------------------------------------------

@pytest.fixture(scope="module")
def ops():
    return assemble(1.0, Geometry(0.02), TRUNC)


def test_blocks_are_decoupled_and_parities_agree(ops):
    b = ops.basis
    for name in ("Ktilde", "Kinf", "Ktilde_inf"):
        mat = getattr(ops, name)
        mask = np.ones(mat.shape, dtype=bool)
        for blk in b.blocks:
            s = b.block_slice(*blk)
            mask[s, s] = False
        assert np.all(mat[mask] == 0)
        for n in (1, 2):
            assert np.array_equal(ops.block(name, n, "even"), ops.block(name, n, "odd"))
    assert not ops.Ktilde.flags.writeable


def test_kinf_series_in_k_eps():
    # k^2 eps rho / (4 pi) + i k^3 eps^2 rho^2 / (12 pi) + O(eps^3)
    order = TRUNC.radial_order
    for eps in (0.02, 0.01):
        ops = assemble(1.0, Geometry(eps), TRUNC)
        expected = eps / (4 * np.pi) * riesz_block(1, 0, order) + 1j * eps**2 / (12 * np.pi) * riesz_block(2, 0, order)
        assert np.max(np.abs(ops.block("Kinf") - expected)) < eps**3 * np.max(np.abs(riesz_block(3, 0, order)))


def test_face_coupling_is_exponentially_small(ops):
    assert np.max(np.abs(ops.Ktilde_inf)) < 1e-30


def test_ktilde_is_symmetric(ops):
    assert np.allclose(ops.Ktilde, ops.Ktilde.T, rtol=0, atol=1e-13)


def test_effective_moment_plus_minus_agree(ops):
    assert effective_moment("plus", 1.0, ops) == pytest.approx(effective_moment("minus", 1.0, ops), rel=1e-14)


def test_effective_moment_correction_is_second_order():
    alpha = _alpha_raw(TRUNC)
    shifts = [effective_moment("plus", 1.0, assemble(1.0, Geometry(e), TRUNC)) - alpha for e in (0.04, 0.02, 0.01)]
    ratios = [abs(shifts[0] / shifts[1]), abs(shifts[1] / shifts[2])]
    assert ratios == pytest.approx([4.0, 4.0], abs=0.1)


def test_effective_moment_first_order_neumann_term(ops):
    # <(Kt + eps Kinf)^-1 1, 1> = <Kt^-1 1, 1> - eps <Kt^-1 Kinf Kt^-1 1, 1> + O(eps^2 k^4 eps^2)
    kt, kinf = ops.block("Ktilde"), ops.block("Kinf")
    pv = ops.p_vec[ops.basis.block_slice(0)]
    u = np.linalg.solve(kt, pv)
    approx = pv @ u - ops.epsilon * (u @ kinf @ u)
    assert effective_moment("plus", 1.0, ops) == pytest.approx(approx, abs=1e-6)


def test_effective_moment_input_checks(ops):
    with pytest.raises(ValueError):
        effective_moment("up", 1.0, ops)
    with pytest.raises(ValueError):
        effective_moment("plus", 2.0, ops)


def test_expansion_regime_and_poles():
    with pytest.raises(ValueError):
        assemble(30.0, Geometry(0.02), TRUNC)
    with pytest.raises(PoleError):
        plunger_scalars(np.pi, 0.02)
    b1, b2, bt = plunger_scalars(1.0, 0.1)
    assert b1 == pytest.approx(-1j / (2 * np.pi))
    assert b2 == pytest.approx(np.cos(1) / np.sin(1) / (np.pi * 0.01))
    assert bt == pytest.approx(1 / (np.sin(1) * np.pi * 0.01))


# --- alpha -------------------------------------------------------------------------

def test_alpha_free_space_disk():
    for order in (1, 4, 16):
        value = compute_alpha(Truncation(n_max=0, radial_order=order), waveguide=False)
        assert value == pytest.approx(FREE_SPACE_ALPHA, abs=1e-12)


def test_leading_block_free_part_is_real_diagonal():
    blk = leading_block(0, Truncation(n_max=0, radial_order=6), waveguide=False)
    assert np.array_equal(blk, np.diag(np.diag(blk)))


@pytest.mark.slow
def test_alpha_ledger_converges_and_matches_end_correction():
    alpha, rows = alpha_ledger()
    assert [r["radial_order"] for r in rows] == [8, 16, 32]
    assert abs(rows[1]["extrapolated"] - rows[2]["extrapolated"]) < 1e-5
    assert alpha == pytest.approx(-3.8234, abs=1e-4)
    # Norris and Sheng's flanged-tube end correction 0.8216 (independent literature value)
    assert np.pi / abs(alpha) == pytest.approx(0.8216, abs=2e-4)
    # the waveguide wall lowers |alpha| relative to a hole in an infinite screen
    assert abs(alpha) < abs(FREE_SPACE_ALPHA)
