"""
Galerkin discretization of the scaled aperture operators on the unit disk.

Basis per azimuthal order n and parity (cos / sin):

    b_p^n(R) = R^n P_p^{(n, -1/2)}(1 - 2 R^2) / sqrt(1 - R^2),  p = 0..P-1

Its Hankel transform is a spherical Bessel function,
``int_0^1 b_p^n(R) J_n(lam R) R dR = g_p j_{n+2p}(lam)`` with
``g_p = Gamma(p + 1/2) / (p! sqrt(pi))``, so every kernel that is a sum of
waveguide modes or a power of the distance has closed-form matrix entries.

Matrices are block diagonal over (n, parity); cos and sin blocks of the same
order coincide because every kernel is rotation invariant.

Scaled quantities (kappa = k eps):

* ``Ktilde``: -1/(2 pi rho) plus the evanescent waveguide sum
  ``sum -D/sqrt(q^2 - kappa^2) Phi Phi`` (tail past m_max by Kummer's method)
* ``Kinf``: smooth exterior remainder plus the exponentially small
  cavity end correction, divided by eps
* ``Ktilde_inf``: coupling between the two faces through evanescent modes,
  divided by eps
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from scipy import special as sps

from .greens import EIGEN_TOL, Geometry, PoleError, Truncation
from .special import angular_weight, q_roots, radial_norm, spherical_j

EXPANSION_LIMIT = 0.5
FREE_SPACE_ALPHA = -4.0
# converged value of alpha, see alpha_ledger()
ALPHA_REFERENCE = -3.8234


class ConvergenceError(RuntimeError):
    """A truncation study failed to settle."""


# ---------------------------------------------------------------------------
# basis

def jacobi_gamma(p):
    """Hankel-transform coefficient ``Gamma(p + 1/2) / (p! sqrt(pi))``."""
    p = np.asarray(p, dtype=float)
    return np.exp(sps.gammaln(p + 0.5) - sps.gammaln(p + 1.0)) / math.sqrt(math.pi)


def radial_function(n: int, p: int, radius):
    """Radial factor ``b_p^n(R)``; infinite at R = 1."""
    radius = np.asarray(radius, dtype=float)
    with np.errstate(divide="ignore"):
        return radius**n * sps.eval_jacobi(p, n, -0.5, 1.0 - 2.0 * radius**2) / np.sqrt(1.0 - radius**2)


@dataclass(frozen=True)
class ApertureBasis:
    """Edge-weighted Jacobi basis for all orders n <= n_max and both parities."""

    n_max: int
    radial_order: int
    blocks: Tuple[Tuple[int, str], ...] = field(init=False)

    def __post_init__(self):
        if self.radial_order < 1:
            raise ValueError("radial_order must be >= 1")
        blocks = [(0, "even")]
        for n in range(1, self.n_max + 1):
            blocks += [(n, "even"), (n, "odd")]
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def size(self) -> int:
        return len(self.blocks) * self.radial_order

    def block_slice(self, n: int, parity: str = "even") -> slice:
        i = self.blocks.index((n, parity))
        return slice(i * self.radial_order, (i + 1) * self.radial_order)

    def degrees(self, n: int) -> np.ndarray:
        """Spherical Bessel orders ``l = n + 2p`` of the block."""
        return n + 2 * np.arange(self.radial_order)

    def moments(self) -> np.ndarray:
        """``<b, 1>`` over the disk: 2 pi for b_0^0, zero otherwise."""
        out = np.zeros(self.size)
        out[self.block_slice(0)][0] = 2.0 * np.pi
        return out

    def evaluate(self, n: int, parity: str, radius, theta) -> np.ndarray:
        """All P functions of a block at polar points; shape (P, *points)."""
        ang = np.cos(n * np.asarray(theta)) if parity == "even" else np.sin(n * np.asarray(theta))
        return np.stack([radial_function(n, p, radius) * ang for p in range(self.radial_order)])

    def gram(self, n: int, order: int = 64) -> np.ndarray:
        """Radial Gram matrix under the weight ``sqrt(1 - R^2) R``."""
        t, w = np.polynomial.legendre.leggauss(order)
        radius = 0.5 * (t + 1.0)
        w = 0.5 * w
        vals = np.stack([radial_function(n, p, radius) for p in range(self.radial_order)])
        return (vals * (np.sqrt(1.0 - radius**2) * radius * w)) @ vals.T


def build_basis(trunc: Truncation) -> ApertureBasis:
    return ApertureBasis(trunc.n_max, trunc.radial_order)


# ---------------------------------------------------------------------------
# closed-form blocks (all kappa independent pieces are cached)

@functools.lru_cache(maxsize=None)
def _single_layer_diag(n: int, order: int) -> np.ndarray:
    """Diagonal of the -1/(2 pi rho) block (the block is exactly diagonal)."""
    l = n + 2 * np.arange(order)
    g = jacobi_gamma(np.arange(order))
    out = -angular_weight(n) * g**2 * (np.pi / 2.0) / (2 * l + 1)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=None)
def riesz_block(power: int, n: int, order: int) -> np.ndarray:
    """Galerkin block of the kernel ``rho^power`` (power >= 1)."""
    if power < 1:
        raise ValueError("power must be >= 1")
    a = -float(power)
    sig = 2.0 - a
    l = n + 2 * np.arange(order)
    g = jacobi_gamma(np.arange(order))
    l1 = l[:, None].astype(float)
    l2 = l[None, :].astype(float)
    half_sum = 0.5 * (l1 + l2)
    val = (2.0 ** (1.0 - a) * sps.gamma(1.0 - a / 2.0) * sps.poch(a / 2.0, half_sum)
           * sps.gamma(sig) / 2.0**sig
           * sps.rgamma((l2 - l1 + sig + 1.0) / 2.0)
           * sps.rgamma((l1 + l2 + sig + 2.0) / 2.0)
           * sps.rgamma((l1 - l2 + sig + 1.0) / 2.0))
    out = 2.0 * np.pi * angular_weight(n) * np.outer(g, g) * (np.pi / 2.0) * val
    out.setflags(write=False)
    return out


def _exterior_remainder(kappa: complex, n: int, order: int) -> np.ndarray:
    """Block of ``-(1/2pi) sum_{j>=2} (i kappa)^j rho^(j-1) / j!``."""
    out = np.zeros((order, order), dtype=complex)
    coef = 1j * kappa
    for j in range(2, 80):
        coef = coef * (1j * kappa) / j
        if abs(coef) * 2.0 ** (j - 1) < 1e-18 and j > 3:
            break
        out -= coef / (2.0 * np.pi) * riesz_block(j - 1, n, order)
    return out


@functools.lru_cache(maxsize=None)
def _modal_data(n: int, order: int, m_max: int):
    """Evanescent roots, D, and Hankel projections ``w_n g_p j_{n+2p}(q)``."""
    q = np.asarray(q_roots(n, m_max + 1), dtype=float)
    cut = 0.5 * (q[m_max - 1] + q[m_max])
    q = q[:m_max]
    if n == 0:
        q = q[1:]  # the plunger mode is carried by the rank-one scalars
    big_d = 1.0 / (angular_weight(n) * radial_norm(q, n))
    l = n + 2 * np.arange(order)
    g = jacobi_gamma(np.arange(order))
    proj = angular_weight(n) * g[None, :] * spherical_j(l[None, :], q[:, None])
    for arr in (q, big_d, proj):
        arr.setflags(write=False)
    return q, big_d, proj, cut


@functools.lru_cache(maxsize=None)
def _kummer_tail(n: int, order: int, m_max: int) -> np.ndarray:
    """Modal terms past m_max replaced by the Hankel integral they sample.

    For large q the summand tends to ``-pi w_n g g j_l(q) j_l'(q)`` with root
    spacing pi, so the missing tail is ``-w_n g g int_cut^inf j_l j_l'``.
    """
    _, _, _, cut = _modal_data(n, order, m_max)
    l = n + 2 * np.arange(order)
    g = jacobi_gamma(np.arange(order))
    nodes, weights = np.polynomial.legendre.leggauss(int(cut) + 200)
    lam = 0.5 * cut * (nodes + 1.0)
    weights = 0.5 * cut * weights
    jl = spherical_j(l[None, :], lam[:, None])
    partial = (jl.T * weights) @ jl
    full = np.diag(np.pi / (2.0 * (2 * l + 1)))
    out = -angular_weight(n) * np.outer(g, g) * (full - partial)
    out.setflags(write=False)
    return out


def _modal_sum(n: int, order: int, m_max: int, kappa: complex, eps: float):
    """Return the evanescent part of Ktilde and the two exponentially small blocks."""
    q, big_d, proj, _ = _modal_data(n, order, m_max)
    root = np.sqrt(q.astype(complex) ** 2 - kappa**2)
    decay = np.exp(-root / eps)
    wt_lead = -big_d / root
    # coth(beta) - 1 and 1/sinh(beta) in forms that never overflow
    denom = 1.0 - decay**2
    wt_end = wt_lead * 2.0 * decay**2 / denom
    wt_cross = wt_lead * 2.0 * decay / denom
    lead = (proj.T * wt_lead) @ proj + _kummer_tail(n, order, m_max)
    end = (proj.T * wt_end) @ proj
    cross = (proj.T * wt_cross) @ proj
    return lead, end, cross


def leading_block(n: int, trunc: Truncation, kappa: complex = 0.0, waveguide: bool = True) -> np.ndarray:
    """Ktilde block of order n; ``waveguide=False`` keeps only -1/(2 pi rho)."""
    out = np.diag(_single_layer_diag(n, trunc.radial_order)).astype(complex)
    if waveguide:
        out += _modal_sum(n, trunc.radial_order, trunc.m_max, kappa, 1.0)[0]
    return out


# ---------------------------------------------------------------------------
# assembled operators

@dataclass(frozen=True)
class OperatorSet:
    """Galerkin matrices of the scaled operators at one (k, eps)."""

    k: complex
    epsilon: float
    basis: ApertureBasis
    Ktilde: np.ndarray
    Kinf: np.ndarray
    Ktilde_inf: np.ndarray
    p_vec: np.ndarray
    beta1: complex
    beta2: complex
    beta_tilde: complex

    def block(self, name: str, n: int = 0, parity: str = "even") -> np.ndarray:
        s = self.basis.block_slice(n, parity)
        return getattr(self, name)[s, s]

    def lhs(self, sign: int, n: int = 0, parity: str = "even", rank_one: bool = True) -> np.ndarray:
        """Block of ``eps L^(+-)``, optionally with its rank-one scalar term."""
        eps = self.epsilon
        mat = (self.block("Ktilde", n, parity) + eps * self.block("Kinf", n, parity)
               + sign * eps * self.block("Ktilde_inf", n, parity))
        if rank_one:
            pv = self.p_vec[self.basis.block_slice(n, parity)]
            scalar = eps * (self.beta1 + self.beta2 + sign * self.beta_tilde)
            mat = mat + scalar * np.outer(pv, pv)
        return mat


def plunger_scalars(k: complex, eps: float) -> Tuple[complex, complex, complex]:
    """``(beta1, beta2, beta_tilde)`` multiplying the rank-one term."""
    k = complex(k)
    sin_k = np.sin(k)
    if abs(sin_k) < EIGEN_TOL or abs(k) < EIGEN_TOL:
        raise PoleError("k is within 1e-8 of a plunger-mode cavity eigenvalue")
    d10 = 1.0 / (np.pi * eps**2)
    return -1j * k / (2.0 * np.pi), np.cos(k) / sin_k / k * d10, d10 / (k * sin_k)


def assemble(k, geom: Geometry, trunc: Truncation) -> OperatorSet:
    k = complex(k)
    eps = geom.epsilon
    kappa = k * eps
    if abs(kappa) > EXPANSION_LIMIT:
        raise ValueError(f"|k| eps = {abs(kappa):.3g} exceeds the expansion regime ({EXPANSION_LIMIT})")
    basis = build_basis(trunc)
    beta1, beta2, beta_tilde = plunger_scalars(k, eps)
    size = basis.size
    kt = np.zeros((size, size), dtype=complex)
    kinf = np.zeros_like(kt)
    kti = np.zeros_like(kt)
    order = trunc.radial_order
    for n in range(trunc.n_max + 1):
        lead, end, cross = _modal_sum(n, order, trunc.m_max, kappa, eps)
        lead = lead + np.diag(_single_layer_diag(n, order))
        smooth = (_exterior_remainder(kappa, n, order) + end) / eps
        cross = cross / eps
        parities = ("even",) if n == 0 else ("even", "odd")
        for parity in parities:
            s = basis.block_slice(n, parity)
            kt[s, s] = lead
            kinf[s, s] = smooth
            kti[s, s] = cross
    for arr in (kt, kinf, kti):
        arr.setflags(write=False)
    return OperatorSet(k, eps, basis, kt, kinf, kti, basis.moments(), beta1, beta2, beta_tilde)


def effective_moment(sign: str, k, ops: OperatorSet) -> complex:
    """``<(eps L^(+-))^{-1} 1, 1>`` on the axisymmetric block."""
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'plus' or 'minus'")
    if not np.isclose(complex(k), ops.k):
        raise ValueError("k does not match the assembled operators")
    mat = ops.lhs(1 if sign == "plus" else -1, rank_one=False)
    pv = ops.p_vec[ops.basis.block_slice(0)]
    return complex(pv @ np.linalg.solve(mat, pv))


# ---------------------------------------------------------------------------
# alpha

def _alpha_raw(trunc: Truncation, waveguide: bool = True) -> float:
    mat = leading_block(0, trunc, 0.0, waveguide).real
    rhs = np.zeros(trunc.radial_order)
    rhs[0] = 2.0 * np.pi
    return float(rhs @ np.linalg.solve(mat, rhs))


def _aitken(a0: float, a1: float, a2: float) -> float:
    d1, d2 = a1 - a0, a2 - a1
    if d2 == d1:
        return a2
    return a2 - d2 * d2 / (d2 - d1)


@dataclass(frozen=True)
class AlphaEstimate:
    """Extrapolated alpha with the partial values it came from."""

    value: float
    radial_order: int
    m_levels: Tuple[int, ...]
    raw: Tuple[float, ...]


def electrified_disk(radial_order: int = 32):
    """Solve the free-space single-layer equation with unit data on the disk.

    Returns ``(moment, density)`` where ``density(R)`` evaluates the solution;
    the exact answer is ``-(2/pi) / sqrt(1 - R^2)`` with moment -4.
    """
    trunc = Truncation(n_max=0, radial_order=radial_order)
    mat = leading_block(0, trunc, 0.0, waveguide=False).real
    rhs = np.zeros(radial_order)
    rhs[0] = 2.0 * np.pi
    coef = np.linalg.solve(mat, rhs)

    def density(radius):
        vals = np.stack([radial_function(0, p, radius) for p in range(radial_order)])
        return coef @ vals

    return float(rhs @ coef), density


def alpha_estimate(trunc: Truncation) -> AlphaEstimate:
    """Aitken extrapolation of alpha over m_max/4, m_max/2, m_max."""
    levels = tuple(max(4, trunc.m_max // d) for d in (4, 2, 1))
    raw = tuple(_alpha_raw(trunc.replace(m_max=m)) for m in levels)
    return AlphaEstimate(_aitken(*raw), trunc.radial_order, levels, raw)


def compute_alpha(trunc: Truncation, waveguide: bool = True) -> float:
    """Constant ``<Ktilde0^{-1} 1, 1>`` of the k-independent leading kernel.

    With ``waveguide=False`` only the free -1/(2 pi rho) kernel is kept and the
    exact answer is -4.
    """
    if not waveguide:
        return _alpha_raw(trunc, waveguide=False)
    return alpha_estimate(trunc).value


def alpha_ledger(schedule=((8, 50), (16, 100), (32, 200)), drift_limit: float = 1e-3):
    """Extrapolation table over joint (radial_order, m_max) refinements.

    Returns ``(alpha, rows)``; each row holds the cutoffs, the raw values and
    the extrapolated value.  Raises ConvergenceError when consecutive
    extrapolated values drift by more than ``drift_limit``.
    """
    rows: List[Dict] = []
    for order, m_max in schedule:
        est = alpha_estimate(Truncation(m_max=m_max, n_max=0, radial_order=order))
        rows.append({
            "radial_order": order,
            "m_levels": list(est.m_levels),
            "raw": list(est.raw),
            "extrapolated": est.value,
        })
    for a, b in zip(rows, rows[1:]):
        if abs(a["extrapolated"] - b["extrapolated"]) > drift_limit:
            raise ConvergenceError(
                f"alpha drifted by {abs(a['extrapolated'] - b['extrapolated']):.2e} "
                f"between radial_order {a['radial_order']} and {b['radial_order']}"
            )
    return rows[-1]["extrapolated"], rows


# ---------------------------------------------------------------------------
# quadrature reference for the single-layer block

def single_layer_quadrature(n: int, order: int, nodes: int = 48) -> np.ndarray:
    """-1/(2 pi rho) block by direct integration, independent of the Hankel route.

    The inner integral runs along full chords through the outer point, where the
    polar Jacobian cancels 1/rho and the basis edge factor becomes the
    Chebyshev weight of the chord.  The outer radius uses R = sin(tau).
    """
    deg = n + 2 * (order - 1)
    n_chord = max(nodes, deg // 2 + 2)
    n_ang = max(nodes, 2 * deg + 4)
    tau, w_tau = np.polynomial.legendre.leggauss(max(nodes, deg + 4))
    tau = 0.25 * np.pi * (tau + 1.0)
    w_tau = 0.25 * np.pi * w_tau
    radius = np.sin(tau)
    phi = np.pi * np.arange(n_ang) / n_ang
    x_cheb = np.cos(np.pi * (np.arange(n_chord) + 0.5) / n_chord)

    r = radius[:, None, None]
    c, s = np.cos(phi)[None, :, None], np.sin(phi)[None, :, None]
    centre = -r * c
    half = np.sqrt(1.0 - (r * s) ** 2)
    t = centre + half * x_cheb[None, None, :]
    yx = r + t * c
    yy = t * s
    rho2 = yx**2 + yy**2
    ang = np.real((yx + 1j * yy) ** n)
    inner = np.empty((order,) + radius.shape)
    for p in range(order):
        poly = ang * sps.eval_jacobi(p, n, -0.5, 1.0 - 2.0 * rho2)
        # Chebyshev weight pi/N per node, trapezoid pi/N_ang in the chord angle
        inner[p] = poly.sum(axis=(1, 2)) * (np.pi / n_chord) * (np.pi / n_ang)
    # outer: b_q(R) R dR = R^n P_q(1 - 2R^2) R dtau
    outer = np.stack([radius**n * sps.eval_jacobi(q, n, -0.5, 1.0 - 2.0 * radius**2) * radius * w_tau
                      for q in range(order)])
    return -angular_weight(n) / (2.0 * np.pi) * outer @ inner.T
