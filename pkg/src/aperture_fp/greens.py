"""
Green's functions of the three subdomains and the closed-form axial sums.

Conventions: ``Delta g + k^2 g = delta`` with the free kernel
``phi(k; r) = -exp(i k r) / (4 pi r)``.  The plate occupies ``0 <= z <= 1``
and the hole is the cylinder ``rho <= eps``.  Points are Cartesian triples.

The cavity function ``g_i`` is available in two independent forms:

* ``triple_sum``: waveguide modes times the Neumann cosine series in z,
  the j-series accelerated with Bernoulli-polynomial tails;
* ``decomposed``: semi-infinite waveguide part (evanescent modes), the
  propagating plunger part, and the finite-length correction, all with
  closed-form z dependence.
"""
from __future__ import annotations

import math
import warnings
from fractions import Fraction
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy import special as sps

from .special import bessel_j, mode_table

Point = Sequence[float]

NEAR_POINT_TOL = 1e-10
EIGEN_TOL = 1e-8


class ConvergenceWarning(UserWarning):
    """A modal series was truncated before it settled."""


class PoleError(ZeroDivisionError):
    """Evaluation too close to a pole of a closed form or a cavity eigenvalue."""


@dataclass(frozen=True)
class Geometry:
    """Hole radius ``epsilon``; the plate thickness is fixed to 1."""

    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def thickness(self) -> float:
        return 1.0


@dataclass(frozen=True)
class Truncation:
    """Cutoffs for every series and basis in the package.

    m_max, n_max : radial and azimuthal waveguide cutoffs
    j_max        : explicit terms of the axial cosine series
    radial_order : Galerkin functions per azimuthal order and parity
    quad_order   : nodes of the reference quadratures
    """

    m_max: int = 200
    n_max: int = 2
    j_max: int = 4000
    radial_order: int = 16
    quad_order: int = 48

    def __post_init__(self):
        for name in ("m_max", "j_max", "radial_order", "quad_order"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.n_max < 0:
            raise ValueError("n_max must be >= 0")

    def replace(self, **changes) -> "Truncation":
        fields = dict(self.__dict__)
        fields.update(changes)
        return Truncation(**fields)


def axial_rate(alpha, k) -> complex:
    """``beta = sqrt(alpha^2 - k^2)`` on the principal branch.

    Negative real arguments map to ``+i sqrt(x)`` so that the plunger mode
    gets ``beta = i k`` for real ``k > 0``.
    """
    w = np.asarray(np.square(alpha) - np.square(complex(k)), dtype=complex)
    # drop a negative zero imaginary part so the cut is approached from above
    w = w.real + 1j * (w.imag + 0.0)
    return np.sqrt(w)


def _phi(k, dist):
    return -np.exp(1j * k * dist) / (4.0 * np.pi * dist)


def eval_ge(k, r: Point, r_src: Point) -> complex:
    """Half-space Neumann Green's function above (z >= 1) or below (z <= 0)."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(r_src, dtype=float)
    if r[2] >= 1.0 and s[2] >= 1.0:
        face = 1.0
    elif r[2] <= 0.0 and s[2] <= 0.0:
        face = 0.0
    else:
        raise ValueError("eval_ge needs both points in the same half-space")
    dist = np.linalg.norm(r - s)
    if dist < NEAR_POINT_TOL:
        raise PoleError("coincident points in eval_ge")
    mirror = r.copy()
    mirror[2] = 2.0 * face - r[2]
    dist_img = np.linalg.norm(mirror - s)
    return complex(_phi(k, dist) + _phi(k, dist_img))


# ---------------------------------------------------------------------------
# modal helpers

def _cyl(p: Point):
    x, y, z = (float(c) for c in p)
    return math.hypot(x, y), math.atan2(y, x), z


def _check_in_hole(p: Point, eps: float, z_max: float = 1.0):
    rho, _, z = _cyl(p)
    if rho > eps * (1 + 1e-12) or z > z_max + 1e-12 or (z_max == 1.0 and z < -1e-12):
        raise ValueError(f"point {tuple(p)} is outside the hole of radius {eps}")


def _transverse_products(r: Point, r_src: Point, eps: float, trunc: Truncation):
    """Per-mode ``d * sum_xi phi(r) phi(r_src)`` and the axial decay constants."""
    m, n, q, big_d = mode_table(trunc.m_max, trunc.n_max)
    rho1, th1, _ = _cyl(r)
    rho2, th2, _ = _cyl(r_src)
    prod = np.empty(q.shape)
    for order in range(trunc.n_max + 1):
        sel = n == order
        # bulk evaluation: scipy is cross-checked against bessel_j in the tests
        j1 = sps.jv(order, q[sel] * rho1 / eps)
        j2 = sps.jv(order, q[sel] * rho2 / eps)
        # cos*cos + sin*sin collapses to cos of the angle difference
        prod[sel] = j1 * j2 * math.cos(order * (th1 - th2))
    d = big_d / eps**2
    return m, n, q, d * prod


def _g02_axial(beta, z, zs):
    """Finite-length correction of the 1D axial Green's function."""
    a = beta * (1.0 - z)
    b = beta * (1.0 - zs)
    num = (np.exp(a + b - 2 * beta) + np.exp(a - b - 2 * beta)
           + np.exp(b - a - 2 * beta) + np.exp(-a - b - 2 * beta))
    return -num / (2.0 * beta * (1.0 - np.exp(-2.0 * beta)))


def _g01_axial(beta, z, zs):
    return -(np.exp(-beta * abs(z + zs - 2.0)) + np.exp(-beta * abs(z - zs))) / (2.0 * beta)


def eval_g01(k, r: Point, r_src: Point, geom: Geometry, trunc: Truncation,
             return_tail: bool = False):
    """Semi-infinite waveguide Green's function without the plunger mode.

    With ``return_tail`` the magnitude of the last retained radial term is
    returned alongside the value.
    """
    eps = geom.epsilon
    for p in (r, r_src):
        _check_in_hole(p, eps)
    _, _, z = _cyl(r)
    _, _, zs = _cyl(r_src)
    m, n, q, prod = _transverse_products(r, r_src, eps, trunc)
    keep = ~((m == 1) & (n == 0))
    beta = axial_rate(q[keep] / eps, k)
    terms = prod[keep] * _g01_axial(beta, z, zs)
    value = complex(np.sum(terms))
    last = m[keep] == trunc.m_max
    tail = float(np.max(np.abs(terms[last]))) if np.any(last) else 0.0
    if abs(z - zs) < 1e-14 and tail > 1e-10 * max(abs(value), 1e-300):
        warnings.warn(
            f"g01 modal sum not settled at m_max={trunc.m_max}: last term {tail:.3e} "
            f"vs sum {abs(value):.3e} (on-interface evaluation converges slowly)",
            ConvergenceWarning,
            stacklevel=2,
        )
    return (value, tail) if return_tail else value


# ---------------------------------------------------------------------------
# cavity Green's function

_BERNOULLI_POLY = {
    1: (Fraction(1), Fraction(-1), Fraction(1, 6)),
    2: (Fraction(1), Fraction(-2), Fraction(1), Fraction(0), Fraction(-1, 30)),
}


def _cosine_power_sum(s: int, theta: float) -> float:
    """sum_{j>=1} cos(j pi theta) / j^(2s) from the Bernoulli polynomial.

    The polynomial is evaluated in exact rational arithmetic; a float
    evaluation loses about 1e-12, which the callers amplify by K^(2s-2).
    """
    x = Fraction(float(np.mod(float(theta), 2.0))) / 2
    poly = Fraction(0)
    for c in _BERNOULLI_POLY[s]:
        poly = poly * x + c
    scale = (-1) ** (s - 1) * (2.0 * np.pi) ** (2 * s) / (2.0 * math.factorial(2 * s))
    return scale * float(poly)


def _cosine_tail(s: int, theta: float, j_max: int) -> float:
    j = np.arange(1, j_max + 1)
    partial = math.fsum(np.cos(np.pi * j * theta) / j ** (2.0 * s))
    return _cosine_power_sum(s, theta) - partial


def _axial_series(k2, z, zs, j_max: int):
    """sum_j eps_j cos(j pi z) cos(j pi z') / (K^2 - (j pi)^2) per mode.

    ``k2`` is the array of ``K^2 = k^2 - alpha_mn^2``.  Terms past ``j_max``
    use the expansion in ``K^2 / (j pi)^2`` with exact cosine tails.
    """
    j = np.arange(0, j_max + 1)
    lam = (np.pi * j) ** 2
    weight = np.where(j == 0, 1.0, 2.0) * np.cos(np.pi * j * z) * np.cos(np.pi * j * zs)
    _guard_eigen(k2)
    gap = k2[:, None] - lam[None, :]
    explicit = (1.0 / gap) @ weight
    tail = np.zeros_like(explicit)
    for s in (1, 2):
        t = _cosine_tail(s, z - zs, j_max) + _cosine_tail(s, z + zs, j_max)
        tail -= k2 ** (s - 1) / np.pi ** (2 * s) * t
    return explicit + tail


def _guard_eigen(k2):
    """Raise when some K^2 sits within EIGEN_TOL of (j pi)^2."""
    k2 = np.asarray(k2, dtype=complex)
    j = np.rint(np.sqrt(np.maximum(k2.real, 0.0)) / np.pi)
    gap = np.minimum(np.abs(k2 - (np.pi * j) ** 2), np.abs(k2 - (np.pi * (j + 1)) ** 2))
    if np.any(gap < EIGEN_TOL):
        raise PoleError("k is within 1e-8 of a Neumann cavity eigenvalue")


def eval_gi(k, r: Point, r_src: Point, geom: Geometry, trunc: Truncation,
            form: str = "decomposed") -> complex:
    """Cavity Green's function in either ``triple_sum`` or ``decomposed`` form."""
    eps = geom.epsilon
    for p in (r, r_src):
        _check_in_hole(p, eps)
    if np.linalg.norm(np.subtract(r, r_src)) < NEAR_POINT_TOL:
        raise PoleError("coincident points in eval_gi")
    _, _, z = _cyl(r)
    _, _, zs = _cyl(r_src)
    m, n, q, prod = _transverse_products(r, r_src, eps, trunc)
    k = complex(k)
    if form == "triple_sum":
        k2 = k * k - (q / eps) ** 2
        return complex(np.sum(prod * _axial_series(k2, z, zs, trunc.j_max)))
    if form != "decomposed":
        raise ValueError(f"unknown form {form!r}")
    beta = axial_rate(q / eps, k)
    _guard_eigen(k * k - (q / eps) ** 2)
    plunger = (m == 1) & (n == 0)
    g01 = np.sum(prod[~plunger] * _g01_axial(beta[~plunger], z, zs))
    g0p = np.sum(prod[plunger] * _g01_axial(beta[plunger], z, zs))
    g02 = np.sum(prod * _g02_axial(beta, z, zs))
    return complex(g01 + g0p + g02)


def cavity_axial(beta, z, zs):
    """Closed-form 1D Neumann Green's function of ``d^2/dz^2 - beta^2`` on [0, 1]."""
    lo, hi = min(z, zs), max(z, zs)
    beta = np.asarray(beta, dtype=complex)
    # cosh(b lo) cosh(b (1 - hi)) / sinh(b) with every exponential bounded
    num = (np.exp(beta * (lo - hi)) + np.exp(-beta * (lo + hi))
           + np.exp(beta * (lo + hi - 2.0)) + np.exp(-beta * (2.0 - hi + lo)))
    return -0.5 * num / (beta * (1.0 - np.exp(-2.0 * beta)))


# ---------------------------------------------------------------------------
# axial identities

_BOOLE = (0.5, -0.25, 0.0, 1.0 / 48.0, 0.0, -1.0 / 480.0, 0.0, 17.0 / 80640.0)


def _alternating_tail(kk: complex, start: int) -> complex:
    """sum_{j>=start} (-1)^j 2/(K^2 - (pi j)^2) by Boole summation."""
    x = float(start)
    total = 0j
    for order, c in enumerate(_BOOLE):
        if c == 0.0:
            continue
        fac = math.factorial(order) * np.pi**order
        deriv = (fac / (kk - np.pi * x) ** (order + 1)
                 + (-1) ** order * fac / (kk + np.pi * x) ** (order + 1)) / kk
        total += c * deriv
    return (-1) ** start * total


def _fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def axial_sum_identities(k, q_over_eps: float = 0.0, j_terms: int = 2000) -> Tuple[complex, complex]:
    """Accelerated partial sum and closed form of the alternating axial series.

    With ``K^2 = k^2 - (q/eps)^2`` both sides equal
    ``sum_{j>=1} 2(-1)^j/(K^2 - (j pi)^2) + 1/K^2 = 1/(K sin K)``; for
    ``q/eps > k`` the right side is ``-1/(B sinh B)`` with ``B = sqrt(-K^2)``.
    """
    k = complex(k)
    k2 = k * k - q_over_eps**2
    kk = np.sqrt(k2 + 0j)
    if abs(kk) < EIGEN_TOL or abs(np.sin(kk)) < EIGEN_TOL:
        raise PoleError("identity evaluated at a pole (K sin K = 0)")
    j = np.arange(1, j_terms + 1)
    terms = 2.0 * (-1.0) ** j / (k2 - (np.pi * j) ** 2)
    lhs = _fsum_complex(np.concatenate((terms, [1.0 / k2]))) + _alternating_tail(kk, j_terms + 1)
    if q_over_eps > abs(k.real):
        b = np.sqrt(-k2)
        rhs = -1.0 / (b * np.sinh(b))
    else:
        rhs = 1.0 / (kk * np.sin(kk))
    return complex(lhs), complex(rhs)
