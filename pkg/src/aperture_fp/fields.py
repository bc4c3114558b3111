"""
Aperture fluxes from the full Galerkin system, and the fields they generate.

Conventions
-----------
The incident wave ``exp(i k (d1 x - d3 (z - 1)))`` travels downward onto the
upper face; its phase is referenced at the centre of the upper aperture.
``Psi1 = -du/dz`` on the upper aperture and ``Psi2 = +du/dz`` on the lower
one, both as functions of the scaled coordinate X = x / eps.  The moments
``m1, m2`` are their integrals over the unit disk.

The symmetric and antisymmetric combinations solve

    (eps L^+ + rank one) Psi+ = f / (2 eps),   (eps L^- + rank one) Psi- = f / (2 eps)

with ``f = 2 exp(i k eps d1 X1)`` and ``Psi1 = Psi+ + Psi-``, ``Psi2 = Psi+ - Psi-``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special as sps

from .greens import EIGEN_TOL, Geometry, PoleError, Truncation, eval_ge
from .operators import OperatorSet, _modal_data, assemble, jacobi_gamma
from .special import angular_weight

MODE_CUT = 60.0  # keep evanescent modes with q / eps <= MODE_CUT in the hole


@dataclass(frozen=True)
class Incidence:
    """Plane wave with direction ``(d1, 0, -d3)``."""

    d1: float = 0.0
    k: complex = 1.0

    def __post_init__(self):
        if not 0.0 <= self.d1 <= 1.0:
            raise ValueError("d1 must lie in [0, 1]")

    @property
    def d3(self) -> float:
        return math.sqrt(1.0 - self.d1**2)

    def trace(self, eps: float, x1) -> np.ndarray:
        """Incident plus reflected field on the upper face at scaled X1."""
        return 2.0 * np.exp(1j * self.k * eps * self.d1 * np.asarray(x1))


def trace_vector(ops: OperatorSet, inc: Incidence) -> np.ndarray:
    """Galerkin projection ``<f, b>`` of the trace on every basis function."""
    basis = ops.basis
    out = np.zeros(basis.size, dtype=complex)
    arg = complex(inc.k) * ops.epsilon * inc.d1
    g = jacobi_gamma(np.arange(basis.radial_order))
    for n, parity in basis.blocks:
        if parity == "odd":
            continue  # the trace is even in theta
        l = basis.degrees(n)
        neumann = 1.0 if n == 0 else 2.0
        jl = sps.spherical_jn(l, arg if arg.imag else arg.real)
        out[basis.block_slice(n, parity)] = 2.0 * neumann * (1j**n) * angular_weight(n) * g * jl
    return out


@dataclass(frozen=True)
class ApertureSolution:
    k: complex
    epsilon: float
    trunc: Truncation
    ops: OperatorSet
    psi1: np.ndarray
    psi2: np.ndarray
    m1: complex
    m2: complex


def solve_system(k, geom: Geometry, trunc: Truncation, inc: Optional[Incidence] = None,
                 method: str = "split", ops: Optional[OperatorSet] = None) -> ApertureSolution:
    """Aperture fluxes for a plane wave of wavenumber k.

    ``method="split"`` solves the two half-size symmetric/antisymmetric
    systems; ``method="direct"`` solves the coupled two-aperture system.
    """
    k = complex(k)
    inc = Incidence(0.0, k) if inc is None else Incidence(inc.d1, k)
    if ops is None:
        ops = assemble(k, geom, trunc)
    eps = geom.epsilon
    rhs = trace_vector(ops, inc) / (2.0 * eps)
    psi1 = np.zeros(ops.basis.size, dtype=complex)
    psi2 = np.zeros_like(psi1)
    for n, parity in ops.basis.blocks:
        s = ops.basis.block_slice(n, parity)
        f = rhs[s]
        if not np.any(f):
            continue
        if method == "split":
            plus = _solve(ops.lhs(1, n, parity), f)
            minus = _solve(ops.lhs(-1, n, parity), f)
            psi1[s], psi2[s] = plus + minus, plus - minus
        elif method == "direct":
            a = 0.5 * (ops.lhs(1, n, parity) + ops.lhs(-1, n, parity))
            b = 0.5 * (ops.lhs(1, n, parity) - ops.lhs(-1, n, parity))
            big = np.block([[a, b], [b, a]])
            both = _solve(big, np.concatenate((2.0 * f, np.zeros_like(f))))
            psi1[s], psi2[s] = both[: f.size], both[f.size:]
        else:
            raise ValueError("method must be 'split' or 'direct'")
    m1 = complex(ops.p_vec @ psi1)
    m2 = complex(ops.p_vec @ psi2)
    return ApertureSolution(k, eps, trunc, ops, psi1, psi2, m1, m2)


def _solve(mat, rhs):
    if np.linalg.cond(mat) > 1e14:
        raise PoleError("aperture system is numerically singular (cavity eigenvalue?)")
    return np.linalg.solve(mat, rhs)


# ---------------------------------------------------------------------------
# cavity modes

@dataclass(frozen=True)
class CavityModeAmplitudes:
    """Plunger pair ``(a10, b10)`` and evanescent pairs per retained mode.

    In the hole ``u = a10 cos(kz) + b10 cos(k(1-z))
    + sum Phi (a exp(-gamma (1-z)) + b exp(-gamma z))``; ``a`` belongs to the
    upper aperture and ``b`` to the lower one.
    """

    a10: complex
    b10: complex
    n: np.ndarray
    parity: np.ndarray
    q: np.ndarray
    gamma: np.ndarray
    a: np.ndarray
    b: np.ndarray


def cavity_amplitudes(sol: ApertureSolution, k=None, geom: Optional[Geometry] = None,
                      trunc: Optional[Truncation] = None) -> CavityModeAmplitudes:
    k = sol.k if k is None else complex(k)
    eps = sol.epsilon if geom is None else geom.epsilon
    trunc = sol.trunc if trunc is None else trunc
    sin_k = np.sin(k)
    if abs(sin_k) < EIGEN_TOL:
        raise PoleError("sin k = 0: plunger amplitudes undefined")
    a10 = sol.m1 / (np.pi * k * sin_k)
    b10 = sol.m2 / (np.pi * k * sin_k)
    rows = {key: [] for key in ("n", "parity", "q", "gamma", "a", "b")}
    basis = sol.ops.basis
    for n, parity in basis.blocks:
        q, big_d, proj, _ = _modal_data(n, basis.radial_order, trunc.m_max)
        s = basis.block_slice(n, parity)
        p1 = proj @ sol.psi1[s]
        p2 = proj @ sol.psi2[s]
        gam = np.sqrt((q / eps) ** 2 - k * k + 0j)
        decay = np.exp(-gam)
        denom = 1.0 - decay**2
        if np.any(np.abs(gam) < EIGEN_TOL):
            raise PoleError("gamma_mn = 0 for a retained mode")
        # d_mn times the eps^2 area factor of the scaled disk is D_mn
        rows["a"].append(-(big_d / gam) * (p1 + decay * p2) / denom)
        rows["b"].append(-(big_d / gam) * (p2 + decay * p1) / denom)
        rows["n"].append(np.full(q.size, n))
        rows["parity"].append(np.full(q.size, parity))
        rows["q"].append(q)
        rows["gamma"].append(gam)
    cat = {key: np.concatenate(v) for key, v in rows.items()}
    return CavityModeAmplitudes(a10, b10, cat["n"], cat["parity"], cat["q"], cat["gamma"],
                                cat["a"], cat["b"])


@dataclass(frozen=True)
class HoleField:
    value: complex
    tail_bound: float


def field_in_hole(sol: ApertureSolution, k, geom: Geometry, z: float, rho: float = 0.0,
                  theta: float = 0.0, amps: Optional[CavityModeAmplitudes] = None,
                  mode_cut: float = MODE_CUT, with_tail: bool = False):
    """Modal synthesis of the total field at a point of the hole."""
    eps = geom.epsilon
    if not (0.0 <= z <= 1.0) or rho < 0 or rho > eps * (1 + 1e-12):
        raise ValueError(f"point (rho={rho}, z={z}) is outside the hole")
    k = complex(k)
    amps = cavity_amplitudes(sol, k, geom) if amps is None else amps
    value = amps.a10 * np.cos(k * z) + amps.b10 * np.cos(k * (1.0 - z))
    keep = amps.q / eps <= mode_cut
    if np.any(keep):
        n = amps.n[keep]
        ang = np.where(amps.parity[keep] == "even", np.cos(n * theta), np.sin(n * theta))
        radial = sps.jv(n, amps.q[keep] * rho / eps)
        gam = amps.gamma[keep]
        axial = amps.a[keep] * np.exp(-gam * (1.0 - z)) + amps.b[keep] * np.exp(-gam * z)
        value += np.sum(ang * radial * axial)
    dropped = amps.q[~keep]
    dist = min(z, 1.0 - z)
    tail = float(np.exp(-np.min(dropped) / eps * dist)) if dropped.size else 0.0
    return HoleField(complex(value), tail) if with_tail else complex(value)


def axial_profile(sol: ApertureSolution, geom: Geometry, z: Sequence[float]) -> np.ndarray:
    amps = cavity_amplitudes(sol)
    return np.array([field_in_hole(sol, sol.k, geom, float(zz), amps=amps) for zz in z])


def hole_gradient(sol: ApertureSolution, geom: Geometry, z: float, rho: float = 0.0,
                  theta: float = 0.0, h: float = 1e-6) -> np.ndarray:
    """Cartesian gradient of the hole field by central differences."""
    eps = geom.epsilon
    amps = cavity_amplitudes(sol)
    x0, y0 = rho * math.cos(theta), rho * math.sin(theta)

    def at(x, y, zz):
        return field_in_hole(sol, sol.k, geom, zz, math.hypot(x, y), math.atan2(y, x), amps=amps)

    hx = h * eps
    grad = [(at(x0 + hx, y0, z) - at(x0 - hx, y0, z)) / (2 * hx),
            (at(x0, y0 + hx, z) - at(x0, y0 - hx, z)) / (2 * hx),
            (at(x0, y0, z + h) - at(x0, y0, z - h)) / (2 * h)]
    return np.array(grad)


# ---------------------------------------------------------------------------
# far field

def far_field(sol: ApertureSolution, k, geom: Geometry, r) -> complex:
    """Monopole radiation of the aperture flux, upper or lower half-space."""
    r = np.asarray(r, dtype=float)
    k = complex(k)
    eps = geom.epsilon
    if r[2] >= 1.0:
        centre, moment = np.array([0.0, 0.0, 1.0]), sol.m1
    elif r[2] <= 0.0:
        centre, moment = np.array([0.0, 0.0, 0.0]), sol.m2
    else:
        raise ValueError("far_field needs a point outside the plate")
    if np.linalg.norm(r - centre) < 1.0:
        raise ValueError("observation point inside the unit half-ball around the aperture")
    return complex(-eps**2 * moment * eval_ge(k, r, centre))


def far_field_amplitude(sol: ApertureSolution, side: str = "upper") -> float:
    """``eps^2 |m|``: the far field divided by |g^e|."""
    m = sol.m1 if side == "upper" else sol.m2
    return float(sol.epsilon**2 * abs(m))


# ---------------------------------------------------------------------------
# quasi-static regime

@dataclass(frozen=True)
class QuasiStatic:
    profile: Callable[[float], complex]
    p3: complex
    solution: ApertureSolution


def quasi_static(k: float, geom: Geometry, trunc: Truncation, d1: float = 0.0) -> QuasiStatic:
    """Plunger-mode profile ``u0(z)`` and axial velocity ``(1/k) du0/dz`` at mid-hole."""
    if k > 0.1 or geom.epsilon > 0.1:
        raise ValueError("quasi-static regime needs k <= 0.1 and eps <= 0.1")
    sol = solve_system(k, geom, trunc, Incidence(d1, k))
    amps = cavity_amplitudes(sol)
    kc = complex(k)

    def profile(z):
        return complex(amps.a10 * np.cos(kc * z) + amps.b10 * np.cos(kc * (1.0 - z)))

    p3 = -amps.a10 * np.sin(kc * 0.5) + amps.b10 * np.sin(kc * 0.5)
    return QuasiStatic(profile, complex(p3), sol)


# ---------------------------------------------------------------------------
# spectrum scan

def _scan_point(k: float, geom: Geometry, trunc: Truncation, d1: float, z_grid) -> Dict:
    row = {"k": float(k)}
    try:
        sol = solve_system(k, geom, trunc, Incidence(d1, k))
        amps = cavity_amplitudes(sol)
        prof = [field_in_hole(sol, sol.k, geom, float(z), amps=amps) for z in z_grid]
        row.update(m1=sol.m1, m2=sol.m2, far_amplitude=far_field_amplitude(sol),
                   hole_peak=float(np.max(np.abs(prof))), error="")
    except (PoleError, ValueError, np.linalg.LinAlgError) as exc:
        row.update(m1=complex("nan"), m2=complex("nan"), far_amplitude=float("nan"),
                   hole_peak=float("nan"), error=f"{type(exc).__name__}: {exc}")
    return row


def enhancement_spectrum(geom: Geometry, trunc: Truncation, inc: Incidence,
                         k_grid: Sequence[float], threads: Optional[int] = None,
                         z_samples: int = 21) -> List[Dict]:
    """Moments, far-field amplitude and in-hole peak over a k grid, in grid order."""
    z_grid = np.linspace(0.0, 1.0, z_samples)
    task = lambda k: _scan_point(k, geom, trunc, inc.d1, z_grid)
    if threads == 1:
        return [task(k) for k in k_grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, k_grid))


def find_peaks(rows: List[Dict], key: str = "m1") -> List[float]:
    """k values of local maxima of |row[key]|."""
    vals = np.array([abs(r[key]) for r in rows])
    ks = np.array([r["k"] for r in rows])
    idx = [i for i in range(1, len(vals) - 1) if vals[i] > vals[i - 1] and vals[i] >= vals[i + 1]]
    return [float(ks[i]) for i in idx]
