"""Named invariant checks behind ``aperture-fp validate``.

Each check returns a :class:`CheckResult`.  Checks whose name ends in
``_stated`` test a coefficient in its original form; their ``_corrected``
twins test the value the operator system actually produces.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .fields import axial_profile, far_field_amplitude, quasi_static, solve_system
from .greens import Geometry, Truncation, axial_rate, axial_sum_identities, eval_gi
from .operators import (FREE_SPACE_ALPHA, _single_layer_diag, alpha_estimate, assemble,
                        electrified_disk, effective_moment, single_layer_quadrature)
from .resonance import (ResonanceFunctions, c_plus, find_resonance, p_q, winding_number)
from .special import bessel_j, q_roots


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _e(x) -> str:
    return f"{float(x):.6e}"


def random_hole_points(count: int, eps: float, seed: int = 0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        pair = []
        for _ in range(2):
            rho = eps * np.sqrt(rng.random())
            th = 2 * np.pi * rng.random()
            pair.append((rho * np.cos(th), rho * np.sin(th), rng.random()))
        out.append(tuple(pair))
    return out


def correlation(u, v) -> float:
    """Cosine similarity ``|<u, v>| / (|u| |v|)`` of complex profiles."""
    u, v = np.asarray(u), np.asarray(v)
    return float(abs(np.vdot(v, u)) / (np.linalg.norm(u) * np.linalg.norm(v)))


def resonance_sweep(family: str, eps_values, n: int = 1):
    return [find_resonance(family, n, eps, ResonanceFunctions(eps)) for eps in eps_values]


# ---------------------------------------------------------------------------

def check_roots():
    worst = 0.0
    for n in range(3):
        q = q_roots(n, 100)
        q = q[q > 0]
        worst = max(worst, float(np.max(np.abs(bessel_j(n, q)[1]))))
    return worst <= 1e-12, f"max |J_n'(q)| = {_e(worst)} over 100 roots, n <= 2"


def check_dual_representation():
    geom, trunc = Geometry(0.1), Truncation(m_max=40, n_max=40, j_max=4000)
    worst = 0.0
    for a, b in random_hole_points(5, 0.1, seed=7):
        t = eval_gi(1.5, a, b, geom, trunc, "triple_sum")
        d = eval_gi(1.5, a, b, geom, trunc, "decomposed")
        worst = max(worst, abs(t - d) / abs(d))
    return worst <= 1e-6, f"worst relative gap {_e(worst)} over 5 pairs"


def check_identities():
    worst = 0.0
    for qe in (0.0, 5.0, 10.0, 20.0):
        lhs, rhs = axial_sum_identities(1.0, qe)
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    return worst <= 1e-8, f"worst relative error {_e(worst)}"


def check_branch():
    k = 1.5
    q = q_roots(0, 20)
    beta = axial_rate(q / 0.1, k)
    ok = beta[0] == 1j * k and np.all(beta[1:].real > 0)
    return bool(ok), f"beta_10 = {beta[0]}, min Re beta (evanescent) = {_e(np.min(beta[1:].real))}"


def check_electrified_disk():
    alpha, density = electrified_disk(32)
    radius = np.linspace(0.1, 0.9, 9)
    # scale the unit-data solution to the conventional (4/pi)/sqrt(1 - R^2)
    exact = 4 / np.pi / np.sqrt(1 - radius**2)
    gap = float(np.max(np.abs(-2 * density(radius) / exact - 1)))
    ok = abs(alpha - FREE_SPACE_ALPHA) <= 1e-6 and gap <= 0.01
    return ok, f"<S^-1 1, 1> = {alpha:.15f}, density relative gap {_e(gap)}"


def check_single_layer_quadrature():
    gap = max(float(np.max(np.abs(single_layer_quadrature(n, 8) - np.diag(_single_layer_diag(n, 8)))))
              for n in range(3))
    return gap <= 1e-8, f"closed form vs chord quadrature, max gap {_e(gap)}"


def check_alpha_convergence():
    a1 = alpha_estimate(Truncation(radial_order=16, m_max=100, n_max=0)).value
    a2 = alpha_estimate(Truncation(radial_order=32, m_max=200, n_max=0)).value
    return abs(a1 - a2) < 1e-4, f"alpha(16,100) = {a1:.9f}, alpha(32,200) = {a2:.9f}"


def check_plus_minus():
    ops = assemble(1.0, Geometry(0.05), Truncation(n_max=0))
    gap = abs(effective_moment("plus", 1.0, ops) - effective_moment("minus", 1.0, ops))
    return gap <= 1e-12, f"|moment+ - moment-| = {_e(gap)}"


def check_c_zeros():
    vals = [abs(c_plus((2 * n - 1) * np.pi)) for n in (1, 2, 3)]
    return max(vals) <= 1e-14, f"max |c((2n-1) pi)| = {_e(max(vals))}"


def _c_second(k0, h=1e-3):
    # sixth-order central difference
    w = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
    pts = k0 + h * np.arange(-3, 4)
    return float(np.real(w @ c_plus(pts)) / h**2)


def check_c_curvature_stated():
    vals = [_c_second((2 * n - 1) * np.pi) for n in (1, 2)]
    return max(abs(v) for v in vals) <= 1e-9, f"c'' at pi, 3pi = {_e(vals[0])}, {_e(vals[1])} (stated 0)"


def check_c_curvature_corrected():
    errs = [abs(_c_second(k0) - 1 / k0**2) for k0 in (np.pi, 3 * np.pi)]
    return max(errs) <= 1e-7, f"|c'' - 1/k0^2| <= {_e(max(errs))}"


def _ratios(results, attr):
    diffs = [abs(r.k_numeric - getattr(r, attr)) for r in results]
    return [diffs[i] / diffs[i + 1] for i in range(len(diffs) - 1)]


def check_asymptotic_order(attr, label):
    def run():
        ratios = []
        for fam in ("odd", "even"):
            ratios += _ratios(resonance_sweep(fam, (0.02, 0.01, 0.005)), attr)
        ok = all(5.0 <= r <= 11.0 for r in ratios)
        return ok, f"{label} error ratios per halving " + ", ".join(f"{r:.3f}" for r in ratios)
    return run


def check_imag_stated():
    r_odd = resonance_sweep("odd", (0.005,))[0]
    r_even = resonance_sweep("even", (0.005,))[0]
    c1 = r_odd.k_numeric.imag / 0.005**2
    c2 = r_even.k_numeric.imag / 0.005**2
    ok = abs(c1 / -np.pi - 1) <= 0.1 and abs(c2 / (-4 * np.pi) - 1) <= 0.1
    return ok, f"Im k/eps^2 = {c1:.5f} (stated {-np.pi:.5f}), {c2:.5f} (stated {-4 * np.pi:.5f})"


def check_imag_corrected():
    r_odd = resonance_sweep("odd", (0.005,))[0]
    r_even = resonance_sweep("even", (0.005,))[0]
    c1 = r_odd.k_numeric.imag / 0.005**2
    c2 = r_even.k_numeric.imag / 0.005**2
    ok = abs(c1 / -np.pi**2 - 1) <= 0.1 and abs(c2 / (-4 * np.pi**2) - 1) <= 0.1
    return ok, f"Im k/eps^2 = {c1:.5f} vs {-np.pi**2:.5f}, {c2:.5f} vs {-4 * np.pi**2:.5f}"


def check_lemma_moments():
    eps = 0.01
    funcs = ResonanceFunctions(eps)
    a = funcs.alpha
    k1 = find_resonance("odd", 1, eps, funcs).k_numeric.real
    k2 = find_resonance("even", 1, eps, funcs).k_numeric.real
    e1 = abs(funcs.p(k1) + 1j * a * eps**2 / 2) / abs(a * eps**2 / 2)
    e2 = abs(funcs.q(k2) + 1j * a * eps**2) / abs(a * eps**2)
    return e1 <= 0.2 and e2 <= 0.2, f"relative gaps {e1:.4f}, {e2:.4f}"


def check_simple_root():
    eps = 0.01
    funcs = ResonanceFunctions(eps)
    res = find_resonance("odd", 1, eps, funcs)
    w = winding_number(funcs.p, res.k_numeric, eps**2)
    return w == 1, f"winding number {w}"


def check_split_direct():
    geom, trunc = Geometry(0.05), Truncation()
    a = solve_system(1.0, geom, trunc)
    b = solve_system(1.0, geom, trunc, method="direct")
    gap = max(abs(a.m1 - b.m1) / abs(a.m1), abs(a.m2 - b.m2) / abs(a.m2))
    return gap <= 1e-10, f"relative moment gap {_e(gap)}"


def check_moment_formula():
    eps = 0.05
    geom, trunc = Geometry(eps), Truncation()
    sol = solve_system(1.0, geom, trunc)
    alpha = ResonanceFunctions(eps).alpha
    p, q = p_q(1.0, eps, alpha)
    ref = alpha * (1 / p + 1 / q)
    gap = abs(sol.m1 - ref) / abs(ref)
    return gap <= 0.05, f"relative gap {_e(gap)}"


def check_far_field():
    eps = 0.01
    k = resonance_sweep("odd", (eps,))[0].k_numeric.real
    sol = solve_system(k, Geometry(eps), Truncation())
    ratio = far_field_amplitude(sol) * k / (2 * np.pi)
    # away from resonance the amplitude is O(eps^2): halving eps divides it by ~4
    off = [far_field_amplitude(solve_system(1.0, Geometry(e), Truncation())) for e in (0.02, 0.01)]
    drop = off[0] / off[1]
    ok = 0.8 <= ratio <= 1.2 and 3.5 <= drop <= 4.5
    return ok, (f"amplitude k/(2 pi |g|) = {ratio:.6f}, m1 eps^2 = {sol.m1 * eps**2:.6f}, "
                f"off-resonance drop per halving {drop:.4f}")


def check_mode_shapes():
    eps = 0.02
    z = np.linspace(0.1, 0.9, 81)
    out = []
    for fam, shape in (("odd", np.cos), ("even", np.sin)):
        k = resonance_sweep(fam, (eps,))[0].k_numeric.real
        sol = solve_system(k, Geometry(eps), Truncation())
        out.append(correlation(axial_profile(sol, Geometry(eps), z), shape(k * (z - 0.5))))
    return min(out) >= 0.999, f"correlations odd {out[0]:.8f}, even {out[1]:.8f}"


def check_enhancement():
    eps_values = (0.04, 0.02, 0.01)
    peaks = []
    for eps in eps_values:
        k = resonance_sweep("odd", (eps,))[0].k_numeric.real
        peaks.append(abs(solve_system(k, Geometry(eps), Truncation()).m1))
    slope = np.polyfit(np.log(eps_values), np.log(peaks), 1)[0]
    return abs(slope + 2) <= 0.1, f"log-log slope {slope:.5f}"


def check_quasi_static_stated():
    k, eps = 0.05, 0.025
    qs = quasi_static(k, Geometry(eps), Truncation())
    err = max(abs(qs.profile(z) - 2 * z) for z in np.linspace(0, 1, 101))
    bound = 5 * (k * k + k * eps)
    return err <= bound, f"max |u0 - 2z| = {err:.6f}, stated bound {bound:.6f}"


def check_quasi_static_velocity():
    k = 0.05
    qs = quasi_static(k, Geometry(0.025), Truncation())
    val = abs(qs.p3 * k / 2)
    return 0.95 <= val <= 1.05, f"|p3 k / 2| = {val:.6f}"


CHECKS: List[tuple] = [
    ("special.neumann_roots", check_roots),
    ("greens.dual_representation", check_dual_representation),
    ("greens.axial_identities", check_identities),
    ("greens.beta_branch", check_branch),
    ("operators.electrified_disk", check_electrified_disk),
    ("operators.single_layer_quadrature", check_single_layer_quadrature),
    ("operators.alpha_convergence", check_alpha_convergence),
    ("operators.plus_minus_moments", check_plus_minus),
    ("resonance.c_zeros", check_c_zeros),
    ("resonance.c_curvature_stated", check_c_curvature_stated),
    ("resonance.c_curvature_corrected", check_c_curvature_corrected),
    ("resonance.asymptotic_order_stated", check_asymptotic_order("k_asymptotic", "stated expansion")),
    ("resonance.asymptotic_order_corrected", check_asymptotic_order("k_corrected", "corrected expansion")),
    ("resonance.imag_coefficient_stated", check_imag_stated),
    ("resonance.imag_coefficient_corrected", check_imag_corrected),
    ("resonance.lemma_moments", check_lemma_moments),
    ("resonance.simple_root", check_simple_root),
    ("fields.split_vs_direct", check_split_direct),
    ("fields.moment_formula", check_moment_formula),
    ("fields.far_field_ratio", check_far_field),
    ("fields.mode_shapes", check_mode_shapes),
    ("fields.enhancement_slope", check_enhancement),
    ("fields.quasi_static_profile_stated", check_quasi_static_stated),
    ("fields.quasi_static_velocity", check_quasi_static_velocity),
]


def run_suite(cfg=None) -> List[CheckResult]:
    out = []
    for name, func in CHECKS:
        try:
            ok, detail = func()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
