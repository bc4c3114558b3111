"""
Resonance functions p(k, eps), q(k, eps), their roots, and the asymptotic
expansions of those roots.

With ``m = <(eps L^+)^{-1} 1, 1>`` (the effective moment, alpha + r) the
symmetric system is singular exactly where

    p(k, eps) = eps + (c(k)/pi + eps^2 gamma(k)) (alpha + r)

vanishes, and likewise q with ``c_minus`` and the antisymmetric moment.
``c(k) = cot(k/2)/k`` vanishes at odd multiples of pi (the "odd" family) and
``c_minus(k) = -tan(k/2)/k`` at nonzero even multiples (the "even" family).

Two coefficient conventions are available through ``form``:

* ``"corrected"`` (default): the 1/pi above, as produced by the operator system;
* ``"original"``: the same expression without the 1/pi, the form the expansions were first derived in.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .greens import Geometry, PoleError, Truncation
from .operators import OperatorSet, _alpha_raw, assemble, effective_moment

POLE_GUARD = 0.1
STEP_TOL = 1e-12
MAX_ITER = 50
SEARCH_IM = 1.0
FAMILIES = ("odd", "even")
FORMS = ("corrected", "original")


class ResonanceError(RuntimeError):
    """Newton search failed or left the search box."""


def c_plus(k):
    """``cot k / k + 1/(k sin k)``, evaluated as ``cot(k/2) / k``.

    The two-term form cancels catastrophically near its zeros.
    """
    k = np.asarray(k, dtype=complex)
    return np.cos(0.5 * k) / np.sin(0.5 * k) / k


def c_minus(k):
    """``cot k / k - 1/(k sin k)``, evaluated as ``-tan(k/2) / k``."""
    k = np.asarray(k, dtype=complex)
    return -np.tan(0.5 * k) / k


def gamma(k):
    return -1j * np.asarray(k, dtype=complex) / (2.0 * np.pi)


def _pole_distance(k: complex, family_of_poles: str) -> float:
    """Distance from k to the nearest pole of c (even multiples) or c_minus (odd)."""
    shift = 0.0 if family_of_poles == "even" else 1.0
    j = np.round((k.real / np.pi - shift) / 2.0)
    return abs(k - (2.0 * j + shift) * np.pi)


def _scale(form: str) -> float:
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}")
    return 1.0 / np.pi if form == "corrected" else 1.0


def p_value(k, eps: float, alpha: float, r: complex = 0.0, form: str = "corrected",
            pole_guard: float = POLE_GUARD) -> complex:
    k = complex(k)
    if pole_guard > 0 and _pole_distance(k, "even") < pole_guard:
        raise PoleError(f"p evaluated within {pole_guard} of its pole at an even multiple of pi")
    return complex(eps + (_scale(form) * c_plus(k) + eps**2 * gamma(k)) * (alpha + r))


def q_value(k, eps: float, alpha: float, s: complex = 0.0, form: str = "corrected",
            pole_guard: float = POLE_GUARD) -> complex:
    k = complex(k)
    if pole_guard > 0 and _pole_distance(k, "odd") < pole_guard:
        raise PoleError(f"q evaluated within {pole_guard} of its pole at an odd multiple of pi")
    return complex(eps + (_scale(form) * c_minus(k) + eps**2 * gamma(k)) * (alpha + s))


def p_q(k, epsilon: float, alpha: float, moments: Tuple[complex, complex] = (0.0, 0.0),
        form: str = "corrected", pole_guard: float = POLE_GUARD) -> Tuple[complex, complex]:
    """Both resonance scalars; zero moments give the leading model."""
    r, s = moments
    return (p_value(k, epsilon, alpha, r, form, pole_guard),
            q_value(k, epsilon, alpha, s, form, pole_guard))


def _base(family: str, n: int) -> float:
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    if n < 1:
        raise ValueError("n must be a positive integer")
    return (2 * n - 1) * np.pi if family == "odd" else 2 * n * np.pi


def asymptotic_resonance(family: str, n: int, epsilon: float, alpha: float,
                         form: str = "original") -> complex:
    """Two-term small-eps expansion of the n-th root of p (odd) or q (even).

    ``form="original"``: ``k0 + 2 k0 eps/alpha - i k0^2 eps^2/pi``.
    ``form="corrected"``: ``k0 + 2 pi k0 eps/alpha + (4 pi^2 k0/alpha^2 - i k0^2) eps^2``,
    where the real eps^2 term comes from the curvature ``c''(k0) = 1/k0^2``.
    """
    k0 = _base(family, n)
    if n * epsilon > 0.2:
        raise ValueError(f"n eps = {n * epsilon:.3g} is outside the small-hole regime (<= 0.2)")
    if form == "original":
        return complex(k0 + 2 * k0 * epsilon / alpha - 1j * k0**2 * epsilon**2 / np.pi)
    if form == "corrected":
        shift = 2 * np.pi * k0 / alpha
        return complex(k0 + shift * epsilon + (shift**2 / k0 - 1j * k0**2) * epsilon**2)
    raise ValueError(f"form must be one of {FORMS}")


@dataclass
class ResonanceFunctions:
    """p and q at fixed eps with moments taken from assembled operators.

    ``alpha`` defaults to the unextrapolated value of the same truncation so
    that ``r`` and ``s`` vanish as eps -> 0 for this discretization.
    """

    epsilon: float
    trunc: Truncation = field(default_factory=lambda: Truncation(n_max=0))
    alpha: Optional[float] = None
    form: str = "corrected"
    frozen_at: Optional[complex] = None
    ops_provider: Optional[Callable[[complex], OperatorSet]] = None

    def __post_init__(self):
        if self.alpha is None:
            self.alpha = _alpha_raw(self.trunc)
        if self.ops_provider is None:
            geom, trunc = Geometry(self.epsilon), self.trunc
            self.ops_provider = lambda k: assemble(k, geom, trunc)
        self._frozen = None
        if self.frozen_at is not None:
            self._frozen = self._live_moments(self.frozen_at)

    c = staticmethod(c_plus)
    c_minus = staticmethod(c_minus)
    gamma = staticmethod(gamma)

    def _live_moments(self, k) -> Tuple[complex, complex]:
        ops = self.ops_provider(k)
        return (effective_moment("plus", k, ops) - self.alpha,
                effective_moment("minus", k, ops) - self.alpha)

    def moments(self, k) -> Tuple[complex, complex]:
        """``(r, s)``; fixed at ``frozen_at`` when that speed option is set."""
        return self._frozen if self._frozen is not None else self._live_moments(k)

    def p(self, k, pole_guard: float = POLE_GUARD) -> complex:
        r, _ = self.moments(k)
        return p_value(k, self.epsilon, self.alpha, r, self.form, pole_guard)

    def q(self, k, pole_guard: float = POLE_GUARD) -> complex:
        _, s = self.moments(k)
        return q_value(k, self.epsilon, self.alpha, s, self.form, pole_guard)

    def scalar(self, family: str) -> Callable[[complex], complex]:
        return self.p if family == "odd" else self.q


@dataclass(frozen=True)
class Resonance:
    family: str
    n: int
    k_numeric: complex
    k_asymptotic: complex
    k_corrected: complex
    residual: float
    epsilon: float
    iterations: int


def _derivative(func, k: complex) -> complex:
    h = 1e-6 * max(1.0, abs(k))
    return (func(k + h) - func(k - h)) / (2.0 * h)


def find_resonance(family: str, n: int, epsilon: float,
                   functions: Optional[ResonanceFunctions] = None,
                   guess: Optional[complex] = None) -> Resonance:
    """Newton search for the n-th root of p (odd family) or q (even family)."""
    funcs = functions if functions is not None else ResonanceFunctions(epsilon)
    if funcs.epsilon != epsilon:
        raise ValueError("functions were built for a different epsilon")
    alpha = funcs.alpha
    k = complex(guess) if guess is not None else asymptotic_resonance(family, n, epsilon, alpha, "corrected")
    poles = "even" if family == "odd" else "odd"
    if _pole_distance(k, poles) < POLE_GUARD:
        raise ResonanceError(f"initial guess {k} is inside the pole guard")
    func = funcs.scalar(family)
    k0 = _base(family, n)
    for it in range(1, MAX_ITER + 1):
        val = func(k)
        der = _derivative(func, k)
        step = val / der
        k = k - step
        if abs(k.imag) > SEARCH_IM or abs(k.real - k0) > np.pi / 2 or _pole_distance(k, poles) < POLE_GUARD:
            raise ResonanceError(f"root search left the search box at k = {k}")
        if abs(step) <= STEP_TOL:
            break
    else:
        raise ResonanceError(f"no convergence after {MAX_ITER} Newton steps (last step {abs(step):.2e})")
    val = func(k)
    der = _derivative(func, k)
    residual = abs(val)
    if residual > 1e-10 * abs(der):
        raise ResonanceError(f"residual {residual:.2e} too large at k = {k}")
    return Resonance(family, n, k,
                     asymptotic_resonance(family, n, epsilon, alpha, "original"),
                     asymptotic_resonance(family, n, epsilon, alpha, "corrected"),
                     residual, epsilon, it)


def winding_number(func: Callable[[complex], complex], centre: complex, radius: float,
                   samples: int = 360) -> int:
    """Discrete argument-principle count of zeros minus poles inside a circle."""
    theta = 2.0 * np.pi * np.arange(samples + 1) / samples
    vals = np.array([func(centre + radius * np.exp(1j * t)) for t in theta])
    turns = np.sum(np.angle(vals[1:] / vals[:-1])) / (2.0 * np.pi)
    return int(round(turns))
