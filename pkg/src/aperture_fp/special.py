"""
Bessel functions, Neumann waveguide roots and mode normalizations.

The disk cross-section of the hole carries the Neumann eigenfunctions
``J_n(q r / eps) cos(n theta)`` and ``J_n(q r / eps) sin(n theta)`` where
``q`` runs over the critical points of ``J_n``.  Everything here is
independent of the wavenumber and is cached after first use.

Evaluation strategy for ``J_n(x)``
----------------------------------
* ``x <= 12``: ascending power series.
* ``12 < x <= 200``: Miller backward recurrence normalized with
  ``J_0 + 2 sum J_2k = 1``.
* ``x > 200``: delegated to :func:`scipy.special.jv` (the modal sums of
  the operators module reach a few thousand).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import special as sps

SERIES_LIMIT = 12.0
MILLER_LIMIT = 200.0
ROOT_STEP_TOL = 1e-13


class DomainError(ValueError):
    """Argument outside the supported domain."""


@dataclass(frozen=True)
class ModeIndex:
    """Waveguide mode label: radial index m (1-based), order n, parity."""

    m: int
    n: int
    parity: str = "even"

    def __post_init__(self):
        if self.m < 1 or self.n < 0:
            raise ValueError(f"invalid mode ({self.m}, {self.n})")
        if self.parity not in ("even", "odd"):
            raise ValueError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.parity == "odd" and self.n == 0:
            raise ValueError("odd parity needs n >= 1 (sin 0 theta vanishes)")

    @property
    def is_plunger(self) -> bool:
        return self.m == 1 and self.n == 0


# ---------------------------------------------------------------------------
# J_n evaluation

def _series(order: int, x: np.ndarray) -> np.ndarray:
    half = 0.5 * x
    term = half**order / math.factorial(order)
    total = term.copy()
    mhalf2 = -half * half
    for k in range(1, 80):
        term = term * mhalf2 / (k * (k + order))
        total += term
        if np.all(np.abs(term) <= 1e-18 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _miller(orders: Tuple[int, ...], x: np.ndarray) -> list:
    """Backward recurrence returning J_order(x) for each requested order."""
    top = max(max(orders), float(np.max(x)))
    start = int(top) + 16 + int(math.sqrt(40.0 * top))
    start += start % 2
    wanted = {o: np.zeros_like(x) for o in orders}
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        # j_cur holds J_k, compute J_{k-1}
        j_prev = (2.0 * k / x) * j_cur - j_next
        if k in wanted:
            wanted[k] = j_cur.copy()
        if k % 2 == 0:
            norm += 2.0 * j_cur
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > 1e250
        if np.any(big):
            for o in wanted:
                wanted[o][big] *= 1e-250
            j_next[big] *= 1e-250
            j_cur[big] *= 1e-250
            norm[big] *= 1e-250
    if 0 in wanted:
        wanted[0] = j_cur.copy()
    norm += j_cur
    return [wanted[o] / norm for o in orders]


def _jn_orders(orders: Tuple[int, ...], x: np.ndarray) -> list:
    out = [np.empty_like(x) for _ in orders]
    lo = x <= SERIES_LIMIT
    mid = (x > SERIES_LIMIT) & (x <= MILLER_LIMIT)
    hi = x > MILLER_LIMIT
    if np.any(lo):
        for buf, o in zip(out, orders):
            buf[lo] = _series(o, x[lo])
    if np.any(mid):
        vals = _miller(orders, x[mid])
        for buf, v in zip(out, vals):
            buf[mid] = v
    if np.any(hi):
        for buf, o in zip(out, orders):
            buf[hi] = sps.jv(o, x[hi])
    return out


def bessel_j(n: int, x):
    """Return ``(J_n(x), J_n'(x))`` for integer ``n >= 0`` and real ``x >= 0``.

    Works elementwise on arrays; scalars in give scalars out.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"order must be a nonnegative integer, got {n}")
    n = int(n)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise DomainError("bessel_j needs finite x >= 0")
    flat = np.atleast_1d(arr).ravel()
    if n == 0:
        j0, j1 = _jn_orders((0, 1), flat)
        val, der = j0, -j1
    else:
        jm, j0, jp = _jn_orders((n - 1, n, n + 1), flat)
        val, der = j0, 0.5 * (jm - jp)
    if arr.ndim == 0:
        return float(val[0]), float(der[0])
    return val.reshape(arr.shape), der.reshape(arr.shape)


def spherical_j(order, x):
    """Spherical Bessel ``j_l(x)`` (bulk evaluation via scipy)."""
    return sps.spherical_jn(order, x)


# ---------------------------------------------------------------------------
# Roots of J_n'

def _mcmahon(n: int, s: np.ndarray) -> np.ndarray:
    """Asymptotic guess for the s-th positive critical point of J_n."""
    mu = 4.0 * n * n
    b = (s + 0.5 * n - 0.75) * np.pi
    return b - (mu + 3.0) / (8.0 * b) - 4.0 * (7.0 * mu**2 + 82.0 * mu - 9.0) / (3.0 * (8.0 * b) ** 3)


def _second_derivative(n: int, x, val, der):
    return -der / x - (1.0 - (n * n) / (x * x)) * val


def _positive_critical_points(n: int, count: int) -> np.ndarray:
    if count <= 0:
        return np.zeros(0)
    # n = 0 has its McMahon index shifted by one (the root at 0 is s = 1)
    s = np.arange(1, count + 1) + (1 if n == 0 else 0)
    guess = _mcmahon(n, s.astype(float))
    hi = float(guess[-1]) + 4.0
    step = 0.25
    while True:
        grid = np.arange(0.5, hi + step, step)
        _, d = bessel_j(n, grid)
        change = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
        if change.size >= count:
            break
        hi *= 1.5
    change = change[:count]
    a = grid[change].copy()
    b = grid[change + 1].copy()
    fa = d[change].copy()
    x = np.where((guess > a) & (guess < b), guess, 0.5 * (a + b))
    for _ in range(200):
        val, der = bessel_j(n, x)
        dd = _second_derivative(n, x, val, der)
        same = np.sign(der) == np.sign(fa)
        a = np.where(same, x, a)
        fa = np.where(same, der, fa)
        b = np.where(same, b, x)
        newton = x - der / np.where(dd == 0, np.inf, dd)
        ok = (newton > a) & (newton < b) & np.isfinite(newton)
        x_new = np.where(ok, newton, 0.5 * (a + b))
        step_size = np.abs(x_new - x)
        x = x_new
        if np.all(step_size <= np.maximum(ROOT_STEP_TOL, 4.0 * np.spacing(x))):
            break
    return x


@functools.lru_cache(maxsize=None)
def _roots_cached(n: int, count: int) -> np.ndarray:
    if n == 0:
        roots = np.concatenate(([0.0], _positive_critical_points(0, count - 1)))
    else:
        roots = _positive_critical_points(n, count)
    roots.setflags(write=False)
    return roots


def q_roots(n: int, count: int) -> np.ndarray:
    """First ``count`` roots of ``J_n'`` (for n = 0 the root 0 comes first)."""
    if count < 1:
        raise ValueError("count must be positive")
    # grow in blocks so that tables for neighbouring counts share work
    block = max(64, 1 << int(math.ceil(math.log2(count))))
    return _roots_cached(int(n), block)[:count]


def q_root(m: int, n: int) -> float:
    """The m-th smallest root of ``J_n'`` with the convention ``q_{1,0} = 0``."""
    if m < 1 or n < 0:
        raise ValueError(f"invalid mode ({m}, {n})")
    return float(q_roots(n, m)[m - 1])


# ---------------------------------------------------------------------------
# Normalizations

def angular_weight(n: int) -> float:
    """Integral of cos^2(n theta) over a full turn."""
    return 2.0 * np.pi if n == 0 else np.pi


def radial_norm(q, n: int):
    """Closed form of ``int_0^1 J_n(qR)^2 R dR`` valid when ``J_n'(q) = 0``."""
    q = np.asarray(q, dtype=float)
    val, _ = bessel_j(n, q)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(q > 0, (q * q - n * n) * np.square(val) / (2.0 * q * q), 0.5)
    return out if out.ndim else float(out)


def mode_norm(m: int, n: int, eps: float) -> Tuple[float, float]:
    """Return ``(d_mn, D_mn)`` for the disk of radius ``eps``.

    ``d_mn`` inverts the integral of ``J_n(q r/eps)^2 cos^2(n theta)`` over the
    disk and ``D_mn = eps^2 d_mn`` is its scale-free counterpart.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    q = q_root(m, n)
    big_d = 1.0 / (angular_weight(n) * radial_norm(q, n))
    return big_d / eps**2, big_d


@functools.lru_cache(maxsize=None)
def _mode_table(m_max: int, n_max: int):
    rows_m, rows_n, rows_q = [], [], []
    for n in range(n_max + 1):
        q = q_roots(n, m_max)
        rows_m.append(np.arange(1, m_max + 1))
        rows_n.append(np.full(m_max, n))
        rows_q.append(np.asarray(q))
    m = np.concatenate(rows_m)
    n = np.concatenate(rows_n)
    q = np.concatenate(rows_q)
    big_d = np.empty_like(q)
    for order in range(n_max + 1):
        sel = n == order
        big_d[sel] = 1.0 / (angular_weight(order) * radial_norm(q[sel], order))
    for arr in (m, n, q, big_d):
        arr.setflags(write=False)
    return m, n, q, big_d


def mode_table(m_max: int, n_max: int):
    """Arrays ``(m, n, q, D)`` for all modes with m <= m_max, n <= n_max."""
    return _mode_table(int(m_max), int(n_max))
