"""Mathieu oscillator ``x'' + (a + 16 eps cos 2t) x = 0``.

The rescaled envelope obeys the Ermakov-Pinney equation

    r'' + (a + 16 eps cos 2t) r - 1/r^3 = 0,

whose pi-periodic solution gives the geometric phase
``gamma_n = (n + 1/2) int_0^pi r'^2 dt``.  Mass and hbar drop out of all of
these after the rescaling; :class:`MathieuParams` carries them only so that
callers can pass one parameter object around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NoBracket, NonConvergence, NonFinite, NonPositive, NoPeriodicEnvelope, ResonantDenominator
from .numerics import ODE_TOL, QUAD_TOL, Tolerance, Trajectory, find_root, integrate_1d, solve_ivp

PERIOD = math.pi
RESONANCE_EXCLUSION = 0.05
MARGINAL_BAND = 1e-6
ENVELOPE_TOL = Tolerance(abs_tol=1e-13, rel_tol=1e-12, max_steps=10**6)
CLOSURE_TOL = 1e-9
_HARMONICS = 12  # cos(2jt), j < _HARMONICS, is plenty for order <= 5


@dataclass(frozen=True)
class MathieuParams:
    a: float
    eps: float = 0.0
    M: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if not (self.M > 0 and self.hbar > 0):
            raise ValueError("M and hbar must be positive")

    def stiffness(self, t):
        return self.a + 16 * self.eps * np.cos(2 * np.asarray(t, dtype=float))


# -- classical Mathieu --------------------------------------------------------

def integrate_mathieu(mp: MathieuParams, x0: float, v0: float, t_end: float,
                      t_eval=None, tol: Tolerance = ODE_TOL, dense: bool = False) -> Trajectory:
    def rhs(t, y):
        return (y[1], -(mp.a + 16 * mp.eps * math.cos(2 * t)) * y[0])
    return solve_ivp(rhs, 0.0, (x0, v0), t_end, tol, t_eval=t_eval, dense=dense)


def ce1_characteristic_a(eps: float) -> float:
    """Characteristic value ``a = 1 - 8 eps - 8 eps^2`` (through second order) of ce_1."""
    return 1 - 8 * eps - 8 * eps**2


def _ce1_coefficients(eps: float, r_max: int) -> np.ndarray:
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    coeffs = np.zeros(r_max + 1)
    coeffs[0] = 1.0
    for r in range(1, r_max + 1):
        f_r1 = math.factorial(r + 1)
        coeffs[r] = (2**r * eps**r / (f_r1 * math.factorial(r))
                     - 2 ** (r + 1) * eps ** (r + 1) / (f_r1 * f_r1))
    return coeffs


def ce1_series(t, eps: float, r_max: int = 3, derivative: int = 0):
    """Partial sum of the ce_1 cosine series (and its t-derivatives)."""
    t = np.asarray(t, dtype=float)
    coeffs = _ce1_coefficients(eps, r_max)
    total = np.zeros_like(t)
    for r, c in enumerate(coeffs):
        k = 2 * r + 1
        # d^m/dt^m cos(kt) = k^m cos(kt + m pi/2)
        total = total + c * k**derivative * np.cos(k * t + derivative * math.pi / 2)
    return total


# -- perturbative envelope ----------------------------------------------------

def _cos_product(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Product of two cos(2jt) series, truncated to the same length."""
    J = len(p)
    out = np.zeros(J)
    for i in np.flatnonzero(p):
        for j in np.flatnonzero(q):
            if i + j < J:
                out[i + j] += 0.5 * p[i] * q[j]
            out[abs(i - j)] += 0.5 * p[i] * q[j]
    return out


@dataclass(frozen=True)
class RhoExpansion:
    """``r(t) = sum_k eps^k r_k(t)``, ``r_k(t) = sum_j coefficients[k, j] cos(2jt)``."""

    a: float
    coefficients: np.ndarray

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def component(self, k: int, t, derivative: int = 0):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for j, c in enumerate(self.coefficients[k]):
            if c:
                out = out + c * (2 * j) ** derivative * np.cos(2 * j * t + derivative * math.pi / 2)
        return out

    def combined(self, eps: float, order: int | None = None) -> np.ndarray:
        order = self.order if order is None else order
        if order > self.order:
            raise ValueError(f"expansion only built through order {self.order}")
        powers = eps ** np.arange(order + 1)
        return powers @ self.coefficients[: order + 1]

    def evaluate(self, t, eps: float, order: int | None = None, derivative: int = 0):
        coeffs = self.combined(eps, order)
        t = np.asarray(t, dtype=float)
        j = np.arange(len(coeffs))
        return np.cos(np.multiply.outer(t, 2 * j) + derivative * math.pi / 2) @ (coeffs * (2.0 * j) ** derivative)


def _check_resonance(a: float, order: int):
    for j in range(1, order + 1):
        if abs(a - j * j) <= 1e-12 * j * j:
            raise ResonantDenominator(
                f"order-{order} envelope needs a != {j * j} (small denominator 4a - 4*{j}^2)"
            )


@lru_cache(maxsize=256)
def _build_expansion(a: float, order: int) -> tuple[tuple[float, ...], ...]:
    J = _HARMONICS
    r0 = a ** -0.25
    unit = np.zeros(J)
    unit[0] = 1.0
    drive = np.zeros(J)
    drive[1] = 1.0
    orders = [unit * r0]
    for k in range(1, order + 1):
        rhs = -16 * _cos_product(drive, orders[k - 1])
        # eps^k coefficient of (1 + s)^{-3}, s = sum_{j<k} eps^j r_j / r0;
        # the linear term in r_k is moved to the left-hand side (3a r_k).
        s = [np.zeros(J)] + [r / r0 for r in orders[1:]] + [np.zeros(J)]
        power = [unit] + [np.zeros(J) for _ in range(k)]
        nonlinear = np.zeros(J)
        for m in range(1, k + 1):
            nxt = [np.zeros(J) for _ in range(k + 1)]
            for i in range(k + 1):
                for j in range(1, k + 1 - i):
                    nxt[i + j] += _cos_product(power[i], s[j])
            power = nxt
            nonlinear += (-1) ** m * math.comb(m + 2, 2) * power[k]
        rhs += r0**-3 * nonlinear
        # r_k'' + 4a r_k = rhs, pi-periodic particular solution
        denom = 4 * a - 4 * np.arange(J) ** 2
        nonzero = rhs != 0
        r_k = np.zeros(J)
        r_k[nonzero] = rhs[nonzero] / denom[nonzero]
        orders.append(r_k)
    return tuple(tuple(float(c) for c in r) for r in orders)


def rho_expansion(a: float, order: int = 3) -> RhoExpansion:
    """Coefficients of the pi-periodic, even perturbative envelope through ``order``.

    Each order solves ``r_k'' + 4a r_k = (source from lower orders)``; the unique
    pi-periodic particular solution is taken, which requires ``a != j^2`` for
    every harmonic ``j <= k`` that appears.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    _check_resonance(a, order)
    return RhoExpansion(a, np.array(_build_expansion(float(a), order)))


def perturbative_rho(mp: MathieuParams, order: int, t, derivative: int = 0):
    return rho_expansion(mp.a, order).evaluate(t, mp.eps, order, derivative)


def pinney_residual(mp: MathieuParams, order: int, t):
    """Residual of the envelope equation along the order-``order`` series."""
    r = perturbative_rho(mp, order, t)
    r_dd = perturbative_rho(mp, order, t, derivative=2)
    return r_dd + mp.stiffness(t) * r - r**-3


def pinney_residual_norm(mp: MathieuParams, order: int, samples: int = 2001) -> float:
    t = np.linspace(0.0, PERIOD, samples)
    return float(np.max(np.abs(pinney_residual(mp, order, t))))


# -- numerical envelope -------------------------------------------------------

def ermakov_pinney_numeric(mp: MathieuParams, rho0: float, t_end: float,
                           t_eval=None, tol: Tolerance = ENVELOPE_TOL, dense: bool = True) -> Trajectory:
    """Integrate the envelope equation from ``(rho0, 0)``."""
    if not rho0 > 0:
        raise NonPositive("rho0 must be positive")

    floor = 1e-6 * rho0

    def rhs(t, y):
        r = y[0]
        if r <= floor:
            raise NonPositive(f"envelope collapsed to {r!r} at t={t!r}")
        return (y[1], -(mp.a + 16 * mp.eps * math.cos(2 * t)) * r + r**-3)

    return solve_ivp(rhs, 0.0, (rho0, 0.0), t_end, tol, t_eval=t_eval, dense=dense)


def _half_period_slope(mp: MathieuParams, rho0: float) -> float:
    return float(ermakov_pinney_numeric(mp, rho0, PERIOD / 2, dense=False).final[1])


def _near_resonance(a: float, radius: float) -> bool:
    return any(abs(a - j * j) < radius for j in (1, 2, 3))


def shoot_periodic_envelope(mp: MathieuParams, seed: float | None = None,
                            exclusion: float = RESONANCE_EXCLUSION) -> tuple[float, Trajectory]:
    """Find the even, pi-periodic envelope by shooting on its initial value.

    With ``r'(0) = 0`` and a coefficient even about both ``0`` and ``pi/2``,
    ``r'(pi/2) = 0`` is equivalent to pi-periodicity; the root is bracketed by
    expanding around ``seed`` (default: the third-order series at ``t = 0``).
    Closure ``|r(pi) - r(0)|, |r'(pi)| < 1e-9`` is checked on the returned trajectory.
    """
    if mp.eps == 0:
        rho0 = mp.a ** -0.25
        return rho0, ermakov_pinney_numeric(mp, rho0, PERIOD)
    if seed is None:
        if _near_resonance(mp.a, exclusion):
            seed = mp.a ** -0.25
        else:
            seed = float(perturbative_rho(mp, min(3, _max_safe_order(mp.a)), 0.0))
            if not seed > 0:
                seed = mp.a ** -0.25

    def g(r0):
        return _half_period_slope(mp, r0)

    try:
        g_seed = g(seed)
        if g_seed == 0:
            rho0 = seed
        else:
            bracket = None
            for step in (1e-4, 1e-3, 1e-2, 3e-2, 0.1, 0.2, 0.35, 0.5):
                for lo, hi in ((seed * (1 - step), seed), (seed, seed * (1 + step))):
                    g_lo = g_seed if lo == seed else g(lo)
                    g_hi = g_seed if hi == seed else g(hi)
                    if np.sign(g_lo) != np.sign(g_hi):
                        bracket = (lo, hi)
                        break
                if bracket:
                    break
            if bracket is None:
                raise NoBracket("no sign change of r'(pi/2) around the seed")
            rho0 = find_root(g, bracket=bracket, tol=Tolerance(1e-12, 1e-15, 200))
        traj = ermakov_pinney_numeric(mp, rho0, PERIOD)
    except (NoBracket, NonConvergence, NonFinite, NonPositive) as exc:
        raise NoPeriodicEnvelope(
            f"no pi-periodic envelope found for a={mp.a}, eps={mp.eps}: {exc}"
        ) from exc
    end = traj.final
    if abs(end[0] - rho0) > CLOSURE_TOL or abs(end[1]) > CLOSURE_TOL:
        raise NoPeriodicEnvelope(
            f"shot envelope does not close: r(pi)-r(0)={end[0] - rho0:.3g}, r'(pi)={end[1]:.3g}"
        )
    return rho0, traj


def _max_safe_order(a: float) -> int:
    for order in (3, 2, 1):
        try:
            _check_resonance(a, order)
            return order
        except ResonantDenominator:
            continue
    return 0


# -- phases -------------------------------------------------------------------

def mathieu_phase_perturbative(mp: MathieuParams, n: int) -> float:
    """Leading small-eps phase ``eps^2 8 (n + 1/2) pi / (sqrt(a) (a - 1)^2)`` as published.

    This coefficient is a factor 4 below what the envelope series itself gives
    (see :func:`mathieu_phase_series`); both are exposed so they can be compared.
    """
    if abs(mp.a - 1) <= 1e-12:
        raise ResonantDenominator("a = 1")
    return mp.eps**2 * 8 * (n + 0.5) * math.pi / (math.sqrt(mp.a) * (mp.a - 1) ** 2)


def mathieu_phase_series(mp: MathieuParams, n: int, order: int = 3) -> float:
    """``(n + 1/2) int_0^pi r'^2 dt`` evaluated exactly on the order-``order`` series.

    Leading term: ``eps^2 32 (n + 1/2) pi / (sqrt(a) (a - 1)^2)``; no odd powers of eps.
    """
    coeffs = rho_expansion(mp.a, order).combined(mp.eps, order)
    j = np.arange(len(coeffs))
    # int_0^pi sin^2(2jt) dt = pi/2 for j >= 1
    return (n + 0.5) * 0.5 * math.pi * float(np.sum((2 * j * coeffs)[1:] ** 2))


def mathieu_phase_numeric(mp: MathieuParams, n: int, tol: Tolerance = QUAD_TOL) -> float:
    """``(n + 1/2) int_0^pi r'^2 dt`` along the shot periodic envelope."""
    if mp.eps == 0:
        return 0.0
    _, traj = shoot_periodic_envelope(mp)
    tight = Tolerance(abs_tol=min(tol.abs_tol, 1e-15), rel_tol=min(tol.rel_tol, 1e-11), max_steps=tol.max_steps)
    integral = integrate_1d(lambda t: float(traj(t)[1]) ** 2, 0.0, PERIOD, tight,
                            points=[PERIOD / 4, PERIOD / 2, 3 * PERIOD / 4])
    return (n + 0.5) * integral


# -- stability ----------------------------------------------------------------

@dataclass(frozen=True)
class FloquetData:
    monodromy: np.ndarray
    trace: float
    classification: str

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.monodromy))


def stability_probe(mp: MathieuParams, tol: Tolerance = ENVELOPE_TOL) -> FloquetData:
    """Monodromy over one coefficient period; stable iff ``|trace| < 2``."""
    columns = [integrate_mathieu(mp, x0, v0, PERIOD, tol=tol).final for x0, v0 in ((1.0, 0.0), (0.0, 1.0))]
    monodromy = np.column_stack(columns)
    trace = float(np.trace(monodromy))
    gap = abs(trace) - 2
    if abs(gap) < MARGINAL_BAND:
        label = "marginal"
    elif gap < 0:
        label = "stable"
    else:
        label = "unstable"
    return FloquetData(monodromy, trace, label)
