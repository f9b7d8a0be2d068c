"""Numerical kernel: adaptive quadrature, adaptive Runge-Kutta IVP integration
and scalar root finding.

Thin, contract-checking wrappers around QUADPACK (``scipy.integrate.quad``),
the Dormand-Prince 8(5,3) pair (``scipy.integrate.solve_ivp``) and Brent's
method.  Every function is pure; nothing here keeps state between calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import NoBracket, NonConvergence, NonFinite, StepUnderflow

#: states whose max-norm exceeds this are reported as a blow-up
BLOWUP_THRESHOLD = 1e12


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float
    rel_tol: float
    max_steps: int = 1000  # subdivisions (quadrature), steps (ODE) or iterations (roots)

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


QUAD_TOL = Tolerance(abs_tol=1e-11, rel_tol=1e-10, max_steps=1000)
ODE_TOL = Tolerance(abs_tol=1e-12, rel_tol=1e-10, max_steps=10**6)
ROOT_TOL = Tolerance(abs_tol=1e-11, rel_tol=1e-14, max_steps=200)


@dataclass
class Trajectory:
    """Sampled solution of an IVP.

    ``values[i]`` is the state at ``times[i]``; ``derivative_values[i]`` is the
    right-hand side evaluated there.  When the integration was run with
    ``dense=True`` the trajectory can also be called at any time inside its span.
    """

    times: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray
    interpolant: Callable[[float], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("times and values must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __call__(self, t):
        if self.interpolant is None:
            raise ValueError("trajectory was computed without dense output")
        return self.interpolant(t)

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


def _checked(f: Callable[[float], float]) -> Callable[[float], float]:
    def g(t: float) -> float:
        y = f(t)
        if not math.isfinite(y):
            raise NonFinite(f"integrand returned {y!r} at t={t!r}", last_time=t)
        return y
    return g


def integrate_1d(
    f: Callable[[float], float],
    t_lo: float,
    t_hi: float,
    tol: Tolerance = QUAD_TOL,
    points: Sequence[float] | None = None,
) -> float:
    """Adaptive Gauss-Kronrod quadrature of a real integrand over ``[t_lo, t_hi]``.

    ``points`` are interior break points (discontinuities, known peaks) that the
    first subdivision should respect.  Raises :class:`NonConvergence` when the
    error estimate cannot be brought under ``max(abs_tol, rel_tol*|I|)`` within
    ``tol.max_steps`` subdivisions.
    """
    if t_lo > t_hi:
        raise ValueError(f"t_lo={t_lo} > t_hi={t_hi}")
    if t_lo == t_hi:
        return 0.0
    if points is not None:
        points = [p for p in points if t_lo < p < t_hi] or None
    value, err, info, *rest = integrate.quad(
        _checked(f), t_lo, t_hi,
        epsabs=tol.abs_tol, epsrel=tol.rel_tol, limit=tol.max_steps,
        points=points, full_output=1,
    )
    if err > max(tol.abs_tol, tol.rel_tol * abs(value)):
        msg = rest[0] if rest else "error estimate above tolerance"
        raise NonConvergence(
            f"quadrature on [{t_lo}, {t_hi}] did not converge "
            f"(I={value!r}, err={err:.3g}): {msg}"
        )
    return float(value)


def solve_ivp(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    t0: float,
    state0: Sequence[float],
    t_end: float,
    tol: Tolerance = ODE_TOL,
    t_eval: Sequence[float] | None = None,
    dense: bool = False,
    blowup: float = BLOWUP_THRESHOLD,
) -> Trajectory:
    """Integrate ``state' = rhs(t, state)`` from ``t0`` to ``t_end`` (forward only).

    Uses the adaptive Dormand-Prince 8(5,3) embedded pair.  If ``t_eval`` is
    omitted the trajectory holds the accepted steps.  Raises :class:`NonFinite`
    when the state becomes non-finite or its max-norm exceeds ``blowup``
    (``last_time`` then holds the time of the last valid state), and
    :class:`StepUnderflow` when the required step falls below the floor.
    """
    if t_end <= t0:
        raise ValueError("t_end must be greater than t0")
    y0 = np.asarray(state0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise NonFinite("non-finite initial state", last_time=t0)

    def fun(t, y):
        return np.asarray(rhs(t, y), dtype=float)

    def blew_up(t, y):
        return blowup - np.max(np.abs(y)) if np.all(np.isfinite(y)) else -1.0
    blew_up.terminal = True

    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
    sol = integrate.solve_ivp(
        fun, (t0, t_end), y0, method="DOP853",
        rtol=tol.rel_tol, atol=tol.abs_tol,
        t_eval=t_eval, dense_output=dense, events=blew_up,
    )
    if sol.status == 1 or not np.all(np.isfinite(sol.y)):
        finite = np.all(np.isfinite(sol.y), axis=0)
        last = float(sol.t[finite][-1]) if finite.any() else t0
        if sol.t_events and len(sol.t_events[0]):
            last = float(sol.t_events[0][0])
        raise NonFinite(f"state exceeded {blowup:g} near t={last:.6g}", last_time=last)
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    if sol.nfev > 13 * tol.max_steps:
        raise StepUnderflow(f"step budget {tol.max_steps} exhausted")

    values = sol.y.T.copy()
    derivs = np.array([fun(t, y) for t, y in zip(sol.t, values)])
    return Trajectory(sol.t.copy(), values, derivs, sol.sol if dense else None)


def find_root(
    g: Callable[[float], float],
    bracket: tuple[float, float] | None = None,
    guess: float | None = None,
    tol: Tolerance = ROOT_TOL,
) -> float:
    """Solve ``g(r) = 0`` by Brent's method on a bracket, or the secant method from a guess."""
    if bracket is not None:
        lo, hi = bracket
        glo, ghi = g(lo), g(hi)
        if glo == 0:
            return float(lo)
        if ghi == 0:
            return float(hi)
        if np.sign(glo) == np.sign(ghi):
            raise NoBracket(f"g has the same sign at both ends of [{lo}, {hi}]")
        try:
            r = optimize.brentq(g, lo, hi, xtol=tol.abs_tol * 1e-3, rtol=max(tol.rel_tol, 4.5e-16),
                                maxiter=tol.max_steps)
        except RuntimeError as exc:
            raise NonConvergence(str(exc)) from exc
    elif guess is not None:
        try:
            r = optimize.newton(g, guess, tol=tol.abs_tol * 1e-3, maxiter=tol.max_steps)
        except RuntimeError as exc:
            raise NonConvergence(str(exc)) from exc
    else:
        raise ValueError("find_root needs a bracket or a guess")
    if not abs(g(r)) <= tol.abs_tol:
        raise NonConvergence(f"|g(r)| = {abs(g(r)):.3g} above {tol.abs_tol:g}")
    return float(r)
