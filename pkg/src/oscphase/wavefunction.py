"""Eigenfunctions of the (driven) oscillator built from classical solutions,
and quadrature-level checks on them.

    psi_n(x, t) = (Omega/(pi hbar))^{1/4} / sqrt(2^n n! rho)
                  * exp(i (n + 1/2) theta(t))
                  * exp(i (M xdot_p x + delta) / hbar)
                  * exp((x - x_p)^2 / (2 hbar) * (-Omega/rho^2 + i M rhodot/rho))
                  * H_n(sqrt(Omega/hbar) (x - x_p)/rho)

where ``theta`` is the continuous argument of ``u - i v``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .classical import HomogeneousBasis, OscillatorParams, ParticularSolution
from .errors import DegenerateBasis, NotQuasiPeriodic, Overflow, RepresentationMismatch
from .numerics import Tolerance, integrate_1d

log = logging.getLogger(__name__)

#: x-integrals need to beat the 1e-8 contracts with margin
X_TOL = Tolerance(abs_tol=1e-13, rel_tol=1e-12, max_steps=500)
WINDOW_WIDTHS = 12.0
QUASI_PERIODIC_SPREAD = 1e-6

DeltaFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Representation:
    params: OscillatorParams = field(default_factory=OscillatorParams)
    basis: HomogeneousBasis | None = None
    xp: ParticularSolution | None = None

    def __post_init__(self):
        if self.basis is None:
            object.__setattr__(self, "basis", HomogeneousBasis(params=self.params))
        if self.xp is None:
            object.__setattr__(self, "xp", ParticularSolution(self.params))
        if self.basis.params != self.params or self.xp.params != self.params:
            raise ValueError("basis and particular solution must share the oscillator parameters")
        if self.basis.omega <= 0:
            raise DegenerateBasis(
                "eigenfunctions are normalizable only for Omega = M w C cos(beta) > 0"
            )

    def width(self, t):
        """Standard deviation of the ground-state density, ``sqrt(hbar rho^2 / (2 Omega))``."""
        return np.sqrt(self.params.hbar / (2 * self.basis.omega)) * self.basis.rho(t)


@dataclass(frozen=True)
class EigenState:
    rep: Representation
    n: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("quantum number must be non-negative")


@dataclass(frozen=True)
class Superposition:
    rep: Representation
    coefficients: tuple[complex, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        norm = sum(abs(c) ** 2 for c in coeffs)
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"sum |B_n|^2 = {norm!r}, expected 1")

    def states(self):
        return [(c, EigenState(self.rep, n)) for n, c in enumerate(self.coefficients) if c != 0]


def hermite(n: int, xi):
    """Physicists' Hermite polynomial by the three-term recurrence."""
    if n < 0:
        raise ValueError("n must be >= 0")
    xi = np.asarray(xi, dtype=float)
    h_prev, h = np.ones_like(xi), 2 * xi
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n):
            h_prev, h = h, 2 * xi * h - 2 * k * h_prev
    if not np.all(np.isfinite(h)):
        raise Overflow(f"H_{n} overflows the floating range at the requested points")
    return h if h.ndim else float(h)


@dataclass(frozen=True)
class _Frame:
    """Time-dependent pieces of ``psi_n``, computed once per ``t``."""

    n: int
    log_norm: float
    rho: np.ndarray
    rho_dot: np.ndarray
    theta: np.ndarray
    x_c: np.ndarray
    v_c: np.ndarray
    delta: np.ndarray
    omega: float
    M: float
    hbar: float

    def pieces(self, x):
        x = np.asarray(x, dtype=float)
        y = x - self.x_c
        scale = math.sqrt(self.omega / self.hbar) / self.rho
        xi = scale * y
        envelope = np.exp(self.log_norm - 0.5 * xi**2) / np.sqrt(self.rho)
        phase = ((self.n + 0.5) * self.theta + (self.M * self.v_c * x + self.delta) / self.hbar
                 + self.M * self.rho_dot * y**2 / (2 * self.hbar * self.rho))
        return envelope * np.exp(1j * phase), xi, scale, y

    def psi(self, x):
        amp, xi, _, _ = self.pieces(x)
        return amp * hermite(self.n, xi)

    def dpsi_dx(self, x):
        amp, xi, scale, y = self.pieces(x)
        n = self.n
        h = hermite(n, xi)
        dh = 2 * n * hermite(n - 1, xi) if n > 0 else 0.0
        log_deriv = (-self.omega * y / (self.hbar * self.rho**2)
                     + 1j * self.M * (self.v_c + self.rho_dot * y / self.rho) / self.hbar)
        return amp * (h * log_deriv + dh * scale)


def _frame(state: EigenState, t, delta: DeltaFn | None = None) -> _Frame:
    rep, n = state.rep, state.n
    basis, xp = rep.basis, rep.xp
    t = np.asarray(t, dtype=float)
    omega, hbar = basis.omega, rep.params.hbar
    log_norm = 0.25 * math.log(omega / (math.pi * hbar)) - 0.5 * (n * math.log(2) + math.lgamma(n + 1))
    return _Frame(n, log_norm, basis.rho(t), basis.rho_dot(t), basis.theta(t), xp.x(t), xp.xdot(t),
                  (delta or xp.delta)(t), omega, rep.params.M, hbar)


def eval_eigenfunction(state: EigenState, x, t, delta: DeltaFn | None = None):
    """Complex amplitude ``psi_n(x, t)``; ``x`` and ``t`` broadcast.

    ``delta`` overrides the phase function ``x_p.delta`` (used for negative controls).
    """
    return _frame(state, t, delta).psi(x)


def eigenfunction_dx(state: EigenState, x, t, delta: DeltaFn | None = None):
    """Analytic ``d psi_n / dx``."""
    return _frame(state, t, delta).dpsi_dx(x)


def eval_superposition(sup: Superposition, x, t, delta: DeltaFn | None = None):
    return sum(c * eval_eigenfunction(s, x, t, delta) for c, s in sup.states())


def _window(rep: Representation, t: float, n_max: int) -> tuple[float, float, list[float]]:
    center = float(rep.xp.x(t))
    half = WINDOW_WIDTHS * float(rep.width(t)) * math.sqrt(2 * n_max + 1)
    return center - half, center + half, [center]


def _x_integral(rep, t, n_max, integrand, tol=X_TOL) -> float:
    lo, hi, points = _window(rep, t, n_max)
    return integrate_1d(integrand, lo, hi, tol, points=points)


def normalization_check(state: EigenState, t: float) -> float:
    """``int |psi_n(x, t)|^2 dx`` over a window of +-12 width-scales around ``x_p(t)``."""
    frame = _frame(state, t)
    return _x_integral(state.rep, t, state.n, lambda x: float(abs(frame.psi(x)) ** 2))


def overlap(state_a: EigenState, state_b: EigenState, t: float) -> complex:
    """``<a|b>`` at time ``t``; both states must share one representation."""
    if state_a.rep != state_b.rep:
        raise RepresentationMismatch("overlap needs states of the same representation")
    rep = state_a.rep
    n_max = max(state_a.n, state_b.n)
    frame_a, frame_b = _frame(state_a, t), _frame(state_b, t)

    def product(x):
        return complex(np.conj(frame_a.psi(x)) * frame_b.psi(x))

    re = _x_integral(rep, t, n_max, lambda x: product(x).real)
    im = _x_integral(rep, t, n_max, lambda x: product(x).imag)
    return complex(re, im)


def position_expectation(state: EigenState, t: float) -> float:
    frame = _frame(state, t)
    return _x_integral(state.rep, t, state.n, lambda x: x * float(abs(frame.psi(x)) ** 2))


def second_central_moment(state: EigenState, t: float) -> float:
    center = position_expectation(state, t)
    frame = _frame(state, t)
    return _x_integral(state.rep, t, state.n, lambda x: (x - center) ** 2 * float(abs(frame.psi(x)) ** 2))


def energy_expectation(state: EigenState, t: float) -> float:
    """``<n|H|n>`` with ``H = P^2/2M + M w^2 x^2/2 - F(t) x``, by x-quadrature.

    The kinetic term uses ``int |d psi/dx|^2`` (integration by parts).
    """
    params = state.rep.params
    M, w, hbar = params.M, params.w, params.hbar
    force = float(state.rep.xp.force(t))

    frame = _frame(state, t)

    def density(x):
        psi, dpsi = frame.psi(x), frame.dpsi_dx(x)
        return float(hbar**2 / (2 * M) * abs(dpsi) ** 2
                     + (0.5 * M * w**2 * x**2 - force * x) * abs(psi) ** 2)

    return _x_integral(state.rep, t, state.n + 1, density, tol=Tolerance(1e-13, 1e-11, 500))


def quasi_periodicity_check(
    state: EigenState, period: float, t: float = 0.0, points: int = 41
) -> complex:
    """Measured factor ``psi(x, t + period) / psi(x, t)`` (median over an x-grid).

    Raises :class:`NotQuasiPeriodic` if the ratio varies over the grid by more
    than ``1e-6``.
    """
    rep = state.rep
    width = float(rep.width(t))
    xs = float(rep.xp.x(t)) + width * np.linspace(-3.0, 3.0, points) * math.sqrt(2 * state.n + 1)
    before = eval_eigenfunction(state, xs, t)
    after = eval_eigenfunction(state, xs, t + period)
    keep = np.abs(before) > 1e-3 * np.max(np.abs(before))
    ratio = after[keep] / before[keep]
    factor = complex(np.median(ratio.real), np.median(ratio.imag))
    spread = float(np.max(np.abs(ratio - factor)))
    log.debug("quasi-periodicity factor %s, spread %.3g", factor, spread)
    if spread > QUASI_PERIODIC_SPREAD:
        raise NotQuasiPeriodic(f"ratio varies by {spread:.3g} across x for period {period!r}")
    return factor


def schrodinger_residual(obj, x: float, t: float, delta: DeltaFn | None = None) -> float:
    """``|i hbar psi_t - H psi|`` by central finite differences.

    Steps are ``dx = 1e-4`` width-scales and ``dt = 1e-6 tau0``.  ``obj`` is an
    :class:`EigenState` or a :class:`Superposition`.
    """
    if isinstance(obj, Superposition):
        def psi(xx, tt):
            return eval_superposition(obj, xx, tt, delta)
        rep = obj.rep
    else:
        def psi(xx, tt):
            return eval_eigenfunction(obj, xx, tt, delta)
        rep = obj.rep
    params = rep.params
    M, w, hbar = params.M, params.w, params.hbar
    dx = 1e-4 * float(rep.width(t))
    dt = 1e-6 * params.tau0
    center = psi(x, t)
    psi_t = (psi(x, t + dt) - psi(x, t - dt)) / (2 * dt)
    psi_xx = (psi(x + dx, t) - 2 * center + psi(x - dx, t)) / dx**2
    force = float(rep.xp.force(t))
    h_psi = -hbar**2 / (2 * M) * psi_xx + (0.5 * M * w**2 * x**2 - force * x) * center
    return float(abs(1j * hbar * psi_t - h_psi))


def parity_defect(obj, xs: Sequence[float], t: float, parity: int) -> float:
    """``max |psi(-x) - parity * psi(x)|`` over ``xs``."""
    xs = np.asarray(xs, dtype=float)
    f = eval_superposition if isinstance(obj, Superposition) else eval_eigenfunction
    return float(np.max(np.abs(f(obj, -xs, t) - parity * f(obj, xs, t))))
