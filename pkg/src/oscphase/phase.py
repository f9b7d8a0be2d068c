"""Geometric and dynamical phases of oscillator eigenstates and superpositions.

Every closed form here has a quadrature counterpart so the two can be compared:

* :func:`geometric_phase_integral` integrates
  ``M int [(n + 1/2) rhodot^2 / Omega + xdot_p^2 / hbar] dt`` directly;
* :func:`dynamical_phase` with ``method="quadrature"`` integrates ``<n|H|n>``
  in x at every time node, then in t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classical import (
    Commensurability, ForceSpectrum, HomogeneousBasis, OscillatorParams,
    ParticularSolution,
)
from .errors import DegenerateBasis, FictitiousSolutionPresent, PhaseUndefined, Resonance
from .numerics import Tolerance, integrate_1d
from .wavefunction import EigenState, Superposition, energy_expectation, quasi_periodicity_check

PERIODICITY_TOL = 1e-8
PHASE_TOL = Tolerance(abs_tol=1e-12, rel_tol=1e-11, max_steps=2000)
ENERGY_T_TOL = Tolerance(abs_tol=1e-10, rel_tol=1e-9, max_steps=500)


def wrap_phase(value: float) -> float:
    """Reduce a phase to ``(-pi, pi]``."""
    r = math.remainder(value, 2 * math.pi)
    return math.pi if r == -math.pi else r


def phase_distance(a: float, b: float) -> float:
    """Distance between two phases modulo ``2 pi``."""
    return abs(wrap_phase(a - b))


@dataclass(frozen=True)
class PhaseResult:
    geometric: float
    dynamical: float
    total: float
    period_used: float
    n_or_coefficients: int | tuple[complex, ...]

    @property
    def consistency_defect(self) -> float:
        return phase_distance(self.total, self.geometric + self.dynamical)


def _require_basis(basis: HomogeneousBasis) -> float:
    c = basis.c_cos_beta
    if c == 0:
        raise DegenerateBasis("C cos(beta) = 0")
    return c


def _width_factor(basis: HomogeneousBasis) -> float:
    c = _require_basis(basis)
    return (1 - 2 * c + basis.C**2) / c


def geometric_phase_integral(state: EigenState, tau_prime: float, tol: Tolerance = PHASE_TOL) -> float:
    """Quadrature of ``M int_0^tau' [(n+1/2) rhodot^2/Omega + xdot_p^2/hbar] dt``.

    Raises :class:`PhaseUndefined` unless ``rho`` and ``x_p`` both repeat after ``tau_prime``.
    """
    rep, n = state.rep, state.n
    basis, xp = rep.basis, rep.xp
    M, hbar = rep.params.M, rep.params.hbar
    omega = basis.omega
    ts = np.linspace(0.0, tau_prime, 5, endpoint=False) + 0.137 * tau_prime
    rho_defect = float(np.max(np.abs(basis.rho(ts + tau_prime) - basis.rho(ts))))
    xp_defect = xp.periodicity_defect(tau_prime)
    if rho_defect > PERIODICITY_TOL or xp_defect > PERIODICITY_TOL * max(1.0, abs(xp.D)):
        raise PhaseUndefined(
            f"rho or x_p is not periodic with period {tau_prime!r} "
            f"(defects {rho_defect:.2g}, {xp_defect:.2g})"
        )

    def integrand(t):
        return float(M * ((n + 0.5) * basis.rho_dot(t) ** 2 / omega + xp.xdot(t) ** 2 / hbar))

    # break points at half-periods of the fastest motion keep QUADPACK honest on long windows
    fastest = rep.params.w
    if xp.spectrum is not None and xp.spectrum.coefficients:
        fastest = max(fastest, max(xp.spectrum.coefficients) * xp.spectrum.w_f)
    pieces = max(1, min(1000, int(math.ceil(tau_prime * fastest / math.pi))))
    points = list(np.linspace(0.0, tau_prime, pieces + 1)[1:-1])
    return integrate_1d(integrand, 0.0, tau_prime, tol, points=points)


def closed_form_undriven(basis: HomogeneousBasis, n: int) -> float:
    """Width-pulsation phase over one period ``tau0`` with ``x_p = 0``."""
    return math.pi * (n + 0.5) * _width_factor(basis)


def closed_form_full(
    basis: HomogeneousBasis, xp: ParticularSolution, comm: Commensurability, n: int
) -> float:
    """Phase of ``psi_n`` over ``N tau0`` for a commensurate force plus ``D cos(wt + phi)``."""
    params = basis.params
    M, w, hbar = params.M, params.w, params.hbar
    N, p = comm.N, comm.p
    width = closed_form_undriven(basis, n) * N
    drive = 0.0
    if xp.spectrum is not None:
        total = 0.0
        for k, f in xp.spectrum.coefficients.items():
            if k == 0:
                continue
            denom = p**2 * k**2 - N**2
            if denom == 0:
                raise Resonance(f"mode {k} resonates at (N, p) = ({N}, {p})")
            total += 2 * k**2 * abs(f) ** 2 / denom**2  # modes +k and -k
        drive = 2 * math.pi * N**3 * p**2 / (hbar * M * w**3) * total
    center = math.pi * M * N * w * xp.D**2 / hbar
    return width + drive + center


def closed_form_special_rep(spectrum: ForceSpectrum, params: OscillatorParams) -> float:
    """Phase over ``tau_f`` in the representation ``C = 1, beta = 0, D = 0``."""
    M, w, hbar = params.M, params.w, params.hbar
    w_f = spectrum.w_f
    total = 0.0
    for k, f in spectrum.coefficients.items():
        if k == 0:
            continue
        denom = k**2 * w_f**2 - w**2
        if abs(denom) <= 1e-12 * w**2:
            raise Resonance(f"mode {k} resonates with the oscillator")
        total += 2 * k**2 * abs(f) ** 2 / denom**2
    return 2 * math.pi * w_f / (hbar * M) * total


def decomposition(basis: HomogeneousBasis, D: float, params: OscillatorParams | None, n: int) -> tuple[float, float]:
    """Split the tau0-phase into (width pulsation, center oscillation) contributions."""
    params = params or basis.params
    width = closed_form_undriven(basis, n)
    center = math.pi * params.M * params.w * D**2 / params.hbar
    return width, center


def ge_child_integral(basis: HomogeneousBasis, params: OscillatorParams | None = None,
                      tol: Tolerance = PHASE_TOL) -> float:
    """``-(i/2) int_0^tau0 alpha'/(alpha + alpha*) dt`` for the Gaussian width parameter
    ``alpha = (Omega/rho^2 - i M rhodot/rho)/(2 hbar)``.

    The imaginary part integrates to ``ln rho(tau0)/rho(0) = 0``; the real part is returned.
    """
    params = params or basis.params
    _require_basis(basis)
    M, hbar = params.M, params.hbar
    omega = basis.omega

    def integrand(t):
        rho, rd, rdd = basis.rho(t), basis.rho_dot(t), basis.rho_ddot(t)
        alpha_dot = (-2 * omega * rd / rho**3 - 1j * M * (rdd / rho - rd**2 / rho**2)) / (2 * hbar)
        return complex(-0.5j * alpha_dot / (omega / (hbar * rho**2)))

    tau0 = params.tau0
    points = [tau0 / 4, tau0 / 2, 3 * tau0 / 4]
    re = integrate_1d(lambda t: integrand(t).real, 0.0, tau0, tol, points)
    im = integrate_1d(lambda t: integrand(t).imag, 0.0, tau0, tol, points)
    if abs(im) > 1e-8:
        raise ArithmeticError(f"imaginary part {im!r} did not cancel")
    return re


def _is_tau0(period: float, params: OscillatorParams) -> bool:
    return abs(period - params.tau0) <= 1e-12 * params.tau0


def dynamical_phase(state: EigenState, period: float | None = None, method: str = "closed_form") -> float:
    """``-(1/hbar) int_0^period <n|H|n> dt``.

    ``closed_form`` needs an undriven representation and ``period = tau0``;
    ``quadrature`` works for any representation and period.
    """
    rep, n = state.rep, state.n
    params, basis, xp = rep.params, rep.basis, rep.xp
    period = params.tau0 if period is None else period
    if method == "closed_form":
        if not xp.is_fictitious:
            raise ValueError("closed-form dynamical phase needs an undriven representation")
        if not _is_tau0(period, params):
            raise ValueError("closed-form dynamical phase is for one period tau0")
        c = _require_basis(basis)
        return -(n + 0.5) * math.pi * (1 + basis.C**2) / c - math.pi * params.alpha0**2 * xp.D**2
    if method == "quadrature":
        hbar = params.hbar
        pieces = max(1, int(math.ceil(period / (0.25 * params.tau0))))
        points = list(np.linspace(0.0, period, pieces + 1)[1:-1])
        energy = integrate_1d(lambda t: energy_expectation(state, t), 0.0, period, ENERGY_T_TOL, points)
        return -energy / hbar
    raise ValueError(f"unknown method {method!r}")


def superposition_phase(sup: Superposition, params: OscillatorParams | None = None) -> float:
    """tau0-phase of ``sum_n B_n psi_n`` in an undriven representation (raw, not reduced)."""
    rep = sup.rep
    params = params or rep.params
    if not rep.xp.is_fictitious:
        raise ValueError("superposition phase is defined here for the undriven oscillator")
    c = _require_basis(rep.basis)
    weighted = sum(abs(b) ** 2 * (n + 0.5) for n, b in enumerate(sup.coefficients))
    return math.pi * (1 + params.alpha0**2 * rep.xp.D**2 + weighted * (1 + rep.basis.C**2) / c)


def half_period_phase(basis: HomogeneousBasis, n: int, D: float = 0.0) -> float:
    """Phase over ``tau0/2``; only defined without a fictitious particular solution."""
    if D != 0:
        raise FictitiousSolutionPresent("half-period phase needs x_p = 0")
    c = _require_basis(basis)
    return (n + 0.5) * math.pi * (-1 + (1 + basis.C**2) / (2 * c))


def eigenstate_phases(state: EigenState, period: float, dynamical_method: str = "quadrature") -> PhaseResult:
    """Geometric (quadrature), dynamical, and total phase measured on the wavefunction itself."""
    geometric = geometric_phase_integral(state, period)
    dynamical = dynamical_phase(state, period, dynamical_method)
    factor = quasi_periodicity_check(state, period)
    return PhaseResult(geometric, dynamical, math.atan2(factor.imag, factor.real), period, state.n)

