"""Classical solution data of the (driven) simple harmonic oscillator.

Homogeneous pair ``u = cos wt``, ``v = C sin(wt + beta)``, envelope
``rho = sqrt(u^2 + v^2)``, Wronskian ``Omega = M (u v' - v u')`` and a periodic
particular solution ``x_p`` built from the Fourier spectrum of the force plus an
optional homogeneous admixture ``D cos(wt + phi)``.

All evaluators accept scalars or numpy arrays for ``t``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .errors import DegenerateBasis, Resonance
from .numerics import QUAD_TOL, Tolerance, integrate_1d

RESONANCE_RTOL = 1e-12
MAX_DENOMINATOR = 10**6
COMMENSURABILITY_TOL = 1e-9


@dataclass(frozen=True)
class OscillatorParams:
    M: float = 1.0
    w: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("M", "w", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def tau0(self) -> float:
        return 2 * math.pi / self.w

    @property
    def alpha0(self) -> float:
        return math.sqrt(self.M * self.w / self.hbar)


@dataclass(frozen=True)
class HomogeneousBasis:
    """The pair ``u = cos wt``, ``v = C sin(wt + beta)``."""

    C: float = 1.0
    beta: float = 0.0
    params: OscillatorParams = field(default_factory=OscillatorParams)

    def __post_init__(self):
        if self.C == 0 or abs(math.cos(self.beta)) < 1e-14:
            raise DegenerateBasis(
                f"u and v are linearly dependent for C={self.C!r}, beta={self.beta!r}"
            )

    # u, v and derivatives
    def u(self, t):
        return np.cos(self.params.w * np.asarray(t, dtype=float))

    def v(self, t):
        return self.C * np.sin(self.params.w * np.asarray(t, dtype=float) + self.beta)

    def u_dot(self, t):
        w = self.params.w
        return -w * np.sin(w * np.asarray(t, dtype=float))

    def v_dot(self, t):
        w = self.params.w
        return self.C * w * np.cos(w * np.asarray(t, dtype=float) + self.beta)

    @property
    def omega(self) -> float:
        return self.params.M * self.params.w * self.C * math.cos(self.beta)

    @property
    def c_cos_beta(self) -> float:
        return self.C * math.cos(self.beta)

    def rho(self, t):
        return np.hypot(self.u(t), self.v(t))

    def rho_dot(self, t):
        u, v = self.u(t), self.v(t)
        return (u * self.u_dot(t) + v * self.v_dot(t)) / np.hypot(u, v)

    def rho_ddot(self, t):
        # from rho^2 = u^2 + v^2 and u'' = -w^2 u, v'' = -w^2 v
        w = self.params.w
        rho, rho_dot = self.rho(t), self.rho_dot(t)
        speed2 = self.u_dot(t) ** 2 + self.v_dot(t) ** 2
        return (speed2 - w**2 * rho**2 - rho_dot**2) / rho

    def theta(self, t):
        """Continuous argument of ``u - i v``, equal to its principal value at ``t = 0``.

        ``e^{iwt}(u - iv) = A + B e^{2iwt}`` with ``|A| > |B|`` whenever
        ``C cos(beta) > 0``, so the principal ``angle`` of the right-hand side
        never jumps.
        """
        if self.c_cos_beta <= 0:
            raise DegenerateBasis("continuous argument requires C*cos(beta) > 0")
        t = np.asarray(t, dtype=float)
        wt = self.params.w * t
        A = 0.5 * (1 + self.C * np.exp(-1j * self.beta))
        B = 0.5 * (1 - self.C * np.exp(1j * self.beta))
        return -wt + np.angle(A + B * np.exp(2j * wt))


def envelope_rho(basis: HomogeneousBasis, t):
    return basis.rho(t)


def envelope_rho_dot(basis: HomogeneousBasis, t):
    return basis.rho_dot(t)


def wronskian_omega(basis: HomogeneousBasis) -> float:
    omega = basis.omega
    if omega == 0:
        raise DegenerateBasis("vanishing Wronskian")
    return omega


def numeric_wronskian(basis: HomogeneousBasis, t):
    """``M (u v' - v u')`` evaluated pointwise from the analytic derivatives."""
    return basis.params.M * (basis.u(t) * basis.v_dot(t) - basis.v(t) * basis.u_dot(t))


# -- forcing ------------------------------------------------------------------

@dataclass(frozen=True)
class ForceSpectrum:
    """Fourier spectrum of a real periodic force.

    Only modes ``n >= 0`` are stored; ``f_{-n} = conj(f_n)`` is implied.
    """

    w_f: float
    coefficients: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        if not self.w_f > 0:
            raise ValueError("w_f must be positive")
        clean = {}
        for n, c in dict(self.coefficients).items():
            n = int(n)
            if n < 0:
                raise ValueError("store only n >= 0; negative modes are implied")
            c = complex(c)
            if n == 0:
                c = complex(c.real, 0.0)
            if c != 0:
                clean[n] = c
        object.__setattr__(self, "coefficients", dict(sorted(clean.items())))

    def __hash__(self):
        return hash((self.w_f, tuple(self.coefficients.items())))

    @property
    def tau_f(self) -> float:
        return 2 * math.pi / self.w_f

    def coefficient(self, n: int) -> complex:
        c = self.coefficients.get(abs(n), 0j)
        return c if n >= 0 else c.conjugate()

    def two_sided(self) -> dict[int, complex]:
        out = {}
        for n, c in self.coefficients.items():
            out[n] = c
            if n:
                out[-n] = c.conjugate()
        return dict(sorted(out.items()))

    def force(self, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros_like(t)
        for n, c in self.coefficients.items():
            term = c * np.exp(1j * n * self.w_f * t)
            total = total + (term.real if n == 0 else 2 * term.real)
        return total

    def to_json(self) -> str:
        return json.dumps({
            "w_f": self.w_f,
            "coefficients": [
                {"n": n, "re": c.real, "im": c.imag} for n, c in self.coefficients.items()
            ],
        })

    @classmethod
    def from_json(cls, text: str) -> "ForceSpectrum":
        data = json.loads(text)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ForceSpectrum":
        coeffs: dict[int, complex] = {}
        for item in data.get("coefficients", []):
            n = int(item["n"])
            if n in coeffs:
                raise ValueError(f"duplicate mode n={n}")
            coeffs[n] = complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
        return cls(float(data["w_f"]), coeffs)


def fourier_coefficients(
    F: Callable[[float], float],
    tau_f: float,
    n_max: int,
    tol: Tolerance = QUAD_TOL,
    points=None,
) -> ForceSpectrum:
    """Project a real ``tau_f``-periodic force onto modes ``0..n_max`` by quadrature."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    w_f = 2 * math.pi / tau_f
    coeffs = {}
    for n in range(n_max + 1):
        re = integrate_1d(lambda t: F(t) * math.cos(n * w_f * t), 0.0, tau_f, tol, points)
        im = 0.0 if n == 0 else -integrate_1d(
            lambda t: F(t) * math.sin(n * w_f * t), 0.0, tau_f, tol, points)
        coeffs[n] = complex(re, im) / tau_f
    return ForceSpectrum(w_f, coeffs)


@dataclass(frozen=True)
class Commensurability:
    N: int
    p: int

    def __post_init__(self):
        if self.N < 1 or self.p < 1 or math.gcd(self.N, self.p) != 1:
            raise ValueError(f"(N, p) = ({self.N}, {self.p}) must be coprime positive integers")


class Incommensurate:
    """Marker result: no (N, p) within the denominator cap fits ``tau0/tau_f``."""

    def __init__(self, ratio: float):
        self.ratio = ratio

    def __repr__(self):
        return f"Incommensurate(ratio={self.ratio!r})"

    def __bool__(self):
        return False


def _convergents(x: Fraction):
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    while True:
        a = math.floor(x)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def commensurability(
    params: OscillatorParams,
    w_f: float,
    tol: float = COMMENSURABILITY_TOL,
    max_denominator: int = MAX_DENOMINATOR,
) -> Commensurability | Incommensurate:
    """Find coprime ``(N, p)`` with ``tau0/tau_f = p/N``.

    Walks the continued-fraction convergents ``p/N`` of ``w_f/w`` and accepts the
    first whose drive-phase drift over the joint period, ``|N*ratio - p|`` (in
    cycles), is below ``tol``.
    """
    if not w_f > 0:
        raise ValueError("w_f must be positive")
    ratio = w_f / params.w
    for conv in _convergents(Fraction(ratio)):
        N, p = conv.denominator, conv.numerator
        if N > max_denominator:
            break
        if p >= 1 and abs(N * ratio - p) < tol:
            return Commensurability(N=N, p=p)
    return Incommensurate(ratio)


# -- particular solution ------------------------------------------------------

@dataclass(frozen=True)
class ParticularSolution:
    """``x_p(t) = sum_n f_n e^{i n w_f t} / (M (w^2 - n^2 w_f^2)) + D cos(wt + phi)``.

    Internally ``x_p`` is a finite sum of complex exponentials
    ``sum_k c_k exp(i lam_k t)``, which also gives ``delta`` in closed form.
    """

    params: OscillatorParams = field(default_factory=OscillatorParams)
    spectrum: ForceSpectrum | None = None
    D: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.spectrum is not None:
            w, w_f = self.params.w, self.spectrum.w_f
            for n, c in self.spectrum.coefficients.items():
                if c != 0 and abs(n * w_f - w) <= RESONANCE_RTOL * w:
                    raise Resonance(
                        f"mode n={n} resonates with the oscillator (n*w_f = w); "
                        "no finite particular solution exists"
                    )
        modes = []
        if self.spectrum is not None:
            M, w, w_f = self.params.M, self.params.w, self.spectrum.w_f
            for n, f in self.spectrum.two_sided().items():
                modes.append((f / (M * (w**2 - n**2 * w_f**2)), n * w_f))
        if self.D != 0:
            half = 0.5 * self.D
            modes.append((half * np.exp(1j * self.phi), self.params.w))
            modes.append((half * np.exp(-1j * self.phi), -self.params.w))
        object.__setattr__(self, "_amps", np.array([m[0] for m in modes], dtype=complex))
        object.__setattr__(self, "_freqs", np.array([m[1] for m in modes], dtype=float))

    @property
    def is_zero(self) -> bool:
        return len(self._amps) == 0

    @property
    def is_fictitious(self) -> bool:
        """True when ``x_p`` is a pure homogeneous solution (no force)."""
        return self.spectrum is None or not self.spectrum.coefficients

    def _series(self, t, power: int) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.is_zero:
            return np.zeros_like(t) + 0j
        phases = np.exp(1j * np.multiply.outer(t, self._freqs))
        weights = self._amps * (1j * self._freqs) ** power
        return phases @ weights

    def complex_x(self, t):
        return self._series(t, 0)

    def x(self, t):
        return self._series(t, 0).real

    def xdot(self, t):
        return self._series(t, 1).real

    def xddot(self, t):
        return self._series(t, 2).real

    def force(self, t):
        if self.spectrum is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.spectrum.force(t)

    def _quadratic_integral(self, t, kernel) -> np.ndarray:
        # int_0^t sum_jk c_j c_k kernel(l_j, l_k) e^{i (l_j + l_k) s} ds
        t = np.asarray(t, dtype=float)
        if self.is_zero:
            return np.zeros_like(t)
        lam = np.add.outer(self._freqs, self._freqs)
        weight = np.outer(self._amps, self._amps) * kernel(*np.meshgrid(self._freqs, self._freqs, indexing="ij"))
        tt = t[..., None, None]
        # (e^{i L t} - 1)/(i L), stable through L = 0
        E = tt * np.exp(0.5j * lam * tt) * np.sinc(lam * tt / (2 * np.pi))
        return np.sum(weight * E, axis=(-2, -1)).real

    def delta_potential(self, t):
        """``int_0^t (1/2) M w^2 x_p^2 ds``."""
        M, w = self.params.M, self.params.w
        return self._quadratic_integral(t, lambda lj, lk: 0.5 * M * w**2 + 0 * lj)

    def delta_kinetic(self, t):
        """``int_0^t (1/2) M xdot_p^2 ds``."""
        M = self.params.M
        return self._quadratic_integral(t, lambda lj, lk: -0.5 * M * lj * lk)

    def delta(self, t):
        """Phase function with ``delta' = (M/2)(w^2 x_p^2 - xdot_p^2)``, ``delta(0) = 0``."""
        return self.delta_potential(t) - self.delta_kinetic(t)

    def periodicity_defect(self, period: float, samples: int = 7) -> float:
        ts = np.linspace(0.0, period, samples, endpoint=False) + 0.1234 * period
        return float(max(
            np.max(np.abs(self.x(ts + period) - self.x(ts))),
            np.max(np.abs(self.xdot(ts + period) - self.xdot(ts))),
        ))


def particular_solution(
    params: OscillatorParams,
    spectrum: ForceSpectrum | None = None,
    D: float = 0.0,
    phi: float = 0.0,
) -> ParticularSolution:
    return ParticularSolution(params, spectrum, D, phi)


def delta_phase(
    params: OscillatorParams,
    xp: ParticularSolution,
    F: Callable[[float], float] | None = None,
    t: float = 0.0,
    tol: Tolerance = QUAD_TOL,
) -> float:
    """``delta(t)`` by direct quadrature of ``(M/2)(w^2 x_p^2 - xdot_p^2)``.

    ``F`` is accepted for interface symmetry; the integrand does not depend on it.
    """
    M, w = params.M, params.w
    if xp.is_zero or t == 0:
        return 0.0

    def integrand(s):
        return float(0.5 * M * (w**2 * xp.x(s) ** 2 - xp.xdot(s) ** 2))

    lo, hi = (0.0, t) if t > 0 else (t, 0.0)
    n_pieces = max(1, int(abs(t) / (0.5 * params.tau0)))
    points = np.linspace(lo, hi, n_pieces + 1)[1:-1]
    value = integrate_1d(integrand, lo, hi, tol, points=list(points))
    return value if t > 0 else -value
