import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscphase import mathieu
from oscphase.errors import NonFinite, NonPositive, NoPeriodicEnvelope, ResonantDenominator
from oscphase.mathieu import MathieuParams

A2 = MathieuParams(2.0, 0.01)


def floquet_envelope_phase(a, eps, n=0, samples=20001):
    """Independent oracle: the periodic envelope is |y| for the Floquet solution y with unit Wronskian."""
    mp = MathieuParams(a, eps)
    t = np.linspace(0, math.pi, samples)
    x1 = mathieu.integrate_mathieu(mp, 1.0, 0.0, math.pi, t_eval=t)
    x2 = mathieu.integrate_mathieu(mp, 0.0, 1.0, math.pi, t_eval=t)
    monodromy = np.column_stack([x1.final, x2.final])
    _, vectors = np.linalg.eig(monodromy)
    v = vectors[:, 0]
    y = v[0] * x1.values[:, 0] + v[1] * x2.values[:, 0]
    yd = v[0] * x1.values[:, 1] + v[1] * x2.values[:, 1]
    wronskian = np.imag(np.conj(y) * yd)
    y, yd = y / np.sqrt(abs(wronskian[0])), yd / np.sqrt(abs(wronskian[0]))
    rho = np.abs(y)
    rho_dot = np.real(np.conj(y) * yd) / rho
    integrand = rho_dot**2
    # composite Simpson on an odd sample count
    h = t[1] - t[0]
    integral = h / 3 * (integrand[0] + integrand[-1] + 4 * integrand[1:-1:2].sum() + 2 * integrand[2:-1:2].sum())
    return (n + 0.5) * integral


class TestClassical:
    def test_free_cosine(self):
        traj = mathieu.integrate_mathieu(MathieuParams(1.0), 1.0, 0.0, 2 * math.pi)
        assert traj.final[0] == pytest.approx(1.0, abs=1e-8)

    def test_free_sine(self):
        traj = mathieu.integrate_mathieu(MathieuParams(4.0), 0.0, 2.0, math.pi / 4, dense=True)
        assert traj.final[0] == pytest.approx(1.0, abs=1e-8)

    def test_blow_up(self):
        with pytest.raises(NonFinite):
            mathieu.integrate_mathieu(MathieuParams(1.0, 0.2), 1.0, 0.0, 400.0)

    def test_ce1_values(self):
        assert mathieu.ce1_series(0.0, 0.01, r_max=1) == pytest.approx(1.0099, abs=1e-15)
        ts = np.linspace(0, 6, 13)
        assert np.allclose(mathieu.ce1_series(ts, 0.0), np.cos(ts))

    @pytest.mark.parametrize("r_max", [1, 2, 3])
    def test_ce1_residual_order(self, r_max):
        ts = np.linspace(0, 2 * math.pi, 401)

        def residual(eps):
            a = mathieu.ce1_characteristic_a(eps)
            c = mathieu.ce1_series(ts, eps, r_max)
            cdd = mathieu.ce1_series(ts, eps, r_max, derivative=2)
            return np.max(np.abs(cdd + (a + 16 * eps * np.cos(2 * ts)) * c))

        # the characteristic value is only kept through eps^2, capping the order at 3
        order = min(r_max + 1, 3)
        assert math.log2(residual(0.01) / residual(0.005)) == pytest.approx(order, abs=0.3)

    def test_ce1_tracks_integration(self):
        eps = 0.01
        mp = MathieuParams(mathieu.ce1_characteristic_a(eps), eps)
        ts = np.linspace(0, 2 * math.pi, 201)
        traj = mathieu.integrate_mathieu(mp, float(mathieu.ce1_series(0.0, eps)), 0.0, 2 * math.pi, t_eval=ts)
        assert np.max(np.abs(traj.values[:, 0] - mathieu.ce1_series(ts, eps))) < 50 * eps**3


class TestExpansion:
    def test_order_zero(self):
        assert mathieu.perturbative_rho(MathieuParams(3.0, 0.02), 0, 1.1) == pytest.approx(3.0**-0.25)

    def test_order_one(self):
        value = mathieu.perturbative_rho(A2, 1, 0.0)
        assert value == pytest.approx(2**-0.25 * (1 - 4 * 0.01), abs=1e-15)

    def test_second_order_component(self):
        exp = mathieu.rho_expansion(2.0, 2)
        expected = 32 / 2**1.25 + 16 / 2**0.25
        assert exp.component(2, math.pi / 4) == pytest.approx(expected, rel=1e-13)

    def test_first_order_component(self):
        exp = mathieu.rho_expansion(9.5, 1)
        ts = np.linspace(0, 3, 7)
        expected = -4 * np.cos(2 * ts) / (9.5**0.25 * 8.5)
        assert np.allclose(exp.component(1, ts), expected, atol=1e-15)

    @pytest.mark.parametrize("a, order", [(1.0, 1), (4.0, 2), (9.0, 3)])
    def test_resonant_denominators(self, a, order):
        with pytest.raises(ResonantDenominator):
            mathieu.rho_expansion(a, order)

    def test_four_allowed_at_first_order(self):
        mathieu.rho_expansion(4.0, 1)

    def test_order_out_of_range(self):
        with pytest.raises(ValueError):
            mathieu.rho_expansion(2.0, 2).combined(0.01, 3)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.3, 12).filter(lambda a: min(abs(a - j * j) for j in (1, 2, 3)) > 0.2))
    def test_components_even_and_periodic(self, a):
        exp = mathieu.rho_expansion(a, 3)
        ts = np.linspace(0, 3, 11)
        for k in range(4):
            assert np.allclose(exp.component(k, ts), exp.component(k, -ts))
            assert np.allclose(exp.component(k, ts), exp.component(k, ts + math.pi))

    @pytest.mark.parametrize("a", [0.5, 2.0, 9.5])
    def test_residual_scales_as_eps_to_order_plus_one(self, a):
        for k in range(4):
            full = mathieu.pinney_residual_norm(MathieuParams(a, 0.01), k)
            half = mathieu.pinney_residual_norm(MathieuParams(a, 0.005), k)
            assert math.log2(full / half) == pytest.approx(k + 1, abs=0.3)

    def test_residual_zero_without_drive(self):
        assert mathieu.pinney_residual_norm(MathieuParams(2.0, 0.0), 3) < 1e-14


class TestEnvelope:
    def test_fixed_point(self):
        traj = mathieu.ermakov_pinney_numeric(MathieuParams(2.0), 2**-0.25, math.pi)
        assert np.max(np.abs(traj.values[:, 0] - 2**-0.25)) < 1e-12

    def test_perturbed_fixed_point_not_periodic(self):
        rho0 = 1.1 * 2**-0.25
        traj = mathieu.ermakov_pinney_numeric(MathieuParams(2.0), rho0, math.pi)
        assert abs(traj.final[0] - rho0) > 1e-3
        assert np.all(traj.values[:, 0] > 0)

    def test_rejects_non_positive_start(self):
        with pytest.raises(NonPositive):
            mathieu.ermakov_pinney_numeric(A2, 0.0, 1.0)

    def test_shooting_no_drive(self):
        rho0, _ = mathieu.shoot_periodic_envelope(MathieuParams(3.0))
        assert rho0 == 3.0**-0.25

    def test_shooting_closes_and_is_even(self):
        rho0, traj = mathieu.shoot_periodic_envelope(A2)
        assert abs(traj.final[0] - rho0) < 1e-9 and abs(traj.final[1]) < 1e-9
        ts = np.linspace(0, math.pi, 31)
        assert np.max(np.abs(traj(math.pi - ts)[0] - traj(ts)[0])) < 1e-8
        assert rho0 == pytest.approx(2**-0.25 * (1 - 0.04), abs=5 * 0.01**2)

    def test_shooting_matches_series_to_fourth_order(self):
        ts = np.linspace(0, math.pi, 41)

        def gap(eps):
            mp = MathieuParams(2.0, eps)
            _, traj = mathieu.shoot_periodic_envelope(mp)
            return np.max(np.abs(traj(ts)[0] - mathieu.perturbative_rho(mp, 3, ts)))

        assert math.log2(gap(0.01) / gap(0.005)) == pytest.approx(4, abs=0.3)

    def test_resonance_has_no_envelope(self):
        with pytest.raises(NoPeriodicEnvelope):
            mathieu.shoot_periodic_envelope(MathieuParams(1.0, 0.05))


class TestPhase:
    def test_perturbative_values(self):
        assert mathieu.mathieu_phase_perturbative(MathieuParams(2.0, 0.0), 0) == 0
        assert mathieu.mathieu_phase_perturbative(A2, 0) == pytest.approx(1e-4 * 4 * math.pi / math.sqrt(2))
        expected = 4e-4 * 8 * 1.5 * math.pi / (math.sqrt(9.5) * 72.25)
        assert mathieu.mathieu_phase_perturbative(MathieuParams(9.5, 0.02), 1) == pytest.approx(expected)

    def test_perturbative_resonance(self):
        with pytest.raises(ResonantDenominator):
            mathieu.mathieu_phase_perturbative(MathieuParams(1.0, 0.01), 0)

    def test_numeric_zero_without_drive(self):
        assert mathieu.mathieu_phase_numeric(MathieuParams(2.0), 0) == 0.0

    @pytest.mark.parametrize("a, eps", [(2.0, 0.01), (0.5, 0.01), (9.5, 0.02), (6.0, 0.03)])
    def test_numeric_matches_floquet_oracle(self, a, eps):
        oracle = floquet_envelope_phase(a, eps)
        assert mathieu.mathieu_phase_numeric(MathieuParams(a, eps), 0) == pytest.approx(oracle, rel=1e-7)

    @pytest.mark.parametrize("a", [0.5, 2.0, 9.5])
    def test_leading_coefficient_is_32(self, a):
        """gamma / eps^2 tends to 32 (n + 1/2) pi / (sqrt(a) (a - 1)^2), four times the published 8."""
        eps = 0.002
        gamma = mathieu.mathieu_phase_numeric(MathieuParams(a, eps), 0)
        leading = 32 * 0.5 * math.pi / (math.sqrt(a) * (a - 1) ** 2)
        assert gamma / eps**2 == pytest.approx(leading, rel=20 * eps)
        published = mathieu.mathieu_phase_perturbative(MathieuParams(a, eps), 0)
        assert gamma / published == pytest.approx(4.0, rel=20 * eps)

    def test_series_phase_tracks_numeric(self):
        for eps in (0.005, 0.01, 0.02):
            mp = MathieuParams(2.0, eps)
            numeric = mathieu.mathieu_phase_numeric(mp, 0)
            assert mathieu.mathieu_phase_series(mp, 0) == pytest.approx(numeric, rel=10 * eps**2)

    def test_even_in_eps(self):
        plus = mathieu.mathieu_phase_numeric(MathieuParams(2.0, 0.03), 1)
        minus = mathieu.mathieu_phase_numeric(MathieuParams(2.0, -0.03), 1)
        assert plus == pytest.approx(minus, rel=1e-10)

    def test_linear_in_n_plus_half(self):
        base = mathieu.mathieu_phase_numeric(A2, 0) / 0.5
        for n in (1, 2, 5):
            assert mathieu.mathieu_phase_numeric(A2, n) / (n + 0.5) == pytest.approx(base, rel=1e-12)

    def test_mass_and_hbar_drop_out(self):
        a = mathieu.mathieu_phase_numeric(MathieuParams(2.0, 0.01, M=3.0, hbar=0.2), 0)
        assert a == mathieu.mathieu_phase_numeric(A2, 0)


class TestStability:
    @pytest.mark.parametrize("a, eps, label", [
        (1.0, 0.05, "unstable"), (4.0, 0.05, "unstable"), (2.0, 0.01, "stable"), (2.0, 0.0, "stable"),
        (0.5, 0.01, "stable"),
    ])
    def test_classification(self, a, eps, label):
        data = mathieu.stability_probe(MathieuParams(a, eps))
        assert data.classification == label
        assert abs(data.determinant - 1) < 1e-8

    def test_free_trace(self):
        data = mathieu.stability_probe(MathieuParams(2.0))
        assert data.trace == pytest.approx(2 * math.cos(math.sqrt(2) * math.pi), abs=1e-9)

    def test_marginal(self):
        # free oscillator with a = 1: monodromy over pi is -identity, |trace| = 2
        assert mathieu.stability_probe(MathieuParams(1.0)).classification == "marginal"

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            MathieuParams(0.0)
