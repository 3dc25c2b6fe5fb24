import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oposim.errors import DomainError
from oposim.medium import (GainMedium, MeanFieldState, mean_field_rhs, propagate_mean_fields,
                           pump_exit_amplitude, relative_gain, relative_gain_chi3,
                           single_pass_gain, small_signal_gain)

CHI2 = GainMedium(2, 0.5)
CHI3 = GainMedium(3, 3.0)


def before_full_depletion(P0, P1, medium):
    """chi2 pump has not yet passed through zero at the crystal exit."""
    if medium.order == 3:
        return True
    S = P0 + P1
    return medium.kappa * math.sqrt(S) <= math.atanh(min(math.sqrt(P0 / S), 1 - 1e-16))


class TestTypes:
    @pytest.mark.parametrize("order,kappa", [(1, 0.5), (4, 0.5), (2, -1.0), (3, float("nan"))])
    def test_invalid_medium(self, order, kappa):
        with pytest.raises(DomainError):
            GainMedium(order, kappa)

    def test_negative_power(self):
        with pytest.raises(DomainError):
            MeanFieldState(-1e-3, 0.0, 0.0)

    def test_amplitudes_carry_sign(self):
        s = MeanFieldState.from_amplitudes(-0.5, 0.2, 0.2)
        assert s.theta0 == pytest.approx(math.pi)
        np.testing.assert_allclose(s.amplitudes, [-0.5, 0.2, 0.2])

    def test_non_real_phase_rejected(self):
        with pytest.raises(DomainError):
            MeanFieldState(1.0, 0.1, 0.1, theta1=0.3).amplitudes


class TestRHS:
    def test_no_seed(self):
        np.testing.assert_array_equal(mean_field_rhs(MeanFieldState(1, 0, 0), CHI2), [0, 0, 0])

    def test_no_pump(self):
        np.testing.assert_array_equal(mean_field_rhs(MeanFieldState(0, 1, 1), CHI3), [0, 0, 0])

    def test_hand_value(self):
        # drive 2*sqrt(1)*sqrt(0.25*0.25) = 0.5; the pump loses (m-1) times that
        d = mean_field_rhs(MeanFieldState(1, 0.25, 0.25), CHI2)
        np.testing.assert_allclose(d, [-0.5, 0.5, 0.5], rtol=1e-15)
        assert d[0] + (CHI2.order - 1) * d[1] == 0.0

    def test_matches_finite_difference(self):
        s = MeanFieldState(1, 0.25, 0.25)
        med = GainMedium(2, 1e-4)
        tr = propagate_mean_fields(s, med, samples=3)
        fd = (tr.powers[1] - tr.powers[0]) / tr.step
        np.testing.assert_allclose(fd, mean_field_rhs(s, med), rtol=1e-4)

    def test_negative_amplitude_reverses_flow(self):
        d = mean_field_rhs(MeanFieldState.from_amplitudes(-1.0, 0.5, 0.5), CHI2)
        assert d[1] < 0 and d[0] > 0


class TestPropagation:
    def test_flat_without_seed(self):
        tr = propagate_mean_fields(MeanFieldState(1.0, 0.0, 0.0), CHI2)
        assert np.all(tr.powers[:, 1] == 0)
        np.testing.assert_array_equal(tr.powers[:, 0], 1.0)

    def test_small_signal_chi2(self):
        P0, P1 = 0.0264, 1e-4
        tr = propagate_mean_fields(MeanFieldState(P0, P1, P1), CHI2)
        oracle = P1 * (math.exp(2 * CHI2.kappa * math.sqrt(P0)) - 1)
        d = tr.powers[-1, 1] - P1
        assert oracle == pytest.approx(1.76e-5, rel=5e-3)
        assert d == pytest.approx(oracle, rel=5e-3)

    def test_small_signal_chi3(self):
        P0, P1 = 0.027, 1e-6
        tr = propagate_mean_fields(MeanFieldState(P0, P1, P1), CHI3)
        d = tr.powers[-1, 1] - P1
        assert d == pytest.approx(1.759e-7, rel=1e-3)
        assert d == pytest.approx(single_pass_gain(P0, P1, CHI3), rel=1e-9)

    def test_samples_validated(self):
        with pytest.raises(DomainError):
            propagate_mean_fields(MeanFieldState(1, 0, 0), CHI2, samples=1)

    def test_grid(self):
        tr = propagate_mean_fields(MeanFieldState(0.1, 0.01, 0.01), CHI3, samples=11)
        np.testing.assert_allclose(tr.grid, np.linspace(0, 3.0, 11))
        assert tr.entrance.P0 == 0.1 and tr.exit.P1 > 0.01

    def test_back_conversion_flips_pump_sign(self):
        # chi2 past full depletion: the pump comes back with phase pi
        tr = propagate_mean_fields(MeanFieldState(1.0, 0.01, 0.01), GainMedium(2, 4.0))
        assert tr.amplitudes[-1, 0] < 0
        assert tr.exit.theta0 == pytest.approx(math.pi)
        assert tr.amplitudes[-1, 0] == pytest.approx(
            pump_exit_amplitude(1.0, 0.01, GainMedium(2, 4.0)), rel=1e-9)


class TestClosedForms:
    def test_no_seed_zero(self):
        assert single_pass_gain(1.0, 0.0, CHI2) == 0.0
        assert single_pass_gain(1.0, 0.0, CHI3) == 0.0

    def test_zero_coupling(self):
        assert single_pass_gain(1.0, 0.1, GainMedium(2, 0.0)) == 0.0
        assert single_pass_gain(1.0, 0.1, GainMedium(3, 0.0)) == 0.0

    def test_hand_value_chi3(self):
        assert single_pass_gain(0.027, 1e-6, CHI3) == pytest.approx(1.759e-7, rel=1e-3)

    def test_weak_seed_chi3(self):
        G = relative_gain_chi3(0.1, 1e-9, 3.0)
        assert G + 1 == pytest.approx(math.exp(0.6), rel=1e-7)
        assert G + 1 == pytest.approx(1.8221, abs=1e-4)

    def test_chi3_no_pump(self):
        assert relative_gain_chi3(0.0, 0.1, 3.0) == 0.0

    def test_chi3_saturation(self):
        assert relative_gain_chi3(0.1, 0.1, 3.0) < math.exp(2 * 3.0 * (0.1 + 0.2)) - 1

    def test_chi3_zero_seed_rejected(self):
        with pytest.raises(DomainError):
            relative_gain_chi3(0.1, 0.0, 3.0)

    def test_weak_seed_chi2(self):
        assert relative_gain(0.3, 1e-300, CHI2) == pytest.approx(
            math.expm1(2 * 0.5 * math.sqrt(0.3)), rel=1e-12)
        assert relative_gain(0.3, 0.0, CHI2) == pytest.approx(
            float(small_signal_gain(0.3, CHI2)), rel=1e-14)

    def test_tiny_seed_finite(self):
        # the arctanh form of the chi2 solution loses every digit here
        G = relative_gain(0.0264, 1e-25, CHI2)
        assert G == pytest.approx(math.expm1(math.sqrt(0.0264)), rel=1e-12)

    def test_vectorised(self):
        P1 = np.array([1e-6, 1e-3, 0.1])
        out = single_pass_gain(0.05, P1, CHI2)
        assert out.shape == (3,)
        for p, o in zip(P1, out):
            assert o == single_pass_gain(0.05, p, CHI2)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            single_pass_gain(-1.0, 0.1, CHI2)

    def test_large_exponent_no_overflow(self):
        with np.errstate(over="raise", invalid="raise"):
            G = relative_gain(500.0, 1.0, CHI3)
        assert G == pytest.approx(500.0 / 2.0, rel=1e-12)


powers = st.floats(1e-8, 4.0)


def scaled(order, k, P0, P1):
    """Medium whose coupling times the natural power scale equals ``k``."""
    scale = math.sqrt(P0 + P1) if order == 2 else P0 + 2 * P1
    return GainMedium(order, k / scale)


class TestProperties:
    @given(P0=powers, P1=st.floats(1e-10, 2.0), k=st.floats(0.01, 2.0), order=st.sampled_from([2, 3]))
    def test_conservation_along_trajectory(self, P0, P1, k, order):
        med = scaled(order, k, P0, P1)
        tr = propagate_mean_fields(MeanFieldState(P0, P1, P1), med)
        c = tr.conserved
        assert np.max(np.abs(c - c[0])) <= 1e-10 * c[0]

    @given(P0=powers, P1=st.floats(1e-10, 2.0), k=st.floats(0.01, 2.0), order=st.sampled_from([2, 3]))
    def test_signal_idler_identical(self, P0, P1, k, order):
        med = GainMedium(order, k)
        tr = propagate_mean_fields(MeanFieldState(P0, P1, P1), med)
        assert np.array_equal(tr.amplitudes[:, 1], tr.amplitudes[:, 2])

    @given(P0=powers, P1=st.floats(1e-10, 2.0), k=st.floats(0.01, 2.0), order=st.sampled_from([2, 3]))
    def test_closed_form_matches_ode(self, P0, P1, k, order):
        med = scaled(order, k, P0, P1)
        tr = propagate_mean_fields(MeanFieldState(P0, P1, P1), med)
        ode = tr.powers[-1, 1] - P1
        cf = float(single_pass_gain(P0, P1, med))
        assert abs(ode - cf) <= 1e-8 * max(abs(cf), 1e-12 * P1) + 1e-13 * P1

    @given(P0=powers, P1=st.floats(1e-10, 2.0), k=st.floats(0.01, 2.0), order=st.sampled_from([2, 3]))
    def test_monotone_before_full_depletion(self, P0, P1, k, order):
        med = GainMedium(order, k)
        assume(before_full_depletion(P0, P1, med))
        tr = propagate_mean_fields(MeanFieldState(P0, P1, P1), med)
        P = tr.powers
        tol = 1e-12 * (P0 + P1)
        assert np.all(np.diff(P[:, 1]) >= -tol)
        assert np.all(np.diff(P[:, 0]) <= tol)

    @given(P0=powers, P1=st.floats(0.0, 2.0), k=st.floats(0.0, 3.0), order=st.sampled_from([2, 3]))
    def test_depletion_bound(self, P0, P1, k, order):
        med = GainMedium(order, k)
        d = float(single_pass_gain(P0, P1, med))
        assert d <= P0 / (order - 1) * (1 + 1e-12)
        if before_full_depletion(P0, P1, med):
            assert d >= -1e-15 * P1
