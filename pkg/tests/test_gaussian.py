"""Tests for the squeezed-coherent-state core and its two no-click routes."""

import math

import numpy as np
import pytest

from qng.gaussian import (
    FockVector,
    SqueezedCoherentParams,
    TruncationError,
    fock_coefficients,
    no_click_expectation,
    no_click_grid,
    no_click_oracle,
    photon_number_distribution,
)

# Squeezed vacuum at V = 0.5: tanh r = (1 - V)/(1 + V) = 1/3 and
# p_0 = 2 sqrt(V)/(1 + V); p_2 = p_0 tanh^2(r)/2 follows from the even-term
# closed form of the squeezed vacuum.
P0_HALF_VAR = 2.0 * math.sqrt(0.5) / 1.5
P2_HALF_VAR = P0_HALF_VAR / 18.0


class TestParams:
    def test_angle_canonicalized_to_first_quadrant(self):
        assert SqueezedCoherentParams(1.0, math.pi - 0.3, 0.5).angle == pytest.approx(0.3)
        assert SqueezedCoherentParams(1.0, -0.3, 0.5).angle == pytest.approx(0.3)
        assert SqueezedCoherentParams(1.0, math.pi + 0.2, 0.5).angle == pytest.approx(0.2)

    def test_vacuum(self):
        vac = SqueezedCoherentParams.vacuum()
        assert vac.is_vacuum
        assert vac.min_var == 1.0 and vac.amp == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(amp=-0.1, angle=0.0, min_var=1.0),
            dict(amp=1.0, angle=0.0, min_var=0.0),
            dict(amp=1.0, angle=0.0, min_var=-2.0),
            dict(amp=math.nan, angle=0.0, min_var=1.0),
            dict(amp=1.0, angle=math.inf, min_var=1.0),
        ],
    )
    def test_invalid_parameters_rejected(self, kwargs):
        with pytest.raises(ValueError):
            SqueezedCoherentParams(**kwargs)

    def test_squeeze_param_convention(self):
        assert SqueezedCoherentParams.squeezed_vacuum(0.5).squeeze_param == pytest.approx(
            0.5 * math.log(2.0)
        )


class TestFockCoefficients:
    def test_coherent_state_expansion(self):
        fv = fock_coefficients(SqueezedCoherentParams.coherent(2.0), cutoff=40)
        expected = [
            math.exp(-2.0) * 2.0**n / math.sqrt(math.factorial(n)) for n in range(30)
        ]
        assert np.abs(fv.coefficients[:30]) == pytest.approx(expected, abs=1e-14)

    def test_squeezed_vacuum_even_terms(self):
        probs = photon_number_distribution(SqueezedCoherentParams.squeezed_vacuum(0.5))
        assert probs[0] == pytest.approx(P0_HALF_VAR, abs=1e-14)
        assert probs[2] == pytest.approx(P2_HALF_VAR, abs=1e-14)
        assert np.all(probs[1::2] == 0.0)

    def test_vacuum_is_pure_ground_state(self):
        fv = fock_coefficients(SqueezedCoherentParams.vacuum(), cutoff=8)
        assert fv.coefficients[0] == 1.0
        assert np.all(fv.coefficients[1:] == 0.0)

    def test_poisson_distribution_for_unit_amplitude(self):
        probs = photon_number_distribution(SqueezedCoherentParams.coherent(1.0))
        expected = [math.exp(-1.0) / math.factorial(n) for n in range(12)]
        assert probs[:12] == pytest.approx(expected, abs=1e-14)

    @pytest.mark.parametrize("amp", [0.0, 0.7, 2.5, 4.0])
    @pytest.mark.parametrize("min_var", [0.05, 0.3, 1.0])
    def test_distribution_normalized(self, amp, min_var):
        probs = photon_number_distribution(SqueezedCoherentParams(amp, 0.4, min_var))
        assert 1.0 - probs.sum() <= 1e-12
        assert probs.sum() <= 1.0 + 1e-12

    def test_explicit_cutoff_too_small_raises(self):
        with pytest.raises(TruncationError):
            fock_coefficients(SqueezedCoherentParams.coherent(3.0), cutoff=4)

    def test_adaptive_cutoff_grows_to_need(self):
        fv = fock_coefficients(SqueezedCoherentParams(3.5, 0.2, 0.1))
        assert fv.norm_squared() >= 1.0 - 1e-12
        assert fv.cutoff > 32

    def test_vector_is_immutable(self):
        fv = fock_coefficients(SqueezedCoherentParams.coherent(1.0), cutoff=16)
        with pytest.raises(ValueError):
            fv.coefficients[0] = 0.0

    def test_empty_vector_rejected(self):
        with pytest.raises(ValueError):
            FockVector(np.empty(0, dtype=complex))


class TestNoClickExpectation:
    @pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 1.0])
    @pytest.mark.parametrize("amp", [0.0, 1.0, 1.7])
    def test_coherent_reduction(self, t, amp):
        state = SqueezedCoherentParams.coherent(amp)
        assert no_click_expectation(state, t) == pytest.approx(
            math.exp(-t * amp**2), abs=1e-12
        )

    def test_zero_attenuation_sees_nothing(self):
        state = SqueezedCoherentParams(2.3, 0.7, 0.2)
        assert no_click_expectation(state, 0.0) == 1.0

    def test_squeezed_vacuum_full_attenuation_equals_p0(self):
        state = SqueezedCoherentParams.squeezed_vacuum(0.5)
        assert no_click_expectation(state, 1.0) == pytest.approx(P0_HALF_VAR, abs=1e-12)

    @pytest.mark.parametrize("t", [-0.1, 1.1, math.nan])
    def test_attenuation_domain_checked(self, t):
        with pytest.raises(ValueError):
            no_click_expectation(SqueezedCoherentParams.vacuum(), t)

    def test_monotone_in_attenuation(self):
        state = SqueezedCoherentParams(1.4, 0.9, 0.3)
        values = [no_click_expectation(state, t) for t in np.linspace(0, 1, 41)]
        assert all(a >= b - 1e-15 for a, b in zip(values, values[1:]))

    def test_angle_fold_symmetry(self):
        # pi - phi does not round-trip exactly in binary, so the folded
        # angle may differ by one ulp.
        for phi in (0.2, 1.1):
            direct = no_click_expectation(SqueezedCoherentParams(1.3, phi, 0.4), 0.7)
            folded = no_click_expectation(
                SqueezedCoherentParams(1.3, math.pi - phi, 0.4), 0.7
            )
            assert folded == pytest.approx(direct, abs=1e-15)

    def test_vectorized_matches_scalar(self):
        amps = np.linspace(0.0, 3.0, 7)
        grid = no_click_grid(amps[:, None], 0.3, 0.4, np.array([0.0, 0.2, 0.9]))
        for i, amp in enumerate(amps):
            state = SqueezedCoherentParams(amp, 0.3, 0.4)
            for j, t in enumerate((0.0, 0.2, 0.9)):
                assert grid[i, j] == pytest.approx(
                    no_click_expectation(state, t), abs=1e-15
                )


class TestOracleAgreement:
    def test_oracle_coherent_value(self):
        state = SqueezedCoherentParams.coherent(math.sqrt(2.0))
        assert no_click_oracle(state, 0.5) == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_oracle_vacuum_always_one(self):
        for t in (0.0, 0.3, 1.0):
            assert no_click_oracle(SqueezedCoherentParams.vacuum(), t) == 1.0

    def test_example_state_cross_agreement(self):
        state = SqueezedCoherentParams(1.0, math.pi / 4, 0.5)
        closed = no_click_expectation(state, 0.3)
        assert abs(closed - no_click_oracle(state, 0.3)) <= 1e-10

    def test_closed_form_vs_oracle_on_grid(self):
        # 625 parameter tuples spanning the optimization domain.
        angles = [0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2]
        worst = 0.0
        for amp in np.linspace(0.0, 4.0, 5):
            for phi in angles:
                for min_var in np.linspace(0.05, 1.0, 5):
                    state = SqueezedCoherentParams(amp, phi, min_var)
                    for t in np.linspace(0.0, 1.0, 5):
                        dev = abs(
                            no_click_expectation(state, t) - no_click_oracle(state, t)
                        )
                        worst = max(worst, dev)
        assert worst <= 1e-10
