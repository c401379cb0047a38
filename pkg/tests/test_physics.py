import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vsys.constants import BOHR_MAGNETON, HBAR
from vsys.physics import (
    CA_GAMMA,
    CA_NBAR,
    CA_REFERENCE_INPUTS,
    CoefficientMatrices,
    ExperimentalInputs,
    SystemParams,
    basis_transform,
    check_complete_positivity,
    compute_gamma,
    field_for_splitting,
    pumping_rate,
    zeeman_splitting,
)

TWO_PI = 2.0 * math.pi


class TestComputeGamma:
    def test_reference_transition_reproduces_tabulated_linewidth(self):
        gamma = compute_gamma(CA_REFERENCE_INPUTS.dipole_moment, CA_REFERENCE_INPUTS.omega0)
        assert gamma == pytest.approx(CA_GAMMA, rel=0.02)
        # frozen value from an independent evaluation of the rate formula
        assert gamma == pytest.approx(2.177794e8, rel=1e-6)

    def test_zero_dipole_is_dark(self):
        assert compute_gamma(0.0, TWO_PI * 709.1e12) == 0.0

    def test_power_law_scalings_are_exact(self):
        mu, w = 2.4e-29, 4.4e15
        base = compute_gamma(mu, w)
        assert compute_gamma(2 * mu, w) == pytest.approx(4 * base, rel=1e-15)
        assert compute_gamma(mu, 2 * w) == pytest.approx(8 * base, rel=1e-15)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            compute_gamma(-1e-29, 1e15)
        with pytest.raises(ValueError):
            compute_gamma(1e-29, 0.0)


class TestZeemanSplitting:
    def test_zero_field(self):
        assert zeeman_splitting(0.0) == 0.0

    def test_formula(self):
        b = 1e-3
        assert zeeman_splitting(b) == pytest.approx(2 * BOHR_MAGNETON * b / HBAR, rel=1e-15)

    def test_field_for_max_splitting(self):
        b = field_for_splitting(TWO_PI * 400e6)
        assert b == pytest.approx(1.43e-2, rel=5e-3)
        # frozen from inverting the formula with the tabulated constants
        assert b == pytest.approx(1.4289549e-2, rel=1e-6)

    def test_roundtrip_is_self_inverse(self):
        delta = TWO_PI * 400e6
        assert zeeman_splitting(field_for_splitting(delta)) == pytest.approx(
            delta, rel=1e-12
        )

    def test_linearity_half_field(self):
        b_full = field_for_splitting(TWO_PI * 400e6)
        assert zeeman_splitting(7.15e-3) == pytest.approx(TWO_PI * 200e6, rel=5e-3)
        assert zeeman_splitting(b_full / 2) == pytest.approx(TWO_PI * 200e6, rel=1e-12)

    def test_negative_field_rejected(self):
        with pytest.raises(ValueError):
            zeeman_splitting(-1e-3)


class TestPumpingRate:
    def test_reference_occupation(self):
        r = pumping_rate(1.0, CA_NBAR)
        assert r == 0.015825
        assert r == pytest.approx(0.0158, abs=5e-5)

    def test_dark_field(self):
        assert pumping_rate(1.0, 0.0) == 0.0

    def test_si_rates(self):
        assert pumping_rate(CA_GAMMA, CA_NBAR) == pytest.approx(3.44e6, rel=2e-3)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            pumping_rate(0.0, 0.1)
        with pytest.raises(ValueError):
            pumping_rate(1.0, -0.1)


class TestSystemParams:
    def test_quarter_occupation_relation_exact(self):
        p = SystemParams.from_nbar(0.0633, 12.0)
        assert p.r / p.gamma == p.nbar / 4.0
        q = SystemParams.from_rates(0.015825, 12.0)
        assert q.nbar == 4.0 * q.r / q.gamma

    def test_inconsistent_rates_rejected(self):
        with pytest.raises(ValueError, match="inconsistent"):
            SystemParams(gamma=1.0, r=0.2, delta=1.0, nbar=0.0633)

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            SystemParams.from_nbar(0.1, -1.0)
        with pytest.raises(ValueError):
            SystemParams.from_nbar(-0.1, 1.0)
        with pytest.raises(ValueError):
            SystemParams.from_rates(0.1, 1.0, gamma=0.0)

    def test_gamma_units_rescaling(self):
        p = SystemParams.from_nbar(0.0633, 2.513e9, gamma=2.178e8)
        q = p.in_gamma_units()
        assert q.gamma == 1.0
        assert q.delta == pytest.approx(2.513e9 / 2.178e8, rel=1e-15)
        assert q.r / q.gamma == pytest.approx(q.nbar / 4.0, rel=1e-15)

    def test_from_experimental_inputs_closure(self):
        p = CA_REFERENCE_INPUTS.to_system_params()
        assert p.r / p.gamma == pytest.approx(p.nbar / 4.0, rel=1e-14)
        assert p.delta == pytest.approx(TWO_PI * 400e6, rel=1e-12)
        assert CA_REFERENCE_INPUTS.to_system_params(gamma_units=True).gamma == 1.0

    def test_experimental_inputs_validation(self):
        with pytest.raises(ValueError):
            ExperimentalInputs(0.0, 1e15, 1e-3, 0.06, 1e-5)
        with pytest.raises(ValueError):
            ExperimentalInputs(1e-29, 1e15, -1e-3, 0.06, 1e-5)


def _hermitian(entries):
    a, b, c, d = entries
    return np.array([[a, complex(c, d)], [complex(c, -d), b]])


class TestBasisTransform:
    def test_x_polarized_pumping_becomes_rank_one(self):
        r = 0.37
        out = basis_transform(np.array([[2 * r, 0.0], [0.0, 0.0]]))
        assert np.max(np.abs(out - np.array([[r, r], [r, r]]))) < 1e-14

    def test_isotropic_decay_invariant(self):
        g = 1.7
        out = basis_transform(g * np.eye(2))
        assert np.max(np.abs(out - g * np.eye(2))) < 1e-14

    @given(st.tuples(*[st.floats(-5, 5) for _ in range(4)]))
    def test_trace_preserved(self, entries):
        m = _hermitian(entries)
        assert np.trace(basis_transform(m)) == pytest.approx(
            np.trace(m), abs=1e-14
        )

    @given(st.tuples(*[st.floats(-5, 5) for _ in range(4)]))
    def test_round_trip_is_identity(self, entries):
        m = _hermitian(entries)
        back = basis_transform(basis_transform(m), inverse=True)
        scale = max(1.0, float(np.max(np.abs(m))))
        assert np.max(np.abs(back - m)) < 1e-14 * scale

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError, match="Hermitian"):
            basis_transform(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_wrong_shape_rejected(self):
        with pytest.raises(ValueError):
            basis_transform(np.eye(3))


class TestCompletePositivity:
    def test_beam_matrices_pass_on_the_boundary(self):
        cm = CoefficientMatrices.beam_circular(1.0, 0.015825)
        report = check_complete_positivity(cm)
        assert report.passed
        # rank-one pumping: |R12|^2 = R11 R22 exactly
        assert report.margin("pumping_offdiag") == 0.0

    def test_total_matrix_margin(self):
        g, r = 1.0, 0.2
        cm = CoefficientMatrices.beam_circular(g, r)
        report = check_complete_positivity(cm)
        assert report.margin("total_offdiag") == pytest.approx(
            (g + r) ** 2 - r**2, rel=1e-14
        )

    def test_constructed_violation_fails_with_margin(self):
        r = 0.3
        cm = CoefficientMatrices(
            np.zeros((2, 2)), np.array([[r, 2 * r], [2 * r, r]])
        )
        report = check_complete_positivity(cm)
        assert not report.passed
        assert report.margin("pumping_offdiag") == pytest.approx(-3 * r**2, rel=1e-14)

    @given(st.floats(1e-3, 10.0), st.floats(0.0, 10.0))
    def test_beam_matrices_always_satisfy_positivity(self, g, r):
        assert check_complete_positivity(
            CoefficientMatrices.beam_circular(g, r)
        ).passed

    def test_xy_route_matches_circular_closed_form(self):
        g, r = 1.3, 0.21
        via_transform = CoefficientMatrices.beam_xy(g, r).to_circular()
        direct = CoefficientMatrices.beam_circular(g, r)
        assert np.max(np.abs(via_transform.r_matrix - direct.r_matrix)) < 1e-14
        assert np.max(np.abs(via_transform.k_matrix - direct.k_matrix)) < 1e-14

    def test_total_must_equal_sum(self):
        with pytest.raises(ValueError, match="decay \\+ pumping"):
            CoefficientMatrices(np.eye(2), np.eye(2), 3.0 * np.eye(2))
