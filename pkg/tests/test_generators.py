import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vsys.generators import (
    CharPoly,
    Generator,
    Variant,
    build,
    build_isotropic,
    build_nonsecular_direct,
    build_nonsecular_vectorized,
    build_secular_direct,
    build_secular_vectorized,
    char_poly,
    charpoly_nonsecular_factored,
    charpoly_secular_biquadratic,
    charpoly_secular_factored,
)
from vsys.physics import SystemParams
from vsys.validate import match_root_sets

params_strategy = st.builds(
    SystemParams.from_nbar,
    nbar=st.floats(0.0, 0.4),
    delta=st.floats(0.0, 15.0),
    gamma=st.floats(0.5, 2.0),
)


def _coeff_dev(a: CharPoly, b: CharPoly) -> float:
    scale = max(np.max(np.abs(b.coefficients)), 1.0)
    return float(np.max(np.abs(a.coefficients - b.coefficients)) / scale)


class TestNonSecularVectorized:
    def test_reference_entries(self):
        p = SystemParams.from_rates(0.0158, 12.0)
        gen = build_nonsecular_vectorized(p)
        assert gen.a[0, 0] == -1.0316
        assert gen.a[2, 0] == -0.0079
        assert gen.a[2, 3] == 12.0
        assert gen.a[3, 2] == -12.0
        np.testing.assert_array_equal(gen.d, [0.0158, 0.0158, 0.0158, 0.0])

    def test_no_pumping_reduces_to_damped_rotation(self):
        p = SystemParams.from_rates(0.0, 3.0)
        gen = build_nonsecular_vectorized(p)
        expected = np.array(
            [
                [-1.0, 0.0, 0.0, 0.0],
                [0.0, -1.0, 0.0, 0.0],
                [0.0, 0.0, -1.0, 3.0],
                [0.0, 0.0, -3.0, -1.0],
            ]
        )
        np.testing.assert_array_equal(gen.a, expected)
        np.testing.assert_array_equal(gen.d, np.zeros(4))

    def test_zero_splitting_kills_rotation(self):
        gen = build_nonsecular_vectorized(SystemParams.from_rates(0.1, 0.0))
        assert gen.a[2, 3] == 0.0
        assert gen.a[3, 2] == 0.0

    @given(params_strategy)
    def test_spectrum_below_minus_gamma(self, p):
        gen = build_nonsecular_vectorized(p)
        eigs = np.linalg.eigvals(gen.a)
        assert np.max(eigs.real) <= -p.gamma + 1e-10


class TestSecular:
    def test_reference_entries(self):
        p = SystemParams.from_rates(0.0158, 12.0)
        gen = build_secular_vectorized(p)
        np.testing.assert_array_equal(gen.d, [0.0158, 0.0158, 0.0, 0.0])
        assert np.all(gen.a[2, :2] == 0.0)
        assert np.all(gen.a[:2, 2:] == 0.0)

    @given(params_strategy)
    def test_block_diagonal_structure(self, p):
        gen = build_secular_vectorized(p)
        assert gen.is_secular
        assert np.all(gen.a[:2, 2:] == 0.0)
        assert np.all(gen.a[2:, :2] == 0.0)

    @given(params_strategy)
    def test_coherence_block_eigenvalues(self, p):
        gen = build_secular_vectorized(p)
        eigs = np.linalg.eigvals(gen.a[2:, 2:])
        expected = np.array(
            [complex(-(p.gamma + p.r), p.delta), complex(-(p.gamma + p.r), -p.delta)]
        )
        assert match_root_sets(eigs, expected) < 1e-12

    def test_direct_form_coincides(self):
        p = SystemParams.from_nbar(0.1, 2.0)
        vec = build_secular_vectorized(p)
        direct = build_secular_direct(p)
        np.testing.assert_array_equal(vec.a, direct.a)
        np.testing.assert_array_equal(vec.d, direct.d)
        assert direct.variant is Variant.S_DIRECT


class TestNonSecularDirect:
    @given(params_strategy)
    def test_differs_only_in_coherence_row(self, p):
        vec = build_nonsecular_vectorized(p)
        direct = build_nonsecular_direct(p)
        np.testing.assert_array_equal(vec.a[:2], direct.a[:2])
        np.testing.assert_array_equal(vec.a[3], direct.a[3])
        np.testing.assert_array_equal(vec.d, direct.d)
        assert direct.a[2, 0] == pytest.approx(-1.5 * p.r, rel=1e-15)
        assert direct.a[2, 1] == pytest.approx(-1.5 * p.r, rel=1e-15)
        # population coupling differs by exactly r
        assert vec.a[2, 0] - direct.a[2, 0] == pytest.approx(p.r, rel=1e-15)

    def test_no_pumping_makes_forms_identical(self):
        p = SystemParams.from_rates(0.0, 5.0)
        np.testing.assert_array_equal(
            build_nonsecular_direct(p).a, build_nonsecular_vectorized(p).a
        )


class TestIsotropic:
    def test_equal_rate_coupling_carries_decay_weight(self):
        p = SystemParams.from_rates(0.1, 2.0)
        iso = build_isotropic(p, p=1.0)
        g, r = p.gamma, p.r
        # population rows couple to the coherence with the full rate sum
        assert iso.a[0, 2] == pytest.approx(-(r + g), rel=1e-15)
        # coherence row: -(3r + g)/2 after eliminating the ground state,
        # i.e. the bare coupling is -(r + g)/2 where the beam case has -r/2
        assert iso.a[2, 0] == pytest.approx(-(1.5 * r + 0.5 * g), rel=1e-15)
        assert iso.d[2] == pytest.approx(r, rel=1e-15)

    def test_beam_form_recovered_by_dropping_decay_from_couplings(self):
        p = SystemParams.from_rates(0.1, 2.0)
        iso = np.array(build_isotropic(p, p=1.0).a)
        g = p.gamma
        iso[0, 2] += g
        iso[1, 2] += g
        iso[2, 0] += 0.5 * g
        iso[2, 1] += 0.5 * g
        direct = build_nonsecular_direct(p)
        np.testing.assert_allclose(iso, direct.a, rtol=0, atol=1e-15)
        np.testing.assert_array_equal(build_isotropic(p, p=1.0).d, direct.d)

    def test_orthogonal_dipoles_decouple(self):
        p = SystemParams.from_nbar(0.12, 1.5)
        iso = build_isotropic(p, p=0.0)
        sec = build_isotropic(p, p=0.0, secular=True)
        np.testing.assert_array_equal(iso.a, sec.a)
        np.testing.assert_array_equal(iso.d, sec.d)
        assert iso.is_secular

    def test_unequal_rates(self):
        p = SystemParams.from_rates(0.1, 1.0)
        iso = build_isotropic(p, p=0.5, gamma2=2.0, r2=0.2)
        assert iso.a[0, 0] == pytest.approx(-(2 * 0.1 + 1.0), rel=1e-15)
        assert iso.a[1, 1] == pytest.approx(-(2 * 0.2 + 2.0), rel=1e-15)
        assert iso.a[2, 2] == pytest.approx(-0.5 * (0.1 + 0.2 + 1.0 + 2.0), rel=1e-15)
        assert iso.d[2] == pytest.approx(0.5 * np.sqrt(0.1 * 0.2), rel=1e-14)

    def test_alignment_domain(self):
        p = SystemParams.from_nbar(0.1, 1.0)
        with pytest.raises(ValueError, match="alignment"):
            build_isotropic(p, p=1.5)

    def test_build_dispatch(self):
        p = SystemParams.from_nbar(0.1, 1.0)
        for variant in Variant:
            gen = build(variant, p)
            assert gen.variant is variant


class TestCharPoly:
    def test_negative_identity(self):
        p = SystemParams.from_nbar(0.1, 1.0)
        gen = Generator(-np.eye(4), np.zeros(4), Variant.NS_VECTORIZED, p)
        np.testing.assert_allclose(
            char_poly(gen).coefficients, [1.0, 4.0, 6.0, 4.0, 1.0], atol=1e-15
        )

    def test_nonsecular_matches_factored_form(self):
        p = SystemParams.from_rates(0.1, 2.0)
        cp = char_poly(build_nonsecular_vectorized(p))
        assert _coeff_dev(cp, charpoly_nonsecular_factored(p)) < 1e-12

    def test_secular_matches_factored_form(self):
        p = SystemParams.from_rates(0.1, 2.0)
        cp = char_poly(build_secular_vectorized(p))
        assert _coeff_dev(cp, charpoly_secular_factored(p)) < 1e-12

    @given(params_strategy)
    def test_cofactor_expansion_matches_companion_oracle(self, p):
        for builder in (build_nonsecular_vectorized, build_secular_vectorized):
            gen = builder(p)
            oracle = np.poly(gen.a)
            assert _coeff_dev(char_poly(gen), CharPoly(oracle)) < 1e-12

    def test_biquadratic_variant_is_not_the_secular_polynomial(self):
        # the often-quoted biquadratic form differs at first order in r
        p = SystemParams.from_rates(0.1, 2.0)
        cp = char_poly(build_secular_vectorized(p))
        quoted = charpoly_secular_biquadratic(p)
        gap = np.max(np.abs(cp.coefficients - quoted.coefficients))
        assert gap > 0.5  # absolute coefficient gap at r = 0.1, Delta = 2
        # the two agree in the no-pumping limit
        p0 = SystemParams.from_rates(0.0, 2.0)
        assert _coeff_dev(
            charpoly_secular_biquadratic(p0), charpoly_secular_factored(p0)
        ) < 1e-15

    @given(params_strategy)
    def test_total_decay_mode_divides_nonsecular_polynomial(self, p):
        cp = char_poly(build_nonsecular_vectorized(p))
        _, rem = np.polydiv(cp.coefficients, [1.0, p.gamma + p.r])
        scale = np.max(np.abs(cp.coefficients))
        assert abs(rem[0]) < 1e-12 * scale

    @given(params_strategy, st.floats(0.05, 1.0))
    def test_uniform_decay_shifts_every_root(self, p, shift):
        shifted_params = SystemParams(
            p.gamma + shift, p.r, p.delta, 4 * p.r / (p.gamma + shift)
        )
        for builder in (build_nonsecular_vectorized, build_secular_vectorized):
            # the polynomial identity p(lam + shift) = p_shifted(lam) holds
            # for every parameter point and is numerically exact
            composed = np.poly1d(char_poly(builder(p)).coefficients)(
                np.poly1d([1.0, shift])
            ).coefficients
            target = char_poly(builder(shifted_params)).coefficients
            assert np.max(np.abs(composed - target)) < 1e-10 * np.max(np.abs(target))
            # root-set comparison only where the spectrum is well separated:
            # near the critically damped seam the generator is close to
            # defective and eigenvalues themselves are sqrt(eps)-conditioned
            base = np.linalg.eigvals(builder(p).a)
            gaps = [
                abs(a - b) for i, a in enumerate(base) for b in base[i + 1:]
            ]
            if min(gaps) > 1e-3:
                shifted = np.linalg.eigvals(builder(shifted_params).a)
                assert match_root_sets(base - shift, shifted) < 1e-10

    def test_charpoly_type_validation(self):
        with pytest.raises(ValueError, match="monic"):
            CharPoly(np.array([2.0, 0, 0, 0, 1.0]))
        with pytest.raises(ValueError, match="5 coefficients"):
            CharPoly(np.array([1.0, 0, 0, 1.0]))


class TestGeneratorType:
    def test_arrays_are_frozen(self):
        p = SystemParams.from_nbar(0.1, 1.0)
        gen = build_nonsecular_vectorized(p)
        with pytest.raises(ValueError):
            gen.a[0, 0] = 0.0

    def test_shape_validation(self):
        p = SystemParams.from_nbar(0.1, 1.0)
        with pytest.raises(ValueError):
            Generator(np.eye(3), np.zeros(3), Variant.NS_VECTORIZED, p)

    def test_secular_counterpart_mapping(self):
        assert Variant.NS_VECTORIZED.secular_counterpart is Variant.S_VECTORIZED
        assert Variant.NS_DIRECT.secular_counterpart is Variant.S_DIRECT
        assert Variant.ISO_NS.secular_counterpart is Variant.ISO_S
        assert Variant.S_VECTORIZED.secular_counterpart is Variant.S_VECTORIZED
