"""Cross-checks between the kernel backends and external oracles.

The compiled backend must agree with the pure NumPy backend, and both must
agree with SciPy's matrix exponential and initial-value integrator, which
are implemented independently of this package.
"""

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from vsys import _kernels

BACKENDS = [_kernels.get_backend(name) for name in _kernels.available_backends()]
BACKEND_IDS = list(_kernels.available_backends())


def _random_stable(rng, n=4, scale=1.0):
    # Gershgorin shift keeps every eigenvalue real part below -scale
    a = rng.normal(size=(n, n)) * scale
    return a - (scale + np.max(np.sum(np.abs(a), axis=1))) * np.eye(n)


def test_compiled_backend_is_available():
    assert set(_kernels.available_backends()) == {"python", "cython"}


@pytest.mark.parametrize("impl", BACKENDS, ids=BACKEND_IDS)
class TestExpm:
    def test_zero_matrix(self, impl):
        np.testing.assert_array_equal(impl.expm(np.zeros((4, 4))), np.eye(4))

    def test_against_scipy(self, impl, rng):
        for scale in (1e-3, 0.1, 1.0, 10.0, 300.0):
            a = _random_stable(rng, scale=1.0) * scale / 4.0
            mine = impl.expm(a)
            ref = scipy.linalg.expm(a)
            norm = max(np.max(np.abs(ref)), 1e-30)
            assert np.max(np.abs(mine - ref)) / norm < 1e-12

    def test_rotation_at_large_argument(self, impl):
        # exact oracle: exp of a rotation generator; argument norm ~ 1e4
        theta = 1.0e4
        a = np.array([[0.0, theta], [-theta, 0.0]])
        out = impl.expm(a)
        expected = np.array(
            [[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]]
        )
        assert np.max(np.abs(out - expected)) < 1e-11

    def test_block_structure_preserved(self, impl):
        a = np.zeros((4, 4))
        a[:2, :2] = [[-1.0, 0.3], [0.3, -1.0]]
        a[2:, 2:] = [[-1.0, 5.0], [-5.0, -1.0]]
        out = impl.expm(a)
        assert np.max(np.abs(out[:2, 2:])) == 0.0
        assert np.max(np.abs(out[2:, :2])) == 0.0


@pytest.mark.parametrize("impl", BACKENDS, ids=BACKEND_IDS)
class TestPropagate:
    def test_matches_resolvent_formula(self, impl, rng):
        for _ in range(10):
            a = _random_stable(rng)
            d = rng.normal(size=4)
            times = np.sort(rng.uniform(0.1, 15.0, size=7))
            out = impl.propagate_affine(a, d, times)
            for t, row in zip(times, out):
                ref = np.linalg.solve(a, (scipy.linalg.expm(a * t) - np.eye(4)) @ d)
                assert np.max(np.abs(row - ref)) < 1e-12

    def test_uniform_and_irregular_grids_agree(self, impl, rng):
        a = _random_stable(rng)
        d = rng.normal(size=4)
        uniform = np.linspace(0.0, 8.0, 33)
        out_u = impl.propagate_affine(a, d, uniform)
        out_i = impl.propagate_affine(a, d, uniform[[0, 3, 7, 20, 32]])
        assert np.max(np.abs(out_u[[0, 3, 7, 20, 32]] - out_i)) < 1e-12

    def test_initial_state_offset(self, impl, rng):
        a = _random_stable(rng)
        d = rng.normal(size=4)
        y0 = rng.normal(size=4) * 0.1
        t = 3.7
        out = impl.propagate_affine(a, d, np.array([t]), y0)[0]
        ref = scipy.linalg.expm(a * t) @ y0 + np.linalg.solve(
            a, (scipy.linalg.expm(a * t) - np.eye(4)) @ d
        )
        assert np.max(np.abs(out - ref)) < 1e-12

    def test_time_zero(self, impl):
        a = -np.eye(4)
        out = impl.propagate_affine(a, np.ones(4), np.array([0.0, 1.0]))
        np.testing.assert_array_equal(out[0], np.zeros(4))

    def test_singular_generator_is_fine(self, impl):
        # a marginally stable flow (zero mode) propagates without inversion
        a = np.diag([-1.0, -1.0, -1.0, 0.0])
        d = np.array([0.5, 0.0, 0.0, 0.25])
        out = impl.propagate_affine(a, d, np.array([0.0, 2.0]))
        assert out[1, 0] == pytest.approx(0.5 * (1 - np.exp(-2.0)), rel=1e-12)
        assert out[1, 3] == pytest.approx(0.5, rel=1e-12)  # linear growth 0.25*t


@pytest.mark.parametrize("impl", BACKENDS, ids=BACKEND_IDS)
class TestRK45:
    def test_against_propagator(self, impl, rng):
        tol = 1e-10
        for _ in range(5):
            a = _random_stable(rng)
            d = rng.normal(size=4)
            times = np.linspace(0.0, 12.0, 25)
            states, n_acc, n_rej = impl.rk45_affine(a, d, times, tol)
            ref = impl.propagate_affine(a, d, times)
            assert np.max(np.abs(states - ref)) < 10 * tol
            assert n_acc > 0

    def test_against_scipy_ivp(self, impl, rng):
        a = _random_stable(rng)
        d = rng.normal(size=4)
        times = np.linspace(0.0, 10.0, 21)
        states, _, _ = impl.rk45_affine(a, d, times, 1e-11)
        sol = scipy.integrate.solve_ivp(
            lambda t, y: a @ y + d,
            (0.0, 10.0),
            np.zeros(4),
            t_eval=times,
            rtol=1e-12,
            atol=1e-13,
        )
        assert np.max(np.abs(states - sol.y.T)) < 1e-8

    def test_dense_output_between_steps(self, impl, rng):
        a = _random_stable(rng)
        d = rng.normal(size=4)
        # irregular sample times force interpolation inside accepted steps
        times = np.array([0.0, 0.013, 0.55, 0.5501, 2.3, 7.9, 7.90001, 11.0])
        states, _, _ = impl.rk45_affine(a, d, times, 1e-10)
        ref = impl.propagate_affine(a, d, times)
        assert np.max(np.abs(states - ref)) < 1e-9

    def test_initial_state(self, impl, rng):
        a = _random_stable(rng)
        y0 = rng.normal(size=4) * 0.2
        times = np.linspace(0.0, 5.0, 11)
        states, _, _ = impl.rk45_affine(a, np.zeros(4), times, 1e-11)
        np.testing.assert_array_equal(states[0], np.zeros(4))
        states, _, _ = impl.rk45_affine(a, np.zeros(4), times, 1e-11, y0)
        np.testing.assert_allclose(states[0], y0, rtol=0, atol=0)


class TestBackendParity:
    def test_expm_parity(self, rng):
        py, cy = _kernels.get_backend("python"), _kernels.get_backend("cython")
        for scale in (0.01, 1.0, 50.0):
            a = _random_stable(rng) * scale
            assert np.max(np.abs(py.expm(a) - cy.expm(a))) < 1e-13 * max(
                1.0, np.max(np.abs(py.expm(a)))
            )

    def test_propagate_parity(self, rng):
        py, cy = _kernels.get_backend("python"), _kernels.get_backend("cython")
        a = _random_stable(rng)
        d = rng.normal(size=4)
        times = np.linspace(0.0, 20.0, 41)
        assert np.max(np.abs(
            py.propagate_affine(a, d, times) - cy.propagate_affine(a, d, times)
        )) < 1e-13

    def test_rk_parity(self, rng):
        py, cy = _kernels.get_backend("python"), _kernels.get_backend("cython")
        a = _random_stable(rng)
        d = rng.normal(size=4)
        times = np.linspace(0.0, 10.0, 21)
        sp, acc_p, _ = py.rk45_affine(a, d, times, 1e-10)
        sc, acc_c, _ = cy.rk45_affine(a, d, times, 1e-10)
        # identical tableau and controller; last-ulp reduction-order
        # differences let the step sequences drift within the tolerance band
        assert abs(acc_p - acc_c) <= 2
        assert np.max(np.abs(sp - sc)) < 1e-10


def test_native_expm_size_limit():
    native = _kernels.get_backend("cython")
    with pytest.raises(ValueError):
        native.expm(np.zeros((9, 9)))
