"""Pure NumPy/SciPy kernel backend.

Mirrors the compiled extension's API exactly; selected automatically when
the extension is not built (or when VSYS_PURE_PYTHON is set). The matrix
exponential delegates to SciPy's scaling-and-squaring implementation; the
adaptive integrator is an explicit Dormand-Prince 5(4) pair with the
standard quartic dense-output interpolant.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

BACKEND_NAME = "python"

_EPS = np.finfo(float).eps


def expm(a: np.ndarray) -> np.ndarray:
    """Dense matrix exponential (scaling and squaring, rational approx)."""
    return scipy.linalg.expm(np.asarray(a, dtype=float))


def _augmented(a: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Embed rho' = A rho + d as a linear flow on (rho, 1)."""
    m = np.zeros((5, 5))
    m[:4, :4] = a
    m[:4, 4] = d
    return m


def propagate_affine(
    a: np.ndarray,
    d: np.ndarray,
    times: np.ndarray,
    y0: np.ndarray | None = None,
) -> np.ndarray:
    """Exact sampling of rho' = A rho + d at the given times.

    Uses the augmented-matrix exponential, so no inversion of A is needed
    (marginally stable generators propagate fine). Uniform grids reuse a
    single per-step propagator.
    """
    times = np.asarray(times, dtype=float)
    m = _augmented(a, d)
    y = np.zeros(5)
    if y0 is not None:
        y[:4] = y0
    y[4] = 1.0
    out = np.empty((len(times), 4))
    steps = np.diff(np.concatenate(([0.0], times)))
    if len(steps) > 1 and np.ptp(steps[1:]) <= 1e-12 * max(steps.max(), 1e-300):
        # uniform grid after the first point: one propagator, iterated
        e_first = expm(m * steps[0])
        e_step = expm(m * steps[1])
        y = e_first @ y
        out[0] = y[:4]
        for i in range(1, len(times)):
            y = e_step @ y
            out[i] = y[:4]
        return out
    for i, dt in enumerate(steps):
        if dt != 0.0:
            y = expm(m * dt) @ y
        out[i] = y[:4]
    return out


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
])
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# fifth-order minus embedded fourth-order weights
_E = np.array([
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
])
# dense-output quartic coefficients
_D = np.array([
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
])


def rk45_affine(
    a: np.ndarray,
    d: np.ndarray,
    times: np.ndarray,
    tol: float,
    y0: np.ndarray | None = None,
) -> tuple[np.ndarray, int, int]:
    """Adaptive Dormand-Prince integration of rho' = A rho + d.

    Local error per step is kept below ``tol`` (absolute, RMS over
    components); requested sample times are filled from the dense-output
    interpolant. Returns (states, accepted steps, rejected steps).
    """
    times = np.asarray(times, dtype=float)
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    y = np.zeros(4) if y0 is None else np.array(y0, dtype=float)
    t_end = float(times[-1])
    out = np.empty((len(times), 4))
    idx = 0
    while idx < len(times) and times[idx] <= 0.0:
        out[idx] = y
        idx += 1
    if idx == len(times):
        return out, 0, 0

    t = 0.0
    k = np.empty((7, 4))
    k[0] = a @ y + d
    h = min(0.1, t_end)
    n_acc = n_rej = 0
    while idx < len(times):
        h = min(h, t_end - t)
        for i in range(1, 6):
            k[i] = a @ (y + h * (_A[i, :i] @ k[:i])) + d
        y_new = y + h * (_B[:6] @ k[:6])
        k[6] = a @ y_new + d
        err = h * (_E @ k)
        err_norm = np.sqrt(np.mean((err / tol) ** 2))
        if err_norm <= 1.0:
            n_acc += 1
            t_new = t + h
            if idx < len(times) and times[idx] <= t_new:
                ydiff = y_new - y
                bspl = h * k[0] - ydiff
                cont4 = ydiff - h * k[6] - bspl
                cont5 = h * (_D @ k)
                while idx < len(times) and times[idx] <= t_new * (1 + 4 * _EPS):
                    theta = (times[idx] - t) / h
                    theta1 = 1.0 - theta
                    out[idx] = y + theta * (
                        ydiff + theta1 * (bspl + theta * (cont4 + theta1 * cont5))
                    )
                    idx += 1
            t = t_new
            y = y_new
            k[0] = k[6]
            if t >= t_end:
                break
        else:
            n_rej += 1
        factor = 5.0 if err_norm == 0.0 else 0.9 * err_norm ** -0.2
        h *= min(5.0, max(0.2, factor))
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            raise RuntimeError(
                f"step size underflow at t={t:.6g} (h={h:.3g}, "
                f"error norm {err_norm:.3g}, tol {tol:.3g})"
            )
    return out, n_acc, n_rej
