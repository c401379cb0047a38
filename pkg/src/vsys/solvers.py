"""Trajectories and steady states for the V-system generators.

Three mutually independent routes are provided: a spectral evaluation from
the eigendecomposition, a matrix-exponential propagation (the production
path), and an adaptive Runge-Kutta oracle. They are cross-checked against
each other in the test suite; closed-form solutions for the extreme
splitting regimes are also evaluated here.

The physical start is the ground state switched suddenly into the beam at
t = 0; other initial states are accepted but flagged with a warning since
the closed forms and figure presets assume the ground start.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .generators import Generator, Variant
from .physics import SystemParams

_EIG_CONDITION_LIMIT = 1e8
_EIG_RESIDUAL_LIMIT = 1e-9


class Solver(enum.Enum):
    SPECTRAL = "spectral"
    MATRIX_EXP = "expm"
    ADAPTIVE_RK = "rk"
    CLOSED_FORM = "closed-form"


class SingularGeneratorError(np.linalg.LinAlgError):
    """The generator has a zero mode; the named operation needs A^-1."""


class IllConditionedEigenbasisError(np.linalg.LinAlgError):
    """Eigenbasis too ill-conditioned for the spectral path; use the
    matrix-exponential solver instead."""


class RegimeWarning(UserWarning):
    """A closed-form limit was evaluated outside its validity regime."""


class InitialStateWarning(UserWarning):
    """A non-ground initial state was supplied; the sudden-turn-on
    closed forms and presets assume a ground start."""


@dataclass(frozen=True)
class StateVector:
    """Excited-state populations and coherence; ground population is
    implicit through trace conservation."""

    rho_ee1: float
    rho_ee2: float
    coh_re: float
    coh_im: float

    @property
    def rho_gg(self) -> float:
        return 1.0 - self.rho_ee1 - self.rho_ee2

    @property
    def coherence(self) -> complex:
        return complex(self.coh_re, self.coh_im)

    @property
    def coherence_abs(self) -> float:
        return float(np.hypot(self.coh_re, self.coh_im))

    def as_array(self) -> np.ndarray:
        return np.array([self.rho_ee1, self.rho_ee2, self.coh_re, self.coh_im])

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "StateVector":
        a = np.asarray(arr, dtype=float)
        if a.shape != (4,):
            raise ValueError("expected 4 components")
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def ground(cls) -> "StateVector":
        return cls(0.0, 0.0, 0.0, 0.0)

    def density_matrix(self) -> np.ndarray:
        """Embedded 3x3 density matrix, basis (g, e1, e2); ground
        coherences vanish for the dynamics considered here."""
        return np.array(
            [
                [self.rho_gg, 0.0, 0.0],
                [0.0, self.rho_ee1, self.coherence],
                [0.0, np.conj(self.coherence), self.rho_ee2],
            ],
            dtype=complex,
        )

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the embedded density matrix, in closed
        form (the excited 2x2 block diagonalizes analytically)."""
        half_sum = 0.5 * (self.rho_ee1 + self.rho_ee2)
        disc = np.hypot(0.5 * (self.rho_ee1 - self.rho_ee2), self.coherence_abs)
        return float(min(self.rho_gg, half_sum - disc))

    def validate(self, slack: float = 1e-10) -> None:
        """Raise if the state is not a physical density matrix (within
        ``slack`` of the positivity boundary)."""
        if self.rho_ee1 < -slack or self.rho_ee2 < -slack:
            raise ValueError(f"negative excited population in {self}")
        if self.min_eigenvalue() < -slack:
            raise ValueError(f"embedded density matrix not positive in {self}")


@dataclass(frozen=True)
class Trajectory:
    """Time series of states with provenance of the producing solver."""

    times: np.ndarray
    data: np.ndarray
    solver: Solver
    generator_variant: Variant

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=float)
        data = np.array(self.data, dtype=float)
        if times.ndim != 1 or data.shape != (len(times), 4):
            raise ValueError("times must be (n,) and data (n, 4)")
        if len(times) == 0 or times[0] != 0.0:
            raise ValueError("trajectories start at t = 0")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        times.setflags(write=False)
        data.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "data", data)

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> StateVector:
        return StateVector.from_array(self.data[i])

    @property
    def states(self) -> tuple[StateVector, ...]:
        return tuple(StateVector.from_array(row) for row in self.data)

    @property
    def rho_ee1(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def rho_ee2(self) -> np.ndarray:
        return self.data[:, 1]

    @property
    def coh_re(self) -> np.ndarray:
        return self.data[:, 2]

    @property
    def coh_im(self) -> np.ndarray:
        return self.data[:, 3]

    @property
    def coh_abs(self) -> np.ndarray:
        return np.hypot(self.data[:, 2], self.data[:, 3])

    @property
    def rho_gg(self) -> np.ndarray:
        return 1.0 - self.data[:, 0] - self.data[:, 1]

    def min_density_eigenvalue(self) -> float:
        """Worst embedded density-matrix eigenvalue along the trajectory."""
        p1, p2 = self.data[:, 0], self.data[:, 1]
        disc = np.hypot(0.5 * (p1 - p2), np.hypot(self.data[:, 2], self.data[:, 3]))
        return float(np.min(np.minimum(1.0 - p1 - p2, 0.5 * (p1 + p2) - disc)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigensystem of a generator: right eigenvectors as columns, the dual
    left basis as rows (w_i . v_j = delta_ij), plus per-mode residuals."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    left_eigenvectors: np.ndarray
    residuals: np.ndarray
    condition: float


def _as_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        raise ValueError("times must be one-dimensional")
    return t


def _initial_state(y0) -> np.ndarray:
    if y0 is None:
        return np.zeros(4)
    arr = y0.as_array() if isinstance(y0, StateVector) else np.asarray(y0, float)
    if arr.shape != (4,):
        raise ValueError("initial state must have 4 components")
    if np.any(arr != 0.0):
        warnings.warn(
            "non-ground initial state: outside the sudden-turn-on convention",
            InitialStateWarning,
            stacklevel=3,
        )
    return arr.copy()


def _zero_mode_message(gen: Generator) -> str:
    if gen.variant in (Variant.ISO_NS, Variant.ISO_S):
        return (
            "generator has a zero mode (dark superposition: fully aligned "
            "dipoles with zero splitting)"
        )
    return "generator has a zero mode (no decay: gamma = 0)"


def _require_invertible(gen: Generator) -> None:
    eigs = np.linalg.eigvals(gen.a)
    scale = max(float(np.max(np.abs(gen.a))), 1.0)
    if np.min(np.abs(eigs)) <= 1e-12 * scale:
        raise SingularGeneratorError(_zero_mode_message(gen))


def spectral_decomposition(gen: Generator) -> SpectralDecomposition:
    """Eigendecomposition with the left basis and diagnostics.

    Raises when the eigenbasis condition number exceeds 1e8 or a residual
    exceeds 1e-9; callers should fall back to the matrix-exponential path.
    """
    w, v = np.linalg.eig(gen.a)
    condition = float(np.linalg.cond(v))
    if condition > _EIG_CONDITION_LIMIT:
        raise IllConditionedEigenbasisError(
            f"eigenbasis condition {condition:.3g} exceeds "
            f"{_EIG_CONDITION_LIMIT:.0e}; use the matrix-exponential solver"
        )
    left = np.linalg.inv(v)
    residuals = np.array(
        [
            np.linalg.norm(gen.a @ v[:, i] - w[i] * v[:, i])
            / np.linalg.norm(v[:, i])
            for i in range(4)
        ]
    )
    scale = max(float(np.max(np.abs(gen.a))), 1.0)
    if np.max(residuals) > _EIG_RESIDUAL_LIMIT * scale:
        raise IllConditionedEigenbasisError(
            f"eigenpair residual {np.max(residuals):.3g} too large; "
            "use the matrix-exponential solver"
        )
    return SpectralDecomposition(w, v, left, residuals, condition)


def _spectral_states(gen: Generator, times: np.ndarray, y0: np.ndarray) -> np.ndarray:
    dec = spectral_decomposition(gen)
    w = dec.eigenvalues
    drive = dec.left_eigenvectors @ gen.d.astype(complex)
    start = dec.left_eigenvectors @ y0.astype(complex)
    tt = times[:, None]
    z = w[None, :] * tt
    grow = np.exp(z)
    # phi = (e^{lam t} - 1)/lam; a short series avoids the cancellation for
    # small |lam t| and covers the lam -> 0 limit (phi -> t) exactly
    lam_safe = np.where(np.abs(w) < 1e-300, 1.0, w)
    phi = np.where(
        np.abs(z) < 1e-4,
        tt * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0),
        (grow - 1.0) / lam_safe[None, :],
    )
    modes = drive[None, :] * phi + start[None, :] * grow
    states = modes @ dec.eigenvectors.T
    return np.real(states)


def solve_spectral(gen: Generator, t: float, y0=None) -> StateVector:
    """State at time t from the eigenmode expansion
    rho(t) = sum_i (w_i . d) (e^{lam_i t} - 1)/lam_i v_i (+ initial-state
    modes). Exact for a diagonalizable generator."""
    y = _initial_state(y0)
    return StateVector.from_array(_spectral_states(gen, np.array([float(t)]), y)[0])


def trajectory_spectral(gen: Generator, times, y0=None) -> Trajectory:
    t = _as_times(times)
    y = _initial_state(y0)
    return Trajectory(t, _spectral_states(gen, t, y), Solver.SPECTRAL, gen.variant)


def solve_expm(gen: Generator, t: float, y0=None) -> StateVector:
    """State at time t by matrix exponential, rho(t) = A^-1 (e^{At} - I) d
    from the ground state (plus e^{At} y0 for a supplied start).

    Requires an invertible generator; a zero mode raises a named error.
    """
    _require_invertible(gen)
    y = _initial_state(y0)
    out = _kernels.propagate_affine(gen.a, gen.d, np.array([float(t)]), y)
    return StateVector.from_array(out[0])


def trajectory_expm(gen: Generator, times, y0=None) -> Trajectory:
    """Production propagation path (robust at degenerate splittings and
    for marginally stable generators: no inversion is performed)."""
    t = _as_times(times)
    y = _initial_state(y0)
    data = _kernels.propagate_affine(gen.a, gen.d, t, y)
    return Trajectory(t, data, Solver.MATRIX_EXP, gen.variant)


def solve_rk_oracle(
    gen: Generator,
    t_end: float,
    tol: float = 1e-10,
    times=None,
    y0=None,
) -> Trajectory:
    """Independent adaptive Runge-Kutta oracle (embedded 5(4) pair).

    ``tol`` bounds the absolute local error per step; dense output is
    evaluated at ``times`` (default: 201 uniform samples on [0, t_end]).
    """
    if not t_end > 0.0:
        raise ValueError("t_end must be > 0")
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-13, 1e-6]")
    t = np.linspace(0.0, t_end, 201) if times is None else _as_times(times)
    y = _initial_state(y0)
    data, _, _ = _kernels.rk45_affine(gen.a, gen.d, t, tol, y)
    return Trajectory(t, data, Solver.ADAPTIVE_RK, gen.variant)


def steady_state(gen: Generator) -> StateVector:
    """Stationary state from the linear solve A rho = -d."""
    _require_invertible(gen)
    return StateVector.from_array(np.linalg.solve(gen.a, -gen.d))


# ---------------------------------------------------------------------------
# Closed-form limit solutions
# ---------------------------------------------------------------------------


def _limit_pair(t, pops, coh_re, coh_im):
    """Package secular/non-secular closed forms for scalar or array t."""
    scalar = np.isscalar(t)
    pops = np.asarray(pops, dtype=float)
    coh_re = np.asarray(coh_re, dtype=float)
    coh_im = np.asarray(coh_im, dtype=float)
    zeros = np.zeros_like(pops)
    sec = np.stack([pops, pops, zeros, zeros], axis=-1)
    non = np.stack([pops, pops, coh_re, coh_im], axis=-1)
    if scalar:
        return StateVector.from_array(sec), StateVector.from_array(non)
    return sec, non


def limit_large_delta(params: SystemParams, t):
    """Closed forms in the overdamped regime (splitting >> pumping rate).

    Populations grow as (r/gamma)(1 - e^{-gamma t}) in both treatments.
    The secular coherence is identically zero; the non-secular coherence is
    (r/Delta)[e^{-gamma t} sin(Delta t) - i (1 - e^{-gamma t} cos(Delta t))].
    With the -i*Delta*rho_e1e2 phase convention used throughout (Delta >= 0,
    e1 the upper level) the stationary imaginary part is negative.

    Scalar t returns a (secular, nonsecular) StateVector pair; an array of
    times returns the corresponding (n, 4) arrays.
    """
    g, r, d = params.gamma, params.r, params.delta
    if d <= 0.0:
        raise ValueError("the large-splitting closed form requires delta > 0")
    if r > 0.0 and d < 10.0 * r:
        warnings.warn(
            f"large-splitting form used at delta/r = {d / r:.3g} < 10",
            RegimeWarning,
            stacklevel=2,
        )
    tt = np.asarray(t, dtype=float)
    decay = np.exp(-g * tt)
    pops = (r / g) * (1.0 - decay)
    coh_re = (r / d) * decay * np.sin(d * tt)
    coh_im = -(r / d) * (1.0 - decay * np.cos(d * tt))
    return _limit_pair(t, pops, coh_re, coh_im)


def limit_small_delta(params: SystemParams, t):
    """Closed forms in the quasidegenerate regime (splitting << pumping).

    Populations as in the overdamped regime; the non-secular coherence is
    real and equals the excited populations (the beam locks a superposition
    aligned with its polarization), the secular coherence is zero.
    """
    g, r, d = params.gamma, params.r, params.delta
    if r > 0.0 and d > 0.1 * r:
        warnings.warn(
            f"small-splitting form used at delta/r = {d / r:.3g} > 0.1",
            RegimeWarning,
            stacklevel=2,
        )
    tt = np.asarray(t, dtype=float)
    pops = (r / g) * (1.0 - np.exp(-g * tt))
    return _limit_pair(t, pops, pops, np.zeros_like(pops))
