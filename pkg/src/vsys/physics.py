"""Rates, unit conversions and positivity checks for the driven V-system.

The system is a three-level atom: one ground state coupled to two nearly
degenerate excited sublevels split by a magnetic field. It is pumped by a
linearly polarized incoherent beam propagating along the field axis and
decays by spontaneous emission. Everything downstream works in units of the
spontaneous decay rate (gamma = 1); this module owns the SI layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import (
    BOHR_MAGNETON,
    DIPOLE_ATOMIC_UNIT,
    HBAR,
    SPEED_OF_LIGHT,
    VACUUM_PERMITTIVITY,
)

# Reference experimental values for the calcium 4s^2 -> 4s4p transition.
CA_DIPOLE_MOMENT = 2.85 * DIPOLE_ATOMIC_UNIT        # C*m
CA_OMEGA0 = 2.0 * math.pi * 709.1e12                # rad/s
CA_GAMMA = 2.0 * math.pi * 34.6e6                   # rad/s (tabulated linewidth)
CA_DELTA_MAX = 2.0 * math.pi * 400e6                # rad/s (largest splitting)
CA_T_TRANSIT = 20e-6                                # s
CA_NBAR = 0.0633                                    # beam occupation used in examples


def compute_gamma(dipole_moment: float, omega0: float) -> float:
    """Spontaneous decay rate gamma = mu^2 w0^3 / (3 pi eps0 hbar c^3).

    ``dipole_moment`` in C*m, ``omega0`` in rad/s; returns rad/s. A zero
    dipole is allowed (dark transition, gamma = 0).
    """
    if dipole_moment < 0.0:
        raise ValueError("dipole moment must be >= 0")
    if omega0 <= 0.0:
        raise ValueError("transition frequency must be > 0")
    return (
        dipole_moment**2
        * omega0**3
        / (3.0 * math.pi * VACUUM_PERMITTIVITY * HBAR * SPEED_OF_LIGHT**3)
    )


def zeeman_splitting(b_field: float) -> float:
    """Excited-state splitting Delta = 2 mu_B B / hbar in rad/s."""
    if b_field < 0.0:
        raise ValueError("magnetic field must be >= 0")
    return 2.0 * BOHR_MAGNETON * b_field / HBAR


def field_for_splitting(delta: float) -> float:
    """Magnetic field (tesla) producing the splitting ``delta`` (rad/s)."""
    if delta < 0.0:
        raise ValueError("splitting must be >= 0")
    return delta * HBAR / (2.0 * BOHR_MAGNETON)


def pumping_rate(gamma: float, nbar: float) -> float:
    """Incoherent pumping rate per transition, r = gamma * nbar / 4.

    Only the beam modes parallel to the propagation axis pump the atom,
    which attenuates the isotropic-field relation by a factor of four.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be > 0")
    if nbar < 0.0:
        raise ValueError("occupation number must be >= 0")
    return gamma * nbar / 4.0


@dataclass(frozen=True)
class SystemParams:
    """Rates of the driven V-system, all in one unit convention.

    ``gamma``: spontaneous decay rate (use 1.0 for the natural unit system),
    ``r``: incoherent pumping rate per transition, ``delta``: excited-state
    splitting (fixed >= 0 by convention), ``nbar``: beam occupation number,
    ``omega0``: optional transition frequency for SI work.
    """

    gamma: float
    r: float
    delta: float
    nbar: float
    omega0: float | None = None

    def __post_init__(self) -> None:
        if self.gamma <= 0.0:
            raise ValueError("gamma must be > 0")
        if self.r < 0.0:
            raise ValueError("pumping rate must be >= 0")
        if self.delta < 0.0:
            raise ValueError("splitting must be >= 0 (sign convention is fixed)")
        if self.nbar < 0.0:
            raise ValueError("occupation number must be >= 0")
        expected = pumping_rate(self.gamma, self.nbar)
        scale = max(abs(expected), abs(self.r))
        if scale > 0.0 and abs(self.r - expected) > 1e-12 * scale:
            raise ValueError(
                f"inconsistent rates: r={self.r!r} but gamma*nbar/4={expected!r}"
            )

    @classmethod
    def from_nbar(
        cls,
        nbar: float,
        delta: float,
        gamma: float = 1.0,
        omega0: float | None = None,
    ) -> "SystemParams":
        return cls(gamma, pumping_rate(gamma, nbar), delta, nbar, omega0)

    @classmethod
    def from_rates(
        cls,
        r: float,
        delta: float,
        gamma: float = 1.0,
        omega0: float | None = None,
    ) -> "SystemParams":
        if gamma <= 0.0:
            raise ValueError("gamma must be > 0")
        return cls(gamma, r, delta, 4.0 * r / gamma, omega0)

    def in_gamma_units(self) -> "SystemParams":
        """Rescale so gamma = 1 (the convention of the solver core)."""
        return SystemParams(
            1.0, self.r / self.gamma, self.delta / self.gamma, self.nbar, self.omega0
        )


@dataclass(frozen=True)
class ExperimentalInputs:
    """Lab-frame knobs: dipole moment (C*m), transition frequency (rad/s),
    magnetic field (T), beam occupation and interaction time (s)."""

    dipole_moment: float
    omega0: float
    b_field: float
    nbar: float
    t_transit: float

    def __post_init__(self) -> None:
        if self.dipole_moment <= 0.0 or self.omega0 <= 0.0 or self.t_transit <= 0.0:
            raise ValueError("dipole moment, frequency and transit time must be > 0")
        if self.b_field < 0.0:
            raise ValueError("magnetic field must be >= 0")
        if self.nbar < 0.0:
            raise ValueError("occupation number must be >= 0")

    def to_system_params(self, gamma_units: bool = False) -> SystemParams:
        """Derive the rate set; SI rad/s, or rescaled to gamma = 1."""
        gamma = compute_gamma(self.dipole_moment, self.omega0)
        params = SystemParams(
            gamma,
            pumping_rate(gamma, self.nbar),
            zeeman_splitting(self.b_field),
            self.nbar,
            self.omega0,
        )
        return params.in_gamma_units() if gamma_units else params


CA_REFERENCE_INPUTS = ExperimentalInputs(
    dipole_moment=CA_DIPOLE_MOMENT,
    omega0=CA_OMEGA0,
    b_field=field_for_splitting(CA_DELTA_MAX),
    nbar=CA_NBAR,
    t_transit=CA_T_TRANSIT,
)

# Excited-state basis change between the Cartesian orbital pair and the
# circular (field-aligned) pair: |e1> = (|x> + i|y>)/sqrt(2),
# |e2> = (|x> - i|y>)/sqrt(2). Operators map as M -> U M U+.
_U_CIRCULAR = np.array([[1.0, -1.0j], [1.0, 1.0j]]) / math.sqrt(2.0)


def basis_transform(matrix: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Conjugate a 2x2 Hermitian operator into the circular excited basis.

    With ``inverse=True`` maps back to the Cartesian basis; the round trip
    is the identity up to rounding.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    scale = max(float(np.max(np.abs(m))), 1.0)
    if np.max(np.abs(m - m.conj().T)) > 1e-12 * scale:
        raise ValueError("matrix must be Hermitian")
    u = _U_CIRCULAR.conj().T if inverse else _U_CIRCULAR
    return u @ m @ u.conj().T


@dataclass(frozen=True)
class CoefficientMatrices:
    """Decay (Gamma), pumping (R) and total (K = Gamma + R) 2x2 matrices."""

    gamma_matrix: np.ndarray
    r_matrix: np.ndarray
    k_matrix: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        g = np.asarray(self.gamma_matrix, dtype=complex)
        r = np.asarray(self.r_matrix, dtype=complex)
        if g.shape != (2, 2) or r.shape != (2, 2):
            raise ValueError("coefficient matrices must be 2x2")
        k = self.k_matrix
        k = g + r if k is None else np.asarray(k, dtype=complex)
        scale = max(float(np.max(np.abs(g + r))), 1.0)
        if np.max(np.abs(k - (g + r))) > 1e-12 * scale:
            raise ValueError("total matrix must equal decay + pumping elementwise")
        object.__setattr__(self, "gamma_matrix", g)
        object.__setattr__(self, "r_matrix", r)
        object.__setattr__(self, "k_matrix", k)

    @classmethod
    def beam_xy(cls, gamma: float, r: float) -> "CoefficientMatrices":
        """Cartesian-basis matrices: isotropic decay, x-polarized pumping."""
        return cls(
            np.array([[gamma, 0.0], [0.0, gamma]]),
            np.array([[2.0 * r, 0.0], [0.0, 0.0]]),
        )

    @classmethod
    def beam_circular(cls, gamma: float, r: float) -> "CoefficientMatrices":
        """Circular-basis matrices: decay stays diagonal, pumping becomes
        the rank-one matrix [[r, r], [r, r]]."""
        return cls(
            np.array([[gamma, 0.0], [0.0, gamma]]),
            np.array([[r, r], [r, r]]),
        )

    def to_circular(self) -> "CoefficientMatrices":
        return CoefficientMatrices(
            basis_transform(self.gamma_matrix), basis_transform(self.r_matrix)
        )


@dataclass(frozen=True)
class PositivityCheck:
    name: str
    margin: float
    passed: bool


@dataclass(frozen=True)
class CPReport:
    """Outcome of the complete-positivity inequalities, with margins.

    For each matrix M in (decay, pumping, total): M11 >= 0, M22 >= 0 and
    M11*M22 - |M12|^2 >= 0. Margins are the left-hand sides; a rank-one
    pumping matrix sits exactly on the boundary (zero margin).
    """

    checks: tuple[PositivityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def margin(self, name: str) -> float:
        for c in self.checks:
            if c.name == name:
                return c.margin
        raise KeyError(name)


def check_complete_positivity(
    cm: CoefficientMatrices, slack: float = 1e-12
) -> CPReport:
    """Evaluate the positivity inequalities for all three coefficient
    matrices. Returns a report (never raises): margins within ``-slack``
    of zero count as boundary passes."""
    checks: list[PositivityCheck] = []
    matrices = {
        "decay": cm.gamma_matrix,
        "pumping": cm.r_matrix,
        "total": cm.k_matrix,
    }
    for label, m in matrices.items():
        scale = max(float(np.max(np.abs(m))), 1.0)
        for i in (0, 1):
            margin = float(np.real(m[i, i]))
            checks.append(
                PositivityCheck(
                    f"{label}_diag{i + 1}", margin, margin >= -slack * scale
                )
            )
        det_margin = float(np.real(m[0, 0] * m[1, 1]) - abs(m[0, 1]) ** 2)
        checks.append(
            PositivityCheck(
                f"{label}_offdiag", det_margin, det_margin >= -slack * scale**2
            )
        )
    return CPReport(tuple(checks))
