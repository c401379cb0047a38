"""Affine generators rho' = A rho + d for every master-equation variant.

State ordering is rho = [rho_e1e1, rho_e2e2, Re rho_e1e2, Im rho_e1e2]; the
ground population is eliminated through rho_gg = 1 - rho_e1e1 - rho_e2e2.
The splitting enters the coherence as -i*Delta*rho_e1e2 with Delta >= 0.

Two non-secular forms are provided. The *vectorized* form is the standard
tabulated matrix in which the population feedback on the real-coherence row
carries the bare coupling -r/2. The *direct* form is obtained by eliminating
the ground population from the complex-coherence equation itself, which
turns that coefficient into -3r/2 (the eliminated drive term r*rho_gg also
feeds the populations into the coherence). The two differ only in that row;
the induced trajectories differ at second order in the beam occupation.
Both are kept: the vectorized one is the default for figure-style output,
and the discrepancy is quantified in the validation report.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .physics import SystemParams


class Variant(enum.Enum):
    """Tags the master-equation flavor a generator was assembled from."""

    NS_VECTORIZED = "ns-vec"
    S_VECTORIZED = "s-vec"
    NS_DIRECT = "ns-direct"
    S_DIRECT = "s-direct"
    ISO_NS = "iso-ns"
    ISO_S = "iso-s"

    @property
    def secular(self) -> bool:
        return self in (Variant.S_VECTORIZED, Variant.S_DIRECT, Variant.ISO_S)

    @property
    def secular_counterpart(self) -> "Variant":
        return {
            Variant.NS_VECTORIZED: Variant.S_VECTORIZED,
            Variant.NS_DIRECT: Variant.S_DIRECT,
            Variant.ISO_NS: Variant.ISO_S,
        }.get(self, self)


@dataclass(frozen=True)
class Generator:
    """Immutable affine dynamics (A, d) plus provenance.

    ``alignment`` is the transition-dipole alignment factor and is only
    meaningful for the isotropic variants.
    """

    a: np.ndarray
    d: np.ndarray
    variant: Variant
    params: SystemParams
    alignment: float | None = None

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=float)
        d = np.array(self.d, dtype=float)
        if a.shape != (4, 4) or d.shape != (4,):
            raise ValueError("generator must be a 4x4 matrix and a 4-vector")
        a.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "d", d)

    @property
    def is_secular(self) -> bool:
        """True when populations and coherences are exactly decoupled."""
        return (
            np.all(self.a[:2, 2:] == 0.0)
            and np.all(self.a[2:, :2] == 0.0)
            and np.all(self.d[2:] == 0.0)
        )


def build_nonsecular_vectorized(params: SystemParams) -> Generator:
    """Tabulated non-secular generator (default for figure-style runs)."""
    g, r, d = params.gamma, params.r, params.delta
    a = np.array(
        [
            [-g - 2.0 * r, -r, -r, 0.0],
            [-r, -g - 2.0 * r, -r, 0.0],
            [-0.5 * r, -0.5 * r, -g - r, d],
            [0.0, 0.0, -d, -g - r],
        ]
    )
    return Generator(a, np.array([r, r, r, 0.0]), Variant.NS_VECTORIZED, params)


def build_nonsecular_direct(params: SystemParams) -> Generator:
    """Non-secular generator with the ground population eliminated in every
    row, including the coherence row (population coupling -3r/2 there)."""
    g, r, d = params.gamma, params.r, params.delta
    a = np.array(
        [
            [-g - 2.0 * r, -r, -r, 0.0],
            [-r, -g - 2.0 * r, -r, 0.0],
            [-1.5 * r, -1.5 * r, -g - r, d],
            [0.0, 0.0, -d, -g - r],
        ]
    )
    return Generator(a, np.array([r, r, r, 0.0]), Variant.NS_DIRECT, params)


def _secular_matrix(params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    g, r, d = params.gamma, params.r, params.delta
    a = np.array(
        [
            [-g - 2.0 * r, -r, 0.0, 0.0],
            [-r, -g - 2.0 * r, 0.0, 0.0],
            [0.0, 0.0, -g - r, d],
            [0.0, 0.0, -d, -g - r],
        ]
    )
    return a, np.array([r, r, 0.0, 0.0])


def build_secular_vectorized(params: SystemParams) -> Generator:
    """Secular (rate-law) generator: block-diagonal, no coherence drive."""
    a, d = _secular_matrix(params)
    return Generator(a, d, Variant.S_VECTORIZED, params)


def build_secular_direct(params: SystemParams) -> Generator:
    """Secular generator from the same ground-population elimination as the
    direct non-secular form. The coherence rows carry no ground-state term,
    so this coincides entrywise with the vectorized secular generator."""
    a, d = _secular_matrix(params)
    return Generator(a, d, Variant.S_DIRECT, params)


def build_isotropic(
    params: SystemParams,
    p: float = 1.0,
    secular: bool = False,
    gamma2: float | None = None,
    r2: float | None = None,
) -> Generator:
    """Generator for excitation by isotropic unpolarized radiation.

    ``p`` is the alignment of the two transition dipoles (p = 0 decouples
    populations from coherences entirely; |p| = 1 with degenerate levels has
    a dark state and is only marginally stable). Per-transition rates may be
    split via ``gamma2``/``r2``; by default both transitions share
    ``params.gamma`` and ``params.r``. Unlike the beam case, the coherence
    coupling here carries the full (pumping + decay) weight: the population
    rows couple to the real coherence with -p*(sqrt(r1 r2) + sqrt(g1 g2))
    and the coherence row couples back with -(p/2)*(3 sqrt(r1 r2) +
    sqrt(g1 g2)) after the ground population is eliminated.
    """
    if not -1.0 <= p <= 1.0:
        raise ValueError("alignment factor must lie in [-1, 1]")
    g1, r1 = params.gamma, params.r
    g2 = params.gamma if gamma2 is None else gamma2
    rr2 = params.r if r2 is None else r2
    if g2 <= 0.0 or rr2 < 0.0:
        raise ValueError("rates must satisfy gamma > 0, r >= 0")
    d = params.delta
    sg = math.sqrt(g1 * g2)
    sr = math.sqrt(r1 * rr2)
    damp = 0.5 * (r1 + rr2 + g1 + g2)
    if secular:
        a = np.array(
            [
                [-2.0 * r1 - g1, -r1, 0.0, 0.0],
                [-rr2, -2.0 * rr2 - g2, 0.0, 0.0],
                [0.0, 0.0, -damp, d],
                [0.0, 0.0, -d, -damp],
            ]
        )
        vec = np.array([r1, rr2, 0.0, 0.0])
        return Generator(a, vec, Variant.ISO_S, params, alignment=p)
    cross = p * (sr + sg)
    a = np.array(
        [
            [-2.0 * r1 - g1, -r1, -cross, 0.0],
            [-rr2, -2.0 * rr2 - g2, -cross, 0.0],
            [-p * (1.5 * sr + 0.5 * sg), -p * (1.5 * sr + 0.5 * sg), -damp, d],
            [0.0, 0.0, -d, -damp],
        ]
    )
    vec = np.array([r1, rr2, p * sr, 0.0])
    return Generator(a, vec, Variant.ISO_NS, params, alignment=p)


_BUILDERS = {
    Variant.NS_VECTORIZED: build_nonsecular_vectorized,
    Variant.S_VECTORIZED: build_secular_vectorized,
    Variant.NS_DIRECT: build_nonsecular_direct,
    Variant.S_DIRECT: build_secular_direct,
}


def build(variant: Variant, params: SystemParams, p: float = 1.0) -> Generator:
    """Dispatch on the variant tag."""
    if variant is Variant.ISO_NS:
        return build_isotropic(params, p=p, secular=False)
    if variant is Variant.ISO_S:
        return build_isotropic(params, p=p, secular=True)
    return _BUILDERS[variant](params)


# ---------------------------------------------------------------------------
# Characteristic polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharPoly:
    """Monic degree-4 polynomial, coefficients in descending powers."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (5,):
            raise ValueError("expected 5 coefficients (degree 4)")
        if c[0] != 1.0:
            raise ValueError("polynomial must be monic")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __call__(self, lam: complex) -> complex:
        out: complex = 0.0
        for c in self.coefficients:
            out = out * lam + c
        return out

    def roots(self) -> np.ndarray:
        return np.roots(self.coefficients)


def _poly_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return np.convolve(p, q)


def _poly_add(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    n = max(len(p), len(q))
    out = np.zeros(n)
    out[n - len(p):] += p
    out[n - len(q):] += q
    return out


def char_poly(gen: Generator) -> CharPoly:
    """det(lambda*I - A) by cofactor expansion along the first row.

    Entries of lambda*I - A are degree <= 1 polynomials; the expansion is
    carried out in exact float polynomial arithmetic (no eigensolves), which
    keeps this an independent check on spectral routines.
    """
    a = gen.a
    # entry (i, j) of lambda*I - A as [coeff_lambda, coeff_1]
    m = [[np.array([1.0 if i == j else 0.0, -a[i, j]]) for j in range(4)]
         for i in range(4)]

    def det3(rows: list[int], cols: list[int]) -> np.ndarray:
        (i0, i1, i2), (j0, j1, j2) = rows, cols
        out = np.zeros(1)
        for jj, sign in ((j0, 1.0), (j1, -1.0), (j2, 1.0)):
            rest = [j for j in (j0, j1, j2) if j != jj]
            minor = _poly_add(
                _poly_mul(m[i1][rest[0]], m[i2][rest[1]]),
                -_poly_mul(m[i1][rest[1]], m[i2][rest[0]]),
            )
            out = _poly_add(out, sign * _poly_mul(m[i0][jj], minor))
        return out

    total = np.zeros(1)
    cols = [0, 1, 2, 3]
    for j in range(4):
        sign = 1.0 if j % 2 == 0 else -1.0
        minor = det3([1, 2, 3], [c for c in cols if c != j])
        total = _poly_add(total, sign * _poly_mul(m[0][j], minor))
    coeffs = np.zeros(5)
    coeffs[5 - len(total):] = total
    return CharPoly(coeffs)


def _shifted_linear(c: float) -> np.ndarray:
    """The polynomial (lambda + c)."""
    return np.array([1.0, c])


def charpoly_nonsecular_factored(params: SystemParams) -> CharPoly:
    """Closed-form non-secular characteristic polynomial
    (lam+g+r) * [(lam+g+r)^3 + 2r(lam+g+r)^2 + (D^2-r^2)(lam+g+r) + 2rD^2].

    The linear factor is the total-decay mode at -(gamma + r); spontaneous
    emission only shifts the whole spectrum.
    """
    g, r, d = params.gamma, params.r, params.delta
    mu = _shifted_linear(g + r)
    mu2 = _poly_mul(mu, mu)
    cubic = _poly_add(
        _poly_add(_poly_mul(mu2, mu), 2.0 * r * mu2),
        _poly_add((d * d - r * r) * mu, np.array([2.0 * r * d * d])),
    )
    return CharPoly(_poly_mul(mu, cubic))


def charpoly_secular_factored(params: SystemParams) -> CharPoly:
    """Closed-form secular characteristic polynomial
    [(lam+g+2r)^2 - r^2] * [(lam+g+r)^2 + D^2].

    The first factor carries the population modes -(gamma+r), -(gamma+3r)
    of the block-diagonal secular generator; the second the damped
    coherence oscillation -(gamma+r) +/- i*Delta.
    """
    g, r, d = params.gamma, params.r, params.delta
    mu2r = _shifted_linear(g + 2.0 * r)
    mu = _shifted_linear(g + r)
    pops = _poly_add(_poly_mul(mu2r, mu2r), np.array([-r * r]))
    cohs = _poly_add(_poly_mul(mu, mu), np.array([d * d]))
    return CharPoly(_poly_mul(pops, cohs))


def charpoly_secular_biquadratic(params: SystemParams) -> CharPoly:
    """Biquadratic form [(lam+g+r)^2 + D^2] * [(lam+g+r)^2 + r^2] sometimes
    quoted for the secular generator.

    This is NOT the characteristic polynomial of the secular matrix: its
    population factor has complex roots -(gamma+r) +/- i*r, whereas the
    population block is real symmetric with eigenvalues -(gamma+r) and
    -(gamma+3r). Kept public so the O(r) coefficient gap can be measured;
    see the validation report's documented deviations.
    """
    g, r, d = params.gamma, params.r, params.delta
    mu = _shifted_linear(g + r)
    mu2 = _poly_mul(mu, mu)
    return CharPoly(
        _poly_mul(_poly_add(mu2, np.array([d * d])), _poly_add(mu2, np.array([r * r])))
    )
