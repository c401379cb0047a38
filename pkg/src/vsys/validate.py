"""Runtime self-validation: every structural invariant of the package,
executed on demand (CLI ``validate``) and reused by the test suite.

Checks fall in two groups. Hard checks must pass; "documented deviation"
checks never fail -- they measure and report the known internal
discrepancies between the two non-secular formulations (tabulated vs
ground-state-eliminated), the biquadratic secular polynomial variant, and
the closed-form limit accuracy, so regressions in those magnitudes are
visible without pretending they are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import detection, generators, solvers
from .physics import (
    CA_GAMMA,
    CA_REFERENCE_INPUTS,
    CoefficientMatrices,
    SystemParams,
    check_complete_positivity,
    compute_gamma,
    field_for_splitting,
    pumping_rate,
    zeeman_splitting,
)

FAULT_MODES = ("charpoly",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    informational: bool = False
    metrics: dict[str, float] = field(default_factory=dict)
    note: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    def as_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "checks": [
                {
                    "name": c.name,
                    "passed": bool(c.passed),
                    "informational": bool(c.informational),
                    "metrics": {k: float(v) for k, v in c.metrics.items()},
                    "note": c.note,
                }
                for c in self.checks
            ],
        }


def _random_params(rng: np.random.Generator) -> SystemParams:
    return SystemParams.from_nbar(
        nbar=float(rng.uniform(0.0, 0.2)),
        delta=float(rng.uniform(0.0, 15.0)),
        gamma=1.0,
    )


def _check_physical_closure() -> CheckResult:
    gamma = compute_gamma(CA_REFERENCE_INPUTS.dipole_moment, CA_REFERENCE_INPUTS.omega0)
    gamma_rel = abs(gamma - CA_GAMMA) / CA_GAMMA
    r = pumping_rate(gamma, CA_REFERENCE_INPUTS.nbar)
    r_exact = abs(r - gamma * CA_REFERENCE_INPUTS.nbar / 4.0)
    delta = 2.0 * math.pi * 400e6
    b = field_for_splitting(delta)
    roundtrip = abs(zeeman_splitting(b) - delta) / delta
    ok = gamma_rel < 0.02 and r_exact == 0.0 and roundtrip < 1e-12
    return CheckResult(
        "physical_closure",
        ok,
        metrics={
            "gamma_rel_error": gamma_rel,
            "field_for_max_splitting_T": b,
            "splitting_roundtrip_rel": roundtrip,
        },
    )


def _check_cp_inequalities(rng: np.random.Generator) -> CheckResult:
    worst = np.inf
    basis_dev = 0.0
    for _ in range(100):
        g = float(rng.uniform(0.1, 3.0))
        r = float(rng.uniform(0.0, 1.0))
        circ = CoefficientMatrices.beam_circular(g, r)
        report = check_complete_positivity(circ)
        if not report.passed:
            return CheckResult("cp_inequalities", False, note="inequality violated")
        worst = min(worst, report.margin("pumping_offdiag"))
        transformed = CoefficientMatrices.beam_xy(g, r).to_circular()
        basis_dev = max(
            basis_dev,
            float(np.max(np.abs(transformed.r_matrix - circ.r_matrix))),
        )
    return CheckResult(
        "cp_inequalities",
        basis_dev < 1e-13,
        metrics={"pumping_boundary_margin": worst, "basis_route_dev": basis_dev},
        note="pumping matrix is rank one: boundary margin should be ~0",
    )


def _check_generator_structure(rng: np.random.Generator) -> CheckResult:
    for _ in range(50):
        p = _random_params(rng)
        vec = generators.build_nonsecular_vectorized(p)
        direct = generators.build_nonsecular_direct(p)
        sec = generators.build_secular_vectorized(p)
        if not sec.is_secular:
            return CheckResult("generator_structure", False, note="secular blocks")
        if not np.array_equal(vec.a[:2], direct.a[:2]) or not np.array_equal(
            vec.a[3], direct.a[3]
        ):
            return CheckResult(
                "generator_structure", False, note="non-coherence rows differ"
            )
        if abs((vec.a[2, 0] - direct.a[2, 0]) - p.r) > 1e-15:
            return CheckResult(
                "generator_structure", False, note="coherence-row offset != r"
            )
        eigs = np.linalg.eigvals(vec.a)
        if p.r > 0 and np.max(eigs.real) > -p.gamma + 1e-12:
            return CheckResult(
                "generator_structure", False, note="spectrum above -gamma"
            )
    return CheckResult("generator_structure", True)


def _charpoly_rel_dev(computed, reference) -> float:
    scale = float(np.max(np.abs(reference.coefficients)))
    return float(
        np.max(np.abs(computed.coefficients - reference.coefficients)) / scale
    )


def match_root_sets(a: np.ndarray, b: np.ndarray) -> float:
    """Greedy multiset matching of two small root sets; returns the largest
    matched distance (robust against ordering of near-degenerate roots)."""
    remaining = list(b)
    worst = 0.0
    for root in a:
        dists = [abs(root - other) for other in remaining]
        i = int(np.argmin(dists))
        worst = max(worst, dists[i])
        remaining.pop(i)
    return worst


def _check_charpoly(rng: np.random.Generator, fault: str | None) -> list[CheckResult]:
    worst_ns = worst_s = 0.0
    worst_factor = 0.0
    worst_shift = 0.0
    for _ in range(25):
        p = _random_params(rng)
        ns = generators.build_nonsecular_vectorized(p)
        cp = generators.char_poly(ns)
        coeffs = np.array(cp.coefficients)
        if fault == "charpoly":
            coeffs = coeffs.copy()
            coeffs[2] = -coeffs[2] if coeffs[2] != 0.0 else 1.0
            cp = generators.CharPoly(coeffs)
        worst_ns = max(
            worst_ns,
            _charpoly_rel_dev(cp, generators.charpoly_nonsecular_factored(p)),
        )
        sec = generators.build_secular_vectorized(p)
        worst_s = max(
            worst_s,
            _charpoly_rel_dev(
                generators.char_poly(sec), generators.charpoly_secular_factored(p)
            ),
        )
        # (lam + gamma + r) must divide the non-secular polynomial
        rem = np.polydiv(cp.coefficients, [1.0, p.gamma + p.r])[1]
        scale = float(np.max(np.abs(cp.coefficients)))
        worst_factor = max(worst_factor, float(np.abs(rem[0])) / scale)
        # a uniform decay offset shifts every generator eigenvalue rigidly
        shifted = generators.build_nonsecular_vectorized(
            SystemParams(p.gamma + 0.25, p.r, p.delta, 4 * p.r / (p.gamma + 0.25))
        )
        r0 = np.linalg.eigvals(ns.a)
        r1 = np.linalg.eigvals(shifted.a)
        worst_shift = max(worst_shift, match_root_sets(r0 - 0.25, r1))
    return [
        CheckResult(
            "charpoly_nonsecular",
            worst_ns < 1e-11,
            metrics={"max_rel_coeff_dev": worst_ns},
        ),
        CheckResult(
            "charpoly_secular",
            worst_s < 1e-11,
            metrics={"max_rel_coeff_dev": worst_s},
        ),
        CheckResult(
            "charpoly_total_decay_factor",
            worst_factor < 1e-12,
            metrics={"max_rel_remainder": worst_factor},
        ),
        CheckResult(
            "spectrum_uniform_decay_shift",
            worst_shift < 1e-10,
            metrics={"max_root_shift_dev": worst_shift},
        ),
    ]


def _check_three_way(rng: np.random.Generator) -> CheckResult:
    times = np.linspace(0.0, 20.0, 21)
    worst = 0.0
    for delta in (0.0, 0.012, 1.0, 12.0):
        for nbar in (0.0, 0.02, 0.0633, 0.1):
            p = SystemParams.from_nbar(nbar, delta)
            gen = generators.build_nonsecular_vectorized(p)
            te = solvers.trajectory_expm(gen, times)
            ts = solvers.trajectory_spectral(gen, times)
            tr = solvers.solve_rk_oracle(gen, 20.0, 1e-10, times=times)
            worst = max(
                worst,
                float(np.max(np.abs(te.data - ts.data))),
                float(np.max(np.abs(te.data - tr.data))),
                float(np.max(np.abs(ts.data - tr.data))),
            )
    return CheckResult(
        "three_way_solvers", worst < 1e-8, metrics={"max_pairwise_dev": worst}
    )


def _check_secular_null_coherence(rng: np.random.Generator) -> CheckResult:
    import warnings as _w

    times = np.linspace(0.0, 15.0, 31)
    worst = 0.0
    for _ in range(10):
        p = _random_params(rng)
        pops = rng.uniform(0.0, 0.4, size=2)
        y0 = np.array([pops[0], pops[1], 0.0, 0.0])
        for builder in (
            generators.build_secular_vectorized,
            lambda q: generators.build_isotropic(q, p=1.0, secular=True),
        ):
            gen = builder(p)
            with _w.catch_warnings():
                _w.simplefilter("ignore", solvers.InitialStateWarning)
                traj = solvers.trajectory_expm(gen, times, y0=y0)
            worst = max(worst, float(np.max(np.abs(traj.data[:, 2:]))))
    return CheckResult(
        "secular_null_coherence", worst <= 1e-14, metrics={"max_coherence": worst}
    )


def _check_positivity(rng: np.random.Generator, n_draws: int = 150) -> CheckResult:
    times = np.linspace(0.0, 20.0, 101)
    worst = np.inf
    for _ in range(n_draws):
        p = _random_params(rng)
        kind = rng.integers(0, 4)
        if kind == 0:
            gen = generators.build_nonsecular_direct(p)
        elif kind == 1:
            gen = generators.build_secular_vectorized(p)
        elif kind == 2:
            gen = generators.build_isotropic(p, p=float(rng.uniform(-1.0, 1.0)))
        else:
            gen = generators.build_isotropic(p, p=1.0, secular=True)
        traj = solvers.trajectory_expm(gen, times)
        worst = min(worst, traj.min_density_eigenvalue())
    return CheckResult(
        "positivity_cp_variants",
        worst >= -1e-10,
        metrics={"min_embedded_eigenvalue": worst},
    )


def _check_detection(rng: np.random.Generator) -> CheckResult:
    worst_quad = 0.0
    worst_comp = 0.0
    for _ in range(12):
        pops = rng.uniform(0.001, 0.3, size=2)
        cap = math.sqrt(pops[0] * pops[1])
        phase = rng.uniform(0.0, 2.0 * math.pi)
        mag = rng.uniform(0.0, cap)
        st = solvers.StateVector(
            float(pops[0]), float(pops[1]),
            mag * math.cos(phase), mag * math.sin(phase),
        )
        iz = detection.closed_form_intensity(st, detection.FULL_SPHERE)
        for geom in detection.NAMED_GEOMETRIES.values():
            quad = detection.integrate_detector(st, geom)
            closed = detection.closed_form_intensity(st, geom)
            worst_quad = max(worst_quad, abs(quad - closed) / max(abs(closed), 1e-12))
        ia = detection.closed_form_intensity(st, detection.WEDGE_A)
        iap = detection.closed_form_intensity(st, detection.WEDGE_A_PRIME)
        worst_comp = max(worst_comp, abs(ia + iap - iz) / iz)
    return CheckResult(
        "detector_quadrature",
        worst_quad < 1e-9 and worst_comp < 1e-9,
        metrics={
            "max_quadrature_rel_dev": worst_quad,
            "max_complementarity_rel_dev": worst_comp,
        },
    )


def _doc_coherence_row() -> CheckResult:
    """Measured gap between the tabulated and the ground-state-eliminated
    non-secular generators (they differ only in the coherence row)."""
    times = np.linspace(0.0, 20.0, 801)
    metrics: dict[str, float] = {}
    for nbar, tag in ((0.0633, ""), (0.03165, "_half_nbar")):
        worst_abs = 0.0
        ratio = 0.0
        for delta in (0.012, 1.0, 12.0):
            p = SystemParams.from_nbar(nbar, delta)
            tv = solvers.trajectory_expm(generators.build_nonsecular_vectorized(p), times)
            td = solvers.trajectory_expm(generators.build_nonsecular_direct(p), times)
            dev = float(np.max(np.abs(tv.data - td.data)))
            peak = float(max(np.max(tv.coh_abs), np.max(td.coh_abs)))
            worst_abs = max(worst_abs, dev)
            ratio = max(ratio, dev / peak)
        metrics[f"max_abs_deviation{tag}"] = worst_abs
        metrics[f"max_deviation_over_peak_coherence{tag}"] = ratio
    metrics["scaling_factor_on_halving_nbar"] = (
        metrics["max_abs_deviation"] / metrics["max_abs_deviation_half_nbar"]
    )
    return CheckResult(
        "doc_coherence_row_discrepancy",
        True,
        informational=True,
        metrics=metrics,
        note=(
            "tabulated coherence-row population coupling is -r/2; eliminating "
            "the ground state gives -3r/2; trajectory gap is O(nbar^2) in "
            "absolute terms (so O(nbar) relative to the peak coherence)"
        ),
    )


def _doc_secular_biquadratic() -> CheckResult:
    p = SystemParams.from_rates(0.1, 2.0)
    computed = generators.char_poly(generators.build_secular_vectorized(p))
    quoted = generators.charpoly_secular_biquadratic(p)
    gap = _charpoly_rel_dev(computed, quoted)
    return CheckResult(
        "doc_secular_biquadratic_variant",
        True,
        informational=True,
        metrics={"rel_coeff_gap_at_r0p1": gap},
        note=(
            "the biquadratic form [(l+g+r)^2+D^2][(l+g+r)^2+r^2] is not the "
            "characteristic polynomial of the secular generator; the "
            "consistent population factor is (l+g+2r)^2 - r^2"
        ),
    )


def _doc_tabulated_positivity() -> CheckResult:
    times = np.linspace(0.0, 30.0, 601)
    p = SystemParams.from_nbar(0.0633, 0.0)
    vec = solvers.trajectory_expm(generators.build_nonsecular_vectorized(p), times)
    direct = solvers.trajectory_expm(generators.build_nonsecular_direct(p), times)
    return CheckResult(
        "doc_tabulated_positivity_deficit",
        True,
        informational=True,
        metrics={
            "tabulated_min_embedded_eigenvalue": vec.min_density_eigenvalue(),
            "eliminated_min_embedded_eigenvalue": direct.min_density_eigenvalue(),
        },
        note=(
            "at zero splitting the tabulated non-secular generator leaves the "
            "positivity cone by ~2 r^2; the eliminated form stays on the "
            "boundary (dipole-locked pure superposition)"
        ),
    )


def _doc_limit_asymptotics() -> CheckResult:
    p = SystemParams.from_nbar(0.0633, 12.0)
    times = np.linspace(0.0, 20.0, 4001)
    exact = solvers.trajectory_expm(generators.build_nonsecular_vectorized(p), times)
    _, limit = solvers.limit_large_delta(p, times)
    peak = float(np.max(exact.coh_abs))
    comp_dev = float(np.max(np.abs(exact.data[:, 2:] - limit[:, 2:]))) / peak
    mag_dev = (
        float(np.max(np.abs(exact.coh_abs - np.hypot(limit[:, 2], limit[:, 3]))))
        / peak
    )
    return CheckResult(
        "doc_limit_asymptotics",
        True,
        informational=True,
        metrics={
            "component_dev_over_peak": comp_dev,
            "magnitude_dev_over_peak": mag_dev,
            "first_order_scale": (p.gamma + p.r) / p.delta,
        },
        note=(
            "componentwise the overdamped closed form differs from the exact "
            "solution by a phase term of first order in gamma/Delta; the "
            "coherence magnitude agrees much more closely"
        ),
    )


def run_validation(fault: str | None = None, seed: int = 20260810) -> ValidationReport:
    """Execute the full invariant suite; ``fault`` injects a deliberate
    defect ('charpoly') to prove the harness can fail."""
    if fault is not None and fault not in FAULT_MODES:
        raise ValueError(f"unknown fault mode {fault!r}; known: {FAULT_MODES}")
    rng = np.random.default_rng(seed)
    checks: list[CheckResult] = [
        _check_physical_closure(),
        _check_cp_inequalities(rng),
        _check_generator_structure(rng),
        *_check_charpoly(rng, fault),
        _check_three_way(rng),
        _check_secular_null_coherence(rng),
        _check_positivity(rng),
        _check_detection(rng),
        _doc_coherence_row(),
        _doc_secular_biquadratic(),
        _doc_tabulated_positivity(),
        _doc_limit_asymptotics(),
    ]
    return ValidationReport(tuple(checks))
