"""Command-line surface: trajectory runs, splitting scans, the validation
suite, and derived lab-frame rates.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 validation
failure. Set VSYS_NO_COLOR to strip ANSI from reports.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .constants import BOHR_MAGNETON, DIPOLE_ATOMIC_UNIT, HBAR
from .detection import beat_contrast, detector_signal
from .generators import Variant, build
from .physics import (
    CA_GAMMA,
    CA_NBAR,
    SystemParams,
    compute_gamma,
    field_for_splitting,
    pumping_rate,
    zeeman_splitting,
)
from .solvers import SingularGeneratorError, steady_state, trajectory_expm
from .svgplot import Series, two_panel_chart
from .validate import FAULT_MODES, run_validation

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_VALIDATION = 3

TRAJECTORY_HEADER = ("t_over_tau", "rho_e1e1", "rho_e2e2", "coh_re", "coh_im", "rho_gg")

_DETECTOR_COLUMNS = {
    "full-sphere": "i_z",
    "wedge-a": "i_a",
    "wedge-a-prime": "i_a_prime",
    "wedge-b": "i_b",
    "wedge-b-prime": "i_b_prime",
}

PRESETS: dict[str, dict] = {
    "fig2": {"delta_over_gamma": 12.0, "nbar": CA_NBAR,
             "t_end_over_tau": 6.0, "samples": 1201},
    "fig3": {"delta_over_gamma": 0.012, "nbar": CA_NBAR,
             "t_end_over_tau": 6.0, "samples": 601},
    "fig4": {"delta_over_gamma": 1.0, "nbar": CA_NBAR,
             "t_end_over_tau": 6.0, "samples": 601},
    "table1": {"delta_over_gamma": 400.0 / 34.6, "nbar": CA_NBAR,
               "t_end_over_tau": 6.0, "samples": 1201, "gamma_si": CA_GAMMA},
}


class ConfigError(Exception):
    """Bad flags, bad config file, or inconsistent settings (exit 1)."""


@dataclass
class RunConfig:
    """Settings of one simulation/scan run.

    All fields can come from a config file; command-line flags win, and a
    preset overrides its own fields (which is recorded in the manifest).
    """

    variant: str = "ns-vec"
    gamma_si: float | None = None
    nbar: float = CA_NBAR
    delta_over_gamma: float = 12.0
    t_end_over_tau: float = 6.0
    samples: int = 1201
    detectors: list[str] = field(default_factory=list)
    seed_preset: str | None = None
    alignment: float = 1.0

    def validated(self) -> "RunConfig":
        if self.variant not in {v.value for v in Variant}:
            raise ConfigError(
                f"unknown variant {self.variant!r}; choose from "
                f"{sorted(v.value for v in Variant)}"
            )
        if self.samples < 2:
            raise ConfigError("samples must be >= 2")
        if self.t_end_over_tau <= 0.0:
            raise ConfigError("t_end_over_tau must be > 0")
        if self.nbar < 0.0:
            raise ConfigError("nbar must be >= 0")
        if self.delta_over_gamma < 0.0:
            raise ConfigError("delta_over_gamma must be >= 0")
        if not -1.0 <= self.alignment <= 1.0:
            raise ConfigError("alignment must lie in [-1, 1]")
        for name in self.detectors:
            if name not in _DETECTOR_COLUMNS:
                raise ConfigError(
                    f"unknown detector {name!r}; choose from "
                    f"{sorted(_DETECTOR_COLUMNS)}"
                )
        if self.gamma_si is not None and self.gamma_si <= 0.0:
            raise ConfigError("gamma_si must be > 0")
        return self

    def params(self) -> SystemParams:
        return SystemParams.from_nbar(self.nbar, self.delta_over_gamma)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end_over_tau, self.samples)


def _parse_scalar(raw: str, path: str, lineno: int):
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: cannot parse value {raw!r}") from None


def parse_config_text(text: str, path: str = "<config>") -> dict:
    """Parse simple key/value configuration text.

    Accepted lines: blank, ``# comment``, ``key = value`` with value a
    quoted string, bool, number, or a bracketed comma-separated list.
    """
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if '"' not in raw and "#" in raw:
            raw = raw.split("#", 1)[0].strip()
        if not key.isidentifier():
            raise ConfigError(f"{path}:{lineno}: bad key {key!r}")
        if raw.startswith("[") and raw.endswith("]"):
            inner = raw[1:-1].strip()
            out[key] = (
                [] if not inner
                else [_parse_scalar(item, path, lineno)
                      for item in inner.split(",")]
            )
        else:
            out[key] = _parse_scalar(raw, path, lineno)
    return out


def load_run_config(
    config_path: str | None,
    preset: str | None,
    overrides: dict,
) -> tuple[RunConfig, list[str]]:
    """Defaults < config file < preset < explicit flags. Returns the config
    and the list of fields the preset set (for the manifest)."""
    cfg = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    if config_path is not None:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        data = parse_config_text(text, config_path)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "preset" in data:
            raise ConfigError("use the seed_preset key to name a preset")
        if "seed_preset" in data and preset is None:
            preset = str(data.pop("seed_preset"))
        if "detectors" in data:
            data["detectors"] = [str(x) for x in data["detectors"]]
        cfg = replace(cfg, **data)
    preset_fields: list[str] = []
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; choose from {sorted(PRESETS)}"
            )
        cfg = replace(cfg, seed_preset=preset, **PRESETS[preset])
        preset_fields = sorted(PRESETS[preset])
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    try:
        return cfg.validated(), preset_fields
    except TypeError as exc:
        raise ConfigError(f"bad config value type: {exc}") from exc


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _write_csv(path: Path, header: tuple[str, ...], columns: list[np.ndarray]) -> None:
    """Fixed contract: '.' decimals, LF endings, 17 significant digits."""
    with open(path, "w", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in zip(*columns):
            # v + 0.0 normalizes negative zero
            handle.write(",".join(f"{v + 0.0:.17g}" for v in row) + "\n")


def _color_enabled() -> bool:
    if os.environ.get("VSYS_NO_COLOR", ""):
        return False
    return sys.stdout.isatty()


def _paint(text: str, code: str) -> str:
    if _color_enabled():
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _stationary(gen):
    try:
        return steady_state(gen)
    except SingularGeneratorError:
        # marginally stable (dark-state) generator: settle numerically
        return trajectory_expm(gen, np.array([0.0, 200.0])).state(1)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(args: argparse.Namespace) -> int:
    overrides = {
        "variant": args.variant,
        "nbar": args.nbar,
        "delta_over_gamma": args.delta_over_gamma,
        "t_end_over_tau": args.t_end,
        "samples": args.samples,
        "alignment": args.alignment,
        "gamma_si": args.gamma_si,
        "detectors": (
            None if args.detectors is None
            else [s for s in args.detectors.split(",") if s]
        ),
    }
    cfg, preset_fields = load_run_config(args.config, args.preset, overrides)
    out_dir = Path(args.out)
    params = cfg.params()
    variant = Variant(cfg.variant)
    gen = build(variant, params, p=cfg.alignment)
    times = cfg.times()
    traj = trajectory_expm(gen, times)

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out_dir / "trajectory.csv",
        TRAJECTORY_HEADER,
        [times, traj.rho_ee1, traj.rho_ee2, traj.coh_re, traj.coh_im, traj.rho_gg],
    )
    written = ["trajectory.csv"]

    if cfg.detectors:
        signal = detector_signal(traj)
        header = ["t_over_tau"]
        columns = [times]
        for name in cfg.detectors:
            header.append(_DETECTOR_COLUMNS[name])
            columns.append(getattr(signal, _DETECTOR_COLUMNS[name]))
        header += ["diff_re", "diff_im"]
        columns += [signal.diff_re, signal.diff_im]
        _write_csv(out_dir / "signals.csv", tuple(header), columns)
        written.append("signals.csv")

    if args.format == "csv+svg":
        if variant.secular:
            sec_traj = traj
            other = {Variant.S_VECTORIZED: Variant.NS_VECTORIZED,
                     Variant.S_DIRECT: Variant.NS_DIRECT,
                     Variant.ISO_S: Variant.ISO_NS}[variant]
            non_traj = trajectory_expm(build(other, params, p=cfg.alignment), times)
        else:
            non_traj = traj
            sec_traj = trajectory_expm(
                build(variant.secular_counterpart, params, p=cfg.alignment), times
            )
        svg = two_panel_chart(
            times,
            [Series("non-secular", non_traj.coh_re),
             Series("secular", sec_traj.coh_re, dashed=True)],
            [Series("non-secular", non_traj.coh_im),
             Series("secular", sec_traj.coh_im, dashed=True)],
            "Re coherence vs time",
            "Im coherence vs time",
            "t / tau (units of 1/gamma)",
        )
        (out_dir / "coherences.svg").write_text(svg)
        written.append("coherences.svg")

    manifest = {
        "config": {
            "variant": cfg.variant,
            "gamma_si": cfg.gamma_si,
            "nbar": cfg.nbar,
            "delta_over_gamma": cfg.delta_over_gamma,
            "t_end_over_tau": cfg.t_end_over_tau,
            "samples": cfg.samples,
            "detectors": cfg.detectors,
            "seed_preset": cfg.seed_preset,
            "alignment": cfg.alignment,
        },
        "preset_overrode": preset_fields,
        "derived": {
            "r_over_gamma": params.r,
            "r_si": None if cfg.gamma_si is None
            else pumping_rate(cfg.gamma_si, cfg.nbar),
            "delta_si": None if cfg.gamma_si is None
            else cfg.delta_over_gamma * cfg.gamma_si,
        },
        "generator": {
            "variant": gen.variant.value,
            "a": gen.a.tolist(),
            "d": gen.d.tolist(),
            "alignment": gen.alignment,
        },
        "kernel_backend": _kernels.BACKEND,
        "version": __version__,
        "files": written,
    }
    (out_dir / "run.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {', '.join(written + ['run.json'])} to {out_dir}")
    return EXIT_OK


SCAN_HEADER = (
    "delta_over_gamma",
    "ss_rho_e1e1",
    "ss_rho_e2e2",
    "ss_coh_re",
    "ss_coh_im",
    "peak_coh_abs",
    "beat_contrast",
    "late_diff_re_i0",
    "late_diff_im_i0",
)


def _cmd_scan(args: argparse.Namespace) -> int:
    overrides = {
        "variant": args.variant,
        "nbar": args.nbar,
        "t_end_over_tau": args.t_end,
        "samples": args.samples,
        "alignment": args.alignment,
    }
    cfg, _ = load_run_config(args.config, None, overrides)
    if args.deltas is None:
        raise ConfigError("scan requires --deltas (comma-separated values)")
    try:
        deltas = [float(x) for x in args.deltas.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --deltas list: {exc}") from exc
    if not deltas:
        raise ConfigError("--deltas must list at least one value")
    if any(d < 0.0 for d in deltas):
        raise ConfigError("splittings must be >= 0")

    variant = Variant(cfg.variant)
    times = cfg.times()
    rows = np.zeros((len(deltas), len(SCAN_HEADER)))
    for i, delta in enumerate(deltas):
        params = SystemParams.from_nbar(cfg.nbar, delta)
        gen = build(variant, params, p=cfg.alignment)
        traj = trajectory_expm(gen, times)
        ss = _stationary(gen)
        pops = ss.rho_ee1 + ss.rho_ee2
        contrast = beat_contrast(ss) if pops > 0.0 else math.nan
        rows[i] = (
            delta,
            ss.rho_ee1,
            ss.rho_ee2,
            ss.coh_re,
            ss.coh_im,
            float(np.max(traj.coh_abs)),
            contrast,
            (16.0 / 3.0) * ss.coh_re,
            (16.0 / 3.0) * ss.coh_im,
        )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "scan.csv", SCAN_HEADER, [rows[:, j] for j in range(rows.shape[1])])
    print(f"wrote scan.csv ({len(deltas)} rows) to {out_dir}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    report = run_validation(fault=args.check_fault)
    for check in report.checks:
        if check.informational:
            tag = _paint("INFO", "36")
        elif check.passed:
            tag = _paint("PASS", "32")
        else:
            tag = _paint("FAIL", "31")
        metrics = "  ".join(f"{k}={v:.3e}" for k, v in check.metrics.items())
        line = f"[{tag}] {check.name}"
        if metrics:
            line += f"  {metrics}"
        print(line)
        if check.note:
            print(f"       {check.note}")
    verdict = "all checks passed" if report.passed else "validation FAILED"
    print(_paint(verdict, "32" if report.passed else "31"))
    if args.json is not None:
        try:
            Path(args.json).write_text(
                json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"
            )
        except OSError as exc:
            print(f"cannot write JSON report: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if report.passed else EXIT_VALIDATION


def _cmd_params(args: argparse.Namespace) -> int:
    dipole = args.dipole_ea0 * DIPOLE_ATOMIC_UNIT
    omega0 = 2.0 * math.pi * args.omega0_thz * 1e12
    gamma = compute_gamma(dipole, omega0)
    nbar = args.nbar
    r = pumping_rate(gamma, nbar)
    b = args.b_field if args.b_field is not None else field_for_splitting(
        2.0 * math.pi * 400e6
    )
    delta = zeeman_splitting(b)
    tau = 1.0 / gamma
    lines = [
        f"dipole moment     : {args.dipole_ea0:g} e*a0 = {dipole:.6e} C*m",
        f"omega0            : 2pi x {args.omega0_thz:g} THz = {omega0:.6e} rad/s",
        f"gamma             : {gamma:.6e} rad/s "
        f"(gamma/2pi = {gamma / (2 * math.pi) / 1e6:.3f} MHz)",
        f"tau = 1/gamma     : {tau * 1e9:.4f} ns",
        f"nbar              : {nbar:g}",
        f"r = gamma*nbar/4  : {r:.6e} rad/s (r/gamma = {r / gamma:.6g})",
        f"B field           : {b:.6e} T",
        f"Delta = 2 muB B/hb: {delta:.6e} rad/s "
        f"(Delta/2pi = {delta / (2 * math.pi) / 1e6:.3f} MHz, "
        f"Delta/gamma = {delta / gamma:.4f})",
        f"transit time      : {args.t_transit_us:g} us = "
        f"{args.t_transit_us * 1e-6 / tau:.0f} tau",
        f"B for Delta = 2pi x 400 MHz: "
        f"{field_for_splitting(2 * math.pi * 400e6):.6e} T",
        f"(constants: mu_B = {BOHR_MAGNETON:.6e} J/T, "
        f"hbar = {HBAR:.6e} J*s)",
    ]
    print("\n".join(lines))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise ConfigError(message)


def build_parser() -> _Parser:
    parser = _Parser(
        prog="vsys",
        description=(
            "Driven V-system simulator: secular vs non-secular dynamics and "
            "the fluorescence signals that distinguish them."
        ),
    )
    parser.add_argument("--version", action="version", version=f"vsys {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one trajectory and emit CSV/SVG")
    sim.add_argument("--preset", choices=sorted(PRESETS),
                     help="named parameter set; overrides its fields")
    sim.add_argument("--variant", choices=sorted(v.value for v in Variant))
    sim.add_argument("--nbar", type=float)
    sim.add_argument("--delta-over-gamma", type=float)
    sim.add_argument("--t-end", type=float, help="end time in units of 1/gamma")
    sim.add_argument("--samples", type=int)
    sim.add_argument("--alignment", type=float,
                     help="dipole alignment for the isotropic variants")
    sim.add_argument("--gamma-si", type=float, help="gamma in rad/s (manifest only)")
    sim.add_argument("--detectors",
                     help="comma-separated detector names for signals.csv")
    sim.add_argument("--out", default=".", help="output directory")
    sim.add_argument("--format", choices=("csv", "csv+svg"), default="csv")
    sim.add_argument("--config", help="key = value config file")
    sim.set_defaults(func=_cmd_simulate)

    scan = sub.add_parser("scan", help="steady-state summary over splittings")
    scan.add_argument("--deltas", help="comma-separated Delta/gamma values")
    scan.add_argument("--variant", choices=sorted(v.value for v in Variant))
    scan.add_argument("--nbar", type=float)
    scan.add_argument("--t-end", type=float)
    scan.add_argument("--samples", type=int)
    scan.add_argument("--alignment", type=float)
    scan.add_argument("--out", default=".", help="output directory")
    scan.add_argument("--config", help="key = value config file")
    scan.set_defaults(func=_cmd_scan)

    val = sub.add_parser("validate", help="run the invariant suite")
    val.add_argument("--json", help="also write a machine-readable report")
    val.add_argument("--check-fault", choices=FAULT_MODES,
                     help="inject a deliberate defect (harness self-test)")
    val.set_defaults(func=_cmd_validate)

    par = sub.add_parser("params", help="derived lab-frame rates")
    par.add_argument("--dipole-ea0", type=float, default=2.85,
                     help="transition dipole in units of e*a0")
    par.add_argument("--omega0-thz", type=float, default=709.1,
                     help="transition frequency in THz (ordinary frequency)")
    par.add_argument("--b-field", type=float, default=None, help="tesla")
    par.add_argument("--nbar", type=float, default=CA_NBAR)
    par.add_argument("--t-transit-us", type=float, default=20.0)
    par.set_defaults(func=_cmd_params)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
