"""Command-line front end: config ingestion, experiment orchestration and
CSV emission.

One invocation runs one subcommand against one flat JSON config (defaults
reproduce the canonical adiabatic parameter set). Outputs are CSV files
with a header row and floats printed to 17 significant digits, plus a
deterministic run manifest; the wall-clock stamp lives in a separate file
so repeated runs stay byte-identical.

Exit codes: 0 on success, 2 for config or schema problems, 3 for numerical
failures (integration breakdown or an unmet truncation criterion).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import analysis, basis, dynamics, protocol
from .boundary import PhysicalConstants, WallMotion, light_crossing_time

__all__ = ["SimConfig", "ConfigError", "load_config", "main"]

_FIGURES = ("fig3", "fig4", "fig5a", "fig5b", "fig6")


class ConfigError(ValueError):
    """Invalid or unreadable run configuration."""


@dataclass(frozen=True)
class SimConfig:
    """Flat run configuration; defaults are the adiabatic example set."""

    mass: float = 1.0 / 75.0
    L0: float = 37.0
    q1: float = 7.0
    q2: float = 7.04
    omega: float = 25.0
    n: int = 2
    k_max: int = 16
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t_samples: int = 801
    window_max: float | None = None  # default L0/10
    profile_points: int = 256
    x_ref: float | None = None  # default L0/20
    epsilon: float = 0.37
    ensemble_size: int = 1_000_000
    seed: int = 20250810
    delta_mu: float | None = None  # default: diagonal-approximation shift

    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(mass=self.mass)

    def motion_reference(self) -> WallMotion:
        return WallMotion(L0=self.L0, q=self.q1, omega=self.omega)

    def motion_perturbed(self) -> WallMotion:
        return WallMotion(L0=self.L0, q=self.q2, omega=self.omega)

    def coupled_config(self) -> dynamics.CoupledSystemConfig:
        return dynamics.CoupledSystemConfig(
            motion_potential=self.motion_reference(),
            motion_boundary=self.motion_perturbed(),
            constants=self.constants(),
            n_init=self.n,
            k_max=self.k_max,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            t_samples=self.t_samples,
        )

    def window(self) -> tuple[float, float]:
        hi = self.L0 / 10.0 if self.window_max is None else self.window_max
        return (0.0, hi)

    def reference_point(self) -> float:
        return self.L0 / 20.0 if self.x_ref is None else self.x_ref

    def phase_shift(self) -> float:
        """delta_mu driving the protocol; the diagonal-approximation value
        mu_ad - mu_I unless overridden in the config."""
        if self.delta_mu is not None:
            return self.delta_mu
        ad = dynamics.adiabatic_phase(
            self.motion_reference(), self.motion_perturbed(), self.constants(), self.n
        )
        mu_ref = basis.total_phase_closed_form(self.L0, self.q1, self.omega, self.n, self.constants())
        return ad.value - mu_ref


_NULLABLE = {"window_max", "x_ref", "delta_mu"}
_INT_FIELDS = {"n", "k_max", "t_samples", "profile_points", "ensemble_size", "seed"}


def load_config(path: str | Path | None, overrides: dict | None = None) -> SimConfig:
    """Build a SimConfig from a flat JSON file plus CLI overrides.

    Unknown keys are errors, as are non-finite numbers or wrong types.
    """
    data: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat JSON object")
    known = {f.name for f in dataclasses.fields(SimConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(data)
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    clean: dict = {}
    for key, value in merged.items():
        if value is None:
            if key not in _NULLABLE:
                raise ConfigError(f"config key {key!r} must not be null")
            clean[key] = None
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"config key {key!r} must be finite, got {value!r}")
        if key in _INT_FIELDS:
            if int(value) != value:
                raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
            clean[key] = int(value)
        else:
            clean[key] = float(value)
    try:
        cfg = SimConfig(**clean)
        # construct the derived objects once so domain violations surface
        cfg.constants()
        cfg.motion_reference()
        cfg.motion_perturbed()
        if cfg.k_max < cfg.n:
            raise ValueError(f"k_max must be >= n, got k_max={cfg.k_max}, n={cfg.n}")
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.17g}"
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join("" if v is None else _fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(out: Path, command: str, cfg: SimConfig, outputs: list[str], extra: dict | None = None) -> None:
    try:
        from importlib.metadata import version

        pkg_version = version("cavityphase")
    except Exception:
        pkg_version = "unknown"
    import scipy

    manifest = {
        "command": command,
        "config": dataclasses.asdict(cfg),
        "outputs": outputs,
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "cavityphase": pkg_version,
        },
    }
    if extra:
        manifest["diagnostics"] = extra
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (out / "timestamp.txt").write_text(datetime.now(timezone.utc).isoformat() + "\n")


def _run_phases(cfg: SimConfig, out: Path, quiet: bool) -> list[str]:
    const = cfg.constants()
    ref = cfg.motion_reference()
    mu_ref = basis.total_phase_closed_form(cfg.L0, cfg.q1, cfg.omega, cfg.n, const)
    mu_pert = basis.total_phase_closed_form(cfg.L0, cfg.q2, cfg.omega, cfg.n, const)
    mu_ad = dynamics.adiabatic_phase(ref, cfg.motion_perturbed(), const, cfg.n).value
    delta = basis.dynamical_phase(ref, const, cfg.n)
    gamma = basis.geometric_phase(ref, const, cfg.n)
    rows = [
        ["mu_I", mu_ref],
        ["mu_II", mu_pert],
        ["mu_ad", mu_ad],
        ["delta", delta],
        ["gamma", gamma],
    ]
    _write_csv(out / "phases.csv", ["quantity", "value"], rows)
    if not quiet:
        for name, value in rows:
            print(f"{name} = {value:.12g}")
    return ["phases.csv"]


def _evolve(cfg: SimConfig) -> dynamics.CoefficientTrajectory:
    return dynamics.evolve_coefficients(cfg.coupled_config())


def _run_evolve(cfg: SimConfig, out: Path, quiet: bool) -> list[str]:
    traj = _evolve(cfg)
    rows = []
    for i, t in enumerate(traj.times):
        for k in range(1, traj.k_max + 1):
            a = traj.coeffs[i, k - 1]
            rows.append([t, k, a.real, a.imag, abs(a) ** 2])
    _write_csv(out / "coefficients.csv", ["t", "k", "re_a", "im_a", "abs2_a"], rows)
    if not quiet:
        print(f"norm drift {traj.norm_drift:.3e}, tail amplitude {traj.tail_amplitude():.3e}")
    return ["coefficients.csv"]


def _profile(cfg: SimConfig) -> analysis.PhaseProfile:
    traj = _evolve(cfg)
    const = cfg.constants()
    pert = cfg.motion_perturbed()
    T = pert.period()
    lo, hi = cfg.window()
    x = np.linspace(lo, hi, cfg.profile_points + 1)[1:]  # leave out the wall itself
    phi_T = dynamics.reconstruct_wavefunction(traj, pert, const, x, T)
    phi_0 = basis.psi(pert, const, cfg.n, x, 0.0)
    mu_ref = basis.total_phase_closed_form(cfg.L0, cfg.q1, cfg.omega, cfg.n, const)
    return analysis.extract_phase_profile(x, phi_0, phi_T, mu_ref, window=(lo, hi))


def _run_profile(cfg: SimConfig, out: Path, quiet: bool) -> list[str]:
    prof = _profile(cfg)
    rows = [[x, p, s] for x, p, s in zip(prof.x, prof.phase, prof.shift)]
    _write_csv(out / "phase_profile.csv", ["x", "mu_III", "delta_mu"], rows)
    if not quiet:
        print(
            f"profile over {prof.x.size} points, delta_mu at x={prof.x[0]:.4g}: {prof.shift[0]:.6g}"
        )
    return ["phase_profile.csv"]


def _run_converge(cfg: SimConfig, out: Path, quiet: bool) -> list[str]:
    rows_out = analysis.convergence_study(
        cfg.coupled_config(), list(range(cfg.n, cfg.k_max + 1)), x_ref=cfg.reference_point()
    )
    rows = [[r.k_max, r.phase, r.delta_prev] for r in rows_out]
    _write_csv(out / "convergence.csv", ["k_max", "mu_III", "delta_prev"], rows)
    if not quiet:
        print(f"phase at k_max={rows_out[-1].k_max}: {rows_out[-1].phase:.9g}")
    return ["convergence.csv"]


def _run_velocity(cfg: SimConfig, out: Path, quiet: bool) -> list[str]:
    traj = _evolve(cfg)
    const = cfg.constants()
    pert = cfg.motion_perturbed()
    report = analysis.velocity_stats(traj, pert, const)
    causal = analysis.causality_check(pert, const)
    rows: list[list] = [
        [f"v_over_c_mode_{k}", report.mode_v_over_c[k - 1]] for k in range(1, traj.k_max + 1)
    ]
    rows += [
        ["mean_v_over_c", report.mean_v_over_c],
        ["std_v_over_c", report.std_v_over_c],
        ["period", pert.period()],
        ["light_crossing_time", light_crossing_time(pert, const)],
        ["subluminal_window", int(causal.subluminal_window)],
        ["margin", causal.margin],
    ]
    _write_csv(out / "velocity.csv", ["quantity", "value"], rows)
    if not quiet:
        print(
            f"mean v/c {report.mean_v_over_c:.6g}, std v/c {report.std_v_over_c:.6g}, "
            f"window subluminal: {causal.subluminal_window}"
        )
    return ["velocity.csv"]


def _run_protocol(cfg: SimConfig, out: Path, quiet: bool) -> list[str]:
    dmu = cfg.phase_shift()
    pconf = protocol.ProtocolConfig(
        mode=cfg.n,
        epsilon=cfg.epsilon,
        L0=cfg.L0,
        delta_mu=dmu,
        ensemble_size=cfg.ensemble_size,
        seed=cfg.seed,
    )
    outcome = protocol.simulate_ensemble(pconf)
    p = protocol.detection_probability(cfg.n, cfg.epsilon, cfg.L0)
    rows: list[list] = [
        ["delta_mu", dmu],
        ["detection_p_exact", p.exact],
        ["detection_p_approx", p.approx],
        ["expected_ratio", protocol.click_ratio(dmu)],
        ["clicks_D1", outcome.clicks_D1],
        ["clicks_D2", outcome.clicks_D2],
        ["undetected", outcome.undetected],
        ["ratio", outcome.ratio],
        ["inferred_message", outcome.inferred_message],
        ["seed", outcome.seed],
    ]
    if dmu != 0.0:
        rows.append(["required_N_3sigma", protocol.required_ensemble_size(dmu, cfg.n, cfg.epsilon, cfg.L0)])
    _write_csv(out / "protocol.csv", ["quantity", "value"], rows)
    if not quiet:
        print(
            f"D1 {outcome.clicks_D1}, D2 {outcome.clicks_D2}, "
            f"message: {outcome.inferred_message}"
        )
    return ["protocol.csv"]


def _figure_config(name: str, cfg: SimConfig) -> SimConfig:
    if name in ("fig3", "fig5a"):
        return dataclasses.replace(cfg, q2=7.04, k_max=max(cfg.k_max, 16))
    if name in ("fig4", "fig5b"):
        return dataclasses.replace(cfg, q2=7.33, k_max=max(cfg.k_max, 24))
    if name == "fig6":
        return dataclasses.replace(cfg, q2=7.33, k_max=max(cfg.k_max, 31))
    raise ConfigError(f"unknown figure {name!r}")


def _run_figure(name: str, cfg: SimConfig, out: Path, quiet: bool) -> list[str]:
    fcfg = _figure_config(name, cfg)
    if name in ("fig3", "fig4"):
        traj = _evolve(fcfg)
        rows = []
        for i, t in enumerate(traj.times):
            occ = [abs(traj.coeffs[i, k]) ** 2 for k in range(4)]
            rows.append([t] + occ)
        fname = f"{name}.csv"
        _write_csv(out / fname, ["t", "abs2_a1", "abs2_a2", "abs2_a3", "abs2_a4"], rows)
        if not quiet:
            print(f"{name}: k_max={fcfg.k_max}, norm drift {traj.norm_drift:.3e}")
        return [fname]
    if name in ("fig5a", "fig5b"):
        prof = _profile(fcfg)
        rows = [[x, p, s] for x, p, s in zip(prof.x, prof.phase, prof.shift)]
        fname = f"{name}.csv"
        _write_csv(out / fname, ["x", "mu_III", "delta_mu"], rows)
        if not quiet:
            print(f"{name}: delta_mu near the wall {prof.shift[0]:.6g}")
        return [fname]
    # fig6
    rows_out = analysis.convergence_study(
        fcfg.coupled_config(), list(range(fcfg.n, fcfg.k_max + 1)), x_ref=fcfg.reference_point()
    )
    rows = [[r.k_max, r.phase, r.delta_prev] for r in rows_out]
    _write_csv(out / "fig6.csv", ["k_max", "mu_III", "delta_prev"], rows)
    if not quiet:
        print(f"fig6: phase stabilizes at {rows_out[-1].phase:.9g}")
    return ["fig6.csv"]


def build_parser() -> argparse.ArgumentParser:
    # common flags may appear before or after the subcommand; SUPPRESS keeps
    # a post-subcommand occurrence from being clobbered by defaults
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="path to a flat JSON config file")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory (created if missing)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override the config seed")
    common.add_argument("--kmax", type=int, default=argparse.SUPPRESS, help="override the config k_max")
    common.add_argument(
        "--quiet", action="store_true", default=argparse.SUPPRESS, help="suppress progress output"
    )
    parser = argparse.ArgumentParser(
        prog="cavityphase",
        description="Oscillating-wall cavity phase experiments (CSV output).",
        parents=[common],
    )
    parser.set_defaults(config=None, out=".", seed=None, kmax=None, quiet=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("phases", "closed-form and diagonal-approximation cycle phases"),
        ("evolve", "coefficient trajectory CSV"),
        ("profile", "local phase profile near the static wall"),
        ("converge", "extracted phase versus truncation order"),
        ("velocity", "velocity diagnostics of the evolved state"),
        ("protocol", "seeded two-detector ensemble simulation"),
    ]:
        sub.add_parser(name, help=help_text, parents=[common])
    fig = sub.add_parser(
        "figure", help="one-command reproduction of a canonical data set", parents=[common]
    )
    fig.add_argument("name", choices=_FIGURES)
    return parser


_HANDLERS = {
    "phases": _run_phases,
    "evolve": _run_evolve,
    "profile": _run_profile,
    "converge": _run_converge,
    "velocity": _run_velocity,
    "protocol": _run_protocol,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, overrides={"seed": args.seed, "k_max": args.kmax})
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot prepare output directory: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "figure":
            outputs = _run_figure(args.name, cfg, out, args.quiet)
            command = f"figure {args.name}"
            cfg_used = _figure_config(args.name, cfg)
        else:
            outputs = _HANDLERS[args.command](cfg, out, args.quiet)
            command = args.command
            cfg_used = cfg
    except dynamics.IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _write_manifest(out, command, cfg_used, outputs)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
