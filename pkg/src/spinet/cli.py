"""Command-line front end: presets, runs, sweeps, entropy checks, CSV output.

Subcommands
-----------
simulate        steady state of a device preset (or config file), writing
                n_profile.csv (x, n0, n1, n2, n3, W0, T, V) and
                convergence.csv (step, residual).
sweep           one steady-state run per polarization value (fanned out to
                worker processes), writing per-run profiles, a combined
                temperature_sweep.csv (x, then one T column per p) and
                sweep_summary.csv (p, max_T).
entropy-check   drift-free zero-flux trajectory from a seeded smooth
                perturbation, writing entropy.csv (step, H1, production,
                violation); exits 0 iff H1 is monotone within tolerance.
model2-step     one implicit step of the field-free second model from a
                state CSV (x, n0, W0, W1, W2, W3), writing the new state
                with the solve certificate appended as comment lines.
presets         list the built-in device profiles.

Exit codes: 0 success, 1 invalid input, 2 non-convergence, 3 violated
certificate/verdict.

Configuration is a flat INI file: the [device]/[regionN] sections follow
`DeviceProfile.to_config`, and an optional [run] section holds any of the
run keys (m, dt, threshold, max_steps, mode, polarization, bias, outdir).
Every command-line flag overrides its config-file counterpart.  CSV files
carry '#'-prefixed metadata lines, then a header row, then data in
17-significant-digit scientific notation; the data section is byte-stable
across reruns of the same build and configuration.  The output directory
is taken from --outdir, else the SPINET_OUTDIR environment variable, else
the working directory.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .device import PRESETS, DeviceProfile
from .fvm import Grid1D, entropy_trajectory_run, perturbed_state, steady_state
from .model2_elliptic import CertificateViolation, solve_time_step

__all__ = ["RunConfig", "main", "read_csv"]

_ENV_OUTDIR = "SPINET_OUTDIR"
_MODES = {"energy-transport": "energy_transport", "drift-diffusion": "drift_diffusion"}


@dataclass
class RunConfig:
    """Merged run options (defaults <- config file <- command-line flags)."""

    preset: str | None = None
    config: str | None = None
    m: int = 334
    dt: float = 5e-4
    threshold: float = 1e-8
    max_steps: int = 2_000_000
    mode: str = "energy-transport"
    polarization: float | None = None
    bias: float | None = None
    outdir: str | None = None
    # sweep
    p_values: list[float] = field(default_factory=lambda: [0.0, 0.33, 0.66])
    # entropy-check
    steps: int = 2000
    seed: int = 0
    amplitude: float = 0.1
    tolerance: float = 1e-10
    # model2-step
    state: str | None = None
    h: float = 1e-3
    tau_sf: float = 1.0
    tol: float = 1e-12
    max_iter: int = 400
    damping: float = 0.5
    bc_n0: float = 1.0
    bc_W0: float = 1.5
    bc_Wv: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def validate(self) -> None:
        if self.m < 3:
            raise ValueError("m must be at least 3")
        if self.dt <= 0.0 or self.h <= 0.0:
            raise ValueError("time steps must be positive")
        if self.threshold <= 0.0:
            raise ValueError("threshold must be positive")
        if self.mode not in _MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        for p in self.p_values:
            if not 0.0 <= p < 1.0:
                raise ValueError(f"sweep polarization {p} outside [0, 1)")

    @property
    def mode_internal(self) -> str:
        return _MODES[self.mode]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------


def _format_row(values) -> str:
    return ",".join("%.16e" % v for v in values)


def _write_csv(path: Path, metadata: dict, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        for key, value in metadata.items():
            fh.write(f"# {key} = {value}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(_format_row(row) + "\n")


def read_csv(path) -> tuple[list[str], np.ndarray, list[str]]:
    """Read a CSV written by this module.

    Returns (column names, data array of shape (rows, cols), comment lines).
    """
    comments: list[str] = []
    header: list[str] | None = None
    rows: list[list[float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line)
            elif header is None:
                header = [c.strip() for c in line.split(",")]
            else:
                rows.append([float(c) for c in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: no header row")
    return header, np.asarray(rows, dtype=float), comments


def _outdir(cfg: RunConfig) -> Path:
    out = cfg.outdir or os.environ.get(_ENV_OUTDIR) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _profile_metadata(cfg: RunConfig, profile: DeviceProfile) -> dict:
    return {
        "preset": profile.name,
        "m": cfg.m,
        "dt": repr(cfg.dt),
        "threshold": repr(cfg.threshold),
        "p": repr(max(r.polarization for r in profile.regions)),
        "U_V": repr(profile.bias_V),
        "mode": cfg.mode,
    }


# ---------------------------------------------------------------------------
# profile resolution
# ---------------------------------------------------------------------------


def _resolve_profile(cfg: RunConfig) -> DeviceProfile:
    if cfg.config:
        text = Path(cfg.config).read_text()
        profile = DeviceProfile.from_config(text)
    elif cfg.preset:
        try:
            profile = PRESETS[cfg.preset]()
        except KeyError:
            raise ValueError(
                f"unknown preset {cfg.preset!r}; valid presets: "
                + ", ".join(sorted(PRESETS))
            ) from None
    else:
        raise ValueError("need --preset or --config")
    if cfg.polarization is not None:
        if not 0.0 <= cfg.polarization < 1.0:
            raise ValueError("polarization override must lie in [0, 1)")
        profile = profile.with_polarization(cfg.polarization)
    if cfg.bias is not None:
        from dataclasses import replace

        profile = replace(profile, bias_V=cfg.bias)
    profile.validate()
    return profile


def _merge_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    path = getattr(args, "config", None)
    if path:
        cp = configparser.ConfigParser()
        cp.read_string(Path(path).read_text())
        if cp.has_section("run"):
            run = cp["run"]
            for key in (
                "m", "dt", "threshold", "max_steps", "mode", "polarization",
                "bias", "outdir", "steps", "seed", "amplitude", "tolerance",
                "h", "tau_sf", "tol", "max_iter", "damping",
            ):
                if key in run:
                    current = getattr(cfg, key)
                    raw = run[key]
                    if key in ("mode", "outdir"):
                        setattr(cfg, key, raw)
                    elif key in ("m", "max_steps", "steps", "seed", "max_iter"):
                        setattr(cfg, key, int(raw))
                    else:
                        setattr(cfg, key, float(raw))
            if "p_values" in run:
                cfg.p_values = [float(v) for v in run["p_values"].split()]
    for key, value in vars(args).items():
        if key in ("func", "command"):
            continue
        if value is not None and hasattr(cfg, key):
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_presets(cfg: RunConfig) -> int:
    for name in sorted(PRESETS):
        profile = PRESETS[name]()
        layers = ", ".join(
            f"[{r.x_from:g},{r.x_to:g}] {'magnetic' if any(r.magnetization) else 'plain'}"
            for r in profile.regions
        )
        print(f"{name}: {layers}")
    return 0


def _cmd_simulate(cfg: RunConfig) -> int:
    profile = _resolve_profile(cfg)
    state, report = steady_state(
        profile,
        m=cfg.m,
        dt=cfg.dt,
        threshold=cfg.threshold,
        max_steps=cfg.max_steps,
        mode=cfg.mode_internal,
    )
    out = _outdir(cfg)
    grid = Grid1D.make(cfg.m)
    meta = _profile_metadata(cfg, profile)
    meta["steps"] = report.steps
    meta["final_residual"] = repr(report.final_residual)
    meta["converged"] = report.converged
    _write_csv(
        out / "n_profile.csv",
        meta,
        ["x", "n0", "n1", "n2", "n3", "W0", "T", "V"],
        (
            (grid.centers[i], state.n0[i], state.nv[i, 0], state.nv[i, 1],
             state.nv[i, 2], state.W0[i], state.T[i], state.V[i])
            for i in range(cfg.m)
        ),
    )
    _write_csv(
        out / "convergence.csv",
        meta,
        ["step", "residual"],
        ((i + 1, r) for i, r in enumerate(report.residual_history)),
    )
    if not report.converged:
        print(
            f"not converged after {report.steps} steps "
            f"(residual {report.final_residual:.3e})",
            file=sys.stderr,
        )
        return 2
    print(f"converged in {report.steps} steps; wrote {out / 'n_profile.csv'}")
    return 0


def _sweep_worker(payload):
    """One sweep run; module-level so process pools can pickle it."""
    profile_text, p, m, dt, threshold, max_steps, mode = payload
    profile = DeviceProfile.from_config(profile_text).with_polarization(p)
    state, report = steady_state(
        profile, m=m, dt=dt, threshold=threshold, max_steps=max_steps, mode=mode
    )
    return {
        "p": p,
        "state": state,
        "steps": report.steps,
        "converged": report.converged,
        "final_residual": report.final_residual,
    }


def _cmd_sweep(cfg: RunConfig) -> int:
    profile = _resolve_profile(cfg)
    text = profile.to_config()
    payloads = [
        (text, p, cfg.m, cfg.dt, cfg.threshold, cfg.max_steps, cfg.mode_internal)
        for p in cfg.p_values
    ]
    workers = min(len(payloads), os.cpu_count() or 1)
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, payloads))
    else:
        results = [_sweep_worker(pl) for pl in payloads]

    out = _outdir(cfg)
    grid = Grid1D.make(cfg.m)
    failed = [r for r in results if not r["converged"]]
    meta = _profile_metadata(cfg, profile)
    meta["p_values"] = " ".join(repr(p) for p in cfg.p_values)
    for r in results:
        tag = ("%g" % r["p"]).replace(".", "_")
        st = r["state"]
        run_meta = dict(meta)
        run_meta["p"] = repr(r["p"])
        run_meta["steps"] = r["steps"]
        run_meta["final_residual"] = repr(r["final_residual"])
        run_meta["converged"] = r["converged"]
        _write_csv(
            out / f"n_profile_p{tag}.csv",
            run_meta,
            ["x", "n0", "n1", "n2", "n3", "W0", "T", "V"],
            (
                (grid.centers[i], st.n0[i], st.nv[i, 0], st.nv[i, 1],
                 st.nv[i, 2], st.W0[i], st.T[i], st.V[i])
                for i in range(cfg.m)
            ),
        )
    header = ["x"] + [f"T_p{('%g' % p)}" for p in cfg.p_values]
    columns = [grid.centers] + [r["state"].T for r in results]
    _write_csv(
        out / "temperature_sweep.csv",
        meta,
        header,
        zip(*columns),
    )
    _write_csv(
        out / "sweep_summary.csv",
        meta,
        ["p", "max_T"],
        ((r["p"], float(np.max(r["state"].T))) for r in results),
    )
    if failed:
        for r in failed:
            print(f"run p={r['p']} did not converge", file=sys.stderr)
        return 2
    print(f"{len(results)} runs converged; wrote {out / 'temperature_sweep.csv'}")
    return 0


def _cmd_entropy_check(cfg: RunConfig) -> int:
    from .device import Region

    profile = DeviceProfile(
        name="uniform",
        length_um=1.2,
        regions=[Region(0.0, 1.0, 1.0, (0.0, 0.0, 0.0), 0.0)],
        tau_sf_scaled=1.0,
    )
    initial = perturbed_state(cfg.m, amplitude=cfg.amplitude, seed=cfg.seed)
    report, final, mass = entropy_trajectory_run(
        profile, initial, cfg.steps, m=cfg.m, dt=cfg.dt,
        tolerance=cfg.tolerance, tau_sf=1.0, D0=1.0,
    )
    out = _outdir(cfg)
    drift = float(np.max(np.abs(np.diff(mass)))) if len(mass) > 1 else 0.0
    meta = {
        "m": cfg.m,
        "dt": repr(cfg.dt),
        "steps": cfg.steps,
        "seed": cfg.seed,
        "amplitude": repr(cfg.amplitude),
        "tolerance": repr(cfg.tolerance),
        "monotone_nonincreasing": report.monotone_nonincreasing,
        "max_violation": repr(report.max_violation),
        "max_mass_drift_per_step": repr(drift),
    }
    violations = np.maximum(0.0, np.diff(report.H, prepend=report.H[0]))
    _write_csv(
        out / "entropy.csv",
        meta,
        ["step", "H1", "production", "violation"],
        (
            (k, report.H[k], report.production[k], violations[k])
            for k in range(len(report.H))
        ),
    )
    if not report.monotone_nonincreasing:
        print(
            f"entropy increased by {report.max_violation:.3e} "
            f"(tolerance {cfg.tolerance:.1e})",
            file=sys.stderr,
        )
        return 3
    print(f"H1 monotone within {cfg.tolerance:.1e}; wrote {out / 'entropy.csv'}")
    return 0


def _cmd_model2_step(cfg: RunConfig) -> int:
    if not cfg.state:
        raise ValueError("model2-step needs --state CSV")
    header, data, _ = read_csv(cfg.state)
    cols = {name: data[:, i] for i, name in enumerate(header)}
    for need in ("n0", "W0", "W1", "W2", "W3"):
        if need not in cols:
            raise ValueError(f"state CSV missing column {need!r}")
    n0, W0 = cols["n0"], cols["W0"]
    Wv = np.stack([cols["W1"], cols["W2"], cols["W3"]], axis=1)
    bcv = np.asarray(cfg.bc_Wv, dtype=float)
    bc = ((cfg.bc_n0, cfg.bc_W0, bcv), (cfg.bc_n0, cfg.bc_W0, bcv))
    try:
        n0_new, W0_new, Wv_new, cert = solve_time_step(
            (n0, W0, Wv), cfg.h, cfg.tau_sf, bc,
            damping=cfg.damping, tol=cfg.tol, max_iter=cfg.max_iter,
        )
    except CertificateViolation as exc:
        print(str(exc), file=sys.stderr)
        return 3
    out = _outdir(cfg)
    m = len(n0_new)
    x = (np.arange(m) + 1.0) / (m + 1.0)
    meta = {
        "h": repr(cfg.h),
        "tau_sf": repr(cfg.tau_sf),
        "tol": repr(cfg.tol),
        "m": m,
    }
    path = out / "model2_state.csv"
    _write_csv(
        path,
        meta,
        ["x", "n0", "W0", "W1", "W2", "W3"],
        (
            (x[i], n0_new[i], W0_new[i], Wv_new[i, 0], Wv_new[i, 1], Wv_new[i, 2])
            for i in range(m)
        ),
    )
    with open(path, "a") as fh:
        fh.write(f"# certificate: converged = {cert.converged}\n")
        fh.write(f"# certificate: iterations = {cert.iterations}\n")
        fh.write(f"# certificate: fp_residual = {cert.fp_residual!r}\n")
        fh.write(f"# certificate: direct_residual = {cert.direct_residual!r}\n")
        fh.write(f"# certificate: min_n0 = {cert.min_n0!r}\n")
        fh.write(f"# certificate: min_W0 = {cert.min_W0!r}\n")
        fh.write(f"# certificate: min_v_margin = {cert.min_v_margin!r}\n")
        fh.write(f"# certificate: spin_margin = {cert.spin_margin!r}\n")
        fh.write(f"# certificate: trunc_activity = {cert.trunc_activity!r}\n")
        fh.write(f"# certificate: eps = {cert.eps!r}\n")
    if not cert.converged:
        print(
            f"fixed point not reached in {cert.iterations} iterations "
            f"(residual {cert.fp_residual:.3e})",
            file=sys.stderr,
        )
        return 2
    print(f"converged in {cert.iterations} iterations; wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--preset", help="built-in device profile name")
    sp.add_argument("--config", help="INI config file ([device]/[regionN]/[run])")
    sp.add_argument("--m", type=int, help="number of grid cells (default 334)")
    sp.add_argument("--dt", type=float, help="time step (default 5e-4)")
    sp.add_argument("--threshold", type=float, help="steady-state residual threshold")
    sp.add_argument("--max-steps", dest="max_steps", type=int)
    sp.add_argument("--mode", choices=sorted(_MODES))
    sp.add_argument(
        "--polarization", type=float,
        help="override the polarization of every magnetic layer",
    )
    sp.add_argument("--bias", type=float, help="override the applied bias in volts")
    sp.add_argument("--outdir", help=f"output directory (or ${_ENV_OUTDIR})")


def _build_parser() -> _Parser:
    parser = _Parser(prog="spinet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="run one device to steady state")
    _add_common(sp)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("sweep", help="steady states over a polarization list")
    _add_common(sp)
    sp.add_argument(
        "--p-values", dest="p_values", type=lambda s: [float(v) for v in s.split(",")],
        help="comma-separated polarizations (default 0,0.33,0.66)",
    )
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("entropy-check", help="drift-free entropy monotonicity run")
    sp.add_argument("--m", type=int, help="cells (default 200 via --m 200)")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--steps", type=int, help="trajectory length (default 2000)")
    sp.add_argument("--seed", type=int, help="perturbation seed (default 0)")
    sp.add_argument("--amplitude", type=float, help="perturbation size (default 0.1)")
    sp.add_argument(
        "--tolerance", type=float,
        help="per-step uptick tolerance; 0 may fail from round-off (default 1e-10)",
    )
    sp.add_argument("--outdir")
    sp.set_defaults(func=_cmd_entropy_check, m=200)

    sp = sub.add_parser("model2-step", help="one implicit second-model time step")
    sp.add_argument("--state", help="input state CSV (x, n0, W0, W1, W2, W3)")
    sp.add_argument("--config", help="INI config with [run] keys")
    sp.add_argument("--h", type=float, help="time step (default 1e-3)")
    sp.add_argument("--tau-sf", dest="tau_sf", type=float)
    sp.add_argument("--tol", type=float, help="fixed-point tolerance (default 1e-12)")
    sp.add_argument("--max-iter", dest="max_iter", type=int)
    sp.add_argument("--damping", type=float, help="initial damping (default 0.5)")
    sp.add_argument("--bc-n0", dest="bc_n0", type=float, help="contact n0 (default 1)")
    sp.add_argument("--bc-W0", dest="bc_W0", type=float, help="contact W0 (default 1.5)")
    sp.add_argument("--outdir")
    sp.set_defaults(func=_cmd_model2_step)

    sp = sub.add_parser("presets", help="list built-in device profiles")
    sp.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _merge_config(args)
        return args.func(cfg)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
