"""Command-line front end.

Data goes to files or standard output; diagnostics go to standard error.
Exit codes: 0 success, 2 configuration, 3 instability, 4 numeric failure,
5 output I/O.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .coefficients import coefficients, steady_displacement
from .config import ResolvedConfig, resolve_config
from .core import Scenario, derive
from .correlations import covariance_report, sweep_c1
from .dynamics import BASIS, build_dynamics, stability
from .errors import ConfigError, GravProbeError
from .output import RunManifest, gnuplot_script, render_csv, render_json, write_text
from .spectra import FrequencyGrid, find_peaks, scan

log = logging.getLogger("gravprobe")

THREADS_ENV = "GRAVPROBE_THREADS"
SIGMA_TOT_NOTE = "entrywise 1-norm of the x-cavity/y-cavity block of the optical covariance (vacuum = 1/2)"


def _workers(args) -> int:
    raw = args.threads if args.threads is not None else os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"thread count must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


def _scenarios(text: str, allow_both: bool = True):
    if text == "both" and allow_both:
        return [Scenario.CLASSICAL, Scenario.QUANTUM_ALPHA]
    if text == "all" and allow_both:
        return list(Scenario)
    try:
        return [Scenario.parse(text)]
    except ValueError:
        raise ConfigError(f"unknown scenario {text!r}; use quantum, beta, classical or both") from None


def _manifest(rc: ResolvedConfig, sub: str, **extra) -> RunManifest:
    return RunManifest(
        fingerprint=rc.fingerprint,
        tool_version=__version__,
        subcommand=sub,
        source=rc.source,
        defaults_used=rc.defaults_used,
        extra=extra,
    )


def _resolve(args) -> ResolvedConfig:
    if args.preset is None and args.config is None:
        raise ConfigError("give --preset and/or --config")
    return resolve_config(preset=args.preset, config_path=args.config, overrides=args.set or ())


def cmd_validate(args, rc):
    der = derive(rc.params)
    payload = {
        "valid": True,
        "parameters": rc.params.as_dict(),
        "derived": {
            "d": der.d,
            "chi": der.chi,
            "drive": der.drive,
            "power": der.power,
            "omega_0": der.omega_0,
            "detuning": der.detuning,
        },
        "farfield_ok": rc.params.geometry.farfield_ok(),
        "run": rc.run,
    }
    return render_json(payload, _manifest(rc, "validate"))


def cmd_coeffs(args, rc):
    out = {}
    for sc in Scenario:
        entry = {"farfield": coefficients(rc.params, sc).as_dict()}
        if args.exact:
            entry["exact"] = coefficients(rc.params, sc, exact=True).as_dict()
        x_bar, y_bar = steady_displacement(rc.params, sc)
        entry["steady_displacement"] = {"x2_bar": x_bar, "y2_bar": y_bar}
        out[sc.value] = entry
    return render_json({"coefficients": out}, _manifest(rc, "coeffs", units="N (c0), N/m (c1, c2)"))


def cmd_dynamics(args, rc):
    out = {}
    for sc in _scenarios(args.scenario):
        cf = coefficients(rc.params, sc, exact=args.exact)
        dyn = build_dynamics(rc.params, cf)
        ev = np.linalg.eigvals(dyn.drift)
        order = np.lexsort((ev.imag, ev.real))
        ev = ev[order]
        st = stability(dyn)
        out[sc.value] = {
            "drift": dyn.drift,
            "diffusion": dyn.diffusion,
            "eigenvalues_real": ev.real,
            "eigenvalues_imag": ev.imag,
            "stable": st.stable,
            "max_real_part": st.max_real_part,
            "x_zpf": dyn.x_zpf,
            "optomechanical_rate": dyn.coupling,
            "mean_photon_number": {a: m.n_photon for a, m in dyn.mean.items()},
            "coefficients": cf.as_dict(),
        }
    return render_json(
        {"basis": list(BASIS), "dynamics": out},
        _manifest(rc, "dynamics", units="rad/s; positions in units of sqrt(2) x_zpf, vacuum variance 1/2"),
    )


def _grid(args, rc):
    text = args.grid or rc.run.get("grid")
    if text is None:
        f = rc.params.mech_x.omega / (2 * math.pi)
        text = f"{0.5 * f},{1.5 * f},1000,lin"
        log.info("no grid given; using %s Hz", text)
    return FrequencyGrid.parse(text, unit_hz=True), text


def cmd_dns(args, rc):
    grid, grid_desc = _grid(args, rc)
    scens = _scenarios(args.scenario)
    workers = _workers(args)
    spectra = [scan(rc.params, sc, grid, workers=workers, coeffs=coefficients(rc.params, sc, exact=args.exact)) for sc in scens]
    f_hz = spectra[0].frequencies / (2 * math.pi)
    names = [sp.scenario.value for sp in spectra]
    convention = "single-sided PSD in m^2/Hz = 2 x two-sided symmetrised spectrum; frequency column in Hz"
    peaks = {}
    for sp in spectra:
        ps = find_peaks(sp, prominence_rel=args.prominence)
        peaks[sp.scenario.value] = [
            {"center_hz": p.center / (2 * math.pi), "height": 2 * p.height, "width_hz": p.width / (2 * math.pi)}
            for p in ps.peaks
        ]
        log.info("%s: %d peak(s) at %s Hz", sp.scenario.value, len(ps), [round(p["center_hz"], 3) for p in peaks[sp.scenario.value]])
    manifest = _manifest(rc, "dns", grid=grid_desc, psd_convention=convention)
    if args.format == "json":
        payload = {
            "frequency_hz": f_hz,
            "psd": {sp.scenario.value: 2.0 * sp.values for sp in spectra},
            "peaks": peaks,
        }
        text = render_json(payload, manifest)
    else:
        text = render_csv(
            ["frequency_hz"] + [f"S_{n}" for n in names],
            [f_hz] + [2.0 * sp.values for sp in spectra],
            manifest,
        )
    if args.plotscript:
        if args.out in (None, "-") or args.format != "csv":
            raise ConfigError("--plotscript needs --format csv and an --out file")
        script = gnuplot_script(args.out, names, title="displacement noise spectrum")
        write_text(script, str(Path(args.out).with_suffix(".gp")))
    return text


def _control(args, rc):
    text = args.control_range or rc.run.get("control_range")
    if text is None:
        raise ConfigError("no control range: pass --control-range a,b,n or set run.control_range")
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"control range must be 'a,b,n', got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad control range {text!r}: {exc}") from None
    if n < 2 or not a < b:
        raise ConfigError("control range needs a < b and n >= 2")
    return np.linspace(a, b, n), text


def cmd_sweep(args, rc):
    control, text = _control(args, rc)
    sc = _scenarios(args.scenario, allow_both=False)[0]
    base = "2" if args.bits else "e"
    res = sweep_c1(rc.params, control, sc, workers=_workers(args), base=base)
    unit = "bits" if args.bits else "nats"
    manifest = _manifest(
        rc, "sweep", scenario=sc.value, control_range=text, discord_unit=unit, sigma_tot_definition=SIGMA_TOT_NOTE
    )
    if args.format == "json":
        payload = {
            "C1x": res.control,
            "sigma_tot": res.sigma_tot,
            "discord_xy": res.discord,
            "discord_yx": res.discord_yx,
            "stable": [bool(s) for s in res.stability],
        }
        return render_json(payload, manifest)
    return render_csv(
        ["C1x", "sigma_tot", "discord_xy", "discord_yx", "stable"],
        [res.control, res.sigma_tot, res.discord, res.discord_yx, res.stability],
        manifest,
        notes=["C1x in N/m; discord_xy measures the y cavity, discord_yx the x cavity"],
    )


def cmd_covariance(args, rc):
    base = "2" if args.bits else "e"
    out = {}
    for sc in _scenarios(args.scenario):
        rep = covariance_report(rc.params, sc, coeffs=coefficients(rc.params, sc, exact=args.exact), base=base)
        out[sc.value] = {
            "sigma_full": rep.sigma_full,
            "sigma_optical": rep.sigma_optical,
            "sigma_tot": rep.sigma_tot,
            "sigma_offdiag_all": rep.sigma_offdiag_all,
            "discord_xy": rep.discord,
            "discord_yx": rep.discord_yx,
            "stable": rep.stable,
            "lyapunov_residual": rep.residual,
            "min_symplectic_eigenvalue": rep.min_symplectic_eigenvalue,
        }
    manifest = _manifest(
        rc,
        "covariance",
        basis=" ".join(BASIS),
        discord_unit="bits" if args.bits else "nats",
        sigma_tot_definition=SIGMA_TOT_NOTE,
    )
    return render_json({"covariance": out}, manifest)


COMMANDS = {
    "validate": (cmd_validate, "check and echo a resolved configuration"),
    "coeffs": (cmd_coeffs, "gravity force coefficients for every scenario"),
    "dynamics": (cmd_dynamics, "drift/diffusion matrices and drift eigenvalues"),
    "dns": (cmd_dns, "displacement noise spectrum scan"),
    "sweep": (cmd_sweep, "optical correlations against the linear coefficient C1,x"),
    "covariance": (cmd_covariance, "steady-state covariance, sigma_tot and discord"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gravprobe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--preset", help="fig3, fig4 or a TOML file")
    common.add_argument("--config", help="TOML file overriding the preset")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one key (repeatable)")
    common.add_argument("--out", help="output file (default: standard output)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--threads", help=f"worker threads (default: ${THREADS_ENV} or 1)")
    common.add_argument("--exact", action="store_true", help="use exact instead of far-field coefficients")
    verb = common.add_mutually_exclusive_group()
    verb.add_argument("-q", "--quiet", action="store_true")
    verb.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name in ("dynamics", "dns", "covariance"):
            p.add_argument("--scenario", default="both" if name == "dns" else "all")
        if name == "sweep":
            p.add_argument("--scenario", default="quantum")
            p.add_argument("--control-range", help="C1,x values a,b,n in N/m")
        if name in ("sweep", "covariance"):
            p.add_argument("--bits", action="store_true", help="report discord in bits")
        if name == "dns":
            p.add_argument("--grid", help="min,max,n[,lin|log] in Hz")
            p.add_argument("--prominence", type=float, default=1e-3, help="relative peak prominence")
            p.add_argument("--plotscript", action="store_true", help="write a gnuplot script next to the CSV")
    return parser


def _setup_logging(level) -> None:
    root = logging.getLogger("gravprobe")
    for h in list(root.handlers):
        root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("gravprobe: %(levelname)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO)
    if args.format is None:
        args.format = "csv" if args.command in ("dns", "sweep") else "json"
    if args.format == "csv" and args.command not in ("dns", "sweep"):
        log.error("%s only supports --format json", args.command)
        return ConfigError.exit_code
    func = COMMANDS[args.command][0]
    start = time.perf_counter()
    try:
        rc = _resolve(args)
        text = func(args, rc)
        write_text(text, args.out)
    except GravProbeError as exc:
        log.error("%s", exc)
        return exc.exit_code
    log.info("%s done in %.3f s (fingerprint %s)", args.command, time.perf_counter() - start, rc.fingerprint[:16])
    return 0


if __name__ == "__main__":
    sys.exit(main())
