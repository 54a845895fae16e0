"""Command-line front end.

Commands: ``steady``, ``stability-map``, ``spectrum``,
``simulate --mode tw|cavity`` and ``reproduce figN``.  Flags mirror the
configuration keys and override values read with ``--config FILE``.
Every data-producing command writes CSV files (full round-trip precision,
deterministic row order) plus a JSON sidecar holding the complete
configuration, seed, code version and trajectory/divergence counts, so
any CSV can be regenerated from its sidecar alone.

Exit codes: 0 success; 1 usage or configuration error; 2 spectra
requested at an unstable operating point; 3 ensemble quality failure
(diverged trajectories).  The only environment variable honoured is
SFGSIM_THREADS (default worker count for trajectory ensembles).
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from . import correlations as corr
from . import config as cfgmod
from . import presets as presetsmod
from . import spectra, steady, trajectories
from .errors import (
    ConfigError,
    EnsembleQualityError,
    SfgsimError,
    UnstableOperatingPointError,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2
EXIT_ENSEMBLE = 3


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped onto exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_param_flags(p):
    p.add_argument("--config", metavar="FILE", help="key=value configuration file")
    p.add_argument("--kappa", type=float)
    p.add_argument("--gamma1", type=float)
    p.add_argument("--gamma2", type=float)
    p.add_argument("--gamma3", type=float)
    p.add_argument("--eps1", type=complex)
    p.add_argument("--eps2", type=complex)
    p.add_argument("--output", metavar="PREFIX", help="output file prefix")
    p.add_argument("--threads", type=int, help="worker threads (default: SFGSIM_THREADS)")


def _add_trajectory_flags(p):
    p.add_argument("--dt", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--sample-stride", dest="sample_stride", type=int)
    p.add_argument("--n-traj", dest="n_traj", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha1-0", dest="alpha1_0", type=complex)
    p.add_argument("--alpha2-0", dest="alpha2_0", type=complex)
    p.add_argument("--alpha3-0", dest="alpha3_0", type=complex)


def build_parser():
    parser = _Parser(
        prog="sfgsim",
        description="Quantum dynamics of intracavity sum frequency generation.",
    )
    parser.add_argument("--version", action="version", version=f"sfgsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("steady", parents=[], help="classical steady state and stability")
    _add_param_flags(p)

    p = sub.add_parser("stability-map", help="stability boundary over gamma3/gamma")
    _add_param_flags(p)
    p.add_argument("--ratio-min", dest="ratio_min", type=float)
    p.add_argument("--ratio-max", dest="ratio_max", type=float)
    p.add_argument("--n-ratio", dest="n_ratio", type=int)
    p.add_argument("--eps-max", dest="eps_max", type=float)

    p = sub.add_parser("spectrum", help="output quadrature spectra at a stable point")
    _add_param_flags(p)
    p.add_argument("--omega-min", dest="omega_min", type=float)
    p.add_argument("--omega-max", dest="omega_max", type=float)
    p.add_argument("--n-omega", dest="n_omega", type=int)

    p = sub.add_parser("simulate", help="stochastic trajectory ensemble")
    _add_param_flags(p)
    _add_trajectory_flags(p)
    p.add_argument("--mode", choices=("tw", "cavity"), default=None)

    p = sub.add_parser("reproduce", help="run a named scenario preset")
    p.add_argument("figure", choices=sorted(presetsmod.PRESETS))
    _add_param_flags(p)
    p.add_argument("--n-traj", dest="n_traj", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--plot-script", action="store_true",
                   help="also emit a matplotlib script for the CSV")

    return parser


def _merge_config(args):
    """File values first, then explicit flags on top."""
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            cfg = cfgmod.parse_config(fh.read())
    else:
        cfg = cfgmod.RunConfig()
    cfg.command = args.command
    for key in vars(cfg):
        if key == "command":
            continue
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if args.command == "reproduce":
        cfg.reproduce = args.figure
    cfg.validate()
    return cfg


def _fmt(x):
    if isinstance(x, (np.floating, float)):
        return repr(float(x))
    if isinstance(x, (np.complexfloating, complex)):
        return repr(complex(x))
    return str(x)


def write_csv(path, columns, units=None):
    """CSV with a header naming columns and units, full precision."""
    units = units or {}
    names = list(columns)
    header = ",".join(
        f"{n} ({units[n]})" if n in units else n for n in names
    )
    arrays = [np.asarray(columns[n]) for n in names]
    n_rows = len(arrays[0])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for i in range(n_rows):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")


def write_sidecar(path, cfg, extra=None):
    payload = {
        "version": __version__,
        "command": cfg.command,
        "config": cfgmod.render_config(cfg),
    }
    payload.update(extra or {})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_fmt)
        fh.write("\n")


def _prefix(cfg, default):
    return cfg.output if cfg.output else default


def _cmd_steady(cfg):
    params = cfgmod.system_params(cfg)
    ss = steady.solve_steady(params)
    report = steady.stability(params, ss)
    print(f"method:   {ss.method}")
    print(f"alpha1:   {ss.alpha1}")
    print(f"alpha2:   {ss.alpha2}")
    print(f"alpha3:   {ss.alpha3}")
    print(f"residual: {ss.residual:.3e}")
    print(f"stable:   {report.stable} (margin {report.margin:.6g})")
    print("eigenvalues: " + ", ".join(f"{z:.6g}" for z in report.eigenvalues))
    columns = {
        "alpha1": [ss.alpha1], "alpha2": [ss.alpha2], "alpha3": [ss.alpha3],
        "residual": [ss.residual], "method": [ss.method],
        "stable": [report.stable], "margin": [report.margin],
    }
    if params.is_symmetric and params.eps1.imag == 0 and params.eps1.real >= 0 \
            and params.gamma1 > 0 and params.gamma3 > 0:
        cp = steady.critical_point(params)
        amp, intensity = steady.drive_ratios(params)
        print(f"critical drive: {cp.epsilon_c:.6g} (alpha_c {cp.alpha_c:.6g})")
        print(f"drive ratio: amplitude {amp:.4f}, intensity {intensity:.4f}")
        columns.update({
            "epsilon_c": [cp.epsilon_c], "alpha_c": [cp.alpha_c],
            "amplitude_ratio": [amp], "intensity_ratio": [intensity],
        })
    prefix = _prefix(cfg, "sfgsim_steady")
    write_csv(f"{prefix}.csv", columns)
    write_sidecar(f"{prefix}.json", cfg)
    return EXIT_OK


def _cmd_stability_map(cfg):
    if abs(cfg.gamma1 - cfg.gamma2) > 1e-12 * max(cfg.gamma1, cfg.gamma2):
        raise ConfigError("stability-map requires gamma1 == gamma2")
    ratios = np.linspace(cfg.ratio_min, cfg.ratio_max, cfg.n_ratio)
    closed_top = 2 * cfg.gamma1 * np.sqrt(cfg.gamma1 * cfg.ratio_max * cfg.gamma1) / cfg.kappa
    eps_hi = cfg.eps_max if cfg.eps_max is not None else 2.0 * closed_top
    rows = steady.stability_map(cfg.kappa, cfg.gamma1, ratios, (0.0, eps_hi))
    columns = {
        "gamma3_over_gamma": [r.gamma3_over_gamma for r in rows],
        "epsilon_boundary": [r.epsilon_boundary if r.bracketed else np.nan for r in rows],
        "epsilon_closed_form": [r.epsilon_closed_form for r in rows],
        "note": [r.note or "ok" for r in rows],
    }
    for r in rows:
        mark = f"{r.epsilon_boundary:.6g}" if r.bracketed else f"NOT BRACKETED ({r.note})"
        print(f"gamma3/gamma {r.gamma3_over_gamma:8.3f}: boundary {mark}  "
              f"closed form {r.epsilon_closed_form:.6g}")
    prefix = _prefix(cfg, "sfgsim_stability_map")
    write_csv(f"{prefix}.csv", columns)
    write_sidecar(f"{prefix}.json", cfg)
    return EXIT_OK


def _cmd_spectrum(cfg):
    params = cfgmod.system_params(cfg)
    result = spectra.spectrum(params, omegas=cfgmod.omega_grid(cfg))
    columns = {"omega": result.omega}
    for mode in (1, 2, 3):
        for quad in ("X", "Y"):
            columns[f"v{quad.lower()}{mode}"] = result.variance(mode, quad)
    columns["duan_simon_plus"] = spectra.spectral_duan_simon(result, +1)
    columns["duan_simon_minus"] = spectra.spectral_duan_simon(result, -1)
    columns["epr12"] = spectra.spectral_epr(result, 1, 2)
    columns["epr21"] = spectra.spectral_epr(result, 2, 1)
    units = {k: "shot-noise units" for k in columns if k != "omega"}
    units["omega"] = "rad/time"
    prefix = _prefix(cfg, "sfgsim_spectrum")
    write_csv(f"{prefix}.csv", columns, units)
    write_sidecar(f"{prefix}.json", cfg, {
        "stability_margin": steady.stability(params, result.steady_state).margin,
        "max_asymmetry": result.max_asymmetry,
    })
    print(f"wrote {prefix}.csv ({len(result.omega)} frequencies)")
    return EXIT_OK


def _cmd_simulate(cfg):
    params = cfgmod.system_params(cfg)
    tcfg = cfgmod.trajectory_config(cfg)
    init = trajectories.PhaseSpacePoint.coherent(cfg.alpha1_0, cfg.alpha2_0, cfg.alpha3_0)
    table = trajectories.run_ensemble(params, init, tcfg, threads=cfg.threads)
    axis = "zeta" if tcfg.mode == "travelling-wave" else "t"
    inten, se = table.intensities()
    columns = {
        axis: table.times,
        "n1": inten[:, 0], "n1_se": se[:, 0],
        "n2": inten[:, 1], "n2_se": se[:, 1],
        "n3": inten[:, 2], "n3_se": se[:, 2],
    }
    series = [
        ("vx3", lambda: corr.quadrature_variance(table, corr.QuadratureSpec.x(3))),
        ("fano_n1n2", lambda: corr.fano_sum(table)),
        ("duan_simon", lambda: corr.duan_simon(table)),
        ("epr12", lambda: corr.epr_product(table, 1, 2)),
        ("epr21", lambda: corr.epr_product(table, 2, 1)),
    ]
    for name, build in series:
        try:
            s = build()
        except SfgsimError as exc:
            print(f"note: {name} column omitted ({exc})")
            continue
        columns[name] = s.values
        columns[f"{name}_se"] = s.se
    prefix = _prefix(cfg, "sfgsim_simulate")
    write_csv(f"{prefix}.csv", columns)
    write_sidecar(f"{prefix}.json", cfg, {
        "n_traj": tcfg.n_traj,
        "n_diverged": table.n_diverged,
    })
    print(f"wrote {prefix}.csv ({table.config.n_samples} samples, "
          f"{table.n_diverged} diverged)")
    return EXIT_OK


_PLOT_TEMPLATE = """\
#!/usr/bin/env python3
\"\"\"Plot {name}: {description}.\"\"\"
import csv

import matplotlib.pyplot as plt

rows = list(csv.reader(open({csv_name!r})))
header = [h.split(" (")[0] for h in rows[0]]
data = {{h: [float(r[i]) for r in rows[1:]] for i, h in enumerate(header)}}

x = data[{axis!r}]
fig, ax = plt.subplots()
for name in header[1:]:
    if name.endswith("_se"):
        continue
    ax.plot(x, data[name], label=name)
ax.set_xlabel({axis_label!r})
ax.legend()
fig.tight_layout()
fig.savefig({png_name!r}, dpi=160)
print("wrote", {png_name!r})
"""


def _cmd_reproduce(cfg, plot_script=False):
    preset = presetsmod.PRESETS[cfg.reproduce]
    result = preset.run(n_traj=cfg.n_traj, seed=cfg.seed, threads=cfg.threads)
    prefix = _prefix(cfg, f"sfgsim_{preset.name}")
    write_csv(f"{prefix}.csv", result.columns, result.units)
    write_sidecar(f"{prefix}.json", cfg, {
        "preset": preset.name,
        "description": preset.description,
        "parameters": preset.parameters,
        "metadata": result.metadata,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                   for c in result.checks],
    })
    print(f"{preset.name}: {preset.description}")
    print(f"wrote {prefix}.csv")
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"  [{status}] {c.name}: {c.detail}")
    if plot_script:
        script = _PLOT_TEMPLATE.format(
            name=preset.name, description=preset.description,
            csv_name=f"{prefix}.csv", axis=result.axis_name,
            axis_label=f"{result.axis_name} ({result.axis_unit})",
            png_name=f"{prefix}.png",
        )
        with open(f"{prefix}_plot.py", "w", encoding="utf-8") as fh:
            fh.write(script)
        print(f"wrote {prefix}_plot.py")
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _merge_config(args)
        if cfg.command == "steady":
            return _cmd_steady(cfg)
        if cfg.command == "stability-map":
            return _cmd_stability_map(cfg)
        if cfg.command == "spectrum":
            return _cmd_spectrum(cfg)
        if cfg.command == "simulate":
            return _cmd_simulate(cfg)
        if cfg.command == "reproduce":
            return _cmd_reproduce(cfg, plot_script=getattr(args, "plot_script", False))
        raise ConfigError(f"unhandled command {cfg.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnstableOperatingPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except EnsembleQualityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENSEMBLE


if __name__ == "__main__":
    sys.exit(main())
