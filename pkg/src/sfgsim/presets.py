"""Named scenario presets covering every capability of the library.

Each preset binds a parameter set to a runnable scenario and an
expected-property checklist, at ensemble sizes sized for a desk machine.
``fig1``-``fig3`` analyze one travelling-wave ensemble (mean conversion
dynamics, squeezing/sub-Poissonian statistics, entanglement measures),
``fig4``-``fig6`` sweep squeezing and entanglement spectra with drive
strength, ``fig7`` probes steering asymmetry with unequal losses and
pumps, and ``fig8`` follows the above-threshold regime where the
semiclassical prediction breaks down.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from . import correlations as corr
from . import spectra, steady, trajectories
from .params import SystemParams

TW_KAPPA = 0.01
TW_ALPHA0 = 1000.0 / np.sqrt(2.0)
TW_SEED = 1234
CAVITY_SEED = 8888

# Desk-scale ensemble sizes; statistical checks account for the
# 1/sqrt(n) widening relative to larger production runs.
TW_N_TRAJ = 100_000
CAVITY_N_TRAJ = 10_000

SPECTRUM_EPS = (200.0, 400.0, 600.0)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class PresetResult:
    """Sweep data plus metadata, ready for CSV emission."""

    name: str
    axis_name: str
    axis_unit: str
    columns: dict            # name -> 1-D array, all on the shared axis
    units: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)


@dataclass(frozen=True)
class FigurePreset:
    """A bound scenario: identifier, parameters, runner and checklist."""

    name: str
    description: str
    kind: str                # "trajectory" | "spectrum"
    parameters: dict         # literal parameter table, one entry per curve
    default_n_traj: int | None

    def run(self, n_traj=None, seed=None, threads=None):
        runner = _RUNNERS[self.name]
        return runner(self, n_traj=n_traj, seed=seed, threads=threads)


def _tw_config(n_traj, seed):
    return trajectories.TrajectoryConfig(
        dt=5e-4, t_max=8.0, n_traj=n_traj, seed=seed,
        sample_stride=10, mode="travelling-wave",
    )


def travelling_wave_ensemble(n_traj=None, seed=None, threads=None):
    """The shared travelling-wave ensemble behind fig1/fig2/fig3."""
    params = SystemParams.travelling_wave(TW_KAPPA)
    init = trajectories.PhaseSpacePoint.coherent(alpha1=TW_ALPHA0, alpha2=TW_ALPHA0)
    cfg = _tw_config(n_traj or TW_N_TRAJ, TW_SEED if seed is None else seed)
    return trajectories.run_ensemble(params, init, cfg, threads=threads)


def _sig(values, se, against, below=True, factor=3.0):
    """Largest margin (in SE units) by which values beat a bound."""
    good = se > 0
    if not np.any(good):
        return -np.inf
    z = (against - values[good]) / se[good] if below else (values[good] - against) / se[good]
    return float(z.max())


def _run_fig1(preset, n_traj=None, seed=None, threads=None, table=None):
    table = table if table is not None else travelling_wave_ensemble(n_traj, seed, threads)
    inten, se = table.intensities()
    t = table.times
    cols = {
        "n1": inten[:, 0], "n1_se": se[:, 0],
        "n2": inten[:, 1], "n2_se": se[:, 1],
        "n3": inten[:, 2], "n3_se": se[:, 2],
    }

    checks = []
    # photon-exchange conservation over the early window
    early = (t <= 3.0) & (t > 0)
    for label, pick in (("n1+n3", (0, 2)), ("n2+n3", (1, 2))):
        val, vse = table.batch_statistic(
            lambda v, p=pick: np.real(v.apa[:, p[0], p[0]] + v.apa[:, p[1], p[1]]))
        dev = np.abs(val[early] - val[0]) / np.where(vse[early] > 0, vse[early], np.inf)
        checks.append(Check(
            f"conserved {label}", bool(np.max(dev) <= 3.0),
            f"max deviation {np.max(dev):.2f} SE (limit 3)",
        ))
    val, vse = table.batch_statistic(
        lambda v: np.real(v.apa[:, 0, 0] - v.apa[:, 1, 1]))
    dev = np.abs(val[early]) / np.where(vse[early] > 0, vse[early], np.inf)
    checks.append(Check(
        "conserved n1-n2", bool(np.max(dev) <= 3.0),
        f"max deviation {np.max(dev):.2f} SE (limit 3)",
    ))

    n3 = inten[:, 2]
    total0 = inten[0, 0] + inten[0, 1]
    pk = int(n3.argmax())
    peak_ok = n3[pk] >= 0.8 * total0 / 2
    tail_min = n3[pk:].min()
    decline = (n3[pk] - tail_min) / n3[pk]
    checks.append(Check(
        "near-complete conversion", bool(peak_ok),
        f"peak n3 = {n3[pk]:.3g} vs 0.8*(n1+n2)(0)/2 = {0.4 * total0:.3g}",
    ))
    checks.append(Check(
        "partial reconversion", bool(decline >= 0.10),
        f"decline from peak {100 * decline:.1f}% (need >= 10%)",
    ))

    return PresetResult(
        name=preset.name, axis_name="zeta", axis_unit="dimensionless",
        columns={"zeta": t, **cols},
        units={k: "photons" for k in cols},
        metadata={"peak_zeta": float(t[pk]), "n_diverged": table.n_diverged,
                  "n_traj": table.config.n_traj, "seed": table.config.seed},
        checks=checks,
    )


def _run_fig2(preset, n_traj=None, seed=None, threads=None, table=None):
    table = table if table is not None else travelling_wave_ensemble(n_traj, seed, threads)
    t = table.times
    vx3 = corr.quadrature_variance(table, corr.QuadratureSpec.x(3))
    fano12 = corr.fano_sum(table)
    inten, _ = table.intensities()
    pk = int(inten[:, 2].argmax())

    before = slice(1, pk)
    z_v = _sig(vx3.values[before], vx3.se[before], 1.0)
    early = (t > 0) & (t <= 2.0)
    z_f = _sig(fano12.values[early], fano12.se[early], 1.0)
    checks = [
        Check("sum-frequency quadrature squeezed", z_v > 3.0,
              f"V(X3) below 1 by {z_v:.1f} SE before peak conversion (need > 3)"),
        Check("sub-Poissonian intensity sum", z_f > 3.0,
              f"Fano below 1 by {z_f:.1f} SE at early times (need > 3)"),
    ]
    return PresetResult(
        name=preset.name, axis_name="zeta", axis_unit="dimensionless",
        columns={"zeta": t, "vx3": vx3.values, "vx3_se": vx3.se,
                 "fano_n1n2": fano12.values, "fano_n1n2_se": fano12.se},
        units={"vx3": "shot-noise units", "fano_n1n2": "dimensionless"},
        metadata={"n_diverged": table.n_diverged, "n_traj": table.config.n_traj,
                  "seed": table.config.seed},
        checks=checks,
    )


def _run_fig3(preset, n_traj=None, seed=None, threads=None, table=None):
    table = table if table is not None else travelling_wave_ensemble(n_traj, seed, threads)
    t = table.times
    ds = corr.duan_simon(table)
    epr12 = corr.epr_product(table, 1, 2)
    epr21 = corr.epr_product(table, 2, 1)

    z_ds = _sig(ds.values[1:], ds.se[1:], 4.0)
    z_epr = _sig(epr12.values[1:], epr12.se[1:], 1.0)
    checks = [
        Check("joint-quadrature entanglement", z_ds > 3.0,
              f"V(X1+X2)+V(Y1-Y2) below 4 by {z_ds:.1f} SE (need > 3)"),
        Check("inferred-variance paradox", z_epr > 3.0,
              f"EPR product below 1 by {z_epr:.1f} SE (need > 3)"),
    ]
    return PresetResult(
        name=preset.name, axis_name="zeta", axis_unit="dimensionless",
        columns={"zeta": t,
                 "duan_simon_over4": ds.values / 4.0, "duan_simon_over4_se": ds.se / 4.0,
                 "epr12": epr12.values, "epr12_se": epr12.se,
                 "epr21": epr21.values, "epr21_se": epr21.se},
        units={"duan_simon_over4": "separable boundary at 1"},
        metadata={"n_diverged": table.n_diverged, "n_traj": table.config.n_traj,
                  "seed": table.config.seed},
        checks=checks,
    )


def _sym_spectrum_family(quantity):
    """Spectral sweeps of one correlation for the three standard drives."""
    results = {}
    for eps in SPECTRUM_EPS:
        p = SystemParams.symmetric(0.01, 1.0, 10.0, eps)
        res = spectra.spectrum(p)
        if quantity == "vx3":
            results[eps] = (res.omega, res.variance(3, "X"))
        elif quantity == "duan_simon":
            results[eps] = (res.omega, spectra.spectral_duan_simon(res))
        elif quantity == "epr":
            results[eps] = (res.omega, spectra.spectral_epr(res, 1, 2))
    return results


def _family_result(preset, quantity, threshold, deepest_below):
    fam = _sym_spectrum_family(quantity)
    omega = fam[SPECTRUM_EPS[0]][0]
    cols = {"omega": omega}
    minima = {}
    for eps in SPECTRUM_EPS:
        cols[f"{quantity}_eps{int(eps)}"] = fam[eps][1]
        minima[eps] = float(fam[eps][1].min())

    checks = []
    if deepest_below is not None:
        for eps in deepest_below:
            checks.append(Check(
                f"below threshold at eps={int(eps)}",
                minima[eps] < threshold,
                f"min {minima[eps]:.4f} vs {threshold}",
            ))
    mono = minima[200.0] > minima[400.0] > minima[600.0]
    checks.append(Check(
        "deepens with drive", bool(mono),
        "minima " + " > ".join(f"{minima[e]:.4f}" for e in SPECTRUM_EPS),
    ))
    return PresetResult(
        name=preset.name, axis_name="omega", axis_unit="units of gamma1",
        columns=cols,
        metadata={"minima": {str(int(k)): v for k, v in minima.items()}},
        checks=checks,
    )


def _run_fig4(preset, **_):
    return _family_result(preset, "vx3", 1.0, SPECTRUM_EPS)


def _run_fig5(preset, **_):
    return _family_result(preset, "duan_simon", 4.0, SPECTRUM_EPS)


def _run_fig6(preset, **_):
    return _family_result(preset, "epr", 1.0, (600.0,))


def _run_fig7(preset, **_):
    p = SystemParams(0.01, 1.0, 40.0, 2.0, 400.0, 2400.0)
    res = spectra.spectrum(p)
    epr12 = spectra.spectral_epr(res, 1, 2)
    epr21 = spectra.spectral_epr(res, 2, 1)
    checks = [
        Check("mode 2 steers mode 1", bool(epr12.min() < 1.0),
              f"min EPR12 = {epr12.min():.4f} (need < 1)"),
        Check("mode 1 cannot steer mode 2", bool(epr21.min() >= 1.0),
              f"min EPR21 = {epr21.min():.4f} (need >= 1)"),
    ]
    return PresetResult(
        name=preset.name, axis_name="omega", axis_unit="units of gamma1",
        columns={"omega": res.omega, "epr12": epr12, "epr21": epr21},
        metadata={"steady_state": [res.steady_state.alpha1, res.steady_state.alpha2,
                                   res.steady_state.alpha3]},
        checks=checks,
    )


def _run_fig8(preset, n_traj=None, seed=None, threads=None):
    p = SystemParams.symmetric(0.01, 1.0, 10.0, 1000.0)
    init = trajectories.PhaseSpacePoint.vacuum()
    cfg = trajectories.TrajectoryConfig(
        dt=1e-4, t_max=14.0, n_traj=n_traj or CAVITY_N_TRAJ,
        seed=CAVITY_SEED if seed is None else seed,
        sample_stride=1000, mode="cavity",
    )
    table = trajectories.run_ensemble(p, init, cfg, threads=threads)
    t_sc, sc = trajectories.semiclassical_trajectory(p, init, cfg)
    ss = steady.solve_steady_general(p)
    fp = ss.intensities

    inten, se = table.intensities()
    sc_n = np.real(sc[:, 1::2] * sc[:, 0::2])
    last = -1
    z1 = (inten[last, 0] - fp[0]) / se[last, 0]
    z3 = (fp[2] - inten[last, 2]) / se[last, 2]
    checks = [
        Check("low-frequency mean exceeds semiclassical point", z1 > 3.0,
              f"n1 above fixed point by {z1:.1f} SE (need > 3)"),
        Check("sum-frequency mean falls below semiclassical point", z3 > 3.0,
              f"n3 below fixed point by {z3:.1f} SE (need > 3)"),
    ]
    cols = {
        "t": table.times,
        "n1": inten[:, 0], "n1_se": se[:, 0],
        "n2": inten[:, 1], "n2_se": se[:, 1],
        "n3": inten[:, 2], "n3_se": se[:, 2],
        "semiclassical_n1": sc_n[:, 0],
        "semiclassical_n2": sc_n[:, 1],
        "semiclassical_n3": sc_n[:, 2],
    }
    return PresetResult(
        name=preset.name, axis_name="t", axis_unit="1/gamma1",
        columns=cols,
        units={k: "photons" for k in cols if k != "t"},
        metadata={"fixed_point_n": list(fp), "n_diverged": table.n_diverged,
                  "n_traj": cfg.n_traj, "seed": cfg.seed},
        checks=checks,
    )


_RUNNERS = {
    "fig1": _run_fig1,
    "fig2": _run_fig2,
    "fig3": _run_fig3,
    "fig4": _run_fig4,
    "fig5": _run_fig5,
    "fig6": _run_fig6,
    "fig7": _run_fig7,
    "fig8": _run_fig8,
}

_TW_PARAMS = {"kappa": TW_KAPPA, "alpha1_0": TW_ALPHA0, "alpha2_0": TW_ALPHA0,
              "alpha3_0": 0.0}
_SYM_SPEC_PARAMS = {
    f"eps={int(e)}": {"kappa": 0.01, "gamma1": 1.0, "gamma2": 1.0, "gamma3": 10.0,
                      "eps1": e, "eps2": e}
    for e in SPECTRUM_EPS
}

PRESETS = {
    "fig1": FigurePreset(
        "fig1",
        "travelling-wave mean intensities: conversion and quantum reconversion",
        "trajectory", {"run": _TW_PARAMS}, TW_N_TRAJ,
    ),
    "fig2": FigurePreset(
        "fig2",
        "travelling-wave squeezing of X3 and Fano factor of the intensity sum",
        "trajectory", {"run": _TW_PARAMS}, TW_N_TRAJ,
    ),
    "fig3": FigurePreset(
        "fig3",
        "travelling-wave joint-quadrature and inferred-variance entanglement",
        "trajectory", {"run": _TW_PARAMS}, TW_N_TRAJ,
    ),
    "fig4": FigurePreset(
        "fig4", "output squeezing spectra of X3 versus drive strength",
        "spectrum", _SYM_SPEC_PARAMS, None,
    ),
    "fig5": FigurePreset(
        "fig5", "joint-quadrature entanglement spectra versus drive strength",
        "spectrum", _SYM_SPEC_PARAMS, None,
    ),
    "fig6": FigurePreset(
        "fig6", "inferred-variance product spectra versus drive strength",
        "spectrum", _SYM_SPEC_PARAMS, None,
    ),
    "fig7": FigurePreset(
        "fig7", "steering asymmetry with unequal losses and pumps",
        "spectrum",
        {"run": {"kappa": 0.01, "gamma1": 1.0, "gamma2": 40.0, "gamma3": 2.0,
                 "eps1": 400.0, "eps2": 2400.0}},
        None,
    ),
    "fig8": FigurePreset(
        "fig8", "above-threshold cavity dynamics versus the semiclassical prediction",
        "trajectory",
        {"run": {"kappa": 0.01, "gamma1": 1.0, "gamma2": 1.0, "gamma3": 10.0,
                 "eps1": 1000.0, "eps2": 1000.0}},
        CAVITY_N_TRAJ,
    ),
}
