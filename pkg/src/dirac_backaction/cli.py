"""Command-line front end: JSON config in, CSV + JSON sidecar + PNG out.

One config document describes one run; the `command` key selects among
spectrum | evolve | backaction | sweep | fw-check | soc-map.  Scalar physics
fields may be given as arrays, which denote sweep axes (Cartesian product,
capped by max_jobs).  Outputs are deterministic for a fixed config: floats
are printed with 17 significant digits and worker count never affects
results (jobs are ordered by config index).

Exit codes: 0 success, 2 config problem, 3 physics gate (leakage,
degeneracy, grid confinement), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import backaction as ba
from . import foldy
from . import oscillator as osc
from . import plots
from . import soc as socmod
from . import tolerances as tol
from .errors import ConfigError, NumericalError, PhysicsGateError
from .hilbert import BasisSpec

FLOAT_FORMAT = "%.16e"  # 17 significant digits, scientific notation

TRAJECTORY_COLUMNS = ("t", "expX_dimensionless", "varX", "expSigmaZ", "expPi", "leakage")
DEFAULT_MAX_JOBS = 256


# ---------------------------------------------------------------------------
# Config parsing helpers
# ---------------------------------------------------------------------------

def _check_keys(cfg: dict, required: set, optional: set, context: str) -> None:
    unknown = sorted(set(cfg) - required - optional)
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {unknown}")
    missing = sorted(required - set(cfg))
    if missing:
        raise ConfigError(f"missing keys in {context}: {missing}")


def _as_float(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _as_int(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _as_bool(value, key: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{key} must be a boolean, got {value!r}")
    return value


def _axis_floats(value, key: str) -> list[float]:
    """A scalar or an array; arrays denote sweep axes."""
    if isinstance(value, list):
        if not value:
            raise ConfigError(f"{key} must not be an empty list")
        return [_as_float(v, key) for v in value]
    return [_as_float(value, key)]


def _axis_ints(value, key: str) -> list[int]:
    if isinstance(value, list):
        if not value:
            raise ConfigError(f"{key} must not be an empty list")
        return [_as_int(v, key) for v in value]
    return [_as_int(value, key)]


def _epsilon_values(cfg: dict, context: str) -> list[float]:
    """Either an explicit `epsilon` axis or an `epsilon_geomspace` [lo, hi, count]."""
    if ("epsilon" in cfg) == ("epsilon_geomspace" in cfg):
        raise ConfigError(f"{context} needs exactly one of 'epsilon' or 'epsilon_geomspace'")
    if "epsilon" in cfg:
        values = _axis_floats(cfg["epsilon"], "epsilon")
    else:
        spec = cfg["epsilon_geomspace"]
        if not (isinstance(spec, list) and len(spec) == 3):
            raise ConfigError("epsilon_geomspace must be [low, high, count]")
        lo, hi = _as_float(spec[0], "epsilon_geomspace[0]"), _as_float(spec[1], "epsilon_geomspace[1]")
        count = _as_int(spec[2], "epsilon_geomspace[2]")
        if not (0 < lo < hi and count >= 2):
            raise ConfigError("epsilon_geomspace needs 0 < low < high and count >= 2")
        values = list(np.geomspace(lo, hi, count))
    if any(v <= 0 for v in values):
        raise ConfigError("epsilon values must be > 0")
    return values


def _validate_sampling(raw, context: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{context}.sampling must be an object")
    kind = raw.get("kind")
    if kind == "uniform":
        _check_keys(raw, {"kind", "t_max", "samples"}, set(), f"{context}.sampling")
        return {
            "kind": "uniform",
            "t_max": _as_float(raw["t_max"], "t_max"),
            "samples": _as_int(raw["samples"], "samples"),
        }
    if kind == "zitter":
        _check_keys(raw, {"kind", "t_max"}, {"points_per_fast_period"}, f"{context}.sampling")
        return {
            "kind": "zitter",
            "t_max": _as_float(raw["t_max"], "t_max"),
            "points_per_fast_period": _as_int(raw.get("points_per_fast_period", 16), "points_per_fast_period"),
        }
    if kind == "windows":
        _check_keys(
            raw,
            {"kind", "t_max"},
            {"windows", "periods_per_window", "points_per_fast_period"},
            f"{context}.sampling",
        )
        return {
            "kind": "windows",
            "t_max": _as_float(raw["t_max"], "t_max"),
            "windows": _as_int(raw.get("windows", 48), "windows"),
            "periods_per_window": _as_int(raw.get("periods_per_window", 3), "periods_per_window"),
            "points_per_fast_period": _as_int(raw.get("points_per_fast_period", 16), "points_per_fast_period"),
        }
    raise ConfigError(f"{context}.sampling.kind must be 'uniform', 'zitter' or 'windows', got {kind!r}")


def _times_for(sampling: dict, epsilon: float, n: int) -> np.ndarray:
    if sampling["kind"] == "uniform":
        return ba.uniform_times(sampling["t_max"], sampling["samples"])
    if sampling["kind"] == "zitter":
        return ba.zitter_times(epsilon, sampling["t_max"], sampling["points_per_fast_period"], n)
    return ba.window_times(
        epsilon,
        sampling["t_max"],
        n,
        sampling["windows"],
        sampling["periods_per_window"],
        sampling["points_per_fast_period"],
    )


def _apparatus(raw) -> tuple[tuple[int, float], ...]:
    if raw is None:
        return ((1, 1.0),)
    if not isinstance(raw, list) or not all(isinstance(e, list) and len(e) == 2 for e in raw):
        raise ConfigError("apparatus must be a list of [photon_number, weight] pairs")
    return tuple((_as_int(e[0], "apparatus photon number"), _as_float(e[1], "apparatus weight")) for e in raw)


def _capped_product(axes: list[tuple[str, list]], max_jobs: int) -> list[dict]:
    total = 1
    for _, values in axes:
        total *= len(values)
    if total > max_jobs:
        raise ConfigError(f"sweep would launch {total} jobs, above the max_jobs cap {max_jobs}")
    names = [name for name, _ in axes]
    return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in axes))]


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in columns) + "\n")


def write_sidecar(path: Path, command: str, config: dict, columns=None, extra=None) -> None:
    meta = {
        "command": command,
        "config": config,
        "version": __version__,
        "tolerances": tol.as_dict(),
    }
    if columns is not None:
        meta["columns"] = list(columns)
    if extra:
        meta.update(extra)
    with open(str(path) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _trajectory_rows(traj: ba.Trajectory):
    dimless = traj.exp_x_dimensionless
    for i in range(traj.times.size):
        yield {
            "t": traj.times[i],
            "expX_dimensionless": dimless[i],
            "varX": traj.var_x[i],
            "expSigmaZ": traj.exp_sigma_z[i],
            "expPi": traj.exp_pi[i],
            "leakage": traj.leakage[i],
        }


def _run_jobs(jobs, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_spectrum(cfg: dict, out: Path, workers: int) -> None:
    _check_keys(
        cfg,
        {"command"},
        {"epsilon", "epsilon_geomspace", "n_max", "fock_cutoff", "figure_levels", "coefficient_levels", "plot"},
        "spectrum config",
    )
    epsilons = _epsilon_values(cfg, "spectrum config")
    n_max = _as_int(cfg.get("n_max", 10), "n_max")
    cutoff = _as_int(cfg.get("fock_cutoff", 128), "fock_cutoff")
    figure_levels = _as_int(cfg.get("figure_levels", 5), "figure_levels")
    coeff_levels = _as_int(cfg.get("coefficient_levels", 4), "coefficient_levels")
    basis = BasisSpec(cutoff)

    def job(eps):
        def run():
            report = osc.validate_spectrum(osc.DiracParams(eps, basis), n_max)
            return [
                {
                    "epsilon": eps,
                    "n": r.n,
                    "branch": r.branch,
                    "energy_numeric": r.energy_numeric,
                    "energy_analytic": r.energy_analytic,
                    "abs_error": r.abs_error,
                    "overlap": r.overlap,
                }
                for r in report.rows
            ]
        return run

    results = _run_jobs([job(e) for e in epsilons], workers)
    validation_rows = [row for rows in results for row in rows]
    columns = ("epsilon", "n", "branch", "energy_numeric", "energy_analytic", "abs_error", "overlap")
    write_csv(out / "spectrum_validation.csv", columns, validation_rows)
    write_sidecar(out / "spectrum_validation.csv", "spectrum", cfg, columns)

    energy_rows = osc.energy_curves(epsilons, figure_levels)
    e_cols = ("epsilon", "n", "branch", "energy_over_rest")
    write_csv(out / "energies_vs_epsilon.csv", e_cols, energy_rows)
    write_sidecar(out / "energies_vs_epsilon.csv", "spectrum", cfg, e_cols)

    coeff_rows = osc.coefficient_curves(epsilons, coeff_levels)
    c_cols = ("epsilon", "n", "prob_up_component", "prob_down_component")
    write_csv(out / "coefficients_vs_epsilon.csv", c_cols, coeff_rows)
    write_sidecar(out / "coefficients_vs_epsilon.csv", "spectrum", cfg, c_cols)

    if cfg.get("plot", True):
        plots.spectrum_figure(energy_rows, out / "energies_vs_epsilon.png")
        plots.coefficients_figure(coeff_rows, out / "coefficients_vs_epsilon.png")


def _backaction_trajectory(eps, G, f, n, cutoff, apparatus, omega_b, sampling, hamiltonian):
    basis = BasisSpec(cutoff)
    cfg = ba.MeasurementConfig(
        epsilon=eps,
        n=n,
        G=G,
        f=f,
        times=_times_for(sampling, eps, n),
        basis=basis,
        apparatus=apparatus,
        omega_b=omega_b,
    )
    return cfg, ba.run_backaction(cfg, hamiltonian)


def _cmd_evolve(cfg: dict, out: Path, workers: int) -> None:
    _check_keys(
        cfg,
        {"command", "epsilon", "n", "hamiltonian", "sampling"},
        {"f", "fock_cutoff", "plot"},
        "evolve config",
    )
    del workers  # single job
    eps = _as_float(cfg["epsilon"], "epsilon")
    n = _as_int(cfg["n"], "n")
    hamiltonian = cfg["hamiltonian"]
    sampling = _validate_sampling(cfg["sampling"], "evolve")
    f = _as_float(cfg.get("f", 0.0), "f")
    cutoff = _as_int(cfg.get("fock_cutoff", 128), "fock_cutoff")
    _, traj = _backaction_trajectory(eps, 0.0, f, n, cutoff, ((1, 1.0),), 0.0, sampling, hamiltonian)
    write_csv(out / "trajectory.csv", TRAJECTORY_COLUMNS, _trajectory_rows(traj))
    write_sidecar(out / "trajectory.csv", "evolve", cfg, TRAJECTORY_COLUMNS)
    if cfg.get("plot", True):
        plots.trajectory_figure(
            traj,
            out / "trajectory.png",
            title=f"eps={eps:g}, n={n}, f={f:g}, {hamiltonian}",
            reference=ba.analytic_X_nr(traj.times, f) if hamiltonian == "nonrelativistic" else None,
        )


def _cmd_backaction(cfg: dict, out: Path, workers: int) -> None:
    _check_keys(
        cfg,
        {"command", "epsilon", "G", "f", "n", "sampling"},
        {"hamiltonian", "fock_cutoff", "apparatus", "omega_b", "max_jobs", "plot"},
        "backaction config",
    )
    axes = [
        ("epsilon", _axis_floats(cfg["epsilon"], "epsilon")),
        ("G", _axis_floats(cfg["G"], "G")),
        ("f", _axis_floats(cfg["f"], "f")),
        ("n", _axis_ints(cfg["n"], "n")),
    ]
    points = _capped_product(axes, _as_int(cfg.get("max_jobs", DEFAULT_MAX_JOBS), "max_jobs"))
    sampling = _validate_sampling(cfg["sampling"], "backaction")
    hamiltonian = cfg.get("hamiltonian", "full_DO")
    cutoff = _as_int(cfg.get("fock_cutoff", 128), "fock_cutoff")
    apparatus = _apparatus(cfg.get("apparatus"))
    omega_b = _as_float(cfg.get("omega_b", 0.0), "omega_b")

    def job(pt):
        def run():
            return _backaction_trajectory(
                pt["epsilon"], pt["G"], pt["f"], pt["n"], cutoff, apparatus, omega_b, sampling, hamiltonian
            )[1]
        return run

    trajectories = _run_jobs([job(pt) for pt in points], workers)
    index_rows = []
    for i, (pt, traj) in enumerate(zip(points, trajectories)):
        name = f"trajectory_{i:03d}.csv"
        write_csv(out / name, TRAJECTORY_COLUMNS, _trajectory_rows(traj))
        write_sidecar(out / name, "backaction", cfg, TRAJECTORY_COLUMNS, extra={"sweep_point": pt})
        index_rows.append({"index": i, "output": name, **pt})
        if cfg.get("plot", True):
            plots.trajectory_figure(
                traj,
                out / name.replace(".csv", ".png"),
                title=", ".join(f"{k}={v:g}" for k, v in pt.items()),
                reference=ba.analytic_X_nr(traj.times, pt["f"]),
            )
    idx_cols = ("index", "epsilon", "G", "f", "n", "output")
    write_csv(out / "index.csv", idx_cols, index_rows)
    write_sidecar(out / "index.csv", "backaction", cfg, idx_cols)


def _cmd_sweep(cfg: dict, out: Path, workers: int) -> None:
    _check_keys(
        cfg,
        {"command", "epsilon", "G", "n"},
        {"f", "fock_cutoff", "sampling", "max_jobs", "plot"},
        "sweep config",
    )
    axes = [
        ("epsilon", _axis_floats(cfg["epsilon"], "epsilon")),
        ("G", _axis_floats(cfg["G"], "G")),
        ("n", _axis_ints(cfg["n"], "n")),
    ]
    points = _capped_product(axes, _as_int(cfg.get("max_jobs", DEFAULT_MAX_JOBS), "max_jobs"))
    f = _as_float(cfg.get("f", 0.1), "f")
    cutoff = _as_int(cfg.get("fock_cutoff", 64), "fock_cutoff")
    sampling = (
        _validate_sampling(cfg["sampling"], "sweep")
        if "sampling" in cfg
        else {"kind": "windows", "t_max": 2 * math.pi, "windows": 48, "periods_per_window": 3, "points_per_fast_period": 16}
    )

    def job(pt):
        def run():
            mcfg, traj = _backaction_trajectory(
                pt["epsilon"], pt["G"], f, pt["n"], cutoff, ((1, 1.0),), 0.0, sampling, "full_DO"
            )
            est = ba.estimate_smearing(traj, mcfg)
            return {
                "epsilon": pt["epsilon"],
                "n": pt["n"],
                "G": pt["G"],
                "f": f,
                "delta_fitted": est.delta_fitted,
                "delta_analytic": est.delta_analytic,
                "zb_frequency_fitted": est.zb_frequency_fitted,
                "zb_frequency_exact": est.zb_frequency_exact,
                "residual": est.residual,
                "regime_flag": est.regime_flag,
            }
        return run

    rows = _run_jobs([job(pt) for pt in points], workers)
    columns = (
        "epsilon", "n", "G", "f",
        "delta_fitted", "delta_analytic",
        "zb_frequency_fitted", "zb_frequency_exact",
        "residual", "regime_flag",
    )
    write_csv(out / "smearing.csv", columns, rows)

    # scaling summary: log-log slope of the fitted smearing per (n, G) group
    slopes = {}
    for key in sorted({(r["n"], r["G"]) for r in rows}):
        grp = [r for r in rows if (r["n"], r["G"]) == key and r["delta_fitted"] > 0]
        if len(grp) >= 2:
            logs = np.log([r["epsilon"] for r in grp])
            logd = np.log([r["delta_fitted"] for r in grp])
            slope = float(np.polyfit(logs, logd, 1)[0])
            slopes[f"n={key[0]},G={key[1]:g}"] = slope
    write_sidecar(out / "smearing.csv", "sweep", cfg, columns, extra={"loglog_slopes": slopes})
    if cfg.get("plot", True):
        plots.smearing_figure(rows, out / "smearing.png")


def _cmd_fw_check(cfg: dict, out: Path, workers: int) -> None:
    _check_keys(
        cfg,
        {"command"},
        {"epsilon", "epsilon_geomspace", "fock_cutoff", "interior_fraction", "orders", "g_times_nb", "f", "plot"},
        "fw-check config",
    )
    epsilons = _epsilon_values(cfg, "fw-check config")
    cutoff = _as_int(cfg.get("fock_cutoff", 256), "fock_cutoff")
    fraction = _as_float(cfg.get("interior_fraction", tol.INTERIOR_FRACTION), "interior_fraction")
    orders = tuple(_axis_ints(cfg.get("orders", [1, 2, 3]), "orders"))
    g_nb = _as_float(cfg.get("g_times_nb", 1.0), "g_times_nb")
    f = _as_float(cfg.get("f", 1.0), "f")
    basis = BasisSpec(cutoff)

    def job(eps):
        def run():
            return foldy.residual_report_rows(
                osc.DiracParams(eps, basis), fraction, orders, g_nb, f
            )
        return run

    results = _run_jobs([job(e) for e in epsilons], workers)
    rows = [row for rows_ in results for row in rows_]
    columns = ("quantity", "epsilon", "fock_cutoff", "interior_fraction", "residual")
    write_csv(out / "fw_residuals.csv", columns, rows)
    write_sidecar(out / "fw_residuals.csv", "fw-check", cfg, columns)
    if cfg.get("plot", True):
        plots.fw_residuals_figure(rows, out / "fw_residuals.png")


def _cmd_soc_map(cfg: dict, out: Path, workers: int) -> None:
    _check_keys(
        cfg,
        {"command", "k_r", "chi", "sigma_slope", "m_a"},
        {"delta", "n_levels", "grid", "plot"},
        "soc-map config",
    )
    del workers  # single job
    params = socmod.SOCParams(
        k_r=_as_float(cfg["k_r"], "k_r"),
        chi=_as_float(cfg["chi"], "chi"),
        sigma_slope=_as_float(cfg["sigma_slope"], "sigma_slope"),
        m_a=_as_float(cfg["m_a"], "m_a"),
        delta=_as_float(cfg.get("delta", 0.0), "delta"),
    )
    n_levels = _as_int(cfg.get("n_levels", 10), "n_levels")
    grid = None
    if "grid" in cfg:
        raw = cfg["grid"]
        _check_keys(raw, {"x_min", "x_max", "points"}, set(), "soc-map grid")
        grid = socmod.SpatialGrid(
            x_min=_as_float(raw["x_min"], "x_min"),
            x_max=_as_float(raw["x_max"], "x_max"),
            points=_as_int(raw["points"], "points"),
        )

    eff = socmod.map_parameters(params)
    payload = {
        "effective_parameters": eff.as_dict(),
        "rest_energy_eff_joule": eff.rest_energy_eff,
        "reference_scales": socmod.REFERENCE_SCALES,
        "version": __version__,
    }
    with open(out / "effective_params.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    report = socmod.compare_soc_vs_do(params, grid, n_levels)
    rows = [
        {
            "branch": r.branch,
            "n": r.n,
            "energy_analytic": r.energy_analytic,
            "energy_no_kinetic": r.energy_no_kinetic,
            "energy_with_kinetic": r.energy_with_kinetic,
            "rel_error_no_kinetic": r.rel_error_no_kinetic,
            "kinetic_shift": r.kinetic_shift,
            "k_rms_over_kr": r.k_rms_over_kr,
            "verdict": r.verdict,
        }
        for r in report.rows
    ]
    columns = (
        "branch", "n", "energy_analytic", "energy_no_kinetic", "energy_with_kinetic",
        "rel_error_no_kinetic", "kinetic_shift", "k_rms_over_kr", "verdict",
    )
    write_csv(out / "soc_comparison.csv", columns, rows)
    write_sidecar(
        out / "soc_comparison.csv", "soc-map", cfg, columns,
        extra={"energy_offset_joule": report.energy_offset},
    )
    if cfg.get("plot", True):
        plots.soc_levels_figure(report, out / "soc_levels.png")


COMMANDS = {
    "spectrum": _cmd_spectrum,
    "evolve": _cmd_evolve,
    "backaction": _cmd_backaction,
    "sweep": _cmd_sweep,
    "fw-check": _cmd_fw_check,
    "soc-map": _cmd_soc_map,
}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _write_error(out: Path, kind: str, message: str) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "error.meta.json", "w", encoding="utf-8") as fh:
            json.dump({"error": kind, "message": message, "version": __version__}, fh, indent=2)
            fh.write("\n")
    except OSError:
        pass


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dirac-backaction",
        description="Dirac-oscillator measurement-backaction experiments from a JSON config.",
    )
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default=".", help="output directory (created if missing)")
    parser.add_argument("--workers", type=int, default=max(1, min(4, os.cpu_count() or 1)),
                        help="worker threads for sweep points (does not affect results)")
    parser.add_argument("--seed", type=int, default=0,
                        help="reserved; all current computations are deterministic")
    args = parser.parse_args(argv)

    out = Path(args.out)
    try:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        command = cfg.get("command")
        if command not in COMMANDS:
            raise ConfigError(f"command must be one of {sorted(COMMANDS)}, got {command!r}")
        if "plot" in cfg:
            _as_bool(cfg["plot"], "plot")
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[command](cfg, out, args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        _write_error(out, "config", str(exc))
        return 2
    except PhysicsGateError as exc:
        print(f"physics gate: {exc}", file=sys.stderr)
        _write_error(out, "physics_gate", str(exc))
        return 3
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        _write_error(out, "numerical", str(exc))
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
