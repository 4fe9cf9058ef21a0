"""Command-line front end.

One command is one batch run: a structured config file (INI sections,
flat keys) fully validated before any computation, optional ``--set``
overrides, and machine-readable outputs written to the target
directory: a CSV with the computed profiles or tables, a JSON report
validated against the schema shipped with the package, and a generated
plot script that renders the CSV without importing this package.

Exit codes: 0 on success, 2 for configuration or validation problems,
3 for numerical failures.  Reports are byte-identical across reruns
with the same config and seed; wall-clock timings are only included on
request since they would break that contract.
"""

from __future__ import annotations

import argparse
import configparser
import importlib.resources
import json
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .bulk import LocalFreeEnergy, bulk_phases, find_beta_c, find_beta_c_hessian
from .convexity import eval_joint_path, eval_path
from .errors import NumericalError, ValidationError
from .functionals import (
    DoubleWell,
    free_energy_1c,
    literal_tail_defect,
)
from .grids import Grid, MonotoneProfile
from .kernels import (
    box_kernel,
    bump_kernel,
    load_kernel_csv,
    triangle_kernel,
    truncated_gaussian_kernel,
)
from .multidim import Grid2D, Profile2D, free_energy_2d, solve_front_2d
from .rearrange import monotone_rearrange
from .solvers import SolveConfig, solve_front_1c, solve_front_2c
from .transport import displacement_interpolate

_SCHEMA = json.loads(
    importlib.resources.files("minfront").joinpath("report_schema.json").read_text()
)

_ALLOWED_KEYS = {
    "grid": {"x_min", "x_max", "n"},
    "grid2d": {"p_cells", "period"},
    "kernel": {"shape", "range", "mass", "sigma", "csv"},
    "well": {"a", "b", "amplitude"},
    "binary": {"beta", "lam"},
    "solver": {"damping", "max_iter", "residual_tol", "pinning", "clamp"},
    "path": {
        "kind",
        "term",
        "k_points",
        "m_points",
        "joint",
        "p0_kind",
        "p0_center",
        "p0_width",
        "p1_kind",
        "p1_center",
        "p1_width",
        "p0_csv",
        "p1_csv",
    },
    "phase_diagram": {"beta_min", "beta_max", "count", "lam"},
    "rearrange": {"input_csv", "a", "b"},
    "run": {"seed", "kappa", "outdir", "prefix", "component"},
}


class RunConfig:
    """Validated key-value configuration with per-section access."""

    def __init__(self, sections):
        self.sections = sections

    @classmethod
    def load(cls, path, overrides=()):
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ValidationError(f"config file {path} not found or unreadable")
        sections = {s: dict(parser.items(s)) for s in parser.sections()}
        for item in overrides:
            if "=" not in item or "." not in item.split("=", 1)[0]:
                raise ValidationError(
                    f"override {item!r} must look like section.key=value"
                )
            target, value = item.split("=", 1)
            section, key = target.split(".", 1)
            sections.setdefault(section, {})[key.strip()] = value.strip()
        for section, keys in sections.items():
            if section not in _ALLOWED_KEYS:
                raise ValidationError(f"unknown config section [{section}]")
            unknown = set(keys) - _ALLOWED_KEYS[section]
            if unknown:
                raise ValidationError(
                    f"unknown keys in [{section}]: {', '.join(sorted(unknown))}"
                )
        return cls(sections)

    def get(self, section, key, cast=str, default=None, required=False):
        try:
            raw = self.sections[section][key]
        except KeyError:
            if required:
                raise ValidationError(f"missing config key [{section}] {key}")
            return default
        try:
            if cast is bool:
                low = raw.strip().lower()
                if low in ("1", "true", "yes", "on"):
                    return True
                if low in ("0", "false", "no", "off"):
                    return False
                raise ValueError(raw)
            return cast(raw)
        except ValueError:
            raise ValidationError(
                f"config key [{section}] {key} = {raw!r} is not a valid "
                f"{cast.__name__}"
            )

    def echo(self):
        return {s: dict(kv) for s, kv in self.sections.items()}


def _grid(cfg) -> Grid:
    return Grid(
        cfg.get("grid", "x_min", float, required=True),
        cfg.get("grid", "x_max", float, required=True),
        cfg.get("grid", "n", int, required=True),
    )


def _kernel(cfg):
    shape = cfg.get("kernel", "shape", str, default="box")
    rng = cfg.get("kernel", "range", float, default=1.0)
    mass = cfg.get("kernel", "mass", float, default=1.0)
    if shape == "box":
        return box_kernel(rng, mass)
    if shape == "triangle":
        return triangle_kernel(rng, mass)
    if shape == "truncated_gaussian":
        return truncated_gaussian_kernel(
            rng, mass, cfg.get("kernel", "sigma", float)
        )
    if shape == "bump":
        return bump_kernel(rng, mass)
    if shape == "tabulated":
        path = cfg.get("kernel", "csv", str, required=True)
        return load_kernel_csv(path)
    raise ValidationError(f"unknown kernel shape {shape!r}")


def _well(cfg) -> DoubleWell:
    return DoubleWell(
        cfg.get("well", "a", float, default=-1.0),
        cfg.get("well", "b", float, default=1.0),
        cfg.get("well", "amplitude", float, default=0.25),
    )


def _solve_cfg(cfg, default_pinning) -> SolveConfig:
    return SolveConfig(
        damping=cfg.get("solver", "damping", float, default=0.5),
        max_iter=cfg.get("solver", "max_iter", int, default=20000),
        residual_tol=cfg.get("solver", "residual_tol", float, default=1e-10),
        pinning=cfg.get("solver", "pinning", str, default=default_pinning),
        clamp=cfg.get("solver", "clamp", bool, default=True),
    )


def _out_paths(cfg, command):
    outdir = Path(cfg.get("run", "outdir", str, default="."))
    prefix = cfg.get("run", "prefix", str, default=command.replace("-", "_"))
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir, prefix


def _fmt(value) -> str:
    return format(float(value), ".17g")


def _write_csv(path, header, columns):
    rows = np.column_stack(columns)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_plot_script(path, csv_name, ylabel):
    text = f"""#!/usr/bin/env python3
\"\"\"Render {csv_name}; generated alongside the data, no package needed.\"\"\"
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
with open(here / {csv_name!r}, newline="") as fh:
    reader = csv.reader(fh)
    header = next(reader)
    data = list(zip(*[[float(v) for v in row] for row in reader]))

fig, ax = plt.subplots(figsize=(7, 4))
for name, ys in zip(header[1:], data[1:]):
    ax.plot(data[0], ys, label=name)
ax.set_xlabel(header[0])
ax.set_ylabel({ylabel!r})
ax.legend()
fig.tight_layout()
fig.savefig(here / ({csv_name!r}.rsplit(".", 1)[0] + ".png"), dpi=150)
"""
    path.write_text(text, encoding="utf-8")


def _write_report(path, command, cfg, seed, outputs, files, timings=None):
    report = {
        "artifact_version": __version__,
        "command": command,
        "config": cfg.echo(),
        "seed": seed,
        "outputs": outputs,
        "files": {k: str(v) for k, v in files.items()},
        "timings": timings,
    }
    jsonschema.validate(report, _SCHEMA)
    path.write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _decay_summary(decay):
    if not decay:
        return None
    return {
        f"component{ci}_{side}": {
            "rate": fit.decay_rate,
            "r_squared": fit.r_squared,
            "points": fit.n_points,
        }
        for (ci, side), fit in sorted(decay.items())
    }


def _path_profile(cfg, which, grid, a, b, rng):
    csv_key = f"{which}_csv"
    if cfg.get("path", csv_key, str) is not None:
        data = np.loadtxt(cfg.get("path", csv_key, str), delimiter=",", skiprows=1)
        return MonotoneProfile(grid, np.interp(grid.x, data[:, 0], data[:, 1]), a, b)
    kind = cfg.get("path", f"{which}_kind", str, default="tanh")
    center = cfg.get("path", f"{which}_center", float, default=0.0)
    width = cfg.get("path", f"{which}_width", float, default=0.5)
    if kind == "step":
        values = np.where(grid.x >= center, b, a).astype(float)
    elif kind == "ramp":
        u = np.clip((grid.x - center) / width + 0.5, 0.0, 1.0)
        values = a + (b - a) * u
    elif kind == "tanh":
        u = 0.5 * (1.0 + np.tanh((grid.x - center) / width))
        u = (u - u[0]) / (u[-1] - u[0])
        values = a + (b - a) * np.maximum.accumulate(np.clip(u, 0.0, 1.0))
    else:
        raise ValidationError(f"unknown path profile kind {kind!r}")
    del rng
    return MonotoneProfile(grid, values, a, b)


# ----------------------------------------------------------------------
# commands


def cmd_solve_front(cfg, seed, timings):
    grid = _grid(cfg)
    kernel = _kernel(cfg)
    well = _well(cfg)
    kappa = cfg.get("run", "kappa", float, default=0.5)
    sol = solve_front_1c(
        well, kernel, grid, cfg=_solve_cfg(cfg, "midpoint_at_zero"), kappa=kappa
    )
    outdir, prefix = _out_paths(cfg, "solve-front")
    csv_path = outdir / f"{prefix}_profile.csv"
    _write_csv(csv_path, ["x", "m"], [grid.x, sol.profile.values])
    plot_path = outdir / f"{prefix}_plot.py"
    _write_plot_script(plot_path, csv_path.name, "order parameter")
    breakdown = free_energy_1c(sol.profile, well, kernel)
    outputs = {
        "residual": sol.residual,
        "iterations": sol.iterations,
        "energy": sol.energy,
        "potential_term": breakdown.potential_term,
        "interaction_term": breakdown.interaction_term,
        "decay": _decay_summary(sol.decay),
    }
    report_path = outdir / f"{prefix}_report.json"
    _write_report(
        report_path,
        "solve-front",
        cfg,
        seed,
        outputs,
        {"profile_csv": csv_path.name, "plot_script": plot_path.name},
        timings,
    )
    return 0


def cmd_solve_binary(cfg, seed, timings):
    grid = _grid(cfg)
    kernel = _kernel(cfg)
    beta = cfg.get("binary", "beta", float, required=True)
    lam = cfg.get("binary", "lam", float, default=0.0)
    bulk = bulk_phases(LocalFreeEnergy(beta, lam, lam, kernel.total_mass))
    from .errors import SubcriticalBeta

    if bulk.symmetric:
        raise SubcriticalBeta(
            f"beta = {beta:g} is subcritical for lam = {lam:g}; no front exists"
        )
    sol = solve_front_2c(
        beta, lam, kernel, grid, cfg=_solve_cfg(cfg, "crossing_at_zero"), bulk=bulk
    )
    outdir, prefix = _out_paths(cfg, "solve-binary")
    csv_path = outdir / f"{prefix}_profile.csv"
    _write_csv(
        csv_path,
        ["x", "m", "n"],
        [grid.x, sol.profiles[0].values, sol.profiles[1].values],
    )
    plot_path = outdir / f"{prefix}_plot.py"
    _write_plot_script(plot_path, csv_path.name, "species density")
    outputs = {
        "residual": sol.residual,
        "iterations": sol.iterations,
        "energy": sol.energy,
        "mu": sol.mu,
        "rho_minus": bulk.rho_minus,
        "rho_plus": bulk.rho_plus,
        "literal_tail_defect": literal_tail_defect(bulk),
        "decay": _decay_summary(sol.decay),
    }
    report_path = outdir / f"{prefix}_report.json"
    _write_report(
        report_path,
        "solve-binary",
        cfg,
        seed,
        outputs,
        {"profile_csv": csv_path.name, "plot_script": plot_path.name},
        timings,
    )
    return 0


def cmd_interpolate(cfg, seed, timings):
    grid = _grid(cfg)
    well = _well(cfg)
    rng = np.random.default_rng(seed)
    p0 = _path_profile(cfg, "p0", grid, well.a, well.b, rng)
    p1 = _path_profile(cfg, "p1", grid, well.a, well.b, rng)
    k_points = cfg.get("path", "k_points", int, default=5)
    m_points = cfg.get("path", "m_points", int, default=2048)
    lambdas = np.linspace(0.0, 1.0, k_points)
    path = displacement_interpolate(p0, p1, lambdas, m_points)
    outdir, prefix = _out_paths(cfg, "interpolate")
    csv_path = outdir / f"{prefix}_profiles.csv"
    header = ["x"] + [f"lambda_{lv:.4f}" for lv in lambdas]
    _write_csv(csv_path, header, [grid.x] + [p.values for p in path.profiles])
    plot_path = outdir / f"{prefix}_plot.py"
    _write_plot_script(plot_path, csv_path.name, "order parameter")
    report_path = outdir / f"{prefix}_report.json"
    _write_report(
        report_path,
        "interpolate",
        cfg,
        seed,
        {"k_points": k_points, "m_points": m_points},
        {"profiles_csv": csv_path.name, "plot_script": plot_path.name},
        timings,
    )
    return 0


def cmd_check_convexity(cfg, seed, timings):
    grid = _grid(cfg)
    kernel = _kernel(cfg)
    k_points = cfg.get("path", "k_points", int, default=21)
    m_points = cfg.get("path", "m_points", int, default=1024)
    rng = np.random.default_rng(seed)
    joint = cfg.get("path", "joint", bool, default=False)
    if joint:
        beta = cfg.get("binary", "beta", float, required=True)
        lam = cfg.get("binary", "lam", float, default=0.0)
        bulk = bulk_phases(LocalFreeEnergy(beta, lam, lam, kernel.total_mass))
        if bulk.symmetric:
            raise ValidationError("joint path needs a supercritical beta")
        m0 = _path_profile(cfg, "p0", grid, bulk.rho_minus, bulk.rho_plus, rng)
        n0 = _path_profile(cfg, "p0", grid, bulk.rho_plus, bulk.rho_minus, rng)
        m1 = _path_profile(cfg, "p1", grid, bulk.rho_minus, bulk.rho_plus, rng)
        n1 = _path_profile(cfg, "p1", grid, bulk.rho_plus, bulk.rho_minus, rng)
        report = eval_joint_path(
            (m0, n0), (m1, n1), beta, lam, kernel, k_points, m_points, bulk
        )
    else:
        well = _well(cfg)
        p0 = _path_profile(cfg, "p0", grid, well.a, well.b, rng)
        p1 = _path_profile(cfg, "p1", grid, well.a, well.b, rng)
        report = eval_path(
            cfg.get("path", "term", str, default="total"),
            p0,
            p1,
            path_kind=cfg.get("path", "kind", str, default="displacement"),
            k_points=k_points,
            well=well,
            kernel=kernel,
            kappa=cfg.get("run", "kappa", float, default=0.5),
            m_points=m_points,
        )
    outdir, prefix = _out_paths(cfg, "check-convexity")
    csv_path = outdir / f"{prefix}_path.csv"
    _write_csv(csv_path, ["lambda", "value"], [report.lambdas, report.values])
    plot_path = outdir / f"{prefix}_plot.py"
    _write_plot_script(plot_path, csv_path.name, "energy")
    outputs = {
        "verdict": report.verdict,
        "min_second_difference": report.min_second_difference,
        "max_affinity_defect": report.max_affinity_defect,
    }
    report_path = outdir / f"{prefix}_report.json"
    _write_report(
        report_path,
        "check-convexity",
        cfg,
        seed,
        outputs,
        {"path_csv": csv_path.name, "plot_script": plot_path.name},
        timings,
    )
    return 0


def cmd_phase_diagram(cfg, seed, timings):
    kernel = _kernel(cfg)
    lam = cfg.get("phase_diagram", "lam", float, default=0.0)
    beta_min = cfg.get("phase_diagram", "beta_min", float, required=True)
    beta_max = cfg.get("phase_diagram", "beta_max", float, required=True)
    count = cfg.get("phase_diagram", "count", int, default=25)
    if not beta_max > beta_min > 0:
        raise ValidationError("need 0 < beta_min < beta_max")
    betas = np.linspace(beta_min, beta_max, count)
    rows = {"beta": [], "rho_minus": [], "rho_plus": [], "g": [], "c_tail": []}
    for beta in betas:
        bp = bulk_phases(LocalFreeEnergy(beta, lam, lam, kernel.total_mass))
        rows["beta"].append(beta)
        rows["rho_minus"].append(bp.rho_minus)
        rows["rho_plus"].append(bp.rho_plus)
        rows["g"].append(bp.g)
        rows["c_tail"].append(bp.c_tail)
    beta_c = find_beta_c(
        lam, kernel.total_mass, beta_range=(beta_min, beta_max)
    )
    outdir, prefix = _out_paths(cfg, "phase-diagram")
    csv_path = outdir / f"{prefix}_table.csv"
    _write_csv(
        csv_path,
        ["beta", "rho_minus", "rho_plus", "g", "c_tail"],
        [rows[k] for k in ("beta", "rho_minus", "rho_plus", "g", "c_tail")],
    )
    plot_path = outdir / f"{prefix}_plot.py"
    _write_plot_script(plot_path, csv_path.name, "bulk densities")
    outputs = {
        "beta_c": None if np.isnan(beta_c) else beta_c,
        "beta_c_hessian": find_beta_c_hessian(lam, kernel.total_mass),
    }
    report_path = outdir / f"{prefix}_report.json"
    _write_report(
        report_path,
        "phase-diagram",
        cfg,
        seed,
        outputs,
        {"table_csv": csv_path.name, "plot_script": plot_path.name},
        timings,
    )
    return 0


def cmd_surface_tension(cfg, seed, timings):
    component = cfg.get("run", "component", str, default="one")
    grid = _grid(cfg)
    kernel = _kernel(cfg)
    outdir, prefix = _out_paths(cfg, "surface-tension")
    if component == "one":
        well = _well(cfg)
        kappa = cfg.get("run", "kappa", float, default=0.5)
        sol = solve_front_1c(
            well, kernel, grid, cfg=_solve_cfg(cfg, "midpoint_at_zero"), kappa=kappa
        )
        breakdown = free_energy_1c(sol.profile, well, kernel)
        columns = [grid.x, sol.profile.values]
        header = ["x", "m"]
        outputs = {
            "sigma": sol.energy,
            "potential_term": breakdown.potential_term,
            "interaction_term": breakdown.interaction_term,
            "residual": sol.residual,
        }
    elif component == "two":
        beta = cfg.get("binary", "beta", float, required=True)
        lam = cfg.get("binary", "lam", float, default=0.0)
        sol = solve_front_2c(
            beta, lam, kernel, grid, cfg=_solve_cfg(cfg, "crossing_at_zero")
        )
        columns = [grid.x, sol.profiles[0].values, sol.profiles[1].values]
        header = ["x", "m", "n"]
        outputs = {"sigma": sol.energy, "residual": sol.residual}
    else:
        raise ValidationError("run.component must be 'one' or 'two'")
    csv_path = outdir / f"{prefix}_profile.csv"
    _write_csv(csv_path, header, columns)
    plot_path = outdir / f"{prefix}_plot.py"
    _write_plot_script(plot_path, csv_path.name, "order parameter")
    report_path = outdir / f"{prefix}_report.json"
    _write_report(
        report_path,
        "surface-tension",
        cfg,
        seed,
        outputs,
        {"profile_csv": csv_path.name, "plot_script": plot_path.name},
        timings,
    )
    return 0


def cmd_solve_2d(cfg, seed, timings):
    grid = _grid(cfg)
    grid2d = Grid2D(
        grid,
        cfg.get("grid2d", "p_cells", int, required=True),
        cfg.get("grid2d", "period", float, required=True),
    )
    kernel = _kernel(cfg)
    well = _well(cfg)
    out, res, iters = solve_front_2d(
        well, kernel, grid2d, cfg=_solve_cfg(cfg, "midpoint_at_zero"),
        kappa=cfg.get("run", "kappa", float, default=0.5),
    )
    energy = free_energy_2d(out, well, kernel, cfg.get("run", "kappa", float, default=0.5))
    outdir, prefix = _out_paths(cfg, "solve-2d")
    csv_path = outdir / f"{prefix}_profile.csv"
    header = ["x"] + [f"y{j}" for j in range(grid2d.p_cells)]
    _write_csv(csv_path, header, [grid.x] + [out.values[:, j] for j in range(grid2d.p_cells)])
    plot_path = outdir / f"{prefix}_plot.py"
    _write_plot_script(plot_path, csv_path.name, "order parameter")
    flatness = float(np.max(out.values.max(axis=1) - out.values.min(axis=1)))
    outputs = {
        "residual": res,
        "iterations": iters,
        "energy": energy.total,
        "flatness": flatness,
    }
    report_path = outdir / f"{prefix}_report.json"
    _write_report(
        report_path,
        "solve-2d",
        cfg,
        seed,
        outputs,
        {"profile_csv": csv_path.name, "plot_script": plot_path.name},
        timings,
    )
    return 0


def cmd_rearrange(cfg, seed, timings):
    grid = _grid(cfg)
    src = cfg.get("rearrange", "input_csv", str, required=True)
    data = np.loadtxt(src, delimiter=",", skiprows=1)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValidationError(f"{src}: expected columns x,m")
    values = np.interp(grid.x, data[:, 0], data[:, 1])
    a = cfg.get("rearrange", "a", float, default=float(values[0]))
    b = cfg.get("rearrange", "b", float, default=float(values[-1]))
    profile = monotone_rearrange(values, grid, a, b)
    outdir, prefix = _out_paths(cfg, "rearrange")
    csv_path = outdir / f"{prefix}_profile.csv"
    _write_csv(csv_path, ["x", "m"], [grid.x, profile.values])
    plot_path = outdir / f"{prefix}_plot.py"
    _write_plot_script(plot_path, csv_path.name, "order parameter")
    report_path = outdir / f"{prefix}_report.json"
    _write_report(
        report_path,
        "rearrange",
        cfg,
        seed,
        {"a": a, "b": b},
        {"profile_csv": csv_path.name, "plot_script": plot_path.name},
        timings,
    )
    return 0


_COMMANDS = {
    "solve-front": cmd_solve_front,
    "solve-binary": cmd_solve_binary,
    "interpolate": cmd_interpolate,
    "check-convexity": cmd_check_convexity,
    "phase-diagram": cmd_phase_diagram,
    "surface-tension": cmd_surface_tension,
    "solve-2d": cmd_solve_2d,
    "rearrange": cmd_rearrange,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="minfront",
        description="Minimal fronts and surface tensions of nonlocal "
        "free-energy functionals.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("config", help="path to the run configuration file")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override a config value (repeatable)",
    )
    parser.add_argument(
        "--timings",
        action="store_true",
        help="include wall-clock timings in the report "
        "(breaks byte-identical reruns)",
    )
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = RunConfig.load(args.config, args.overrides)
        seed = cfg.get("run", "seed", int, default=0)
        timings = {"total_s": 0.0} if args.timings else None
        code = _COMMANDS[args.command](cfg, seed, timings)
        if timings is not None:
            timings["total_s"] = time.perf_counter() - started
        return code
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
