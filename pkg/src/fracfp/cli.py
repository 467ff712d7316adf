"""Command line front end: run experiments, emit CSV artifacts.

Every output directory receives a ``run.meta`` JSON file echoing the full
configuration, the seed and the library version, which is enough to
reproduce the artifacts bit for bit.  Files are written to a temporary
name and renamed into place, so concurrent sweeps never observe partial
files.

Exit codes: 0 ok, 1 failed self-check, 2 bad configuration, 3 solver
failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__, fractional
from .analysis import run_convergence_study, run_stability_probe
from .assembly import (
    Indicator,
    assemble_mass,
    assemble_operator,
    basis_integrals,
    discrete_initial_data,
    hat_load_indicator,
)
from .config import (
    DESK_SCALE,
    PAPER_SCALE,
    RESONANCE_PRESET,
    RNG_NAME,
    ExperimentConfig,
    mesh_with_free_count,
)
from .linalg import SolverFailure
from .meshes import BoundaryCondition, TimeGrid
from .stepper import evolve, run

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

_BC_ENUM = {"dirichlet": BoundaryCondition.DIRICHLET, "zeroflux": BoundaryCondition.ZERO_FLUX}

# Canned experiment setups; values are flag-level settings.
PRESETS = {
    "table1": (
        "convergence",
        {"alpha": "0.25,0.5,0.75", "qh": "7,15,31,63", "init": "l2", "bc": "dirichlet",
         "drift": "linear-sin", "T": "1", "xmin": "0", "xmax": str(math.pi)},
    ),
    "table2": (
        "convergence",
        {"alpha": "0.25,0.5,0.75", "qh": "7,15,31,63", "init": "nodal", "bc": "dirichlet",
         "drift": "linear-sin", "T": "1", "xmin": "0", "xmax": str(math.pi)},
    ),
    "figure2": (
        "convergence",
        {"alpha": "0.75", "qh": "7,15,31,63", "init": "l2", "bc": "dirichlet",
         "drift": "linear-sin", "T": "1", "xmin": "0", "xmax": str(math.pi)},
    ),
    "resonance": (
        "solve",
        {"alpha": "0.75", "T": "20", "N": "4096", "gamma": "2", "qh": "65",
         "bc": "zeroflux", "drift": "double-well", "init": "delta",
         "xmin": "-4", "xmax": "4"},
    ),
}

_DEFAULTS = {
    "alpha": "0.5",
    "kappa": "1",
    "T": "1",
    "N": None,  # resolved per command/scale
    "gamma": None,
    "qh": "63",
    "qref": None,
    "bc": "dirichlet",
    "drift": "linear-sin",
    "init": "l2",
    "seed": None,
    "out": None,
    "scale": "desk",
    "xmin": "0",
    "xmax": str(math.pi),
    "stride": "1",
}


def _fmt(v):
    return f"{v:.17g}"


def _atomic_write(path, write_body):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".part-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            write_body(handle)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_meta(out_dir, payload):
    payload = dict(payload)
    payload["version"] = __version__
    payload["rng"] = RNG_NAME
    _atomic_write(
        os.path.join(out_dir, "run.meta"),
        lambda f: f.write(json.dumps(payload, indent=2, sort_keys=True) + "\n"),
    )


def _parse_config_file(path):
    settings = {}
    with open(path) as handle:
        for lineno, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown setting {key!r}")
            settings[key] = value
    return settings


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fracfp",
        description="Fractional Fokker-Planck finite element experiments",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
        ("solve", "run one experiment and dump the trajectory"),
        ("convergence", "weighted-error table against a fine reference"),
        ("stability", "norm-growth probe with random initial data"),
        ("check", "run the built-in diagnostic suite"),
    ]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--alpha", help="fractional order(s), comma separated")
        p.add_argument("--kappa", help="diffusivity (default 1)")
        p.add_argument("--T", help="final time")
        p.add_argument("--N", help="number of time steps")
        p.add_argument("--gamma", help="time-grading exponent (default 1/alpha)")
        p.add_argument("--qh", help="degrees of freedom, comma separated for sweeps")
        p.add_argument("--qref", help="reference degrees of freedom (convergence)")
        p.add_argument("--bc", choices=["dirichlet", "zeroflux"])
        p.add_argument("--drift", help="force label, e.g. linear-sin, double-well")
        p.add_argument("--init", choices=["l2", "nodal", "delta", "random"])
        p.add_argument("--seed", help="seed for random initial data")
        p.add_argument("--out", help="output directory (must exist)")
        p.add_argument("--scale", choices=["desk", "paper"])
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--config", help="key=value settings file; flags win")
        p.add_argument("--xmin", help="left end of the domain")
        p.add_argument("--xmax", help="right end of the domain")
        p.add_argument("--stride", help="time-level stride in solution.csv")
    return parser


def _resolve_settings(args):
    settings = dict(_DEFAULTS)
    if args.preset:
        command, preset = PRESETS[args.preset]
        if command != args.command:
            raise ValueError(
                f"preset {args.preset!r} belongs to the {command!r} command"
            )
        settings.update(preset)
    if args.config:
        settings.update(_parse_config_file(args.config))
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    return settings


def _floats(text):
    text = text.strip()
    if not text:
        return []
    return [float(part) for part in text.split(",")]


def _ints(text):
    return [int(part) for part in text.strip().split(",")] if text.strip() else []


def _scale_default(settings, key):
    table = PAPER_SCALE if settings["scale"] == "paper" else DESK_SCALE
    return table[key]


def _experiment_config(settings, alpha, q_h):
    return ExperimentConfig(
        alpha=alpha,
        kappa=float(settings["kappa"]),
        t_final=float(settings["T"]),
        n_steps=int(settings["N"]) if settings["N"] is not None else _scale_default(settings, "n_steps"),
        gamma=None if settings["gamma"] is None else float(settings["gamma"]),
        q_h=q_h,
        bc=settings["bc"],
        drift=settings["drift"],
        init=settings["init"],
        seed=None if settings["seed"] is None else int(settings["seed"]),
        xmin=float(settings["xmin"]),
        xmax=float(settings["xmax"]),
        scale=settings["scale"],
    )


def _require_out(settings):
    out = settings["out"]
    if not out:
        raise ValueError("--out is required for this command")
    return out


def cmd_solve(settings):
    alphas = _floats(settings["alpha"])
    qhs = _ints(settings["qh"])
    if len(alphas) != 1 or len(qhs) != 1:
        raise ValueError("solve expects a single --alpha and a single --qh")
    config = _experiment_config(settings, alphas[0], qhs[0])
    config.validate()
    out = _require_out(settings)
    stride = max(1, int(settings["stride"]))

    history, reports = run(config)
    mesh, grid = history.mesh, history.grid
    hat_ints = basis_integrals(mesh)
    mass = history.coefficients @ hat_ints

    keep = sorted(set(range(0, grid.n_steps + 1, stride)) | {grid.n_steps})

    def body_solution(f):
        f.write("t,x,u\n")
        x = mesh.free_nodes
        for n in keep:
            t = grid.levels[n]
            u = history[n]
            for p in range(x.size):
                f.write(f"{_fmt(t)},{_fmt(x[p])},{_fmt(u[p])}\n")

    def body_mass(f):
        f.write("n,t,mass\n")
        for n in range(grid.n_steps + 1):
            f.write(f"{n},{_fmt(grid.levels[n])},{_fmt(mass[n])}\n")

    _atomic_write(os.path.join(out, "solution.csv"), body_solution)
    _atomic_write(os.path.join(out, "mass.csv"), body_mass)
    _write_meta(out, {"command": "solve", "config": config.to_dict(), "stride": stride})
    worst = max((r.residual_norm for r in reports), default=0.0)
    print(f"solve: {grid.n_steps} steps, max residual {worst:.2e}, wrote {out}")
    return EXIT_OK


def cmd_convergence(settings):
    alphas = _floats(settings["alpha"])
    q_levels = _ints(settings["qh"])
    if not alphas or not q_levels:
        raise ValueError("convergence needs --alpha and --qh lists")
    if settings["init"] not in ("l2", "nodal"):
        raise ValueError("convergence supports --init l2 or nodal")
    q_ref = int(settings["qref"]) if settings["qref"] is not None else _scale_default(settings, "q_ref")
    n_steps = int(settings["N"]) if settings["N"] is not None else _scale_default(settings, "n_steps")
    bc = _BC_ENUM[settings["bc"]]
    domain = (float(settings["xmin"]), float(settings["xmax"]))
    out = _require_out(settings)

    table = run_convergence_study(
        alphas,
        q_levels,
        q_ref,
        n_steps,
        settings["init"],
        t_final=float(settings["T"]),
        domain=domain,
        drift=settings["drift"],
        kappa=float(settings["kappa"]),
        bc=bc,
        log=lambda msg: print(f"convergence: {msg}", flush=True),
    )

    def body_table(f):
        f.write("alpha,qh,estar,sigma\n")
        for row in table.rows:
            sigma = "" if row.sigma is None else _fmt(row.sigma)
            f.write(f"{_fmt(row.alpha)},{row.q_h},{_fmt(row.e_star)},{sigma}\n")

    _atomic_write(os.path.join(out, "table.csv"), body_table)
    for (alpha, q_h), series in table.series.items():
        def body_series(f, series=series):
            f.write("n,t,E\n")
            for n in range(len(series)):
                f.write(f"{n},{_fmt(series.times[n])},{_fmt(series.errors[n])}\n")
        _atomic_write(os.path.join(out, f"errors_{alpha:g}_{q_h}.csv"), body_series)
    _write_meta(
        out,
        {
            "command": "convergence",
            "alphas": alphas,
            "q_levels": q_levels,
            "q_ref": q_ref,
            "n_steps": n_steps,
            "init": settings["init"],
            "bc": settings["bc"],
            "drift": settings["drift"],
            "kappa": float(settings["kappa"]),
            "T": float(settings["T"]),
            "domain": list(domain),
            "scale": settings["scale"],
        },
    )
    print(table)
    return EXIT_OK


def cmd_stability(settings):
    alphas = _floats(settings["alpha"])
    qhs = _ints(settings["qh"])
    if len(qhs) != 1:
        raise ValueError("stability expects a single --qh")
    seed = int(settings["seed"]) if settings["seed"] is not None else 0
    n_steps = int(settings["N"]) if settings["N"] is not None else _scale_default(settings, "n_steps")
    out = _require_out(settings)
    results = run_stability_probe(
        alphas,
        seed,
        q_h=qhs[0],
        n_steps=n_steps,
        t_final=float(settings["T"]),
        domain=(float(settings["xmin"]), float(settings["xmax"])),
        drift=settings["drift"],
        kappa=float(settings["kappa"]),
        bc=_BC_ENUM[settings["bc"]],
    )

    def body(f):
        f.write("alpha,max_ratio,argmax_n\n")
        for alpha in alphas:
            r = results[alpha]
            f.write(f"{_fmt(alpha)},{_fmt(r.max_ratio)},{r.argmax_n}\n")

    _atomic_write(os.path.join(out, "stability.csv"), body)
    _write_meta(
        out,
        {"command": "stability", "alphas": alphas, "seed": seed,
         "n_steps": n_steps, "qh": qhs[0], "drift": settings["drift"],
         "bc": settings["bc"], "T": float(settings["T"]), "scale": settings["scale"]},
    )
    for alpha in alphas:
        r = results[alpha]
        print(f"stability: alpha={alpha:g} max ratio {r.max_ratio:.6f} at n={r.argmax_n}")
    return EXIT_OK


def _check_weight_sums():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(5):
        n_steps = int(rng.integers(20, 400))
        gamma = float(rng.uniform(1.0, 4.0))
        alpha = float(rng.uniform(0.05, 0.999))
        t_final = float(rng.uniform(0.5, 10.0))
        grid = TimeGrid.graded(n_steps, t_final, gamma)
        for n in (1, n_steps // 2 + 1, n_steps):
            row = fractional.weight_row(grid, alpha, n)
            target = grid.levels[n] ** alpha / math.gamma(alpha + 1.0)
            worst = max(worst, abs(row.sum() - target) / target)
    return worst < 1e-12, f"max relative defect {worst:.2e}"


def _check_classical_limit():
    mesh = mesh_with_free_count((0.0, math.pi), 15, BoundaryCondition.DIRICHLET)
    grid = TimeGrid.graded(32, 1.0, 1.0)
    u0 = discrete_initial_data(mesh, Indicator(math.pi / 4, 3 * math.pi / 4), "l2")
    history, _ = evolve(mesh, grid, 1.0, 1.0, "linear-sin", u0)
    mass = assemble_mass(mesh).to_dense()
    u = u0.copy()
    worst = 0.0
    for n in range(1, grid.n_steps + 1):
        g = assemble_operator(mesh, 1.0, "linear-sin", grid.levels[n]).to_dense()
        u = np.linalg.solve(mass + grid.steps[n - 1] * g, mass @ u)
        worst = max(worst, float(np.max(np.abs(u - history[n]))))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _check_projection_orthogonality():
    mesh = mesh_with_free_count((0.0, math.pi), 15, BoundaryCondition.DIRICHLET)
    data = Indicator(math.pi / 4, 3 * math.pi / 4)
    coeffs = discrete_initial_data(mesh, data, "l2")
    defect = hat_load_indicator(mesh, data.lo, data.hi) - assemble_mass(mesh).matvec(coeffs)
    worst = float(np.max(np.abs(defect)))
    return worst < 1e-12, f"max residual {worst:.2e}"


def _check_mittag_leffler():
    from scipy.special import erfc

    e1 = abs(fractional.mittag_leffler(1.0, -1.0) - math.exp(-1.0))
    eh = abs(fractional.mittag_leffler(0.5, -1.0) - math.e * erfc(1.0))
    worst = max(e1, eh)
    return worst < 1e-12, f"max defect {worst:.2e}"


def _check_mass_conservation():
    config = RESONANCE_PRESET.with_overrides(n_steps=64)
    history, reports = run(config)
    mass0 = basis_integrals(history.mesh) @ history[0]
    worst = max(abs(r.mass_total - mass0) for r in reports)
    return worst < 1e-9, f"max drift {worst:.2e}"


def cmd_check(settings):
    checks = [
        ("kernel-weight sums", _check_weight_sums),
        ("classical-limit equivalence", _check_classical_limit),
        ("projection orthogonality", _check_projection_orthogonality),
        ("mittag-leffler values", _check_mittag_leffler),
        ("zero-flux mass conservation", _check_mass_conservation),
    ]
    failed = 0
    for name, func in checks:
        ok, detail = func()
        print(f"check {name}: {'PASS' if ok else 'FAIL'} ({detail})")
        if not ok:
            failed += 1
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _resolve_settings(args)
        handler = {
            "solve": cmd_solve,
            "convergence": cmd_convergence,
            "stability": cmd_stability,
            "check": cmd_check,
        }[args.command]
        return handler(settings)
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
