"""Command-line entry point: ``critpurcell {simulate,dos,oracle-check,fit}``.

Every subcommand accepts ``--config FILE`` with a JSON object whose keys are
the subcommand's long option names (dashes or underscores); explicit flags
override file values and unknown keys are rejected.

Exit codes: 0 ok, 1 oracle check failed, 2 usage or input error,
3 pole-window violation, 4 quadrature failure, 5 fit did not converge.
The ``CRITPURCELL_MAX_WORKERS`` environment variable caps worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import estimator, physics, spectral, sweep
from .errors import (
    ConvergenceFailure,
    CriticalPoint,
    DegenerateJacobian,
    IllConditioned,
    InsufficientData,
    PhaseError,
    PoleReached,
    TailTooFat,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_POLE = 3
EXIT_QUADRATURE = 4
EXIT_CONVERGENCE = 5


class UsageError(Exception):
    pass


def _range(text: str) -> np.ndarray:
    """Parse ``start:stop:num`` into a linspace."""
    try:
        start, stop, num = text.split(":")
        return np.linspace(float(start), float(stop), int(num))
    except ValueError as exc:
        raise UsageError(f"expected start:stop:num, got {text!r}") from exc


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _max_workers() -> int | None:
    env = os.environ.get("CRITPURCELL_MAX_WORKERS")
    if not env:
        return None
    try:
        return max(1, int(env))
    except ValueError:
        raise UsageError(f"CRITPURCELL_MAX_WORKERS must be an integer, got {env!r}")


def _emit(data: bytes | str, out: str | None) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if out in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _summary(obj: dict, to_stderr: bool) -> None:
    text = json.dumps(obj, sort_keys=True) + "\n"
    (sys.stderr if to_stderr else sys.stdout).write(text)


# --- subcommands ---------------------------------------------------------------

def cmd_simulate(cfg: dict) -> int:
    fmt = cfg["format"]
    alpha = cfg["alpha"]
    if cfg["preset"] == "fig2":
        if not cfg["out"] or cfg["out"] == "-":
            raise UsageError("--preset fig2 writes several files; give --out DIRECTORY")
        outdir = Path(cfg["out"])
        outdir.mkdir(parents=True, exist_ok=True)
        summary = {}
        for label, curve in sweep.fig2_curves(x0=cfg["x0"] if cfg["x0"] is not None else 1.0).items():
            name = f"fig2_beta_{label.replace('/', '-')}.{fmt}"
            sweep.write_curve(curve, outdir / name, fmt)
            summary[name] = sweep.summarize(curve)
        _summary(summary, to_stderr=False)
        return EXIT_OK

    if cfg["preset"] == "fig4":
        scenario = sweep.fig4_scenario(alpha)
        grid = sweep.fig4_grid(scenario)
    else:
        beta = cfg["beta"] if cfg["beta"] is not None else 0.5
        x0 = cfg["x0"] if cfg["x0"] is not None else 1.0
        broken = physics.BrokenPhaseLaw(x0=x0, beta=beta)
        if cfg["symmetric"] == "power_law":
            sym = physics.SymmetricPhaseLaw.power_law(cfg["A"], cfg["nu"], cfg["xi0"])
        else:
            sym = physics.SymmetricPhaseLaw.exponential(cfg["delta"], cfg["xi0"])
        scenario = physics.PhaseScenario(broken, sym, constants=physics.PhysicalConstants(alpha=alpha))
        grid = sweep.TemperatureGrid(_range(cfg["grid"]))

    ts = grid.points
    tstar = physics.pole_location(scenario.symmetric, alpha)
    inside = ts[(ts < 0) & (-ts < sweep.POLE_MARGIN * tstar)]
    if inside.size:
        print(
            f"error: {inside.size} grid points lie inside the pole window |t| < "
            f"{sweep.POLE_MARGIN} * {tstar:.6g}",
            file=sys.stderr,
        )
        return EXIT_POLE
    if np.all(ts > 0):
        curve = sweep.sweep_broken(grid, scenario.broken)
    else:
        curve = sweep.sweep_full(grid, scenario)
    if cfg["preset"] == "fig4":
        curve.metadata["preset"] = "fig4"
        curve.metadata["x0_choice"] = "illustrative amplitude so the zero-emission window is visible"
    if cfg["sigma"]:
        curve = sweep.add_noise(
            curve, sweep.NoiseSpec(cfg["sigma"], cfg["seed"], floor_at_zero=not cfg["no_floor"])
        )
    _emit(sweep.export_curve(curve, fmt), cfg["out"])
    _summary(sweep.summarize(curve), to_stderr=cfg["out"] in (None, "-"))
    return EXIT_OK


def cmd_dos(cfg: dict) -> int:
    x = cfg["x"]
    omegas = _range(cfg["omega"])
    table = spectral.dos_curve(x, omegas)
    cols = ["omega", "dos", "vacuum_dos"]
    data = [table[:, 0], table[:, 1], omegas * omegas]
    if cfg["quadrature"]:
        q = spectral.dos_quadrature(
            x, omegas, _ladder(cfg), _quad(cfg)
        )
        cols += ["dos_quadrature", "dos_quadrature_error"]
        data += [q[:, 1], q[:, 2]]
    lines = [",".join(cols)]
    for row in zip(*(d.tolist() for d in data)):
        lines.append(",".join(repr(float(v)) for v in row))
    _emit("\n".join(lines) + "\n", cfg["out"])
    return EXIT_OK


def _ladder(cfg) -> spectral.EtaLadder:
    return spectral.EtaLadder(tuple(_floats(cfg["etas"])), cfg["order"])


def _quad(cfg) -> spectral.QuadratureConfig:
    return spectral.QuadratureConfig(
        k_max=cfg["k_max"], rel_tol=cfg["rel_tol"], max_subdivisions=cfg["max_subdivisions"]
    )


def cmd_oracle_check(cfg: dict) -> int:
    xs = _floats(cfg["x"])
    rows = spectral.oracle_check(
        xs, _ladder(cfg), _quad(cfg), tolerance=cfg["tolerance"], workers=_max_workers()
    )
    _emit(spectral.report_to_csv(rows), cfg["out"])
    bad = [r for r in rows if r.x <= 0.9 and r.abs_diff >= cfg["tolerance"]]
    _summary(
        {"rows": len(rows), "failed_x": [r.x for r in bad], "flagged_x": [r.x for r in rows if r.flagged]},
        to_stderr=cfg["out"] in (None, "-"),
    )
    return EXIT_CHECK_FAILED if bad else EXIT_OK


def _read_input(path: str, fmt: str | None) -> sweep.RateCurve:
    if path in (None, "-"):
        raw = sys.stdin.buffer.read()
    else:
        raw = Path(path).read_bytes()
    if fmt is None:
        if path not in (None, "-") and Path(path).suffix.lower() in (".csv", ".json"):
            fmt = Path(path).suffix.lower().lstrip(".")
        else:
            fmt = "json" if raw.lstrip().startswith(b"{") else "csv"
    return sweep.import_curve(raw, fmt)


def cmd_fit(cfg: dict) -> int:
    curve = _read_input(cfg["input"], cfg["input_format"])
    if len(curve) == 0:
        raise UsageError("input curve has no samples")
    sigma = cfg["sigma"]
    if cfg["symmetric"]:
        result = estimator.fit_symmetric(curve, cfg["symmetric"], alpha=cfg["alpha"], sigma_rel=sigma)
        converged = result.converged
    elif cfg["classify"]:
        cands = (
            estimator.CandidateSet.from_values(_floats(cfg["candidates"]))
            if cfg["candidates"]
            else estimator.CandidateSet()
        )
        result = estimator.classify(curve, cands, sigma_rel=sigma)
        converged = all(f.converged for f in result.fits.values())
    else:
        init = "auto"
        if cfg["init_beta"] is not None and cfg["init_x0"] is not None:
            init = {"beta": cfg["init_beta"], "x0": cfg["init_x0"]}
        result = estimator.fit_broken(curve, init, sigma_rel=sigma, max_iter=cfg["max_iter"])
        converged = result.converged
    _emit(result.to_json(), cfg["out"])
    return EXIT_OK if converged else EXIT_CONVERGENCE


# --- parser --------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with option values (flags override it)")
    p.add_argument("--out", help="output path ('-' or omitted: stdout)")


def _add_quadrature(p):
    p.add_argument("--etas", help="broadening ladder, comma separated (default 0.08,0.04,0.02,0.01)")
    p.add_argument("--order", type=int, help="polynomial order of the eta extrapolation (default 2)")
    p.add_argument("--k-max", type=float, help="k-space cutoff in units of omega0/c (default 50)")
    p.add_argument("--rel-tol", type=float, help="quadrature relative tolerance (default 1e-10)")
    p.add_argument("--max-subdivisions", type=int, help="quadrature subdivision budget (default 500)")


QUAD_DEFAULTS = {
    "etas": "0.08,0.04,0.02,0.01",
    "order": 2,
    "k_max": 50.0,
    "rel_tol": 1e-10,
    "max_subdivisions": 500,
}

DEFAULTS = {
    "simulate": {
        "format": "csv",
        "preset": None,
        "beta": None,
        "x0": None,
        "grid": "0.01:0.99:99",
        "symmetric": "exponential",
        "delta": 10.0,
        "A": 1.0,
        "nu": 1.0,
        "xi0": 1.0,
        "alpha": physics.ALPHA_DEFAULT,
        "sigma": 0.0,
        "seed": 0,
        "no_floor": False,
    },
    "dos": {"x": 0.0, "omega": "0:3:301", "quadrature": False, **QUAD_DEFAULTS},
    "oracle-check": {
        "x": "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.99,1.2,1.5",
        "tolerance": 1e-3,
        **QUAD_DEFAULTS,
    },
    "fit": {
        "input": "-",
        "input_format": None,
        "classify": False,
        "candidates": None,
        "sigma": None,
        "symmetric": None,
        "alpha": physics.ALPHA_DEFAULT,
        "init_beta": None,
        "init_x0": None,
        "max_iter": 200,
    },
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critpurcell",
        description="Purcell-effect rates across a second-order phase transition.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a rate-vs-temperature curve")
    _add_common(p)
    p.add_argument("--format", choices=["csv", "json"], help="curve format (default csv)")
    p.add_argument("--preset", choices=["fig2", "fig4"], help="canned scenario")
    p.add_argument("--beta", type=float, help="critical exponent of the photon mass (default 0.5)")
    p.add_argument("--x0", type=float, help="mass amplitude M0 c^2 / hbar omega0 (default 1)")
    p.add_argument("--grid", help="reduced-temperature grid start:stop:num (default 0.01:0.99:99)")
    p.add_argument("--symmetric", choices=["exponential", "power_law"], help="correlation-length law")
    p.add_argument("--delta", type=float, help="exponential-law delta (default 10)")
    p.add_argument("--A", type=float, help="power-law amplitude A in units of xi0 (default 1)")
    p.add_argument("--nu", type=float, help="power-law exponent nu (default 1)")
    p.add_argument("--xi0", type=float, help="reference correlation length (default 1)")
    p.add_argument("--alpha", type=float, help="fine-structure constant (default 1/137)")
    p.add_argument("--sigma", type=float, help="relative Gaussian noise level (default 0)")
    p.add_argument("--seed", type=int, help="noise seed (default 0)")
    p.add_argument("--no-floor", action="store_true", default=None, help="do not clamp noisy rates at 0")

    p = sub.add_parser("dos", help="photon density-of-states table")
    _add_common(p)
    p.add_argument("--x", type=float, help="photon mass ratio (default 0)")
    p.add_argument("--omega", help="frequency grid start:stop:num in units of omega0 (default 0:3:301)")
    p.add_argument("--quadrature", action="store_true", default=None, help="add quadrature columns")
    _add_quadrature(p)

    p = sub.add_parser("oracle-check", help="compare quadrature and closed-form rates")
    _add_common(p)
    p.add_argument("--x", help="comma-separated mass ratios")
    p.add_argument("--tolerance", type=float, help="flagging tolerance on |diff| (default 1e-3)")
    _add_quadrature(p)

    p = sub.add_parser("fit", help="estimate exponents from a curve file")
    _add_common(p)
    p.add_argument("input", nargs="?", help="curve file (CSV or JSON; '-' for stdin)")
    p.add_argument("--input-format", choices=["csv", "json"], help="override format detection")
    p.add_argument("--classify", action="store_true", default=None, help="choose among candidate exponents")
    p.add_argument("--candidates", help="comma-separated candidate exponents")
    p.add_argument("--sigma", type=float, help="known relative noise level (enables weighting)")
    p.add_argument("--symmetric", choices=["exponential", "power_law"], help="fit the symmetric phase instead")
    p.add_argument("--alpha", type=float, help="fine-structure constant (default 1/137)")
    p.add_argument("--init-beta", type=float, help="initial beta (with --init-x0)")
    p.add_argument("--init-x0", type=float, help="initial x0 (with --init-beta)")
    p.add_argument("--max-iter", type=int, help="iteration budget (default 200)")
    return parser


def _merge(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config must be a JSON object")
        for key, value in doc.items():
            k = key.replace("-", "_")
            if k not in cfg and k != "out":
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            cfg[k] = value
    cfg.setdefault("out", None)
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is not None:
            cfg[key] = value
    return cfg


COMMANDS = {
    "simulate": cmd_simulate,
    "dos": cmd_dos,
    "oracle-check": cmd_oracle_check,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge(args)
        return COMMANDS[args.command](cfg)
    except (PoleReached, CriticalPoint) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLE
    except (ConvergenceFailure, TailTooFat, IllConditioned) as exc:
        print(f"error: quadrature failed: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    except DegenerateJacobian as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (UsageError, InsufficientData, PhaseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
