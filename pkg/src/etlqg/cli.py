"""Command-line entry points.

Subcommands:
    design    solve the two Riccati equations for a plant, write design.json
    bound     compute optimal sampling boundaries (ellipsoids or PDE grids)
    tradeoff  estimate cost-vs-rate curves by simulation, write tradeoff.csv
    ratio     periodic-to-optimal slope ratio for a driftless system

Exit codes: 0 success, 2 configuration or validation error, 3 solver or
simulation failure, 4 PDE run that did not reach a usable stationary state,
1 unexpected internal error.
"""

import argparse
import sys
import traceback
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import plots
from .config import RunConfig, load_run_config
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    EmptyOmega,
    InvalidPlant,
    NonFiniteState,
    NonFiniteValue,
    NoStabilizingSolution,
    NotHurwitz,
    NotPositiveDefinite,
    NotStationary,
    OmegaTouchesBoundary,
)
from .integrator import EllipsoidBound, integrator_costs, slopes_and_ratio, solve_riccati_like
from .lqg import ResetSystem, build_reset_system, design_lqg, validate_plant
from .serialize import (
    design_document,
    ellipsoid_document,
    fmt17,
    write_failures_csv,
    write_grid_csv,
    write_json,
    write_polyline_csv,
    write_tradeoff_csv,
)
from .simulate import tradeoff_sweep
from .stefan import auto_grid_spec, extract_boundary, stefan_solve

_VALUE_KEY = {"periodic": "h", "ellipsoid": "rho", "grid": "J"}


def _is_driftless(sys_: ResetSystem) -> bool:
    scale = 1.0 + np.linalg.norm(sys_.Q) + np.linalg.norm(sys_.R)
    return np.linalg.norm(sys_.A) <= 1e-12 * scale


def _resolve_system(cfg: RunConfig) -> tuple[ResetSystem, float]:
    """Reset system to operate on, plus the continuous-design floor gamma0.

    A [reset_system] config is taken as-is with floor 0 (costs are then
    reported relative to the continuous design).
    """
    if cfg.reset_system is not None:
        return cfg.reset_system, 0.0
    violations = validate_plant(cfg.plant)
    if violations:
        raise InvalidPlant(violations)
    design = design_lqg(cfg.plant)
    return build_reset_system(cfg.plant, design), design.gamma0


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_design(args, cfg: RunConfig) -> int:
    if cfg.plant is None:
        raise ConfigError("'design' needs a [plant] section")
    violations = validate_plant(cfg.plant)
    if violations:
        for v in violations:
            print(f"invalid plant: {v}", file=sys.stderr)
        return 2
    design = design_lqg(cfg.plant)
    reset = build_reset_system(cfg.plant, design)
    path = _outdir(args) / "design.json"
    write_json(path, design_document(cfg.plant, design, reset))
    if not args.quiet:
        print(f"gamma0 = {fmt17(design.gamma0)}")
        print(f"wrote {path}")
    return 0


def cmd_bound(args, cfg: RunConfig) -> int:
    sys_, _ = _resolve_system(cfg)
    out = _outdir(args)
    if _is_driftless(sys_):
        if not cfg.bound_rho:
            raise ConfigError("'bound' with A = 0 needs [bound].rho values")
        P = solve_riccati_like(sys_.Q, sys_.R)
        bounds = []
        for rho in cfg.bound_rho:
            b = EllipsoidBound(P=P, rho=rho)
            bounds.append(b)
            tag = f"{rho:g}"
            write_json(out / f"ellipsoid_rho{tag}.json", ellipsoid_document(b))
            if sys_.n == 2:
                write_polyline_csv(out / f"boundary_rho{tag}.csv", b.boundary_points())
            _, J_H, _ = integrator_costs(P, sys_.R, rho)
            if not args.quiet:
                print(f"rho={tag}: threshold={fmt17(b.threshold)} J_H={fmt17(J_H)}")
        if not args.no_figures and sys_.n == 2:
            plots.plot_ellipsoids(bounds, out / "bound.png")
    else:
        if sys_.n != 2:
            raise DimensionError("boundary PDE solve is implemented for n = 2 only")
        if not cfg.bound_J:
            raise ConfigError("'bound' with drift needs [bound].J values")
        polys = []
        grid = None
        for J in cfg.bound_J:
            spec = cfg.grid_spec
            if spec is None:
                spec = auto_grid_spec(
                    sys_, J, n_cells=cfg.grid_n_cells, margin=cfg.grid_margin
                )
            grid = stefan_solve(sys_, J, spec)
            poly = extract_boundary(grid)
            tag = f"{J:g}"
            write_grid_csv(out / f"grid_J{tag}.csv", grid)
            write_polyline_csv(out / f"boundary_J{tag}.csv", poly.points)
            polys.append((f"J={tag}", poly))
            if not args.quiet:
                print(f"J={tag}: rho_effective={fmt17(grid.rho_effective)}")
        if not args.no_figures:
            plots.plot_value_grid(grid, polys, out / "bound.png")
    return 0


def cmd_tradeoff(args, cfg: RunConfig) -> int:
    sys_, gamma0 = _resolve_system(cfg)
    out = _outdir(args)
    sim = cfg.sim if args.seed is None else replace(cfg.sim, seed=args.seed)
    values = {"periodic": cfg.sweep_h, "ellipsoid": cfg.sweep_rho, "grid": cfg.sweep_J}
    schemes = list(cfg.schemes)
    if not schemes:
        schemes = [s for s in _VALUE_KEY if values[s]]
    if not schemes:
        raise ConfigError(
            "'tradeoff' needs [tradeoff] schemes or value lists (h, rho, J)"
        )
    points = []
    failures = []
    for scheme in schemes:
        vals = values[scheme]
        if not vals:
            raise ConfigError(
                f"scheme '{scheme}' needs [tradeoff].{_VALUE_KEY[scheme]} values"
            )
        res = tradeoff_sweep(
            sys_,
            scheme,
            vals,
            sim,
            gamma0,
            grid_spec=cfg.grid_spec,
            n_cells=cfg.grid_n_cells,
            margin=cfg.grid_margin,
        )
        points.extend(res.points)
        failures.extend(res.failures)

    write_tradeoff_csv(out / "tradeoff.csv", points)
    if failures:
        write_failures_csv(out / "tradeoff_errors.csv", failures)
        for f in failures:
            print(f"failed {f.scheme} param={f.param:g}: {f.error}", file=sys.stderr)
    if not args.quiet and _is_driftless(sys_):
        # with A = 0 the curves are lines through gamma0; report their slopes
        for scheme in schemes:
            pts = [
                p
                for p in points
                if p.scheme == scheme and np.isfinite(p.h_avg) and p.h_avg > 0
            ]
            if len(pts) >= 2:
                h = np.array([p.h_avg for p in pts])
                jh = np.array([p.J_H_hat for p in pts])
                slope = float(h @ jh / (h @ h))
                print(f"{scheme}: cost slope ~= {slope:.6g} (fit through origin)")
    if not args.no_figures:
        plots.plot_tradeoff(points, out / "tradeoff.png", gamma0)
    if not points:
        print("all sweep points failed", file=sys.stderr)
        return 3
    return 0


def cmd_ratio(args, cfg: RunConfig) -> int:
    sys_, _ = _resolve_system(cfg)
    if not _is_driftless(sys_):
        print("'ratio' requires a driftless system (A = 0)", file=sys.stderr)
        return 2
    sp = slopes_and_ratio(sys_.Q, sys_.R)
    lo = 1.0 + 2.0 / sys_.n
    print(f"J_p = {fmt17(sp.J_p)}")
    print(f"J_e = {fmt17(sp.J_e)}")
    print(f"J_ratio = {fmt17(sp.J_ratio)}")
    ok = lo - 1e-9 <= sp.J_ratio <= 3.0 + 1e-9
    print(f"bounds [{lo:g}, 3]: {'ok' if ok else 'VIOLATED'}")
    return 0 if ok else 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="etlqg",
        description="Sampled-data LQG design with optimal event-based sampling.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    specs = [
        ("design", cmd_design, "solve the LQG Riccati pair and write design.json"),
        ("bound", cmd_bound, "compute optimal sampling boundaries"),
        ("tradeoff", cmd_tradeoff, "sweep cost-vs-rate curves"),
        ("ratio", cmd_ratio, "periodic/event slope ratio for A = 0"),
    ]
    for name, func, help_ in specs:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--out", default=".", help="output directory (default .)")
        sp.add_argument("--seed", type=int, default=None, help="override [sim].seed")
        sp.add_argument("--quiet", action="store_true", help="suppress progress text")
        sp.add_argument(
            "--no-figures", action="store_true", help="skip PNG rendering"
        )
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config)
        return args.func(args, cfg)
    except InvalidPlant as exc:
        for v in exc.violations:
            print(f"invalid plant: {v}", file=sys.stderr)
        return 2
    except (ConfigError, DimensionError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        NoStabilizingSolution,
        NotHurwitz,
        NotPositiveDefinite,
        NonFiniteValue,
        NonFiniteState,
        EmptyOmega,
    ) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except (NotStationary, OmegaTouchesBoundary) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4
    except Exception:  # pragma: no cover - last-resort diagnostics
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
