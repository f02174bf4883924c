"""File formats: JSON documents for designs and bounds, CSV for grids/curves.

All numeric text is written with 17 significant digits so that float64
values survive a write/read round trip exactly; rewriting a parsed artifact
reproduces it byte for byte.
"""

import json

import numpy as np

from .errors import ConfigError, DimensionError
from .integrator import EllipsoidBound
from .lqg import LqgDesign, PlantModel, ResetSystem
from .simulate import SweepFailure, TradeoffPoint
from .stefan import BoundaryPolyline, GridSpec, ValueFunctionGrid

TRADEOFF_HEADER = "h_avg,J_H,J_z,stderr,n_samples,scheme,param"


def fmt17(x: float) -> str:
    """Shortest-of-17-significant-digits decimal form of a float."""
    return format(float(x), ".17g")


def _matrix_list(M: np.ndarray) -> list:
    return [[float(v) for v in row] for row in np.atleast_2d(M)]


def _parse_matrix(obj, name: str, shape: tuple) -> np.ndarray:
    M = np.asarray(obj, dtype=float)
    if M.shape != shape:
        raise DimensionError(f"{name} has shape {M.shape}, expected {shape}")
    return M


def design_document(plant: PlantModel, design: LqgDesign, reset: ResetSystem) -> dict:
    """JSON-ready document bundling the LQG design and its reset system."""
    n = plant.n
    return {
        "kind": "lqg_design",
        "dimensions": {
            "n": n,
            "m_w": plant.m_w,
            "m_u": plant.m_u,
            "p_z": plant.p_z,
            "p_y": plant.p_y,
        },
        "X": _matrix_list(design.X),
        "Y": _matrix_list(design.Y),
        "F": _matrix_list(design.F),
        "L": _matrix_list(design.L),
        "gamma0": float(design.gamma0),
        "reset_system": reset_system_document(reset),
    }


def parse_design_document(doc: dict) -> tuple[LqgDesign, ResetSystem]:
    if doc.get("kind") != "lqg_design":
        raise ConfigError("document kind is not 'lqg_design'")
    dims = doc["dimensions"]
    n, m_u, p_y = dims["n"], dims["m_u"], dims["p_y"]
    design = LqgDesign(
        X=_parse_matrix(doc["X"], "X", (n, n)),
        Y=_parse_matrix(doc["Y"], "Y", (n, n)),
        F=_parse_matrix(doc["F"], "F", (m_u, n)),
        L=_parse_matrix(doc["L"], "L", (n, p_y)),
        gamma0=float(doc["gamma0"]),
    )
    reset = parse_reset_system_document(doc["reset_system"])
    return design, reset


def reset_system_document(sys: ResetSystem) -> dict:
    return {
        "kind": "reset_system",
        "dimensions": {"n": sys.n},
        "A": _matrix_list(sys.A),
        "Q": _matrix_list(sys.Q),
        "R": _matrix_list(sys.R),
    }


def parse_reset_system_document(doc: dict) -> ResetSystem:
    if doc.get("kind") != "reset_system":
        raise ConfigError("document kind is not 'reset_system'")
    n = doc["dimensions"]["n"]
    return ResetSystem(
        A=_parse_matrix(doc["A"], "A", (n, n)),
        Q=_parse_matrix(doc["Q"], "Q", (n, n)),
        R=_parse_matrix(doc["R"], "R", (n, n)),
    )


def ellipsoid_document(bound: EllipsoidBound) -> dict:
    return {
        "kind": "ellipsoid_bound",
        "dimensions": {"n": bound.n},
        "P": _matrix_list(bound.P),
        "rho": float(bound.rho),
    }


def parse_ellipsoid_document(doc: dict) -> EllipsoidBound:
    if doc.get("kind") != "ellipsoid_bound":
        raise ConfigError("document kind is not 'ellipsoid_bound'")
    n = doc["dimensions"]["n"]
    return EllipsoidBound(P=_parse_matrix(doc["P"], "P", (n, n)), rho=float(doc["rho"]))


def write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_grid_csv(path, grid: ValueFunctionGrid) -> None:
    """Header block (dimensions, spacing, run controls, J, rho) then row-major V."""
    spec = grid.spec
    lines = ["key,value"]
    lines.append("kind,value_function_grid")
    for ax in (0, 1):
        lines.append(f"n_cells_{ax + 1},{spec.n_cells[ax]}")
    for ax in (0, 1):
        lines.append(f"half_width_{ax + 1},{fmt17(spec.half_width[ax])}")
    for ax in (0, 1):
        lines.append(f"dx_{ax + 1},{fmt17(spec.dx[ax])}")
    lines.append(f"dt,{fmt17(spec.dt)}")
    lines.append(f"stationarity_tol,{fmt17(spec.stationarity_tol)}")
    lines.append(f"max_steps,{spec.max_steps}")
    lines.append(f"J,{fmt17(grid.J)}")
    lines.append(f"rho_effective,{fmt17(grid.rho_effective)}")
    lines.append("V,row-major")
    for row in grid.V:
        lines.append(",".join(fmt17(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_csv(path) -> ValueFunctionGrid:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "key,value":
        raise ConfigError(f"{path} is not a value-function grid file")
    header = {}
    i = 1
    while i < len(lines):
        key, _, value = lines[i].partition(",")
        i += 1
        if key == "V":
            break
        header[key] = value
    if header.get("kind") != "value_function_grid":
        raise ConfigError(f"{path} is not a value-function grid file")
    spec = GridSpec(
        half_width=np.array(
            [float(header["half_width_1"]), float(header["half_width_2"])]
        ),
        n_cells=np.array([int(header["n_cells_1"]), int(header["n_cells_2"])]),
        dt=float(header["dt"]),
        stationarity_tol=float(header["stationarity_tol"]),
        max_steps=int(header["max_steps"]),
    )
    V = np.array(
        [[float(v) for v in line.split(",")] for line in lines[i:]], dtype=float
    )
    return ValueFunctionGrid(
        spec=spec,
        V=V,
        J=float(header["J"]),
        rho_effective=float(header["rho_effective"]),
    )


def write_polyline_csv(path, points: np.ndarray) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x1,x2\n")
        for p in pts:
            fh.write(f"{fmt17(p[0])},{fmt17(p[1])}\n")


def read_polyline_csv(path) -> BoundaryPolyline:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return BoundaryPolyline(points=data)


def write_tradeoff_csv(path, points: list[TradeoffPoint]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(TRADEOFF_HEADER + "\n")
        for p in points:
            fh.write(
                ",".join(
                    [
                        fmt17(p.h_avg),
                        fmt17(p.J_H_hat),
                        fmt17(p.J_z_hat),
                        fmt17(p.stderr),
                        str(int(p.n_samples)),
                        p.scheme,
                        fmt17(p.param),
                    ]
                )
                + "\n"
            )


def read_tradeoff_csv(path) -> list[TradeoffPoint]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != TRADEOFF_HEADER:
        raise ConfigError(f"{path} is not a tradeoff file")
    out = []
    for line in lines[1:]:
        h_avg, j_h, j_z, se, ns, scheme, param = line.split(",")
        out.append(
            TradeoffPoint(
                h_avg=float(h_avg),
                J_H_hat=float(j_h),
                J_z_hat=float(j_z),
                stderr=float(se),
                n_samples=int(ns),
                scheme=scheme,
                param=float(param),
            )
        )
    return out


def write_failures_csv(path, failures: list[SweepFailure]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("scheme,param,error\n")
        for f in failures:
            msg = f.error.replace("\n", " ").replace(",", ";")
            fh.write(f"{f.scheme},{fmt17(f.param)},{msg}\n")
