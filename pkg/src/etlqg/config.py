"""TOML run configuration.

A config file describes either a full plant ([plant]) or a reset system
([reset_system]), exactly one of the two, plus optional [grid], [sim],
[bound], and [tradeoff] tables consumed by the command-line entry points.
"""

from dataclasses import dataclass, field

try:
    import tomllib
except ImportError:  # pragma: no cover - Python 3.10
    import tomli as tomllib

import numpy as np

from .errors import ConfigError
from .lqg import PlantModel, ResetSystem
from .simulate import SimConfig
from .stefan import GridSpec


@dataclass
class RunConfig:
    plant: PlantModel | None = None
    reset_system: ResetSystem | None = None
    grid_spec: GridSpec | None = None
    grid_margin: float = 3.0
    grid_n_cells: int = 256
    sim: SimConfig = field(default_factory=SimConfig)
    bound_rho: list = field(default_factory=list)
    bound_J: list = field(default_factory=list)
    sweep_h: list = field(default_factory=list)
    sweep_rho: list = field(default_factory=list)
    sweep_J: list = field(default_factory=list)
    schemes: list = field(default_factory=list)


def _matrix(table: dict, key: str, section: str) -> np.ndarray:
    if key not in table:
        raise ConfigError(f"[{section}] is missing required matrix '{key}'")
    try:
        M = np.array(table[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}].{key} is not a numeric matrix: {exc}") from exc
    if M.ndim == 1:
        M = M[None, :]
    if M.ndim != 2:
        raise ConfigError(f"[{section}].{key} must be a matrix (list of rows)")
    return M


def _float_list(table: dict, key: str, section: str) -> list:
    raw = table[key]
    if not isinstance(raw, list):
        raw = [raw]
    try:
        vals = [float(v) for v in raw]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}].{key} must be numeric: {exc}") from exc
    return vals


def _parse_plant(table: dict) -> PlantModel:
    try:
        return PlantModel(
            A=_matrix(table, "A", "plant"),
            B_w=_matrix(table, "B_w", "plant"),
            B_u=_matrix(table, "B_u", "plant"),
            C_z=_matrix(table, "C_z", "plant"),
            D_zu=_matrix(table, "D_zu", "plant"),
            C_y=_matrix(table, "C_y", "plant"),
            D_yw=_matrix(table, "D_yw", "plant"),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid [plant]: {exc}") from exc


def _parse_reset_system(table: dict) -> ResetSystem:
    try:
        return ResetSystem(
            A=_matrix(table, "A", "reset_system"),
            Q=_matrix(table, "Q", "reset_system"),
            R=_matrix(table, "R", "reset_system"),
        )
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid [reset_system]: {exc}") from exc


def _parse_grid(table: dict, cfg: RunConfig) -> None:
    if "margin" in table:
        cfg.grid_margin = float(table["margin"])
        if not cfg.grid_margin > 0:
            raise ConfigError("[grid].margin must be positive")
    if "n_cells" in table and not isinstance(table["n_cells"], list):
        cfg.grid_n_cells = int(table["n_cells"])
    # A fully explicit grid pins every dimension; otherwise the solver sizes
    # the domain from the ellipsoid radius with the margin above.
    if "half_width" in table:
        n_cells = table.get("n_cells", cfg.grid_n_cells)
        if not isinstance(n_cells, list):
            n_cells = [n_cells, n_cells]
        hw = _float_list(table, "half_width", "grid")
        if len(hw) == 1:
            hw = [hw[0], hw[0]]
        try:
            cfg.grid_spec = GridSpec(
                half_width=np.array(hw),
                n_cells=np.array(n_cells, dtype=int),
                dt=float(table["dt"]),
                stationarity_tol=float(table.get("stationarity_tol", 1e-6)),
                max_steps=int(table.get("max_steps", 200000)),
            )
        except KeyError as exc:
            raise ConfigError(f"[grid] with half_width also needs {exc}") from exc
        except Exception as exc:
            raise ConfigError(f"invalid [grid]: {exc}") from exc


def _parse_sim(table: dict) -> SimConfig:
    try:
        return SimConfig(
            h_nom=float(table.get("h_nom", 1e-3)),
            T=float(table.get("T", 2000.0)),
            seed=int(table.get("seed", 0)),
            n_reps=int(table.get("n_reps", 20)),
        )
    except Exception as exc:
        raise ConfigError(f"invalid [sim]: {exc}") from exc


_SCHEMES = ("periodic", "ellipsoid", "grid")


def load_run_config(path) -> RunConfig:
    """Parse and validate a TOML run configuration file."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc

    cfg = RunConfig()
    has_plant = "plant" in raw
    has_reset = "reset_system" in raw
    if has_plant == has_reset:
        raise ConfigError("config must contain exactly one of [plant], [reset_system]")
    if has_plant:
        cfg.plant = _parse_plant(raw["plant"])
    else:
        cfg.reset_system = _parse_reset_system(raw["reset_system"])

    if "grid" in raw:
        _parse_grid(raw["grid"], cfg)
    if "sim" in raw:
        cfg.sim = _parse_sim(raw["sim"])

    targets = {
        ("bound", "rho"): "bound_rho",
        ("bound", "J"): "bound_J",
        ("tradeoff", "h"): "sweep_h",
        ("tradeoff", "rho"): "sweep_rho",
        ("tradeoff", "J"): "sweep_J",
    }
    for (section, key), attr in targets.items():
        table = raw.get(section, {})
        if key in table:
            vals = _float_list(table, key, section)
            if any(not np.isfinite(v) or v <= 0 for v in vals):
                raise ConfigError(f"[{section}].{key} values must be positive")
            setattr(cfg, attr, vals)

    schemes = raw.get("tradeoff", {}).get("schemes", [])
    if not isinstance(schemes, list):
        schemes = [schemes]
    for s in schemes:
        if s not in _SCHEMES:
            raise ConfigError(f"unknown scheme '{s}', expected one of {_SCHEMES}")
    cfg.schemes = list(schemes)
    return cfg
