"""Run configuration: per-case defaults, YAML loading, CLI overrides.

A config file only needs the keys it wants to change; everything else comes
from the case defaults. Dotted keys (``burgers.n_kernels``) address nested
sections for command-line overrides.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import yaml

CASES = ("poisson_disk", "burgers_standing", "burgers_traveling", "cavity", "stenosis")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class PoissonConfig:
    n_kernels: int = 2000
    n_points: int = 1905
    boundary_fraction: float = 0.2
    sigma: float = 0.5
    probe_n: int = 101

    @property
    def n_boundary(self) -> int:
        return int(round(self.boundary_fraction * self.n_points))

    @property
    def n_interior(self) -> int:
        return self.n_points - self.n_boundary


@dataclass
class BurgersConfig:
    ic: str = "standing"  # standing | traveling | zero
    nu: float = 0.01 / math.pi
    n_blocks: int = 200
    dt_block: float = 0.001
    n_kernels: int = 600
    n_x_per_level: int = 250
    nt_levels: int = 5
    n_ic: int = 401
    n_bc_levels: int = 4
    window_size: float = 0.1
    fraction: float = 0.30
    use_window: bool = True
    mirror_x: bool = False
    detect_n: int = 1001
    probe_times: tuple = (0.05, 0.1, 0.2)
    probe_nx: int = 801
    oracle_nx: int = 1601
    oracle_cfl: float = 0.4


@dataclass
class CavityConfig:
    n_kernels: int = 300
    n_per_axis: int = 25
    re_target: float = 100.0
    delta: float = 0.1
    stokes_re: float = 1.0
    probe_n: int = 99
    probe_margin: float = 0.01
    oracle_n_grid: int = 129


@dataclass
class StenosisConfig:
    n_kernels: int = 800
    n_pde: int = 1000
    n_wall: int = 230
    n_inlet: int = 40
    n_outlet: int = 40
    re_target: float = 100.0
    delta: float = 10.0
    stokes_re: float = 1.0
    u_max: float = 0.1
    length: float = 1.0
    inlet_half_width: float = 0.1
    throat_half_width: float = 0.06
    flux_stations: tuple = (0.1, 0.3, 0.5, 0.7, 0.9)
    probe_nx: int = 99
    probe_ny: int = 21
    compare_refined: bool = False
    refined_scale: float = 2.0  # point-count multiplier for the self-oracle
    refined_kernel_scale: float = 1.5


@dataclass
class RunConfig:
    case: str
    seed: int
    out_dir: str = "out"
    rank_tol: float = 1e-12
    poisson: PoissonConfig = field(default_factory=PoissonConfig)
    burgers: BurgersConfig = field(default_factory=BurgersConfig)
    cavity: CavityConfig = field(default_factory=CavityConfig)
    stenosis: StenosisConfig = field(default_factory=StenosisConfig)

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError(f"case must be one of {CASES}, got {self.case!r}")
        if self.seed is None:
            raise ConfigError("seed is mandatory")
        self.seed = int(self.seed)
        if not (0.0 < self.rank_tol < 1.0):
            raise ConfigError("rank_tol must lie in (0, 1)")
        self._check_positive_counts()

    def _check_positive_counts(self):
        for section_name in ("poisson", "burgers", "cavity", "stenosis"):
            section = getattr(self, section_name)
            for f in dataclasses.fields(section):
                value = getattr(section, f.name)
                if f.name.startswith("n_") and isinstance(value, int) and value <= 0:
                    raise ConfigError(f"{section_name}.{f.name} must be positive")


CASE_RANK_TOL = {
    "poisson_disk": 1e-12,
    "burgers_standing": 1e-10,
    "burgers_traveling": 1e-9,
    "cavity": 1e-12,
    "stenosis": 1e-12,
}


def default_config(case: str, seed: int = 0, out_dir: str = "out") -> RunConfig:
    """Calibrated defaults per case."""
    cfg = RunConfig(case=case, seed=seed, out_dir=out_dir)
    cfg.rank_tol = CASE_RANK_TOL.get(case, 1e-12)
    if case == "burgers_standing":
        cfg.burgers.ic = "standing"
        cfg.burgers.mirror_x = True
    elif case == "burgers_traveling":
        cfg.burgers.ic = "traveling"
        cfg.burgers.mirror_x = False
        cfg.burgers.nt_levels = 7
    return cfg


def load_config(path=None, case=None, seed=None, out_dir=None, overrides=()) -> RunConfig:
    """Build a RunConfig from a YAML file plus CLI-style overrides.

    Precedence: CLI flags > ``--set`` overrides > file > case defaults.
    """
    data = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {path} is not valid YAML: {exc}")
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a mapping at top level")

    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, value = item.split("=", 1)
        _set_dotted(data, key.strip(), _parse_scalar(value.strip()))

    if case is not None:
        data["case"] = case
    if seed is not None:
        data["seed"] = seed
    if out_dir is not None:
        data["out_dir"] = out_dir

    if "case" not in data:
        raise ConfigError("case is required (flag --case or config key 'case')")
    if "seed" not in data:
        raise ConfigError("seed is required (flag --seed or config key 'seed')")

    cfg = default_config(str(data.pop("case")), int(data.pop("seed")))
    if "out_dir" in data:
        cfg.out_dir = str(data.pop("out_dir"))
    _apply_section(cfg, data)
    return cfg


def _apply_section(cfg: RunConfig, data: dict) -> None:
    sections = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}
    for key, value in data.items():
        if key in ("poisson", "burgers", "cavity", "stenosis"):
            if not isinstance(value, dict):
                raise ConfigError(f"section {key!r} must be a mapping")
            section = sections[key]
            valid = {f.name: f for f in dataclasses.fields(section)}
            for sub, sub_value in value.items():
                if sub not in valid:
                    raise ConfigError(f"unknown config key {key}.{sub}")
                setattr(section, sub, _coerce(sub_value, getattr(section, sub), f"{key}.{sub}"))
        elif key == "rank_tol":
            cfg.rank_tol = float(value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    cfg.__post_init__()


def _coerce(value, current, keypath):
    if isinstance(current, bool):
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{keypath} expects a boolean")
    if isinstance(current, int) and not isinstance(value, bool):
        if isinstance(value, int):
            return value
        raise ConfigError(f"{keypath} expects an integer")
    if isinstance(current, float):
        if isinstance(value, (int, float)):
            return float(value)
        raise ConfigError(f"{keypath} expects a number")
    if isinstance(current, tuple):
        if isinstance(value, (list, tuple)):
            return tuple(value)
        raise ConfigError(f"{keypath} expects a list")
    if isinstance(current, str):
        return str(value)
    return value


def _set_dotted(data: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = data
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override through non-mapping key {part!r}")
    node[parts[-1]] = value


def _parse_scalar(text: str):
    return yaml.safe_load(text)


def config_to_dict(cfg: RunConfig) -> dict:
    out = {"case": cfg.case, "seed": cfg.seed, "out_dir": cfg.out_dir, "rank_tol": cfg.rank_tol}
    for name in ("poisson", "burgers", "cavity", "stenosis"):
        out[name] = dataclasses.asdict(getattr(cfg, name))
    return out
