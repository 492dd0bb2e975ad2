"""Study configuration: schema, YAML loading and presets.

Schema (version 1)::

    version: 1
    reps: 500            # Monte Carlo repetitions per grid point
    alpha: 0.05
    B: 500               # permutation replicates per test
    kinds: [l2, l1, exp, log]
    seed: 0              # master seed, unsigned 64-bit
    threads: 1           # optional worker budget
    grid:
      - scenario: ex2
        dims: [2, 4, 8]            # optional, default: the scenario's catalogue grid
        params: [{n: 50}]          # optional list of parameter sets
    subsample:                     # optional, used by the `subsample` command
      csv: data.csv
      label_column: label
      sizes: [15, 20, 31]

Unknown keys are rejected at every level.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import yaml

from .core import KIND_NAMES
from .scenarios import ScenarioSpec, catalogue, get_template

SCHEMA_VERSION = 1
_U64 = 1 << 64

SHRINK_BETAS = (0.2, 0.3, 0.5)
SHRINK_GAMMAS = (0.0, 0.4, 0.5, 0.6, 0.9, 1.0, 1.1)


@dataclass(frozen=True)
class Preset:
    name: str
    reps: int
    max_dim: Optional[int]


PRESETS = {
    "desk": Preset("desk", reps=200, max_dim=2**8),
    "full": Preset("full", reps=500, max_dim=None),
}


@dataclass(frozen=True)
class GridEntry:
    scenario: str
    dims: Tuple[int, ...] = ()
    params: Tuple[dict, ...] = ({},)

    def specs(self, max_dim: Optional[int] = None) -> list:
        template = get_template(self.scenario)
        dims = self.dims or template.dims
        if max_dim is not None:
            dims = tuple(d for d in dims if d <= max_dim)
        return [template.at(d, **p) for p in self.params for d in dims]


@dataclass(frozen=True)
class SubsampleSection:
    csv: str
    label_column: str
    sizes: Tuple[int, ...]


@dataclass(frozen=True)
class StudyConfig:
    """Everything that determines a study's output files."""

    grid: Tuple[GridEntry, ...]
    reps: int = 500
    alpha: float = 0.05
    B: int = 500
    kinds: Tuple[str, ...] = KIND_NAMES
    seed: int = 0
    threads: Optional[int] = None
    max_dim: Optional[int] = None
    subsample: Optional[SubsampleSection] = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.B < 1:
            raise ValueError(f"B must be >= 1, got {self.B}")
        if not 0 <= self.seed < _U64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.threads is not None and self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")
        unknown = [k for k in self.kinds if k not in KIND_NAMES]
        if unknown or not self.kinds:
            raise ValueError(f"kinds must be a non-empty subset of {list(KIND_NAMES)}, got {list(self.kinds)}")

    def resolve(self) -> list:
        """All grid points as concrete scenarios; invalid points raise before any work."""
        specs: list[ScenarioSpec] = []
        for entry in self.grid:
            specs.extend(entry.specs(self.max_dim))
        return specs

    def with_preset(self, preset: Preset) -> "StudyConfig":
        return replace(self, reps=preset.reps, max_dim=preset.max_dim)

    def to_dict(self) -> dict:
        out = {
            "version": SCHEMA_VERSION,
            "reps": self.reps,
            "alpha": self.alpha,
            "B": self.B,
            "kinds": list(self.kinds),
            "seed": self.seed,
        }
        if self.threads is not None:
            out["threads"] = self.threads
        if self.max_dim is not None:
            out["max_dim"] = self.max_dim
        out["grid"] = [
            {"scenario": e.scenario, "dims": list(e.dims), "params": [dict(p) for p in e.params]}
            for e in self.grid
        ]
        if self.subsample is not None:
            s = self.subsample
            out["subsample"] = {"csv": s.csv, "label_column": s.label_column, "sizes": list(s.sizes)}
        return out


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ValueError(f"{where}: expected a mapping, got {type(d).__name__}")
    extra = set(d) - allowed
    if extra:
        raise ValueError(f"{where}: unknown keys {sorted(extra)}")


def config_from_dict(raw: dict) -> StudyConfig:
    _reject_unknown(
        raw,
        {"version", "reps", "alpha", "B", "kinds", "seed", "threads", "max_dim", "grid", "subsample"},
        "config",
    )
    version = raw.get("version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"config: unsupported schema version {version!r} (expected {SCHEMA_VERSION})")
    grid = []
    for k, entry in enumerate(raw.get("grid") or []):
        _reject_unknown(entry, {"scenario", "dims", "params"}, f"grid[{k}]")
        if "scenario" not in entry:
            raise ValueError(f"grid[{k}]: missing 'scenario'")
        params = entry.get("params") or [{}]
        if isinstance(params, dict):
            params = [params]
        grid.append(
            GridEntry(
                scenario=str(entry["scenario"]),
                dims=tuple(int(d) for d in entry.get("dims") or ()),
                params=tuple(dict(p) for p in params),
            )
        )
    sub = raw.get("subsample")
    if sub is not None:
        _reject_unknown(sub, {"csv", "label_column", "sizes"}, "subsample")
        sub = SubsampleSection(
            csv=str(sub["csv"]),
            label_column=str(sub.get("label_column", "label")),
            sizes=tuple(int(s) for s in sub["sizes"]),
        )
    kwargs = {}
    for key, cast in (("reps", int), ("alpha", float), ("B", int), ("seed", int), ("threads", int), ("max_dim", int)):
        if raw.get(key) is not None:
            kwargs[key] = cast(raw[key])
    if "kinds" in raw:
        kwargs["kinds"] = tuple(str(k).lower() for k in raw["kinds"])
    return StudyConfig(grid=tuple(grid), subsample=sub, **kwargs)


def load_config(path) -> StudyConfig:
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if raw is None:
        raise ValueError(f"{path}: empty config")
    return config_from_dict(raw)


def dump_config(config: StudyConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)


def default_power_grid() -> Tuple[GridEntry, ...]:
    """Every example on its catalogue grid plus the shrinking-alternative grid."""
    entries = [GridEntry(t.id) for t in catalogue() if t.id.startswith("ex")]
    prop = tuple({"beta": b, "gamma": g} for b in SHRINK_BETAS for g in SHRINK_GAMMAS)
    entries.append(GridEntry("shrink", params=prop))
    return tuple(entries)


def default_level_grid() -> Tuple[GridEntry, ...]:
    return (GridEntry("level"),)

