"""Catalogue of simulation settings and deterministic dataset draws.

A :class:`ScenarioTemplate` turns a dimension (plus optional free
parameters) into a concrete :class:`ScenarioSpec` holding the two samplers
and the sample sizes. :func:`draw_dataset` realises a spec from a seed;
the two groups come from independent PCG64 streams keyed by the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from .core import PooledSample
from .rng import derive_seed
from .samplers import AR1NormalSampler, Block, MixtureSampler, ProductSampler, iid, sampler_from_dict

GRID_LONG = tuple(2**k for k in range(1, 11))
GRID_SHORT = tuple(2**k for k in range(1, 9))

SPARSE_EXPONENT = 0.7


def floor_power(d: int, e: float) -> int:
    """floor(d**e), robust to rounding when d**e is an exact integer."""
    v = float(d) ** e
    r = round(v)
    return int(r) if abs(v - r) < 1e-9 * max(1.0, v) else int(math.floor(v))


SIZE_RULES: Dict[str, Callable[[int, dict], int]] = {
    "fixed": lambda d, p: int(p["n"]),
    "5+floor(d^gamma)": lambda d, p: 5 + floor_power(d, p["gamma"]),
    "5+floor(sqrt(d))": lambda d, p: 5 + math.isqrt(d),
    "d+5": lambda d, p: d + 5,
}


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    d: int
    n: int
    m: int
    f: object
    g: object
    params: dict = field(default_factory=dict)
    size_rule: str = "fixed"

    def __post_init__(self):
        if self.f.dim != self.d or self.g.dim != self.d:
            raise ValueError(f"{self.id}: sampler dimensions {self.f.dim}/{self.g.dim} differ from d={self.d}")
        if self.n < 3 or self.m < 3:
            raise ValueError(f"{self.id} at d={self.d}: sample sizes n={self.n}, m={self.m} must be >= 3")

    @property
    def label(self) -> str:
        """Scenario id with its free parameters, e.g. ``shrink[beta=0.5,gamma=1.1]``."""
        if not self.params:
            return self.id
        inner = ",".join(f"{k}={_fmt(v)}" for k, v in sorted(self.params.items()))
        return f"{self.id}[{inner}]"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "d": self.d,
            "n": self.n,
            "m": self.m,
            "size_rule": self.size_rule,
            "params": dict(self.params),
            "f": self.f.describe(),
            "g": self.g.describe(),
        }

    @classmethod
    def from_dict(cls, desc: dict) -> "ScenarioSpec":
        extra = set(desc) - {"id", "d", "n", "m", "size_rule", "params", "f", "g"}
        if extra:
            raise ValueError(f"unknown scenario keys: {sorted(extra)}")
        return cls(
            id=str(desc["id"]),
            d=int(desc["d"]),
            n=int(desc["n"]),
            m=int(desc["m"]),
            f=sampler_from_dict(desc["f"]),
            g=sampler_from_dict(desc["g"]),
            params=dict(desc.get("params", {})),
            size_rule=str(desc.get("size_rule", "fixed")),
        )


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


@dataclass(frozen=True)
class ScenarioTemplate:
    """A scenario family indexed by dimension and optional free parameters."""

    id: str
    description: str
    build: Callable[[int, dict], Tuple[object, object]]
    size_rule: str
    defaults: dict = field(default_factory=dict)
    dims: Tuple[int, ...] = GRID_LONG

    def at(self, d: int, **params) -> ScenarioSpec:
        d = int(d)
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise ValueError(f"{self.id} takes parameters {sorted(self.defaults)}, got {sorted(unknown)}")
        p = {**self.defaults, **params}
        missing = [k for k, v in p.items() if v is None]
        if missing:
            raise ValueError(f"{self.id} requires parameters {missing}")
        # canonical types keep labels (and hence derived seeds) stable
        p = {k: int(v) if k == "n" else float(v) for k, v in p.items()}
        f, g = self.build(d, p)
        size = SIZE_RULES[self.size_rule](d, p)
        # fixed-size families only expose n when it differs from the default
        shown = {k: v for k, v in p.items() if not (k == "n" and v == self.defaults.get("n"))}
        return ScenarioSpec(self.id, d, size, size, f, g, shown, self.size_rule)


def _halves(d, first, second):
    """Diagonal normal with standard deviations ``first`` on the first d//2 coordinates."""
    h = d // 2
    return ProductSampler([Block(h, scale=first), Block(d - h, scale=second)])


def _sparse_k(d):
    return floor_power(d, SPARSE_EXPONENT)


def _build_catalogue() -> Dict[str, ScenarioTemplate]:
    fixed50 = {"n": 50}
    t = [
        ScenarioTemplate(
            "ex1", "location: N(0, I) vs N(0.15 1, I)",
            lambda d, p: (iid(d), iid(d, loc=0.15)), "fixed", fixed50),
        ScenarioTemplate(
            "ex2", "scale: N(0, I) vs N(0, 1.1 I)",
            lambda d, p: (iid(d), iid(d, scale=math.sqrt(1.1))), "fixed", fixed50),
        ScenarioTemplate(
            "ex3", "swapped variance halves 1/2 vs 2/1",
            lambda d, p: (_halves(d, 1.0, math.sqrt(2.0)), _halves(d, math.sqrt(2.0), 1.0)), "fixed", fixed50),
        ScenarioTemplate(
            "ex4", "i.i.d. standard Cauchy vs Cauchy shifted by 1",
            lambda d, p: (iid(d, "cauchy"), iid(d, "cauchy", loc=1.0)), "fixed", fixed50),
        ScenarioTemplate(
            "ex5", "means +-d^-1/2 (constant mean gap)",
            lambda d, p: (iid(d, loc=d**-0.5), iid(d, loc=-(d**-0.5))), "fixed", fixed50),
        ScenarioTemplate(
            "ex6", "N(0, I) vs equal mixture of N(+-0.5 1, I)",
            lambda d, p: (iid(d), MixtureSampler([0.5, 0.5], [iid(d, loc=0.5), iid(d, loc=-0.5)])),
            "fixed", fixed50),
        ScenarioTemplate(
            "ex7", "N(0, I) vs 0.2 N(1, I) + 0.8 N(-0.25 1, I)",
            lambda d, p: (iid(d), MixtureSampler([0.2, 0.8], [iid(d, loc=1.0), iid(d, loc=-0.25)])),
            "fixed", fixed50),
        ScenarioTemplate(
            "ex8", "i.i.d. N(0, 2) vs standard t(4)",
            lambda d, p: (iid(d, scale=math.sqrt(2.0)), iid(d, "t", df=4.0)), "fixed", fixed50),
        ScenarioTemplate(
            "ex9", "means +-d^-0.3, n = m = 5 + floor(sqrt(d))",
            lambda d, p: (iid(d, loc=d**-0.3), iid(d, loc=-(d**-0.3))), "5+floor(sqrt(d))", {}, GRID_SHORT),
        ScenarioTemplate(
            "ex10", "swapped variance halves 1/5 vs 5/1, n = m = d + 5",
            lambda d, p: (_halves(d, 1.0, math.sqrt(5.0)), _halves(d, math.sqrt(5.0), 1.0)), "d+5", {}, GRID_SHORT),
        ScenarioTemplate(
            "ex11", "AR(1) correlation 0.1 vs 0.5, n = m = d + 5",
            lambda d, p: (AR1NormalSampler(d, 0.1), AR1NormalSampler(d, 0.5)), "d+5", {}, GRID_SHORT),
        ScenarioTemplate(
            "ex12", "first floor(d^0.7) means equal 2 vs N(0, I)",
            lambda d, p: (ProductSampler([Block(_sparse_k(d), loc=2.0), Block(d - _sparse_k(d))]), iid(d)),
            "5+floor(sqrt(d))", {}, GRID_SHORT),
        ScenarioTemplate(
            "ex13", "N(0, I) vs first floor(d^0.7) variances equal 5",
            lambda d, p: (iid(d), ProductSampler([Block(_sparse_k(d), scale=math.sqrt(5.0)), Block(d - _sparse_k(d))])),
            "5+floor(sqrt(d))", {}, GRID_SHORT),
        ScenarioTemplate(
            "ex14", "N(0, 2I) vs first floor(d^0.7) coordinates t(4)",
            lambda d, p: (
                iid(d, scale=math.sqrt(2.0)),
                ProductSampler([Block(_sparse_k(d), "t", df=4.0), Block(d - _sparse_k(d), scale=math.sqrt(2.0))]),
            ),
            "5+floor(sqrt(d))", {}, GRID_SHORT),
        ScenarioTemplate(
            "level", "null: both groups N(0, I)",
            lambda d, p: (iid(d), iid(d)), "fixed", fixed50),
        ScenarioTemplate(
            "shrink", "means +-d^-beta, n = m = 5 + floor(d^gamma)",
            lambda d, p: (iid(d, loc=d ** -p["beta"]), iid(d, loc=-(d ** -p["beta"]))),
            "5+floor(d^gamma)", {"beta": None, "gamma": None}),
    ]
    return {s.id: s for s in t}


_CATALOGUE = _build_catalogue()


def catalogue() -> list:
    """All scenario templates in catalogue order."""
    return list(_CATALOGUE.values())


def get_template(scenario_id: str) -> ScenarioTemplate:
    try:
        return _CATALOGUE[scenario_id]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario_id!r}; known: {', '.join(_CATALOGUE)}") from None


def make_scenario(scenario_id: str, d: int, **params) -> ScenarioSpec:
    return get_template(scenario_id).at(d, **params)


def draw_dataset(spec: ScenarioSpec, seed: int) -> PooledSample:
    """Realise ``spec``: n rows from F and m rows from G on independent streams."""
    rng_f = np.random.Generator(np.random.PCG64(derive_seed(seed, "F")))
    rng_g = np.random.Generator(np.random.PCG64(derive_seed(seed, "G")))
    return PooledSample(spec.f.sample(rng_f, spec.n), spec.g.sample(rng_g, spec.m))
