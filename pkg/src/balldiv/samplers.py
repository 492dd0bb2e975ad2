"""Vectorised samplers for the simulation families.

Each sampler has a fixed dimension, draws ``size`` rows from a numpy
Generator, and round-trips through a plain-dict descriptor so scenarios
can be written to and read from config files.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

_DISTS = ("normal", "cauchy", "t")


@dataclass(frozen=True)
class Block:
    """``size`` i.i.d. coordinates from one location-scale family."""

    size: int
    dist: str = "normal"
    loc: float = 0.0
    scale: float = 1.0
    df: float | None = None

    def __post_init__(self):
        if self.size < 0:
            raise ValueError("block size must be non-negative")
        if self.dist not in _DISTS:
            raise ValueError(f"unknown coordinate distribution {self.dist!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if self.dist == "t" and (self.df is None or self.df <= 0):
            raise ValueError("t blocks need df > 0")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        shape = (size, self.size)
        if self.dist == "normal":
            z = rng.standard_normal(shape)
        elif self.dist == "cauchy":
            z = rng.standard_cauchy(shape)
        else:
            z = rng.standard_t(self.df, shape)
        return self.loc + self.scale * z

    def describe(self) -> dict:
        out = {"size": self.size, "dist": self.dist, "loc": self.loc, "scale": self.scale}
        if self.df is not None:
            out["df"] = self.df
        return out


class ProductSampler:
    """Independent coordinates, grouped into consecutive blocks."""

    def __init__(self, blocks: Sequence[Block]):
        self.blocks = tuple(b for b in blocks if b.size > 0)
        self.dim = sum(b.size for b in self.blocks)
        if self.dim < 1:
            raise ValueError("sampler needs at least one coordinate")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.hstack([b.draw(rng, size) for b in self.blocks])

    def describe(self) -> dict:
        return {"family": "product", "blocks": [b.describe() for b in self.blocks]}


def iid(dim: int, dist: str = "normal", loc: float = 0.0, scale: float = 1.0, df=None) -> ProductSampler:
    return ProductSampler([Block(dim, dist, loc, scale, df)])


class AR1NormalSampler:
    """Stationary Gaussian AR(1) across coordinates: corr(X_q, X_q') = r^|q - q'|."""

    def __init__(self, dim: int, r: float, loc: float = 0.0, scale: float = 1.0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if not -1.0 < r < 1.0:
            raise ValueError("AR(1) coefficient must lie in (-1, 1)")
        self.dim, self.r, self.loc, self.scale = dim, float(r), float(loc), float(scale)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        z = rng.standard_normal((size, self.dim))
        x = np.empty_like(z)
        x[:, 0] = z[:, 0]
        innov = np.sqrt(1.0 - self.r * self.r)
        for q in range(1, self.dim):
            x[:, q] = self.r * x[:, q - 1] + innov * z[:, q]
        return self.loc + self.scale * x

    def describe(self) -> dict:
        return {"family": "ar1_normal", "dim": self.dim, "r": self.r, "loc": self.loc, "scale": self.scale}


class MixtureSampler:
    def __init__(self, weights: Sequence[float], components: Sequence):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or len(w) != len(components) or len(w) == 0:
            raise ValueError("weights and components must be non-empty and of equal length")
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
            raise ValueError("mixture weights must be non-negative and sum to 1")
        dims = {c.dim for c in components}
        if len(dims) != 1:
            raise ValueError(f"mixture components disagree on dimension: {sorted(dims)}")
        self.weights = w / w.sum()
        self.components = tuple(components)
        self.dim = dims.pop()

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        which = rng.choice(len(self.components), size=size, p=self.weights)
        out = np.empty((size, self.dim))
        for c, comp in enumerate(self.components):
            rows = np.flatnonzero(which == c)
            if rows.size:
                out[rows] = comp.sample(rng, rows.size)
        return out

    def describe(self) -> dict:
        return {
            "family": "mixture",
            "weights": [float(w) for w in self.weights],
            "components": [c.describe() for c in self.components],
        }


def sampler_from_dict(desc: dict):
    """Inverse of ``describe()``; unknown keys are rejected."""
    desc = dict(desc)
    family = desc.pop("family", None)
    if family == "product":
        _only(desc, {"blocks"}, family)
        return ProductSampler([Block(**_checked_block(b)) for b in desc["blocks"]])
    if family == "ar1_normal":
        _only(desc, {"dim", "r", "loc", "scale"}, family)
        return AR1NormalSampler(**desc)
    if family == "mixture":
        _only(desc, {"weights", "components"}, family)
        return MixtureSampler(desc["weights"], [sampler_from_dict(c) for c in desc["components"]])
    raise ValueError(f"unknown sampler family {family!r}")


def _checked_block(b):
    _only(b, {"size", "dist", "loc", "scale", "df"}, "product block")
    return b


def _only(desc, allowed, where):
    extra = set(desc) - allowed
    if extra:
        raise ValueError(f"unknown keys for {where}: {sorted(extra)}")
