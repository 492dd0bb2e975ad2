"""Samples, labelings and the generalized distance family.

A generalized distance between two d-dimensional points is

    phi(a, b) = h( (1/d) * sum_q psi(|a_q - b_q|^2) )

with h, psi monotone on [0, inf) and h(0) = psi(0) = 0. Four members are
built in; arbitrary (h, psi) pairs are accepted through :meth:`DistanceSpec.custom`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels


class DistanceKind(enum.IntEnum):
    L2 = _kernels.L2
    L1 = _kernels.L1
    EXP = _kernels.EXP
    LOG = _kernels.LOG
    CUSTOM = 99


@dataclass(frozen=True)
class DistanceSpec:
    """Selection of the dissimilarity used to build balls.

    ``h`` and ``psi`` are only set for custom specs. They must accept and
    return numpy arrays elementwise.
    """

    kind: DistanceKind
    h: Optional[Callable] = field(default=None, compare=False)
    psi: Optional[Callable] = field(default=None, compare=False)
    label: str = ""

    @classmethod
    def from_name(cls, name: str) -> "DistanceSpec":
        try:
            return BUILTIN[name.lower()]
        except KeyError:
            raise ValueError(
                f"unknown distance kind {name!r}; expected one of {sorted(BUILTIN)}"
            ) from None

    @classmethod
    def custom(cls, h: Callable, psi: Callable, label: str = "custom") -> "DistanceSpec":
        for fn, nm in ((h, "h"), (psi, "psi")):
            if float(np.asarray(fn(np.zeros(1)))[0]) != 0.0:
                raise ValueError(f"{nm}(0) must be 0")
        return cls(DistanceKind.CUSTOM, h=h, psi=psi, label=label)

    @property
    def name(self) -> str:
        return self.label or self.kind.name.lower()

    @property
    def is_builtin(self) -> bool:
        return self.kind != DistanceKind.CUSTOM

    def apply_h(self, t):
        """Apply the outer map h to (arrays of) coordinate-averaged psi values."""
        t = np.asarray(t, dtype=float)
        if self.kind == DistanceKind.L2:
            return np.sqrt(t)
        if self.is_builtin:
            return t
        return np.asarray(self.h(t), dtype=float)

    def psi_mean_rows(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Coordinate-averaged psi between rows of ``a`` (k, d) and a point/rows ``b``."""
        sq = (a - b) ** 2
        return np.asarray(self.psi(sq), dtype=float).mean(axis=-1)


BUILTIN = {
    "l2": DistanceSpec(DistanceKind.L2, label="l2"),
    "l1": DistanceSpec(DistanceKind.L1, label="l1"),
    "exp": DistanceSpec(DistanceKind.EXP, label="exp"),
    "log": DistanceSpec(DistanceKind.LOG, label="log"),
}
KIND_NAMES = tuple(BUILTIN)


def as_data_matrix(values, name: str = "data") -> np.ndarray:
    """Validate and copy observations into a read-only (rows, dim) float64 array."""
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name}: expected a 2-D array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: needs at least one row and one column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        r, c = np.argwhere(~np.isfinite(arr))[0]
        raise ValueError(f"{name}: non-finite value at row {r}, column {c}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _as_point(v, name):
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr[None]
    if arr.ndim != 1 or arr.shape[0] < 1:
        raise ValueError(f"{name}: expected a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: non-finite coordinate")
    return np.ascontiguousarray(arr)


def distance(a, b, spec: DistanceSpec) -> float:
    """Generalized distance between two observation vectors."""
    a = _as_point(a, "a")
    b = _as_point(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    if spec.is_builtin:
        return float(_kernels.pair_distance(a, b, int(spec.kind)))
    return float(spec.apply_h(spec.psi_mean_rows(a, b)))


def psi_mean_matrix(u: np.ndarray, spec: DistanceSpec) -> np.ndarray:
    """Pairwise coordinate-averaged psi values (h not applied)."""
    if spec.is_builtin:
        return _kernels.pairwise_matrix(u, int(spec.kind), False)
    N = u.shape[0]
    out = np.zeros((N, N))
    for i in range(N - 1):
        row = spec.psi_mean_rows(u[i + 1:], u[i])
        out[i, i + 1:] = row
        out[i + 1:, i] = row
    return out


def cross_psi_mean_matrix(x: np.ndarray, y: np.ndarray, spec: DistanceSpec) -> np.ndarray:
    if spec.is_builtin:
        return _kernels.cross_matrix(x, y, int(spec.kind), False)
    return np.stack([spec.psi_mean_rows(y, xi) for xi in x])


def pairwise_distances(u: np.ndarray, spec: DistanceSpec) -> np.ndarray:
    """Symmetric N x N matrix of generalized distances with a zero diagonal."""
    if spec.is_builtin:
        return _kernels.pairwise_matrix(u, int(spec.kind), True)
    out = spec.apply_h(psi_mean_matrix(u, spec))
    np.fill_diagonal(out, 0.0)
    return out


def rowwise_distances(a: np.ndarray, b: np.ndarray, spec: DistanceSpec) -> np.ndarray:
    """Distances between matching rows of two (k, d) arrays."""
    if spec.is_builtin:
        return _kernels.rowwise_distances(
            np.ascontiguousarray(a, dtype=float), np.ascontiguousarray(b, dtype=float), int(spec.kind)
        )
    return spec.apply_h(spec.psi_mean_rows(a, b))


@dataclass(frozen=True)
class PooledSample:
    """Two samples with a common dimension; x holds the first n rows of the pool."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_data_matrix(self.x, "x")
        y = as_data_matrix(self.y, "y")
        if x.shape[1] != y.shape[1]:
            raise ValueError(f"dimension mismatch: x has {x.shape[1]} columns, y has {y.shape[1]}")
        if x.shape[0] < 3 or y.shape[0] < 3:
            raise ValueError(
                f"each sample needs at least 3 rows (got n={x.shape[0]}, m={y.shape[0]})"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def N(self) -> int:
        return self.n + self.m

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def pooled(self) -> np.ndarray:
        return np.ascontiguousarray(np.vstack([self.x, self.y]))

    def identity_labels(self) -> np.ndarray:
        labels = np.zeros(self.N, dtype=np.int8)
        labels[self.n:] = 1
        return labels


def check_labeling(labels, n: int, m: int) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.shape != (n + m,):
        raise ValueError(f"labeling must have length {n + m}, got shape {lab.shape}")
    if not np.all((lab == 0) | (lab == 1)):
        raise ValueError("labels must be 0 or 1")
    zeros = int(np.count_nonzero(lab == 0))
    if zeros != n:
        raise ValueError(f"labeling has {zeros} zeros and {n + m - zeros} ones; expected {n} and {m}")
    return np.ascontiguousarray(lab, dtype=np.int8)


def labeling_from_permutation(perm, n: int) -> np.ndarray:
    """Label 0 for positions perm[:n], label 1 for the rest."""
    perm = np.asarray(perm)
    N = perm.shape[0]
    if perm.ndim != 1 or not np.issubdtype(perm.dtype, np.integer):
        raise ValueError("permutation must be a 1-D integer sequence")
    if not np.array_equal(np.sort(perm), np.arange(N)):
        raise ValueError("not a permutation of 0..N-1")
    if not 0 < n < N:
        raise ValueError(f"need 0 < n < N, got n={n}, N={N}")
    labels = np.ones(N, dtype=np.int8)
    labels[perm[:n]] = 0
    return labels
