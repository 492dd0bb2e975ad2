"""Power and level studies, real-data sub-sampling and result files.

Every random choice is keyed by a tuple hashed through
:func:`balldiv.rng.derive_seed`:

* dataset for repetition r of grid point (scenario, d): ``(seed, label, d, rep)``,
  shared by all distance kinds so their powers are paired;
* permutation replicates of that test: ``(seed, label, d, kind, rep)``.

Results therefore depend only on the configuration, never on the thread
count or on which other grid points are present.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import StudyConfig, dump_config
from .core import DistanceSpec, PooledSample, as_data_matrix
from .permute import RandomPlan, index_test
from .rng import derive_seed, generator
from .scenarios import draw_dataset
from .statistic import build_index

log = logging.getLogger(__name__)

POWER_COLUMNS = ("scenario", "d", "n", "m", "kind", "reps", "rejections", "power", "se", "meanP")


@dataclass(frozen=True)
class PowerCurve:
    """Rejection summary for one (scenario, d, kind) grid point."""

    scenario: str
    d: int
    n: int
    m: int
    kind: str
    reps: int
    rejections: int
    p_sum: float
    seconds: float = 0.0

    @property
    def power(self) -> float:
        return self.rejections / self.reps

    @property
    def se(self) -> float:
        p = self.power
        return math.sqrt(p * (1.0 - p) / self.reps)

    @property
    def mean_p(self) -> float:
        return self.p_sum / self.reps

    def row(self) -> dict:
        return {
            "scenario": self.scenario,
            "d": self.d,
            "n": self.n,
            "m": self.m,
            "kind": self.kind,
            "reps": self.reps,
            "rejections": self.rejections,
            "power": repr(self.power),
            "se": repr(self.se),
            "meanP": repr(self.mean_p),
        }


class _Tally:
    def __init__(self):
        self.rejections = 0
        self.p_sum = 0.0
        self.seconds = 0.0


def _run_tests(pooled: PooledSample, kinds, alpha, B, seed_of_kind, tallies):
    for kind in kinds:
        t0 = time.perf_counter()
        index = build_index(pooled, DistanceSpec.from_name(kind))
        res = index_test(index, RandomPlan(B=B, seed=seed_of_kind(kind)), alpha)
        tally = tallies[kind]
        tally.rejections += int(res.reject)
        tally.p_sum += res.p_value
        tally.seconds += time.perf_counter() - t0


def run_power_study(config: StudyConfig, progress: bool = False) -> List[PowerCurve]:
    """Run every (scenario, d) grid point of ``config`` for every distance kind.

    The whole grid is resolved first, so an infeasible point fails before
    any simulation starts.
    """
    specs = config.resolve()
    if not specs:
        raise ValueError("study grid is empty")
    out: List[PowerCurve] = []
    for spec in specs:
        label = spec.label
        tallies = {k: _Tally() for k in config.kinds}
        for rep in range(config.reps):
            pooled = draw_dataset(spec, derive_seed(config.seed, label, spec.d, rep))
            _run_tests(
                pooled,
                config.kinds,
                config.alpha,
                config.B,
                lambda kind: derive_seed(config.seed, label, spec.d, kind, rep),
                tallies,
            )
        for kind in config.kinds:
            t = tallies[kind]
            out.append(PowerCurve(label, spec.d, spec.n, spec.m, kind, config.reps, t.rejections, t.p_sum, t.seconds))
        if progress:
            log.info("%s d=%d: %s", label, spec.d, ", ".join(f"{c.kind}={c.power:.3f}" for c in out[-len(config.kinds):]))
    return out


# ---------------------------------------------------------------------------
# real data
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LabeledData:
    """Rows of a CSV split by a two-valued label column (labels sorted lexicographically)."""

    groups: Tuple[np.ndarray, np.ndarray]
    labels: Tuple[str, str]
    columns: Tuple[str, ...]

    @property
    def dim(self) -> int:
        return self.groups[0].shape[1]


def load_csv(path, label_column: str = "label") -> LabeledData:
    """Read a headed CSV whose non-label cells are finite reals.

    Raises
    ------
    ValueError
        On a missing label column, ragged rows, unparsable or non-finite
        cells (naming row and column), no data rows, or a label count other
        than two.
    """
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
        li = header.index(label_column)
        feature_names = tuple(h for k, h in enumerate(header) if k != li)
        if not feature_names:
            raise ValueError(f"{path}: no feature columns besides {label_column!r}")
        by_label: Dict[str, list] = {}
        nrows = 0
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: line {lineno} has {len(row)} fields, header has {len(header)}")
            values = []
            for k, cell in enumerate(row):
                if k == li:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise ValueError(f"{path}: line {lineno}, column {header[k]!r}: cannot parse {cell!r}") from None
                if not math.isfinite(v):
                    raise ValueError(f"{path}: line {lineno}, column {header[k]!r}: non-finite value {cell!r}")
                values.append(v)
            by_label.setdefault(row[li].strip(), []).append(values)
            nrows += 1
    if nrows == 0:
        raise ValueError(f"{path}: no data rows")
    if len(by_label) != 2:
        raise ValueError(f"{path}: expected exactly 2 labels in {label_column!r}, found {sorted(by_label)}")
    labels = tuple(sorted(by_label))
    groups = tuple(as_data_matrix(by_label[lab], f"group {lab!r}") for lab in labels)
    return LabeledData(groups, labels, feature_names)


def allocate(sizes: Sequence[int], total: int) -> Tuple[int, int]:
    """Split ``total`` between two groups in proportion to ``sizes``.

    Rounds to the nearest integer, ties toward the larger group, with at
    least 3 per group.
    """
    n0, n1 = int(sizes[0]), int(sizes[1])
    if total < 6:
        raise ValueError(f"pooled size {total} cannot give both groups at least 3")
    exact = total * n0 / (n0 + n1)
    lo = math.floor(exact)
    frac = exact - lo
    if frac > 0.5 or (frac == 0.5 and n0 >= n1):
        a0 = lo + 1
    else:
        a0 = lo
    a0 = min(max(a0, 3), total - 3)
    a1 = total - a0
    if a0 > n0 or a1 > n1:
        raise ValueError(f"pooled size {total} needs {a0}/{a1} rows but groups have {n0}/{n1}")
    return a0, a1


@dataclass(frozen=True, eq=False)
class SubsampleStudy:
    data: LabeledData
    sizes: Tuple[int, ...]
    reps: int = 500
    alpha: float = 0.05
    B: int = 500
    kinds: Tuple[str, ...] = ("l2", "l1", "exp", "log")
    seed: int = 0
    name: str = "data"

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not self.sizes:
            raise ValueError("sub-sample size grid is empty")


def run_subsample_study(study: SubsampleStudy) -> List[PowerCurve]:
    """Power of each kind on random proportional sub-samples of a two-group dataset.

    The returned curves carry the allocated (n, m) per pooled size; ``d``
    is the data dimension.
    """
    g0, g1 = study.data.groups
    plan = [(size, *allocate((g0.shape[0], g1.shape[0]), size)) for size in study.sizes]
    out: List[PowerCurve] = []
    for size, a0, a1 in plan:
        tallies = {k: _Tally() for k in study.kinds}
        for rep in range(study.reps):
            rng = generator(study.seed, "subsample", size, rep)
            i0 = np.sort(rng.choice(g0.shape[0], a0, replace=False))
            i1 = np.sort(rng.choice(g1.shape[0], a1, replace=False))
            pooled = PooledSample(g0[i0], g1[i1])
            _run_tests(
                pooled,
                study.kinds,
                study.alpha,
                study.B,
                lambda kind: derive_seed(study.seed, "subsample", size, kind, rep),
                tallies,
            )
        for kind in study.kinds:
            t = tallies[kind]
            out.append(PowerCurve(study.name, study.data.dim, a0, a1, kind, study.reps, t.rejections, t.p_sum, t.seconds))
    return out


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------

def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(header), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def power_table(curves: Sequence[PowerCurve]) -> str:
    return _csv_text(POWER_COLUMNS, [c.row() for c in curves])


def timing_table(curves: Sequence[PowerCurve]) -> str:
    rows = [{"scenario": c.scenario, "d": c.d, "n": c.n, "m": c.m, "kind": c.kind, "seconds": f"{c.seconds:.6f}"} for c in curves]
    return _csv_text(("scenario", "d", "n", "m", "kind", "seconds"), rows)


def panel_tables(curves: Sequence[PowerCurve], x: str = "log2d") -> Dict[str, str]:
    """One plot-data table per scenario: x column plus one power column per kind."""
    panels: Dict[str, Dict[float, Dict[str, float]]] = {}
    kinds_of: Dict[str, list] = {}
    for c in curves:
        xv = math.log2(c.d) if x == "log2d" else c.n + c.m
        panels.setdefault(c.scenario, {}).setdefault(xv, {})[c.kind] = c.power
        ks = kinds_of.setdefault(c.scenario, [])
        if c.kind not in ks:
            ks.append(c.kind)
    out = {}
    for scen, pts in panels.items():
        rows = []
        for xv in sorted(pts):
            row = {x: _fmt_x(xv)}
            row.update({k: repr(pts[xv][k]) if k in pts[xv] else "" for k in kinds_of[scen]})
            rows.append(row)
        out[scen] = _csv_text([x, *kinds_of[scen]], rows)
    return out


def _fmt_x(v) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _safe_name(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_.=" else "_" for ch in label).strip("_")


def write_outputs(
    out_dir,
    curves: Sequence[PowerCurve],
    table_name: str = "power.csv",
    x: str = "log2d",
    config: Optional[StudyConfig] = None,
) -> List[Path]:
    """Write the result table, plot-data panels, timings and the resolved config.

    Everything except ``timings.csv`` is a pure function of the inputs.
    """
    out = Path(out_dir)
    (out / "panels").mkdir(parents=True, exist_ok=True)
    files = {out / table_name: power_table(curves), out / "timings.csv": timing_table(curves)}
    for scen, text in panel_tables(curves, x).items():
        files[out / "panels" / f"{_safe_name(scen)}.csv"] = text
    if config is not None:
        # the worker budget does not affect results, so it is left out
        files[out / "config.resolved.yaml"] = dump_config(replace(config, threads=None))
    for path, text in files.items():
        path.write_text(text, encoding="utf-8")
    return sorted(files)
