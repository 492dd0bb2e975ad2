"""Command line interface: ``balldiv {test,power,level,oracle,subsample}``.

Settings are resolved in the order config file, then preset, then explicit
flags. Exit status is 0 on success and 2 on any error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import yaml

PROG = "balldiv"


class CLIError(Exception):
    pass


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _int_list(text: str):
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _kind_list(text: str):
    return tuple(t.strip().lower() for t in text.split(",") if t.strip())


def _param(text: str):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        num = float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {key!r} needs a numeric value") from None
    return key.strip(), int(num) if num.is_integer() and "." not in val else num


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML study config (schema version 1)")
    common.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    common.add_argument("--threads", type=_positive, help="worker thread budget")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--preset", choices=("desk", "full"), help="desk: d <= 2^8, reps=200; full: all grids, reps=500")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    study = argparse.ArgumentParser(add_help=False)
    study.add_argument("--reps", type=_positive, help="Monte Carlo repetitions per grid point")
    study.add_argument("--B", type=_positive, dest="B", help="permutation replicates per test")
    study.add_argument("--alpha", type=float, help="nominal level")
    study.add_argument("--kinds", type=_kind_list, help="comma-separated distance kinds (l2,l1,exp,log)")

    p = argparse.ArgumentParser(prog=PROG, description="Ball-divergence two-sample tests and simulation studies.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", parents=[common], help="one permutation test on a labelled CSV")
    t.add_argument("csv", type=Path)
    t.add_argument("--label-column", default="label")
    t.add_argument("--kind", default="l2")
    t.add_argument("--B", type=_positive, dest="B", default=500)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--exhaustive", action="store_true", help="enumerate every relabeling")
    t.add_argument("--max-combinations", type=_positive, default=100_000)

    sub.add_parser("power", parents=[common, study], help="power study over a scenario grid")
    sub.add_parser("level", parents=[common, study], help="null (level) study")

    o = sub.add_parser("oracle", parents=[common], help="population oracles for one scenario")
    o.add_argument("--scenario", required=True)
    o.add_argument("--d", type=_positive, required=True)
    o.add_argument("--param", type=_param, action="append", default=[], help="scenario parameter key=value")
    o.add_argument("--kind", default="l2")
    o.add_argument("--M", type=_positive, dest="M", default=100_000, help="shared-draw replicates")
    o.add_argument("--energy-rows", type=_positive, default=500, help="rows per group for the energy distance")

    s = sub.add_parser("subsample", parents=[common, study], help="sub-sampling power study on a labelled CSV")
    s.add_argument("csv", type=Path, nargs="?")
    s.add_argument("--label-column")
    s.add_argument("--sizes", type=_int_list, help="comma-separated pooled sub-sample sizes")
    return p


def _raw_config(path):
    if path is None:
        return None
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise CLIError(f"{path}: config must be a mapping")
    return raw


def configure_threads(k):
    """Size the numba pool; raises the pool ceiling when numba is not loaded yet."""
    if k is None:
        return
    if "numba" not in sys.modules:
        current = os.environ.get("NUMBA_NUM_THREADS")
        if current is None or int(current) < k:
            os.environ["NUMBA_NUM_THREADS"] = str(k)
    import numba

    from . import _kernels  # noqa: F401  (selects the threading layer before the pool starts)

    limit = numba.config.NUMBA_NUM_THREADS
    if k > limit:
        warnings.warn(f"--threads {k} exceeds the numba pool size {limit}; using {limit}")
        k = limit
    numba.set_num_threads(k)


def _study_config(args, default_grid):
    from .config import PRESETS, StudyConfig, config_from_dict

    if args.config is not None:
        cfg = config_from_dict(_raw_config(args.config))
        if not cfg.grid:
            cfg = replace(cfg, grid=default_grid())
    else:
        cfg = StudyConfig(grid=default_grid())
        if args.preset is None:
            cfg = cfg.with_preset(PRESETS["desk"])
    if args.preset is not None:
        cfg = cfg.with_preset(PRESETS[args.preset])
    overrides = {k: getattr(args, k) for k in ("reps", "B", "alpha", "kinds", "seed") if getattr(args, k, None) is not None}
    return replace(cfg, **overrides) if overrides else cfg


def _emit(payload: dict, out):
    text = json.dumps(payload, indent=2, sort_keys=True)
    print(text)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(text + "\n", encoding="utf-8")


def cmd_test(args):
    from .core import PooledSample
    from .harness import load_csv
    from .permute import ExhaustivePlan, RandomPlan, permutation_test

    data = load_csv(args.csv, args.label_column)
    pooled = PooledSample(*data.groups)
    if args.exhaustive:
        plan = ExhaustivePlan(args.max_combinations)
    else:
        plan = RandomPlan(B=args.B, seed=args.seed if args.seed is not None else 0)
    res = permutation_test(pooled, args.kind, plan, args.alpha)
    payload = {"kind": args.kind, "labels": list(data.labels), "n": pooled.n, "m": pooled.m, "dim": pooled.dim}
    payload.update(res.to_dict())
    _emit(payload, args.out)


def _run_study(args, default_grid, table_name):
    from .harness import power_table, run_power_study, write_outputs

    cfg = _study_config(args, default_grid)
    curves = run_power_study(cfg, progress=args.verbose)
    if args.out is not None:
        write_outputs(args.out, curves, table_name=table_name, config=cfg)
    else:
        sys.stdout.write(power_table(curves))


def cmd_power(args):
    from .config import default_power_grid

    _run_study(args, default_power_grid, "power.csv")


def cmd_level(args):
    from .config import default_level_grid

    _run_study(args, default_level_grid, "level.csv")


def cmd_oracle(args):
    from .core import DistanceSpec
    from .oracle import (
        energy_distance_estimate,
        estimate_probability_profile,
        expected_statistic,
        expected_statistic_se,
        lower_bound_gap,
        separation_rate,
        theta_estimate,
        theta_lower_bound,
    )
    from .rng import derive_seed
    from .scenarios import draw_dataset, make_scenario

    seed = args.seed if args.seed is not None else 0
    spec = make_scenario(args.scenario, args.d, **dict(args.param))
    kind = DistanceSpec.from_name(args.kind)
    profile = estimate_probability_profile(spec.f, spec.g, kind, args.M, derive_seed(seed, spec.label, spec.d, "profile"))
    theta = theta_estimate(profile)
    bound = theta_lower_bound(profile)
    gap = lower_bound_gap(profile)
    big = replace(spec, n=args.energy_rows, m=args.energy_rows)
    ds = draw_dataset(big, derive_seed(seed, spec.label, spec.d, "energy"))
    energy = energy_distance_estimate(ds.x, ds.y, kind, seed=seed)
    payload = {
        "scenario": spec.label,
        "d": spec.d,
        "n": spec.n,
        "m": spec.m,
        "kind": args.kind,
        "M": args.M,
        "p": [float(v) for v in profile.p],
        "p_se": [float(v) for v in profile.standard_errors],
        "theta": theta.value,
        "theta_raw": theta.raw,
        "theta_se": theta.se,
        "theta_clamped": theta.clamped,
        "lower_bound": bound.value,
        "lower_bound_se": bound.se,
        "theta_minus_bound": gap.value,
        "theta_minus_bound_se": gap.se,
        "expected_statistic": expected_statistic(spec.n, spec.m, profile),
        "expected_statistic_se": expected_statistic_se(spec.n, spec.m, profile),
        "energy_distance": energy.value,
        "energy_distance_se": energy.se,
        "energy_rows": args.energy_rows,
        "separation_rate": separation_rate(spec.n, spec.m),
    }
    _emit(payload, args.out)


def cmd_subsample(args):
    from .config import SubsampleSection, config_from_dict
    from .harness import SubsampleStudy, load_csv, power_table, run_subsample_study, write_outputs

    section = None
    base = {}
    if args.config is not None:
        cfg = config_from_dict(_raw_config(args.config))
        section = cfg.subsample
        base = {"reps": cfg.reps, "alpha": cfg.alpha, "B": cfg.B, "kinds": cfg.kinds, "seed": cfg.seed}
    if args.preset is not None:
        from .config import PRESETS

        base["reps"] = PRESETS[args.preset].reps
    csv_path = args.csv or (section.csv if section else None)
    label_column = args.label_column or (section.label_column if section else "label")
    sizes = args.sizes or (section.sizes if section else None)
    if csv_path is None or not sizes:
        raise CLIError("subsample needs a CSV path and --sizes (or a config 'subsample' section)")
    for key in ("reps", "alpha", "B", "kinds", "seed"):
        if getattr(args, key, None) is not None:
            base[key] = getattr(args, key)
    data = load_csv(csv_path, label_column)
    study = SubsampleStudy(data=data, sizes=tuple(sizes), name=Path(csv_path).stem, **base)
    curves = run_subsample_study(study)
    if args.out is not None:
        write_outputs(args.out, curves, table_name="subsample.csv", x="size")
    else:
        sys.stdout.write(power_table(curves))


COMMANDS = {
    "test": cmd_test,
    "power": cmd_power,
    "level": cmd_level,
    "oracle": cmd_oracle,
    "subsample": cmd_subsample,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        threads = args.threads
        if threads is None and args.config is not None:
            threads = _raw_config(args.config).get("threads")
        configure_threads(threads)
        COMMANDS[args.command](args)
    except (CLIError, ValueError, OSError, KeyError, yaml.YAMLError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
