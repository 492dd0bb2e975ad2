"""Ball-divergence two-sample testing with generalized distances.

Submodules are imported on first attribute access so that the command
line entry point can size the numba thread pool before numba loads.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "DistanceKind": "core",
    "DistanceSpec": "core",
    "PooledSample": "core",
    "distance": "core",
    "pairwise_distances": "core",
    "BallIndex": "statistic",
    "StatisticValue": "statistic",
    "ball_statistic": "statistic",
    "ball_statistic_fast": "statistic",
    "ball_statistic_naive": "statistic",
    "build_index": "statistic",
    "index_from_distances": "statistic",
    "ExhaustivePlan": "permute",
    "RandomPlan": "permute",
    "TestResult": "permute",
    "cutoff_upper_bound": "permute",
    "perm_conditional_expectation": "permute",
    "permutation_test": "permute",
    "ProbabilityProfile": "oracle",
    "energy_distance_estimate": "oracle",
    "estimate_probability_profile": "oracle",
    "expected_statistic": "oracle",
    "separation_rate": "oracle",
    "theta_estimate": "oracle",
    "ScenarioSpec": "scenarios",
    "catalogue": "scenarios",
    "draw_dataset": "scenarios",
    "make_scenario": "scenarios",
    "StudyConfig": "config",
    "load_config": "config",
    "PowerCurve": "harness",
    "SubsampleStudy": "harness",
    "load_csv": "harness",
    "run_power_study": "harness",
    "run_subsample_study": "harness",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name):
    mod = _EXPORTS.get(name)
    if mod is None:
        raise AttributeError(f"module 'balldiv' has no attribute {name!r}")
    value = getattr(importlib.import_module(f"{__name__}.{mod}"), name)
    globals()[name] = value
    return value


def __dir__():
    return sorted(set(globals()) | set(__all__))
