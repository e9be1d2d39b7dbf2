import os
import sys

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from core.lipschitz_functions import MaxFn
from core.measures import LaplaceMeasure, ParetoMeasure
from core.montecarlo import EstimationPlan
from core.run_config import ensure_complete_settings


def small_plan(measure=None, n=4, function=None, samples=4000, seed=7, batches=8, **kwargs):
    """An estimation plan sized for unit tests."""
    measure = ParetoMeasure(5.0) if measure is None else measure
    function = MaxFn(n) if function is None else function
    return EstimationPlan(measure=measure, dimension=n, function=function, samples=samples,
                          seed=seed, batches=batches, **kwargs)


def laplace_plan(n=1, function=None, samples=40_000, seed=11, batches=16, **kwargs):
    return small_plan(measure=LaplaceMeasure(1.0), n=n, function=function, samples=samples,
                      seed=seed, batches=batches, **kwargs)


def small_settings(output_dir, **overrides):
    """Run settings with reduced sample counts, writing under output_dir."""
    settings = {
        "samples": 4000,
        "batches": 8,
        "trials": 100,
        "trial_batches": 10,
        "cheeger_grid": 1024,
        "bruteforce_cells": 10,
        "output_dir": str(output_dir),
    }
    settings.update(overrides)
    return ensure_complete_settings(settings)
