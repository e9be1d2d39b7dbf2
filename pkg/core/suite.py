"""
The acceptance battery: independent verification jobs, each seeded from the
master seed by a fixed hash, run on a process pool and written in job order.
"""

import multiprocessing as mp
import time
import traceback
from pathlib import Path

from . import cheeger, constants, experiments, helpers, linalg, quantile_lab
from .errors import ConfigError
from .experiments import ExperimentResult
from .measures import LaplaceMeasure, ParetoMeasure
from .report_writer import write_report
from .reports import FAIL, INCONCLUSIVE, PASS, bound_report, equality_report, overall_verdict
from .streams import derive_seed

ERROR = "error"

PARETO_LAMBDA = 5.0
CONSTANT_TOL = 1e-12
CHEEGER_TOL = 1e-6
GRID_REL_TOL = 0.05


def _pareto_certified(lam=PARETO_LAMBDA):
    bound = constants.pareto_cheeger_bound(lam)
    return bound.inputs.alpha, bound.value


# --- Jobs: each takes (seed, settings) and returns an ExperimentResult ---

def constants_job(seed, settings):
    reports = [
        equality_report("constants", "C(5) = 2^2.4", constants.pareto_C_lambda(5.0).value, 2.0 ** 2.4,
                        tolerance=CONSTANT_TOL * 2.0 ** 2.4),
        equality_report("constants", "C2(0.8, 1) = 64", constants.C2_theorem_constant(0.8, 1.0).value, 64.0,
                        tolerance=CONSTANT_TOL * 64.0),
    ]
    for alpha, cheeger_value in ((0.8, 1.0), _pareto_certified()):
        c3 = constants.C3_theorem_constant(alpha, cheeger_value).value
        c2 = constants.C2_theorem_constant(alpha, cheeger_value).value
        reports.append(equality_report("constants", f"C3 closed form = C3 via c4, I={cheeger_value:.6g}", c3,
                                       constants.C3_via_c4(alpha, cheeger_value), tolerance=CONSTANT_TOL * c3))
        reports.append(equality_report("constants", f"C2 closed form = C2 via c4, I={cheeger_value:.6g}", c2,
                                       constants.C2_via_c4(alpha, cheeger_value), tolerance=CONSTANT_TOL * c2))
    return ExperimentResult(name="constants", reports=reports,
                            summary={"table": [row.as_dict() for row in constants.constants_table(lam=5.0)]})


def cheeger_job(seed, settings):
    alpha, certified = _pareto_certified()
    measure = ParetoMeasure(PARETO_LAMBDA)
    scan = cheeger.half_line_scan(measure, alpha, grid=settings["cheeger_grid"])
    grid = cheeger.grid_bruteforce(measure, alpha, cells=settings["bruteforce_cells"])
    reports = [
        equality_report("cheeger_half_line", "half-line scan = (lambda-1)^(-alpha)", scan.value, certified,
                        tolerance=CHEEGER_TOL, extras={"witness_p": scan.witness["p"]}),
        equality_report("cheeger_grid", "grid search within 5% of the half-line scan", grid.value, scan.value,
                        tolerance=GRID_REL_TOL * scan.value, extras={"mask": grid.witness["mask"]}),
    ]
    return ExperimentResult(name="cheeger", reports=reports,
                            summary={"half_line": scan.as_dict(), "grid": grid.as_dict()})


def lemmas_job(seed, settings):
    return ExperimentResult(name="lemmas", reports=quantile_lab.run_lemma_suite(lam=PARETO_LAMBDA))


def pareto_job(seed, settings):
    return experiments.verify_pareto_theorem(PARETO_LAMBDA, [16, 64, 256, 1024], samples=settings["samples"],
                                             seed=seed, batches=settings["batches"],
                                             confidence=settings["confidence"])


def product_job(seed, settings):
    alpha, certified = _pareto_certified()
    measure = ParetoMeasure(PARETO_LAMBDA)
    l2 = constants.l2_certificate(alpha, certified)
    l1 = constants.l1_certificate(alpha, 2.0, certified)
    common = dict(samples=settings["samples"], batches=settings["batches"], confidence=settings["confidence"])
    results = [
        experiments.verify_product_theorem(measure, l2, "max", 64, seed=derive_seed(seed, "product:64"), **common),
        experiments.verify_product_theorem(measure, l2, "identity", 1, seed=derive_seed(seed, "product:1"), **common),
        experiments.verify_dp_theorem(measure, l1, 1.5, "scaled_sum", 16, seed=derive_seed(seed, "dp:1.5"), **common),
        experiments.verify_dp_theorem(measure, l1, float("inf"), "max", 16, seed=derive_seed(seed, "dp:inf"),
                                      **common),
        experiments.verify_isoperimetric(measure, l2, [[1.0, 1.2], [1.0, 1.2]], [[3.0, 5.0], [3.0, 5.0]]),
        experiments.verify_isoperimetric(measure, l2, [[1.0, float(measure.quantile(0.25))]],
                                         [[float(measure.quantile(0.75)), float("inf")]]),
        experiments.exponent_comparison_report(alpha),
    ]
    return ExperimentResult(name="product", reports=[r for res in results for r in res.reports],
                            plot_rows=[row for res in results[:4] for row in res.plot_rows])


def tails_job(seed, settings):
    alpha, certified = _pareto_certified()
    common = dict(samples=settings["samples"], batches=settings["batches"],
                  confidence=settings["equality_confidence"])
    pareto = experiments.verify_tail_bounds(ParetoMeasure(PARETO_LAMBDA), alpha, certified, [0.5, 1.0, 2.0, 4.0],
                                            seed=derive_seed(seed, "tails:pareto"), **common)
    laplace = experiments.verify_tail_bounds(LaplaceMeasure(1.0), 1.0, 1.0, [0.5, 1.0, 2.0, 3.0],
                                             seed=derive_seed(seed, "tails:laplace"), **common)
    return ExperimentResult(name="tails", reports=pareto.reports + laplace.reports)


def sharp_dp_job(seed, settings):
    return experiments.verify_sharp_poincare_dp(LaplaceMeasure(1.0), 4.0, 1.5, [8, 27, 64],
                                                samples=settings["samples"], seed=seed,
                                                batches=settings["batches"],
                                                confidence=settings["equality_confidence"])


def matrix_job(seed, settings):
    result = experiments.verify_random_matrix(PARETO_LAMBDA, 50, trials=settings["trials"], seed=seed,
                                              batches=settings["trial_batches"],
                                              confidence=settings["confidence"])
    reports = list(result.reports)
    reports += linalg.hoffman_wielandt_battery(8, 100, derive_seed(seed, "hoffman-wielandt"))
    for k in range(5):
        matrix = linalg.random_symmetric_matrix(5, derive_seed(seed, "invariants"), k)
        check = linalg.spectral_invariants(matrix)
        reports.append(bound_report("spectral_invariants", f"|sum l_i - tr A|, random 5x5 #{k}",
                                    check["trace_error"], check["tolerance"],
                                    extras={"frobenius_error": check["frobenius_error"]}))
    return ExperimentResult(name="matrix", reports=reports, plot_rows=result.plot_rows)


def tightness_job(seed, settings):
    return experiments.tightness_report(0.8, [2.0 ** k for k in range(1, 9)])


JOBS = {
    "constants": constants_job,
    "cheeger": cheeger_job,
    "lemmas": lemmas_job,
    "pareto": pareto_job,
    "product": product_job,
    "tails": tails_job,
    "sharp-dp": sharp_dp_job,
    "matrix": matrix_job,
    "tightness": tightness_job,
}


def run_job(name, seed, settings):
    """Runs one job; exceptions become an error record instead of killing the pool."""
    start_time = time.time()
    try:
        result = JOBS[name](seed, settings)
        verdict = overall_verdict(result.reports)
        print(f"[SUITE] Job '{name}' finished: {verdict} (took {helpers.elapsed_ms(start_time):.2f}ms)")
        return {"job": name, "status": verdict, "result": result, "error": None}
    except Exception as e:
        print(f"[SUITE] ❌ Job '{name}' raised {type(e).__name__}: {e}")
        traceback.print_exc()
        return {"job": name, "status": ERROR, "result": None, "error": f"{type(e).__name__}: {e}"}


def suite_verdict(statuses):
    """error outranks fail, fail outranks inconclusive."""
    if ERROR in statuses:
        return ERROR
    if FAIL in statuses:
        return FAIL
    if all(s == PASS for s in statuses):
        return PASS
    return INCONCLUSIVE


def run_suite(settings, output_dir, jobs=None, config=None):
    """Runs the battery and writes one report per job plus suite_summary.json."""
    start_time = time.time()
    names = list(JOBS) if not jobs else list(jobs)
    unknown = [n for n in names if n not in JOBS]
    if unknown:
        raise ConfigError(f"unknown suite jobs: {', '.join(unknown)} (known: {', '.join(JOBS)})")
    master_seed = settings["master_seed"]
    args = [(name, derive_seed(master_seed, f"suite:{name}"), settings) for name in names]
    workers = settings.get("workers", 1)
    print(f"[SUITE] Running {len(names)} jobs on {workers} worker(s)")

    if workers > 1:
        with mp.Pool(processes=min(workers, len(args))) as pool:
            pending = [pool.apply_async(run_job, a) for a in args]
            outcomes = [r.get() for r in pending]
    else:
        outcomes = [run_job(*a) for a in args]

    output_dir = Path(output_dir)
    fmt = settings.get("output_format", "json")
    config = dict(config or {})
    summary_jobs = []
    for (name, seed, _), outcome in zip(args, outcomes):
        entry = {"job": name, "seed": seed, "status": outcome["status"], "error": outcome["error"], "path": None}
        if outcome["result"] is not None:
            path = output_dir / f"{name}.{fmt}"
            write_report(name, {**config, "job": name, "seed": seed}, [outcome["result"]], path, fmt)
            entry["path"] = path.name
        summary_jobs.append(entry)

    verdict = suite_verdict([j["status"] for j in summary_jobs])
    summary = ExperimentResult(name="suite", reports=[])
    summary.summary = {"jobs": summary_jobs}
    write_report("suite_summary", {**config, "verdict": verdict}, [summary],
                 output_dir / "suite_summary.json", "json")
    print(f"[SUITE] Finished with verdict '{verdict}' (took {helpers.elapsed_ms(start_time):.2f}ms)")
    return verdict, summary_jobs
