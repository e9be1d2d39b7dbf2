"""
Command-line surface: constants tables, Cheeger estimates, lemma checks,
Monte Carlo estimates, the bound verifiers and the acceptance suite.

Exit codes: 0 all pass, 2 any fail, 3 inconclusive only, 1 usage, config
or domain errors.
"""

import argparse
import json
import math
import time

from . import cheeger, constants, experiments, helpers, montecarlo, quantile_lab, suite
from .errors import ConfigError, DomainError, ReportIntegrityError, SolverError
from .experiments import ExperimentResult
from .lipschitz_functions import build_function
from .measures import ParetoMeasure, build_measure
from .report_writer import write_report
from .reports import FAIL, INCONCLUSIVE, PASS, bound_report, equality_report, overall_verdict
from .run_config import OUTPUT_FORMATS, RunConfig, ensure_complete_settings, get_default_settings, load_run_config

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3

VERDICT_EXIT_CODES = {PASS: EXIT_PASS, FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE, suite.ERROR: EXIT_ERROR}

# flag dest -> settings key
SETTING_FLAGS = {
    "seed": "master_seed",
    "samples": "samples",
    "batches": "batches",
    "workers": "workers",
    "format": "output_format",
    "confidence": "confidence",
    "memory_budget": "memory_budget",
    "trials": "trials",
}
NON_PARAM_FLAGS = set(SETTING_FLAGS) | {"config", "output", "handler", "subcommand"}

CHEEGER_MATCH_TOL = 1e-6


# --- Flag value parsers ---

def _float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number (got {text!r})") from None
    if math.isnan(value):
        raise argparse.ArgumentTypeError("nan is not a valid value")
    return value


def _float_list(text):
    return [_float(part) for part in text.split(",") if part.strip()]


def _int_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers (got {text!r})") from None


def _json_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"expected JSON (got {text!r}): {e}") from None


# --- Shared resolution of measures, functions and certificates ---

def _measure(args):
    name = args.measure
    if name == "pareto":
        return build_measure(name, lam=args.lam)
    if name == "laplace":
        return build_measure(name, t=args.t)
    if name == "extremal":
        return build_measure(name, alpha=args.law_alpha, cheeger=args.law_cheeger)
    return build_measure(name, lo=args.lo, hi=args.hi)


def _function(args, n):
    name = args.fn
    if name == "scaled_sum":
        return build_function(name, n=n, p=2.0 if getattr(args, "p", None) is None else args.p)
    if name == "activation":
        return build_function(name, m=args.m)
    if name == "identity":
        return build_function(name)
    if name == "l2_norm" or name == "max":
        return build_function(name, n=n)
    raise ConfigError(f"function '{name}' cannot be built from flags; use max, scaled_sum, l2_norm, "
                      f"identity or activation")


def _cheeger_inputs(args, measure):
    """(alpha, I) from --alpha/--cheeger, else the closed form known for the law."""
    if args.alpha is not None and args.cheeger is not None:
        return args.alpha, args.cheeger
    if args.alpha is not None or args.cheeger is not None:
        raise ConfigError("--alpha and --cheeger must be given together")
    if isinstance(measure, ParetoMeasure):
        bound = constants.pareto_cheeger_bound(measure.lam)
        return bound.inputs.alpha, bound.value
    if measure.name == "laplace":
        return 1.0, 1.0 / measure.t
    if measure.name == "extremal":
        return measure.alpha, measure.cheeger
    raise ConfigError(f"no default Cheeger certificate for {measure.name}; pass --alpha and --cheeger")


def _plan_kwargs(settings):
    return {"samples": settings["samples"], "batches": settings["batches"],
            "workers": settings["workers"], "confidence": settings["confidence"]}


# --- Subcommands: each returns a list of ExperimentResult ---

def _cmd_constants(args, config):
    rows = constants.constants_table(lam=args.lam, alpha=args.alpha, cheeger=args.cheeger,
                                     beta=args.beta, gamma=args.gamma)
    if not rows:
        raise ConfigError("constants needs --lambda, or --alpha together with --cheeger")
    for row in rows:
        print(f"[CLI] {row.name:<28} {row.value:.12g}  ({row.domain_note})")
    table = [row.as_dict() for row in rows]
    return [ExperimentResult(name="constants", reports=[], summary={"table": table},
                             plot_columns=["name", "value", "domain_note"],
                             plot_rows=[[r.name, r.value, r.domain_note] for r in rows])]


def _cmd_cheeger_estimate(args, config):
    measure = _measure(args)
    settings = config.settings
    alpha = args.alpha
    estimates, reports = {}, []
    if args.method in ("half_line", "all"):
        estimates["half_line"] = cheeger.half_line_scan(measure, alpha, grid=args.grid or settings["cheeger_grid"])
    if args.method in ("grid", "all"):
        estimates["grid"] = cheeger.grid_bruteforce(measure, alpha, cells=args.cells or settings["bruteforce_cells"],
                                                    workers=settings["workers"])
    if args.method in ("analytic", "all"):
        try:
            estimates["analytic"] = cheeger.analytic_cheeger(measure, alpha)
        except DomainError as e:
            if args.method == "analytic":
                raise
            print(f"[CLI] No closed form: {e}")

    scan, grid, exact = estimates.get("half_line"), estimates.get("grid"), estimates.get("analytic")
    if scan is not None and exact is not None:
        reports.append(equality_report("cheeger_half_line", "half-line scan = closed form", scan.value, exact.value,
                                       tolerance=CHEEGER_MATCH_TOL, config={"alpha": alpha}))
    if scan is not None and grid is not None and math.isfinite(scan.value):
        slack = cheeger.discretization_slack(grid.grid_resolution, scan.value)
        reports.append(bound_report("cheeger_grid", "half-line scan - grid search <= 2/cells * I",
                                    scan.value - grid.value, slack, config={"alpha": alpha}))
    return [ExperimentResult(name="cheeger-estimate", reports=reports,
                             summary={"measure": measure.describe(),
                                      "estimates": {k: v.as_dict() for k, v in estimates.items()}})]


def _cmd_lemmas(args, config):
    reports = quantile_lab.run_lemma_suite(lam=args.lam, m=args.m, m_main=args.m_main, grid_size=args.grid_size)
    return [ExperimentResult(name="lemmas", reports=reports)]


def _cmd_estimate(args, config):
    settings = config.settings
    measure = _measure(args)
    plan = montecarlo.EstimationPlan(measure=measure, dimension=args.n, function=_function(args, args.n),
                                     samples=settings["samples"], seed=config.master_seed,
                                     batches=settings["batches"], memory_budget=settings["memory_budget"],
                                     workers=settings["workers"], confidence=settings["confidence"])
    if args.q is not None and args.q < 1.0:
        raise DomainError(f"gradient moments require q >= 1 (got q={args.q!r})")
    result = montecarlo.run_plan(plan, q=args.q, coordinatewise=args.coordinatewise,
                                 thresholds=sorted(args.thresholds) if args.thresholds else None)
    var, mean = result.variance, result.mean
    summary = {
        "plan": plan.describe(),
        "variance": {"value": var.variance, "ci_low": var.ci_low, "ci_high": var.ci_high,
                     "batch_median_variance": var.batch_median_variance},
        "mean": {"value": mean.value, "ci_low": mean.ci_low, "ci_high": mean.ci_high},
    }
    if result.gradient is not None:
        g = result.gradient
        summary["gradient_moment"] = {"q": g.q, "value": g.value, "ci_low": g.ci_low, "ci_high": g.ci_high,
                                      "coordinatewise": args.coordinatewise}
    if result.tails:
        summary["tails"] = [{"threshold": t.threshold, "probability": t.probability,
                             "ci_low": t.ci_low, "ci_high": t.ci_high, "center": t.center} for t in result.tails]
    return [ExperimentResult(name="estimate", reports=[], summary=summary,
                             plot_rows=[[args.n, var.variance, var.ci_low, var.ci_high, None]])]


def _cmd_verify_pareto(args, config):
    settings = config.settings
    return [experiments.verify_pareto_theorem(args.lam, args.dims, seed=config.master_seed, fn=args.fn,
                                              **_plan_kwargs(settings))]


def _cmd_verify_product(args, config):
    measure = _measure(args)
    alpha, cheeger_value = _cheeger_inputs(args, measure)
    certificate = constants.l2_certificate(alpha, cheeger_value)
    return [experiments.verify_product_theorem(measure, certificate, _function(args, args.n), args.n,
                                               seed=config.master_seed, **_plan_kwargs(config.settings))]


def _cmd_verify_dp(args, config):
    measure = _measure(args)
    alpha, cheeger_value = _cheeger_inputs(args, measure)
    if args.kind == "C1":
        certificate = constants.l1_certificate(alpha, 2.0, cheeger_value)
    else:
        certificate = constants.l2_certificate(alpha, cheeger_value)
    return [experiments.verify_dp_theorem(measure, certificate, args.p, _function(args, args.n), args.n,
                                          seed=config.master_seed, **_plan_kwargs(config.settings))]


def _cmd_verify_tails(args, config):
    measure = _measure(args)
    alpha, cheeger_value = _cheeger_inputs(args, measure)
    kwargs = _plan_kwargs(config.settings)
    kwargs["confidence"] = config.settings["equality_confidence"]
    return [experiments.verify_tail_bounds(measure, alpha, cheeger_value, args.thresholds,
                                           seed=config.master_seed, sides=tuple(args.sides), **kwargs)]


def _cmd_verify_isoperimetric(args, config):
    measure = _measure(args)
    alpha, cheeger_value = _cheeger_inputs(args, measure)
    certificate = constants.l2_certificate(alpha, cheeger_value)
    return [experiments.verify_isoperimetric(measure, certificate, args.box_a, args.box_b)]


def _cmd_verify_poincare_dp(args, config):
    measure = _measure(args)
    poincare_constant = args.poincare_constant
    if poincare_constant is None:
        if measure.name != "laplace":
            raise ConfigError("--poincare-constant is required unless --measure laplace")
        poincare_constant = 4.0 / measure.t ** 2
    kwargs = _plan_kwargs(config.settings)
    kwargs["confidence"] = config.settings["equality_confidence"]
    return [experiments.verify_sharp_poincare_dp(measure, poincare_constant, args.p, args.dims,
                                                 seed=config.master_seed, **kwargs)]


def _cmd_verify_matrix(args, config):
    settings = config.settings
    return [experiments.verify_random_matrix(args.lam, args.n, trials=settings["trials"], seed=config.master_seed,
                                             eigen_index=args.eigen_index, workers=settings["workers"],
                                             batches=settings["trial_batches"], confidence=settings["confidence"])]


def _cmd_tightness(args, config):
    return [experiments.tightness_report(args.alpha, args.m_values, alpha1=args.alpha1, alpha2=args.alpha2),
            experiments.exponent_comparison_report(args.alpha)]


# --- Parser ---

def _common_parent():
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("run settings")
    group.add_argument("--config", help="JSON settings file; flags override its values")
    group.add_argument("--seed", type=int, help="master seed")
    group.add_argument("--samples", type=int, help="Monte Carlo sample count N")
    group.add_argument("--batches", type=int, help="batch count B for batch-means intervals")
    group.add_argument("--workers", type=int, help="worker processes (1 runs inline)")
    group.add_argument("--format", choices=OUTPUT_FORMATS, help="report format")
    group.add_argument("--output", help="report path (default: <output_dir>/<subcommand>.<format>)")
    group.add_argument("--confidence", type=_float, help="confidence level of the intervals")
    group.add_argument("--memory-budget", dest="memory_budget", type=int, help="doubles per sampling chunk")
    return parent


def _measure_parent():
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("law")
    group.add_argument("--measure", default="pareto", choices=["pareto", "laplace", "extremal", "uniform"])
    group.add_argument("--lambda", dest="lam", type=_float, default=5.0, help="Pareto index")
    group.add_argument("--t", type=_float, default=1.0, help="rate of the two-sided exponential law")
    group.add_argument("--law-alpha", dest="law_alpha", type=_float, default=0.8, help="alpha of the extremal law")
    group.add_argument("--law-cheeger", dest="law_cheeger", type=_float, default=1.0,
                       help="Cheeger value of the extremal law")
    group.add_argument("--lo", type=_float, default=0.0)
    group.add_argument("--hi", type=_float, default=1.0)
    return parent


def _certificate_parent():
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("certificate")
    group.add_argument("--alpha", type=_float, help="Cheeger exponent alpha of the certificate")
    group.add_argument("--cheeger", type=_float, help="certified alpha-Cheeger value I")
    return parent


def build_parser():
    parser = argparse.ArgumentParser(prog="cheeger-bounds",
                                     description="Heavy-tailed Cheeger and Poincare bounds: constants and checks.")
    sub = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    common, law, cert = _common_parent(), _measure_parent(), _certificate_parent()

    p = sub.add_parser("constants", parents=[common], help="table of certified constants")
    p.add_argument("--lambda", dest="lam", type=_float)
    p.add_argument("--alpha", type=_float)
    p.add_argument("--cheeger", type=_float)
    p.add_argument("--beta", type=_float, default=1.0)
    p.add_argument("--gamma", type=_float, default=1.0)
    p.set_defaults(handler=_cmd_constants)

    p = sub.add_parser("cheeger-estimate", parents=[common, law], help="alpha-Cheeger value of a 1-D law")
    p.add_argument("--alpha", type=_float, required=True)
    p.add_argument("--method", choices=["half_line", "grid", "analytic", "all"], default="all")
    p.add_argument("--grid", type=int, help="half-line p-grid size")
    p.add_argument("--cells", type=int, help="equal-mass cells of the grid search")
    p.set_defaults(handler=_cmd_cheeger_estimate)

    p = sub.add_parser("lemmas", parents=[common], help="quantile lemma battery on mu_lambda")
    p.add_argument("--lambda", dest="lam", type=_float, default=5.0)
    p.add_argument("--m", type=_float, default=2.0, help="activation level")
    p.add_argument("--m-main", dest="m_main", type=_float, default=4.0)
    p.add_argument("--grid-size", dest="grid_size", type=int, default=quantile_lab.DEFAULT_GRID)
    p.set_defaults(handler=_cmd_lemmas)

    p = sub.add_parser("estimate", parents=[common, law], help="Monte Carlo moments of f(X), X ~ mu^n")
    p.add_argument("--fn", default="max")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--p", type=_float, help="metric exponent of scaled_sum")
    p.add_argument("--m", type=_float, default=2.0, help="activation level")
    p.add_argument("--q", type=_float, help="gradient moment order")
    p.add_argument("--coordinatewise", action="store_true", help="sum_i E|d_i f|^q instead of E|grad f|^q")
    p.add_argument("--thresholds", type=_float_list, help="centered tail thresholds, comma-separated")
    p.set_defaults(handler=_cmd_estimate)

    p = sub.add_parser("verify-pareto", parents=[common], help="Var(f) under mu_lambda^n against C(lambda)")
    p.add_argument("--lambda", dest="lam", type=_float, default=5.0)
    p.add_argument("--dims", type=_int_list, default=[16, 64, 256, 1024])
    p.add_argument("--fn", default="max", choices=["max", "l2_norm"])
    p.set_defaults(handler=_cmd_verify_pareto)

    p = sub.add_parser("verify-product", parents=[common, law, cert], help="product-measure L2 variance bound")
    p.add_argument("--fn", default="max")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--m", type=_float, default=2.0)
    p.set_defaults(handler=_cmd_verify_product)

    p = sub.add_parser("verify-dp", parents=[common, law, cert], help="variance bound for d_p-Lipschitz f")
    p.add_argument("--p", type=_float, default=1.5)
    p.add_argument("--kind", choices=["C1", "C2"], default="C1")
    p.add_argument("--fn", default="scaled_sum")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--m", type=_float, default=2.0)
    p.set_defaults(handler=_cmd_verify_dp)

    p = sub.add_parser("verify-tails", parents=[common, law, cert], help="centered tails against the extremal law")
    p.add_argument("--thresholds", type=_float_list, default=[0.5, 1.0, 2.0, 4.0])
    p.add_argument("--sides", type=lambda s: s.split(","), default=["upper", "lower"])
    p.set_defaults(handler=_cmd_verify_tails)

    p = sub.add_parser("verify-isoperimetric", parents=[common, law, cert], help="distance between two boxes")
    p.add_argument("--box-a", dest="box_a", type=_json_value, required=True, help='e.g. "[[1, 1.2], [1, 1.2]]"')
    p.add_argument("--box-b", dest="box_b", type=_json_value, required=True)
    p.set_defaults(handler=_cmd_verify_isoperimetric)

    p = sub.add_parser("verify-poincare-dp", parents=[common, law], help="sharp classical Poincare bound on d_p")
    p.add_argument("--p", type=_float, default=1.5)
    p.add_argument("--dims", type=_int_list, default=[8, 27, 64])
    p.add_argument("--poincare-constant", dest="poincare_constant", type=_float,
                   help="classical Poincare constant C_P (default 4/t^2 for --measure laplace)")
    p.set_defaults(handler=_cmd_verify_poincare_dp)

    p = sub.add_parser("verify-matrix", parents=[common], help="eigenvalue variance of Pareto random matrices")
    p.add_argument("--lambda", dest="lam", type=_float, default=5.0)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--trials", type=int)
    p.add_argument("--eigen-index", dest="eigen_index", type=int, default=1)
    p.set_defaults(handler=_cmd_verify_matrix)

    p = sub.add_parser("tightness", parents=[common], help="activation family showing the exponents are sharp")
    p.add_argument("--alpha", type=_float, default=0.8)
    p.add_argument("--m-values", dest="m_values", type=_float_list,
                   default=[2.0 ** k for k in range(1, 9)])
    p.add_argument("--alpha1", type=_float)
    p.add_argument("--alpha2", type=_float)
    p.set_defaults(handler=_cmd_tightness)

    p = sub.add_parser("suite", parents=[common], help="full acceptance battery")
    p.add_argument("--jobs", type=lambda s: [j for j in s.split(",") if j],
                   help=f"subset of jobs ({', '.join(suite.JOBS)})")
    p.add_argument("--trials", type=int)
    p.set_defaults(handler=None)

    return parser


# --- Entry point ---

def resolve_config(args):
    """Defaults, then the --config file, then explicit flags."""
    settings = load_run_config(args.config) if args.config else get_default_settings()
    overrides = {key: getattr(args, flag) for flag, key in SETTING_FLAGS.items()
                 if getattr(args, flag, None) is not None}
    settings = ensure_complete_settings({**settings, **overrides})
    params = {k: v for k, v in vars(args).items() if k not in NON_PARAM_FLAGS}
    return RunConfig(subcommand=args.subcommand, params=params, settings=settings, output_path=args.output or "")


def _run_suite(args, config):
    output = config.resolve_output_path()
    output_dir = output if not output.suffix else output.parent
    verdict, jobs = suite.run_suite(config.settings, output_dir, jobs=args.jobs, config=config.as_dict())
    for job in jobs:
        print(f"[CLI] {job['job']:<12} {job['status']}")
    return VERDICT_EXIT_CODES[verdict]


def run(argv):
    """Parses argv, runs one subcommand and returns its exit code."""
    start_time = time.time()
    parser = build_parser()
    if not argv:
        parser.print_usage()
        return EXIT_ERROR
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PASS if e.code == 0 else EXIT_ERROR
    if args.subcommand is None:
        parser.print_usage()
        return EXIT_ERROR

    try:
        config = resolve_config(args)
        if args.subcommand == "suite":
            return _run_suite(args, config)
        results = args.handler(args, config)
        output_path = config.resolve_output_path()
        _, paths = write_report(args.subcommand, config.as_dict(), results, output_path, config.output_format)
    except (DomainError, ConfigError, ReportIntegrityError, SolverError) as e:
        print(f"[CLI] ❌ {type(e).__name__}: {e}")
        return EXIT_ERROR

    records = [r for res in results for r in res.reports]
    for record in records:
        print(f"[CLI] {record.verdict:<12} {record.theorem_id}: {record.label}  "
              f"lhs={record.lhs:.6g} rhs={record.rhs:.6g}")
    verdict = overall_verdict(records)
    print(f"[CLI] {args.subcommand}: {verdict} ({len(records)} checks) -> {', '.join(str(p) for p in paths)} "
          f"(took {helpers.elapsed_ms(start_time):.2f}ms)")
    return VERDICT_EXIT_CODES[verdict]
