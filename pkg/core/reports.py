"""
BoundReport: one verification record and the rules that turn an estimate plus
its confidence interval into a verdict.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

UPPER = "upper"        # lhs <= rhs
EQUALITY = "equality"  # lhs == rhs inside the CI

CSV_COLUMNS = ["theorem_id", "label", "lhs", "lhs_ci_low", "lhs_ci_high",
               "rhs", "slack", "verdict", "seed", "samples"]


@dataclass
class BoundReport:
    theorem_id: str
    label: str
    lhs: float
    ci_low: float
    ci_high: float
    rhs: float
    slack: float
    verdict: str
    mode: str = UPPER
    config: dict = field(default_factory=dict)
    seed: Optional[int] = None
    samples: Optional[int] = None
    extras: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == PASS

    def as_dict(self):
        return {
            "theorem_id": self.theorem_id,
            "label": self.label,
            "mode": self.mode,
            "lhs": _clean(self.lhs),
            "lhs_ci_low": _clean(self.ci_low),
            "lhs_ci_high": _clean(self.ci_high),
            "rhs": _clean(self.rhs),
            "slack": _clean(self.slack),
            "verdict": self.verdict,
            "seed": self.seed,
            "samples": self.samples,
            "config": self.config,
            "extras": {k: _clean(v) for k, v in sorted(self.extras.items())},
        }

    def csv_row(self):
        d = self.as_dict()
        return [d.get(key) for key in CSV_COLUMNS]


def _clean(value):
    """JSON has no inf/nan; encode them as strings."""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
    return value


def upper_verdict(ci_low, ci_high, rhs, tolerance=0.0):
    """pass iff the whole CI sits below rhs; fail iff the whole CI sits above."""
    if ci_high <= rhs + tolerance:
        return PASS
    if ci_low > rhs + tolerance:
        return FAIL
    return INCONCLUSIVE


def bound_report(theorem_id, label, lhs, rhs, ci_low=None, ci_high=None, tolerance=0.0,
                 config=None, seed=None, samples=None, extras=None):
    """One-sided check lhs <= rhs; exact quantities pass ci_low = ci_high = lhs."""
    ci_low = lhs if ci_low is None else ci_low
    ci_high = lhs if ci_high is None else ci_high
    return BoundReport(
        theorem_id=theorem_id, label=label, lhs=float(lhs),
        ci_low=float(ci_low), ci_high=float(ci_high), rhs=float(rhs),
        slack=float(rhs) - float(ci_high),
        verdict=upper_verdict(ci_low, ci_high, rhs, tolerance),
        mode=UPPER, config=dict(config or {}), seed=seed, samples=samples,
        extras=dict(extras or {}),
    )


def equality_report(theorem_id, label, lhs, target, ci_low=None, ci_high=None, tolerance=0.0,
                    config=None, seed=None, samples=None, extras=None):
    """Two-sided check: pass iff target lies inside [ci_low - tol, ci_high + tol]."""
    ci_low = lhs if ci_low is None else ci_low
    ci_high = lhs if ci_high is None else ci_high
    contained = (ci_low - tolerance) <= target <= (ci_high + tolerance)
    slack = min(float(target) - float(ci_low), float(ci_high) - float(target))
    return BoundReport(
        theorem_id=theorem_id, label=label, lhs=float(lhs),
        ci_low=float(ci_low), ci_high=float(ci_high), rhs=float(target),
        slack=slack, verdict=PASS if contained else FAIL,
        mode=EQUALITY, config=dict(config or {}), seed=seed, samples=samples,
        extras=dict(extras or {}),
    )


def overall_verdict(reports):
    """fail if any report fails, pass if all pass, inconclusive otherwise."""
    verdicts = [r.verdict for r in reports]
    if any(v == FAIL for v in verdicts):
        return FAIL
    if all(v == PASS for v in verdicts):
        return PASS
    return INCONCLUSIVE
