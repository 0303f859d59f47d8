"""Recovering the functional form of a rule from black-box evaluations.

A rule in the deviation-weighted family pays, at each income-to-need ratio,
the equal split plus fixed multiples of each agent's income and need
deviations. Probing flat problems with one paired deviation recovers those
multiples; reconstruction on fresh random problems tells membership in the
family apart from lookalikes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .axioms import AxiomReport, SampleConfig, axiom_suite, rng_for, sample_problem
from .core import Problem, make_problem, problem_scale
from .rules import ParseError, RuleSpec

LABELS = (
    "laissez-faire",
    "proportional",
    "full",
    "need-adjusted-full",
    "generic-AB",
    "non-AB",
)

DEFAULT_GRID = (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0)


class AnalysisError(ValueError):
    """Base class for extraction and classification failures."""


class NotApplicable(AnalysisError):
    """The probe construction needs at least two agents."""


class DegenerateProbe(AnalysisError):
    """A probe perturbation would push a need below zero."""


def extract_ab(
    rule: RuleSpec,
    t: float,
    scale: tuple[float, float] | None = None,
    agents: int = 3,
) -> tuple[float, float]:
    """Recover the income and need deviation weights a rule applies at ratio t.

    Probes two flat problems whose totals are given by scale = (total
    income, total need); the default is (t, 1). One agent is bumped up and
    a second bumped down by the same amount, so totals are preserved and
    the weight falls out of the first agent's payoff shift.
    """
    if agents < 2:
        raise NotApplicable(f"extraction needs at least 2 agents, got {agents}")
    if scale is None:
        total_income, total_need = float(t), 1.0
    else:
        total_income, total_need = float(scale[0]), float(scale[1])
    if total_need <= 0:
        raise AnalysisError(f"total need must be positive, got {total_need!r}")
    if abs(total_income - t * total_need) > 1e-9 * max(
        1.0, abs(total_income), total_need
    ):
        raise AnalysisError(
            f"scale {scale!r} is inconsistent with ratio {t!r}"
        )
    n = agents
    ids = tuple(range(1, n + 1))
    mean_income = total_income / n
    mean_need = total_need / n

    need_bump = total_need / (2 * n)
    needs = [mean_need] * n
    needs[0] += need_bump
    needs[1] -= need_bump
    if min(needs) < 0:
        raise DegenerateProbe(f"probe needs {needs!r} leave the domain")
    payoffs = rule.payoffs(make_problem(ids, (mean_income,) * n, needs))
    need_weight = (payoffs[0] - mean_income) / need_bump

    income_bump = abs(total_income) / (2 * n) + 1.0
    incomes = [mean_income] * n
    incomes[0] += income_bump
    incomes[1] -= income_bump
    payoffs = rule.payoffs(make_problem(ids, incomes, (mean_need,) * n))
    income_weight = (payoffs[0] - mean_income) / income_bump

    return float(income_weight), float(need_weight)


@dataclass(frozen=True)
class ABProfile:
    """Extracted deviation weights across a grid of income-to-need ratios."""

    grid: tuple[float, ...]
    a_values: tuple[float, ...]
    b_values: tuple[float, ...]


def _validate_grid(grid: Sequence[float]) -> tuple[float, ...]:
    values = tuple(float(t) for t in grid)
    if len(values) < 2:
        raise AnalysisError("grid needs at least 2 points")
    for left, right in zip(values, values[1:]):
        if not left < right:
            raise AnalysisError(f"grid {values!r} is not strictly increasing")
    return values


def profile_rule(
    rule: RuleSpec,
    grid: Sequence[float],
    agents: int = 3,
    base_need: float = 1.0,
) -> ABProfile:
    """Extract deviation weights at every ratio in a strictly increasing grid."""
    values = _validate_grid(grid)
    if base_need <= 0:
        raise AnalysisError(f"base_need must be positive, got {base_need!r}")
    a_values = []
    b_values = []
    for t in values:
        a, b = extract_ab(rule, t, scale=(t * base_need, base_need), agents=agents)
        a_values.append(a)
        b_values.append(b)
    return ABProfile(values, tuple(a_values), tuple(b_values))


@dataclass(frozen=True)
class Classification:
    """Label plus the evidence it rests on."""

    label: str
    profile: ABProfile
    a_shape: str
    a_value: float | None
    b_shape: str
    b_value: float | None
    max_residual: float
    witness: Problem | None


def _fit_a_shape(values: tuple[float, ...], tol: float) -> tuple[str, float | None]:
    if all(abs(v) <= tol for v in values):
        return "zero", 0.0
    if all(abs(v - 1.0) <= tol for v in values):
        return "one", 1.0
    if max(values) - min(values) <= tol:
        return "constant", sum(values) / len(values)
    return "other", None


def _fit_b_shape(
    values: tuple[float, ...], grid: tuple[float, ...], tol: float
) -> tuple[str, float | None]:
    if all(abs(v) <= tol for v in values):
        return "zero", 0.0
    if all(abs(v - t) <= tol for v, t in zip(values, grid)):
        return "identity", None
    if max(values) - min(values) <= tol:
        return "constant", sum(values) / len(values)
    return "other", None


def classify(
    rule: RuleSpec,
    grid: Sequence[float],
    cfg: SampleConfig,
    tol: float = 1e-9,
) -> Classification:
    """Name the functional form a rule presents over a grid of ratios.

    The grid must have at least 5 points and straddle zero. Membership in
    the deviation-weighted family is decided by reconstructing payoffs on
    fresh random problems, never by the grid fit alone, and the label only
    ever claims what those samples show.
    """
    values = _validate_grid(grid)
    if len(values) < 5:
        raise AnalysisError(f"classification grid needs at least 5 points")
    if not (values[0] < 0.0 and values[-1] > 0.0 and any(v == 0.0 for v in values)):
        raise AnalysisError(
            f"grid {values!r} must include negative, zero, and positive ratios"
        )
    if tol <= 0:
        raise ValueError("tol must be positive")

    profile = profile_rule(rule, values)
    a_shape, a_value = _fit_a_shape(profile.a_values, tol)
    b_shape, b_value = _fit_b_shape(profile.b_values, values, tol)

    rng = rng_for(cfg.seed, "classify")
    max_residual = 0.0
    witness: Problem | None = None
    for _ in range(cfg.trials):
        problem = sample_problem(rng, cfg, min_agents=2)
        t = problem.total_income / problem.total_need
        a, b = extract_ab(
            rule,
            t,
            scale=(problem.total_income, problem.total_need),
            agents=len(problem),
        )
        n = len(problem)
        mean_income = problem.total_income / n
        mean_need = problem.total_need / n
        predicted = tuple(
            mean_income + (y - mean_income) * a + (z - mean_need) * b
            for y, z in zip(problem.incomes, problem.needs)
        )
        actual = rule.payoffs(problem)
        residual = max(
            abs(u - v) for u, v in zip(predicted, actual)
        ) / problem_scale(problem)
        if residual > max_residual:
            max_residual, witness = residual, problem

    if max_residual > tol:
        label = "non-AB"
    elif a_shape == "one" and b_shape == "zero":
        label = "laissez-faire"
    elif a_shape == "zero" and b_shape == "identity":
        label = "proportional"
    elif a_shape == "zero" and b_shape == "zero":
        label = "full"
    elif (
        a_shape == "zero"
        and b_shape == "constant"
        and b_value is not None
        and abs(b_value - 1.0) <= tol
    ):
        label = "need-adjusted-full"
    else:
        label = "generic-AB"

    return Classification(
        label,
        profile,
        a_shape,
        a_value,
        b_shape,
        b_value,
        max_residual,
        None if max_residual <= tol else witness,
    )


@dataclass(frozen=True)
class ImplicationCheck:
    """One axiom-set-to-form implication evaluated on sampled evidence."""

    name: str
    premise_holds: bool
    conclusion_holds: bool

    @property
    def consistent(self) -> bool:
        return (not self.premise_holds) or self.conclusion_holds


@dataclass(frozen=True)
class CharacterizationReport:
    """Joint axiom verdicts and classification, with implication checks."""

    rule: RuleSpec
    axiom_reports: tuple[AxiomReport, ...]
    classification: Classification
    implications: tuple[ImplicationCheck, ...]
    consistent: bool


def verify_characterization(
    rule: RuleSpec,
    cfg: SampleConfig,
    tol: float = 1e-9,
    grid: Sequence[float] = DEFAULT_GRID,
) -> CharacterizationReport:
    """Cross-check sampled axiom verdicts against the recovered form.

    Each implication says: if the rule passed this axiom set, its
    classification must land in the matching family. Implications are
    checked on sampled verdicts only and are reported, not assumed.
    """
    reports = tuple(
        axiom_suite(rule, ["core", "nat", "stability", "dummy"], cfg, tol)
    )
    passed = {report.axiom: report.passed for report in reports}
    classification = classify(rule, grid, cfg, tol)

    core_ok = all(passed[name] for name in ("homogeneity", "equal_treatment", "continuity"))
    is_ab = classification.label != "non-AB"
    a_zero = classification.a_shape == "zero"
    profile = classification.profile
    afam_shape = is_ab and all(
        abs(b - (1.0 - a) * t) <= tol
        for a, b, t in zip(profile.a_values, profile.b_values, profile.grid)
    )

    implications = (
        ImplicationCheck(
            "core+nat+stability+dummy -> untouched incomes or proportional",
            core_ok and passed["nat"] and passed["stability"] and passed["dummy"],
            classification.label in ("laissez-faire", "proportional"),
        ),
        ImplicationCheck(
            "core+nat+stability -> untouched incomes or need-deviation family",
            core_ok and passed["nat"] and passed["stability"],
            classification.label == "laissez-faire" or (is_ab and a_zero),
        ),
        ImplicationCheck(
            "core+nat+dummy -> income-weighted mix family",
            core_ok and passed["nat"] and passed["dummy"],
            afam_shape,
        ),
        ImplicationCheck(
            "core+nat -> deviation-weighted family",
            core_ok and passed["nat"],
            is_ab,
        ),
    )
    return CharacterizationReport(
        rule,
        reports,
        classification,
        implications,
        all(check.consistent for check in implications),
    )


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse ``lo:hi:step`` into an inclusive grid of ratios.

    Endpoints are inclusive within floating tolerance, so "-2:2:1" yields
    five points ending exactly at 2.
    """
    pieces = text.strip().split(":")
    if len(pieces) != 3:
        raise ParseError(f"grid must look like lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in pieces)
    except ValueError:
        raise ParseError(f"grid has a non-numeric part in {text!r}") from None
    if step <= 0:
        raise ParseError(f"grid step must be positive, got {pieces[2]!r}")
    if hi < lo:
        raise ParseError(f"grid upper end {hi!r} is below lower end {lo!r}")
    slack = 1e-9 * max(1.0, abs(lo), abs(hi), step)
    count = int((hi - lo) / step + slack) + 1
    values = tuple(lo + k * step for k in range(count))
    return values
