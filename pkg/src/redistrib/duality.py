"""Reflection duality for allocation rules.

The dual of a rule pays each agent her need minus what the rule would pay
her in the reflected problem, where every income is replaced by the gap
between need and income. Applying the operator twice returns the original
rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .axioms import SampleConfig, rng_for, sample_problem
from .core import Allocation, Problem, make_problem, problem_scale
from .rules import (
    ABRule,
    AFamilyRule,
    BFamilyRule,
    ConvexCombination,
    DualRule,
    FnLike,
    FULL,
    FullRedistribution,
    LaissezFaire,
    LinearDualRule,
    LinearRule,
    NAFR,
    NeedAdjustedFull,
    Proportional,
    RuleSpec,
    ScalarFn,
    from_coefficients,
)


class NonRepresentable(ValueError):
    """The catalog cannot express a requested composite function."""


def reflected_problem(problem: Problem) -> Problem:
    """Same agents and needs, incomes replaced by need minus income."""
    return make_problem(
        problem.agents,
        tuple(z - y for y, z in zip(problem.incomes, problem.needs)),
        problem.needs,
    )


def dual_payoffs(rule: RuleSpec, problem: Problem) -> tuple[float, ...]:
    inner = rule.payoffs(reflected_problem(problem))
    return tuple(z - x for z, x in zip(problem.needs, inner))


def dual_evaluate(rule: RuleSpec, problem: Problem) -> Allocation:
    """Evaluate the dual of a rule directly from its definition."""
    return Allocation(problem, dual_payoffs(rule, problem))


def _reflect_coeffs(coeffs: tuple[float, ...]) -> tuple[float, ...]:
    """Coefficients of p(1 - t) given ascending coefficients of p(t)."""
    degree = len(coeffs) - 1
    out = [0.0] * (degree + 1)
    for j in range(degree + 1):
        acc = 0.0
        for k in range(j, degree + 1):
            acc += coeffs[k] * comb(k, j)
        out[j] = acc if j % 2 == 0 else -acc
    return tuple(out)


def _sub_coeffs(
    left: tuple[float, ...], right: tuple[float, ...]
) -> tuple[float, ...]:
    width = max(len(left), len(right))
    padded_left = left + (0.0,) * (width - len(left))
    padded_right = right + (0.0,) * (width - len(right))
    return tuple(u - v for u, v in zip(padded_left, padded_right))


def _coefficients(fn: ScalarFn) -> tuple[float, ...]:
    try:
        return fn.coefficients()
    except Exception as exc:  # pragma: no cover - catalog kinds always convert
        raise NonRepresentable(f"cannot express {fn!r} as a polynomial") from exc


def dual_ab(income_weight: FnLike, need_weight: FnLike) -> tuple[FnLike, FnLike]:
    """Weights of the dual of a deviation-weighted rule.

    The dual's income weight is t -> A(1-t) and its need weight is
    t -> 1 - A(1-t) - B(1-t), writing A and B for the inputs. Catalog
    functions stay in the catalog; plain callables come back as closures.
    """
    if isinstance(income_weight, ScalarFn) and isinstance(need_weight, ScalarFn):
        income_reflected = _reflect_coeffs(_coefficients(income_weight))
        need_reflected = _reflect_coeffs(_coefficients(need_weight))
        dual_need = _sub_coeffs(_sub_coeffs((1.0,), income_reflected), need_reflected)
        return from_coefficients(income_reflected), from_coefficients(dual_need)

    a_fn, b_fn = income_weight, need_weight

    def reflected_income_weight(t: float) -> float:
        return float(a_fn(1.0 - t))

    def reflected_need_weight(t: float) -> float:
        return 1.0 - float(a_fn(1.0 - t)) - float(b_fn(1.0 - t))

    return reflected_income_weight, reflected_need_weight


def _reflect_fn(fn: FnLike) -> FnLike:
    if isinstance(fn, ScalarFn):
        return from_coefficients(_reflect_coeffs(_coefficients(fn)))

    def reflected(t: float) -> float:
        return float(fn(1.0 - t))

    return reflected


def _one_minus_reflect_fn(fn: FnLike) -> FnLike:
    if isinstance(fn, ScalarFn):
        return from_coefficients(
            _sub_coeffs((1.0,), _reflect_coeffs(_coefficients(fn)))
        )

    def complemented(t: float) -> float:
        return 1.0 - float(fn(1.0 - t))

    return complemented


def dual_closed_form(rule: RuleSpec) -> RuleSpec | None:
    """Rewrite a rule into the closed form of its dual, when one is known.

    Returns None for rules outside the rewrite catalog, such as custom
    rules; those still evaluate through dual_evaluate.
    """
    if isinstance(rule, (LaissezFaire, Proportional)):
        return rule
    if isinstance(rule, FullRedistribution):
        return NAFR
    if isinstance(rule, NeedAdjustedFull):
        return FULL
    if isinstance(rule, ABRule):
        income, need = dual_ab(rule.income_weight, rule.need_weight)
        return ABRule(income, need)
    if isinstance(rule, BFamilyRule):
        return BFamilyRule(_one_minus_reflect_fn(rule.need_weight))
    if isinstance(rule, AFamilyRule):
        return AFamilyRule(_reflect_fn(rule.income_weight))
    if isinstance(rule, LinearRule):
        return LinearDualRule(rule.income_coeff, rule.need_share_coeff)
    if isinstance(rule, LinearDualRule):
        return LinearRule(rule.income_coeff, rule.need_share_coeff)
    if isinstance(rule, ConvexCombination):
        first = dual_closed_form(rule.first)
        second = dual_closed_form(rule.second)
        if first is None or second is None:
            return None
        return ConvexCombination(first, second, rule.weight)
    if isinstance(rule, DualRule):
        return rule.inner
    return None


@dataclass(frozen=True)
class DualReport:
    """Sampled comparison of a rule against its own dual."""

    rule: RuleSpec
    is_self_dual: bool
    max_deviation: float
    tolerance: float
    witness: Problem | None


def check_self_dual(
    rule: RuleSpec, cfg: SampleConfig, tol: float = 1e-9
) -> DualReport:
    """Compare rule and dual payoffs on sampled problems.

    Deviations are scaled by each problem's magnitude before comparison
    with tol, matching the axiom checkers.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = rng_for(cfg.seed, "self_dual")
    worst = 0.0
    witness: Problem | None = None
    for _ in range(cfg.trials):
        problem = sample_problem(rng, cfg)
        direct = rule.payoffs(problem)
        mirrored = dual_payoffs(rule, problem)
        deviation = max(
            abs(u - v) for u, v in zip(direct, mirrored)
        ) / problem_scale(problem)
        if deviation > worst:
            worst, witness = deviation, problem
    passed = worst <= tol
    return DualReport(rule, passed, worst, tol, None if passed else witness)
