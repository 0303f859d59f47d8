"""Redistribution rules over income-and-need profiles.

Evaluate catalog and family rules, probe them against behavioural axioms
with seeded sampling, reflect them through duality, and recover their
functional form from black-box evaluations.
"""

from .analysis import (
    ABProfile,
    AnalysisError,
    CharacterizationReport,
    Classification,
    DEFAULT_GRID,
    DegenerateProbe,
    ImplicationCheck,
    LABELS,
    NotApplicable,
    classify,
    extract_ab,
    parse_grid,
    profile_rule,
    verify_characterization,
)
from .axioms import (
    ALL_AXIOMS,
    AxiomReport,
    CORE_AXIOMS,
    Counterexample,
    SampleConfig,
    UnknownAxiom,
    axiom_suite,
    check_axiom,
    expand_axiom_names,
    recheck_counterexample,
    rng_for,
    sample_problem,
)
from .core import (
    Allocation,
    BalanceVerdict,
    BalanceViolation,
    EmptyAgentSet,
    LengthMismatch,
    NegativeNeed,
    NonFinite,
    Problem,
    ValidationError,
    ZeroTotalNeed,
    aggregates,
    balance_tolerance,
    check_allocation,
    make_problem,
    problem_scale,
)
from .duality import (
    DualReport,
    NonRepresentable,
    check_self_dual,
    dual_ab,
    dual_closed_form,
    dual_evaluate,
    dual_payoffs,
    reflected_problem,
)
from .rules import (
    ABRule,
    AFamilyRule,
    BFamilyRule,
    ConvexCombination,
    CustomRule,
    DualRule,
    EquivalenceVerdict,
    FULL,
    FullRedistribution,
    InvalidWeight,
    LF,
    LaissezFaire,
    LinearDualRule,
    LinearRule,
    NAFR,
    NeedAdjustedFull,
    PROP,
    ParseError,
    Proportional,
    RuleSpec,
    ScalarFn,
    equivalent_on,
    evaluate,
    format_rule,
    format_scalar_fn,
    from_coefficients,
    parse_rule,
    parse_scalar_fn,
    split_rule_list,
)

__version__ = "0.1.0"
