import pytest

from redistrib import (
    ABRule,
    AFamilyRule,
    AnalysisError,
    BFamilyRule,
    ConvexCombination,
    DEFAULT_GRID,
    DegenerateProbe,
    FULL,
    LABELS,
    LF,
    LinearRule,
    NAFR,
    NotApplicable,
    PROP,
    ParseError,
    SampleConfig,
    ScalarFn,
    classify,
    extract_ab,
    parse_grid,
    profile_rule,
    verify_characterization,
)
from conftest import needs_squared_rule

RATIOS = (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0)


def test_error_hierarchy():
    assert issubclass(NotApplicable, AnalysisError)
    assert issubclass(DegenerateProbe, AnalysisError)
    assert issubclass(AnalysisError, ValueError)


@pytest.mark.parametrize("t", RATIOS)
def test_extracted_weights_match_known_forms(t):
    assert extract_ab(LF, t) == pytest.approx((1.0, 0.0), abs=1e-9)
    assert extract_ab(FULL, t) == pytest.approx((0.0, 0.0), abs=1e-9)
    assert extract_ab(PROP, t) == pytest.approx((0.0, t), abs=1e-9)
    assert extract_ab(NAFR, t) == pytest.approx((0.0, 1.0), abs=1e-9)
    assert extract_ab(LinearRule(0.3, 0.2), t) == pytest.approx(
        (0.3, 0.2 * t), abs=1e-9
    )
    quad = ABRule(ScalarFn.poly(0.0, 0.0, 1.0), ScalarFn.identity())
    assert extract_ab(quad, t) == pytest.approx((t * t, t), abs=1e-9)


def test_extraction_ignores_problem_magnitude_and_size():
    base = extract_ab(PROP, 1.5)
    assert extract_ab(PROP, 1.5, scale=(30.0, 20.0)) == pytest.approx(base, abs=1e-9)
    assert extract_ab(PROP, 1.5, agents=5) == pytest.approx(base, abs=1e-9)


def test_extraction_input_validation():
    with pytest.raises(NotApplicable):
        extract_ab(PROP, 1.0, agents=1)
    with pytest.raises(AnalysisError):
        extract_ab(PROP, 1.0, scale=(1.0, 0.0))
    with pytest.raises(AnalysisError):
        extract_ab(PROP, 1.0, scale=(1.0, -2.0))
    with pytest.raises(AnalysisError):
        extract_ab(PROP, 2.0, scale=(1.0, 1.0))


def test_profile_collects_grid_columns():
    profile = profile_rule(PROP, RATIOS)
    assert profile.grid == RATIOS
    assert profile.a_values == pytest.approx((0.0,) * 6, abs=1e-9)
    assert profile.b_values == pytest.approx(RATIOS, abs=1e-9)


def test_profile_input_validation():
    with pytest.raises(AnalysisError):
        profile_rule(PROP, (1.0,))
    with pytest.raises(AnalysisError):
        profile_rule(PROP, (1.0, 1.0))
    with pytest.raises(AnalysisError):
        profile_rule(PROP, (2.0, 1.0))
    with pytest.raises(AnalysisError):
        profile_rule(PROP, (0.0, 1.0), base_need=0.0)


CFG = SampleConfig(seed=17, trials=100)

LABEL_CASES = [
    (LF, "laissez-faire"),
    (FULL, "full"),
    (PROP, "proportional"),
    (NAFR, "need-adjusted-full"),
    (LinearRule(0.3, 0.2), "generic-AB"),
    (ConvexCombination(LF, PROP, 0.5), "generic-AB"),
    (AFamilyRule(ScalarFn.identity()), "generic-AB"),
    (BFamilyRule(ScalarFn.poly(0.0, 0.0, 1.0)), "generic-AB"),
    (needs_squared_rule(), "non-AB"),
]


@pytest.mark.parametrize("rule,label", LABEL_CASES, ids=[l for _, l in LABEL_CASES])
def test_classification_labels(rule, label):
    result = classify(rule, DEFAULT_GRID, CFG)
    assert result.label == label
    assert result.label in LABELS
    if label == "non-AB":
        assert result.max_residual > 1e-9
        assert result.witness is not None
    else:
        assert result.max_residual <= 1e-9
        assert result.witness is None


def test_classification_shape_evidence():
    prop = classify(PROP, DEFAULT_GRID, CFG)
    assert (prop.a_shape, prop.b_shape) == ("zero", "identity")
    nafr = classify(NAFR, DEFAULT_GRID, CFG)
    assert nafr.b_shape == "constant"
    assert nafr.b_value == pytest.approx(1.0)
    lin = classify(LinearRule(0.3, 0.2), DEFAULT_GRID, CFG)
    assert lin.a_shape == "constant"
    assert lin.a_value == pytest.approx(0.3)
    assert lin.b_shape == "other"
    assert lin.b_value is None


def test_classification_is_deterministic():
    assert classify(FULL, DEFAULT_GRID, CFG) == classify(FULL, DEFAULT_GRID, CFG)


def test_classification_grid_validation():
    with pytest.raises(AnalysisError):
        classify(PROP, (-1.0, 0.0, 1.0), CFG)
    with pytest.raises(AnalysisError):
        classify(PROP, (0.0, 0.5, 1.0, 1.5, 2.0), CFG)
    with pytest.raises(AnalysisError):
        classify(PROP, (-2.0, -1.5, -1.0, 0.5, 1.0), CFG)
    with pytest.raises(ValueError):
        classify(PROP, DEFAULT_GRID, CFG, tol=0.0)


def test_characterization_of_proportional():
    report = verify_characterization(PROP, CFG)
    assert report.classification.label == "proportional"
    assert len(report.implications) == 4
    assert all(check.premise_holds for check in report.implications)
    assert all(check.conclusion_holds for check in report.implications)
    assert report.consistent


def test_characterization_of_need_weight_family_member():
    rule = BFamilyRule(ScalarFn.poly(0.0, 0.0, 1.0))
    report = verify_characterization(rule, CFG)
    by_name = {check.name: check for check in report.implications}
    stability_only = by_name[
        "core+nat+stability -> untouched incomes or need-deviation family"
    ]
    assert stability_only.premise_holds
    assert stability_only.conclusion_holds
    assert not by_name[
        "core+nat+stability+dummy -> untouched incomes or proportional"
    ].premise_holds
    assert report.consistent


def test_characterization_of_income_weight_family_member():
    report = verify_characterization(AFamilyRule(ScalarFn.constant(0.5)), CFG)
    by_name = {check.name: check for check in report.implications}
    mix = by_name["core+nat+dummy -> income-weighted mix family"]
    assert mix.premise_holds
    assert mix.conclusion_holds
    assert report.consistent


def test_characterization_outside_the_family():
    report = verify_characterization(needs_squared_rule(), CFG)
    assert report.classification.label == "non-AB"
    assert not any(check.premise_holds for check in report.implications)
    assert report.consistent


def test_parse_grid():
    assert parse_grid("-2:2:1") == (-2.0, -1.0, 0.0, 1.0, 2.0)
    assert parse_grid("0:1:0.25") == pytest.approx((0.0, 0.25, 0.5, 0.75, 1.0))
    assert parse_grid("1:1:1") == (1.0,)
    assert parse_grid("0:0.3:0.1") == pytest.approx((0.0, 0.1, 0.2, 0.3))


@pytest.mark.parametrize(
    "bad", ["1:2", "a:2:1", "1:2:0", "2:1:1", "1:2:-1", "1:2:3:4", ""]
)
def test_parse_grid_rejects_malformed_text(bad):
    with pytest.raises(ParseError):
        parse_grid(bad)
