from fractions import Fraction

import pytest

from app.config import Settings, get_settings
from app.errors import BoundaryError, ConfigError
from app.schemas.reports import ResidualReport
from app.verify.runner import SuiteContext, run_check
from app.verify.suites import gram, invariance, run_suite, suite_names


@pytest.fixture
def ctx():
    return SuiteContext.from_settings(fast=True, oracle_trials=3, eigenform_points=3)


def test_exact_suite(ctx):
    report = run_suite("exact", ctx)
    assert report.passed, [r.detail for r in report.failures]
    assert {r.name for r in report.results} == {"exact.serialize_roundtrip", "exact.laplace_det", "exact.linear_solve"}
    assert report.model_dump()["passed"] is True


def test_geometry_suite(ctx):
    report = run_suite("geometry", ctx)
    assert report.passed, [r.detail for r in report.failures]


def test_unknown_suite(ctx):
    with pytest.raises(ConfigError) as exc:
        run_suite("everything", ctx)
    assert "all" in exc.value.witness
    assert suite_names()[-1] == "all"


def test_check_outcomes(ctx):
    assert run_check("bool", lambda c: True, ctx).passed
    result = run_check("tuple", lambda c: (False, "detail", {(1, 2): Fraction(1, 3)}), ctx)
    assert not result.passed
    assert result.detail == "detail"
    assert result.witness == {"(1, 2)": "1/3"}
    reports = [ResidualReport(name="a", passed=True, checked=4), ResidualReport(name="b", passed=False, checked=2, failures=["x"])]
    result = run_check("reports", lambda c: reports, ctx)
    assert not result.passed
    assert result.witness == ["b: x"]


def test_raised_errors_become_failures(ctx):
    def check(c):
        raise BoundaryError("denominator vanishes", witness="F1")

    result = run_check("raises", check, ctx)
    assert not result.passed
    assert result.witness == "F1"
    assert result.detail.startswith("BoundaryError")


def test_findings_are_not_assertions(ctx):
    finding = ctx.finding("spacing", 16, 12, note="measured against printed")
    assert not finding.agrees
    assert ctx.findings == [finding]
    assert ctx.finding("same", "1", 1).agrees


def test_invariance_draws_parameters_from_the_seed(ctx):
    first = run_check("qes.invariance", invariance, ctx)
    again = run_check("qes.invariance", invariance, SuiteContext.from_settings(fast=True, seed=ctx.seed))
    other = run_check("qes.invariance", invariance, SuiteContext.from_settings(fast=True, seed=ctx.seed + 1))
    assert first.passed, first.detail
    assert first.detail == again.detail
    assert first.detail != other.detail


def test_full_orthogonality_bound_is_fixed():
    result = run_check("qes.orthogonality", gram, SuiteContext.from_settings(fast=False, mc_samples=20_000))
    assert "bound 1.00e-03" in result.detail


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("QUAD4_SEED", "11")
    monkeypatch.setenv("QUAD4_LOG_LEVEL", "debug")
    get_settings.cache_clear()
    try:
        settings = get_settings()
        assert settings.seed == 11
        assert settings.log_level == "DEBUG"
        assert SuiteContext.from_settings(settings, seed=3).seed == 3
    finally:
        get_settings.cache_clear()


def test_settings_validation():
    with pytest.raises(ValueError):
        Settings(log_level="LOUD")
    with pytest.raises(ValueError):
        Settings(precision_bits=10)


@pytest.mark.slow
@pytest.mark.parametrize("suite", ["diffop", "catalog", "symmetry", "qes", "dynamics", "nbody"])
def test_fast_suites(ctx, suite):
    report = run_suite(suite, ctx)
    assert report.passed, [(r.name, r.detail) for r in report.failures]
