from pathlib import Path

import pytest

from app.catalog import identities
from app.catalog import operators as ops
from app.catalog.generators import J0N, GeneratorExpr, Jp, expand_generators
from app.diffop.operator import DiffOp, commutator
from app.errors import UnknownEntryError, UnverifiedEntryError
from app.spectral.qes import QES
from app.exact.ratfunc import RatFunc
from app.schemas.configs import MassWeights
from app.verify.runner import SuiteContext

GOLDEN = Path(__file__).parent / "catalog" / "golden"


@pytest.fixture
def ctx():
    return SuiteContext.from_settings(fast=True, oracle_trials=2, pushforward_degree=2)


@pytest.mark.parametrize(
    "builder",
    [identities.rho_pair, identities.volume_pair, identities.u_pair, identities.hyper_pair, identities.planar_pair],
    ids=["rho", "volume", "u", "P", "planar"],
)
def test_gauge_pairs(builder):
    passed, detail = builder().check()
    assert passed, detail


@pytest.mark.slow
def test_mass_gauge_pairs():
    pairs = identities.gauge_pairs(MassWeights.parse("1,2,3,5"))
    assert [p.name for p in pairs[:5]] == [p.name for p in identities.gauge_pairs()[:5]]
    for pair in pairs[5:]:
        passed, detail = pair.check()
        assert passed, detail


def test_planar_potential_is_recorded_against_printed(ctx):
    pair = identities.planar_pair()
    assert pair.printed == -pair.potential
    identities.GAUGE_CHECKS["diffop.gauge_planar"](ctx)
    [finding] = ctx.findings
    assert not finding.agrees


def test_golden_operator_text():
    assert identities.golden_text("delta-radial-rho") == (GOLDEN / "delta-radial-rho.txt").read_text()


def test_every_entry_builds():
    for identifier in ops.identifiers():
        entry = ops.build(identifier)
        assert entry.operator.order == 2
        assert entry.identities


def test_unknown_entry():
    with pytest.raises(UnknownEntryError) as exc:
        ops.build("delta-nothing")
    assert "delta-radial-rho" in exc.value.witness


def test_build_binds_dimension():
    op = ops.build("delta-radial-rho", {"d": 3}).operator
    assert op.coeff(0) == RatFunc.const(op.reg, 6)


def test_radial_operator_shape(ctx):
    assert identities.metric_rho(ctx)[0]
    assert identities.cross_terms(ctx)[0]


def test_relabeling_fixes_radial_operator(ctx):
    passed, detail, witness = identities.s4_invariance(ctx)
    assert passed, detail
    assert witness is None


def test_chain_rule_images(ctx):
    passed, detail = identities.chain_rule_values(ctx)
    assert passed, detail


def test_equal_masses_recover_radial_operator(ctx):
    assert identities.equal_mass(ctx)


def test_degenerations(ctx):
    assert identities.degeneration_d2(ctx)
    assert identities.degeneration_d1(ctx)


def test_xi_word(ctx):
    assert identities.xi_word(ctx)


def test_pushforward_to_volume(ctx):
    report = identities.pushforward_volume(ctx)
    assert report.passed, report.failures


@pytest.mark.slow
@pytest.mark.parametrize(
    "name", ["pushforward_u", "pushforward_p", "r_to_rho", "pushforward_tau", "pushforward_rel_line", "pushforward_pt"]
)
def test_other_pushforwards(ctx, name):
    report = getattr(identities, name)(ctx)
    assert report.passed, report.failures


@pytest.mark.slow
def test_cartesian_oracle_rho(ctx):
    assert all(r.passed for r in identities.cartesian_oracle_rho(ctx))


def test_catalog_detail():
    detail = identities.catalog_detail("delta-radial-rho")
    assert detail.determinant.startswith("36864")
    assert detail.certificate_constant == "36864"
    assert detail.variables == list(ops.RHO.variables)
    assert detail.operator.startswith("# delta-radial-rho")


def test_catalog_detail_without_factorization():
    detail = identities.catalog_detail("delta-xi-d1")
    assert detail.determinant is None


def test_certified_metric():
    metric = identities.certified_metric("delta-g")
    assert metric.certificate.constant_matches
    assert identities.certified_metric("delta-xi-d1").certificate is None


def test_euler_generator():
    j0 = expand_generators(GeneratorExpr().add(1, J0N()), QES)
    euler = {tuple(int(k == i) for k in range(6)): QES.var(i) for i in range(6)}
    euler[(0,) * 6] = -QES.param("N")
    assert j0 == DiffOp(QES, euler)
    raising = expand_generators(GeneratorExpr().add(1, Jp(1)), QES)
    assert commutator(j0, raising) == raising
    with pytest.raises(ValueError):
        expand_generators(GeneratorExpr().add(1, J0N()), ops.RHO)


def test_served_entry_lists_its_identities():
    detail = identities.catalog_detail("delta-g")
    assert detail.verified_by == list(ops.build("delta-g").identities)
    assert identities.entry_verification("delta-g") is identities.entry_verification("delta-g")


@pytest.fixture
def fresh_gate():
    identities.entry_verification.cache_clear()
    yield
    identities.entry_verification.cache_clear()


def test_failing_entry_is_not_served(monkeypatch, fresh_gate):
    monkeypatch.setitem(identities.CATALOG_CHECKS, "catalog.pushforward_xi", lambda c: True)
    monkeypatch.setitem(identities.CATALOG_CHECKS, "catalog.xi_word", lambda c: (False, "word differs"))
    with pytest.raises(UnverifiedEntryError) as exc:
        identities.catalog_detail("delta-xi-d1")
    assert exc.value.witness == {"catalog.xi_word": "word differs"}
