from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.catalog import operators as ops
from app.diffop.cartesian import cartesian_oracle
from app.diffop.gauge import GaugeFactor, gauge_conjugate
from app.diffop.metric import laplace_beltrami, lb_drift_residual, metric_of
from app.diffop.operator import DiffOp, commutator, unit
from app.diffop.pushforward import pushforward_check
from app.errors import DegenerateMetricError, RegistryMismatchError
from app.exact import polys
from app.exact.ratfunc import RatFunc
from app.exact.registry import registry

XY = registry(("x", "y"))
x, y = XY.vars()


def _random_op(seed: int) -> DiffOp:
    rng = np.random.default_rng(seed)
    terms = {alpha: polys.random_poly(XY, rng, 2, terms=3) for alpha in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0)]}
    return DiffOp(XY, terms)


def test_weyl_relation():
    assert commutator(DiffOp.partial(XY, 0), DiffOp.multiplication(XY, x)) == DiffOp.multiplication(XY, 1)
    assert commutator(DiffOp.partial(XY, 0), DiffOp.multiplication(XY, y)).is_zero()


def test_apply_euler_operator():
    euler = DiffOp(XY, {unit(2, 0): x, unit(2, 1): y})
    assert euler.apply(x**2 * y) == RatFunc.from_poly(XY, 3 * x**2 * y)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
def test_composition_acts_as_product(a, b, c):
    A, B = _random_op(a), _random_op(b)
    f = polys.random_poly(XY, np.random.default_rng(c), 4)
    assert (A @ B).apply(f) == A.apply(B.apply(f))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 10_000), st.integers(0, 10_000))
def test_jacobi_identity(a, b, c):
    A, B, C = _random_op(a), _random_op(b), _random_op(c)
    total = commutator(A, commutator(B, C)) + commutator(B, commutator(C, A)) + commutator(C, commutator(A, B))
    assert total.is_zero()


def test_registries_do_not_mix():
    other = registry(("u", "v"))
    with pytest.raises(RegistryMismatchError):
        DiffOp.partial(XY, 0) + DiffOp.partial(other, 0)


def test_bind_specializes_parameters():
    op = ops.delta_radial_rho()
    bound = op.bind({"d": 3})
    assert bound.coeff(0) == RatFunc.const(op.reg, 6)


def test_metric_of_radial_operator():
    op = ops.delta_radial_rho()
    metric = metric_of(op)
    reg = op.reg
    r12, r13, r23 = reg.gen("rho12"), reg.gen("rho13"), reg.gen("rho23")
    assert metric.entry(0, 0) == RatFunc.from_poly(reg, 4 * r12)
    assert metric.entry(0, 1) == RatFunc.from_poly(reg, r12 + r13 - r23)
    # rho12 and rho34 share no particle
    assert metric.entry(0, 5).is_zero()
    assert metric.is_symmetric()


def test_gauge_conjugation_shifts_partials():
    gamma = GaugeFactor(XY, exponential=x * y)
    conjugated = gauge_conjugate(DiffOp.partial(XY, 0), gamma)
    assert conjugated == DiffOp(XY, {unit(2, 0): 1, (0, 0): y})
    assert gauge_conjugate(conjugated, gamma.inverse()) == DiffOp.partial(XY, 0)


def test_flat_laplace_beltrami():
    laplacian = DiffOp(XY, {unit(2, 0, 0): 1, unit(2, 1, 1): 1})
    assert laplace_beltrami(metric_of(laplacian)) == laplacian
    assert all(r.is_zero() for r in lb_drift_residual(laplacian))


def test_degenerate_metric():
    with pytest.raises(DegenerateMetricError):
        laplace_beltrami(metric_of(DiffOp.partial(XY, 0, 0)))


def test_cartesian_oracle_accepts_radial_operator():
    report = cartesian_oracle(ops.delta_radial_rho(), 3, trials=3, seed=1)
    assert report.passed
    assert report.checked == 6 + 3


def test_cartesian_oracle_rejects_scaled_operator():
    report = cartesian_oracle(ops.delta_radial_rho().scale(2), 3, trials=1, seed=1)
    assert not report.passed


@pytest.mark.parametrize("method", ["direct", "chain"])
def test_pushforward_to_volume_variables(method):
    report = pushforward_check(ops.delta_radial_rho(), ops.rho_to_volume(), ops.delta_g(), degree_bound=2, method=method)
    assert report.passed, report.failures


def test_pushforward_detects_wrong_target():
    wrong = ops.delta_g().scale(Fraction(1, 2))
    report = pushforward_check(ops.delta_radial_rho(), ops.rho_to_volume(), wrong, degree_bound=1)
    assert not report.passed
