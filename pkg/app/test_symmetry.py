from fractions import Fraction

import numpy as np
import pytest
from sympy import I, simplify, sqrt

from app.catalog import operators as ops
from app.diffop.operator import DiffOp, commutator
from app.errors import InvarianceError, NotAnEigenvectorError
from app.exact.registry import SQRT_M6, Registry
from app.geometry import tetra
from app.symmetry import algebra
from app.symmetry.eigenforms import COMMON, NO_COMMON, SKIPPED, eigenform_test
from app.symmetry.surd import Surd


def test_surd_reduction():
    coeff, tag = Surd.of(False, 12)
    assert (coeff, tag) == (2, Surd(False, 3))
    assert Surd.of(False, 180) == (6, Surd(False, 5))
    assert Surd.of(True, 2 ** 5 * 3 ** 3) == (12 * SQRT_M6, Surd())
    coeff, tag = Surd(False, 35) * Surd(False, 210)
    assert simplify(coeff * tag.value() - 35 * sqrt(6)) == 0
    coeff, tag = Surd(True, 1) * Surd(True, 1)
    assert (coeff, tag.trivial) == (-1, True)
    assert str(Surd(True, 5)) == "i*sqrt(5)"


def test_surd_rejects_unfolded_six():
    with pytest.raises(ValueError):
        Surd(False, 6)
    with pytest.raises(ValueError):
        Surd.of(False, 0)


def test_surd_inverse():
    coeff, tag = Surd(True, 7).inverse()
    assert simplify(coeff * tag.value() * Surd(True, 7).value() - 1) == 0
    assert Surd(True, 7).value() == I * sqrt(7)


def test_l_family_commutes_formally():
    assert commutator(ops.delta_radial_rho(algebra.FORMAL_L), algebra.L_family()).is_zero()


def test_l_family_at_numeric_parameters():
    delta = ops.delta_radial_rho()
    for params in (algebra.A1_PARAMS, algebra.A2_PARAMS, algebra.K3_PARAMS, (1, 2, 3)):
        assert commutator(delta, algebra.L_family(*params)).is_zero()


def test_l_family_is_three_dimensional():
    basis = [algebra.L_family(1, 0, 0), algebra.L_family(0, 1, 0), algebra.L_family(0, 0, 1)]
    assert algebra.first_order_rank(basis) == 3


def test_so3_relations():
    relations = algebra.so3_relations()
    assert all(relations.values()), relations


def test_casimir_commutes():
    assert all(algebra.casimir_commutes().values())


def test_certify():
    reg = algebra.EXT
    delta = ops.delta_radial_rho(reg)
    algebra.certify(algebra.SymmetryElement(delta @ delta))
    with pytest.raises(InvarianceError):
        algebra.certify(algebra.SymmetryElement(delta + DiffOp.multiplication(reg, reg.gen("rho12"))))


def test_mixing_tags_is_rejected():
    J1, J2, _ = algebra.so3_basis()
    with pytest.raises(ValueError):
        J1 + J2


@pytest.mark.slow
def test_d1_basis_and_quintet():
    basis = algebra.d1_basis()
    assert len(basis) == 6
    delta = ops.delta_radial_rho()
    assert all(commutator(delta, op).is_zero() for op in basis)
    assert algebra.pairwise_commuting(basis) == []
    assert algebra.d1_split()["weights"] == [2, 1, 0, -1, -2]


@pytest.mark.slow
def test_d1_symbols_are_independent():
    point = tetra.sample_interior(np.random.default_rng(3), 1)[0].values()
    momenta = [Fraction(k + 1, 7) for k in range(6)]
    assert algebra.symbol_jacobian_rank(algebra.d1_basis(), point, momenta) == 6


@pytest.mark.slow
def test_printed_quintet_is_not_a_symmetry():
    report = algebra.printed_residual()
    assert report["commutes"] is False
    assert report["commutator_terms"] > 0
    assert report["differs_from_derived"] > 0


def test_radial_operator_alone_has_a_common_frame():
    points = tetra.sample_interior(np.random.default_rng(5), 2)
    verdicts = eigenform_test([ops.delta_radial_rho()], ops.delta_radial_rho(), points, seed=5)
    assert all(v.verdict in (COMMON, SKIPPED) for v in verdicts)


@pytest.mark.slow
def test_d1_has_no_common_frame():
    points = tetra.sample_interior(np.random.default_rng(11), 3)
    verdicts = eigenform_test(algebra.d1_basis(), ops.delta_radial_rho(), points, seed=11)
    assert [v.verdict for v in verdicts] == [NO_COMMON] * 3


def test_ladder_needs_a_weight_vector():
    seed = algebra.SymmetryElement(ops.delta_radial_rho(algebra.EXT))
    with pytest.raises(NotAnEigenvectorError):
        algebra.ladder_generate(seed, 2)


def _toy_operators():
    reg = Registry(("x", "y"))
    metric = DiffOp(reg, {(2, 0): reg.var(0), (0, 2): reg.var(1)})
    return reg, metric, DiffOp.partial(reg, 0, 0), DiffOp.partial(reg, 1, 1)


def test_commuting_diagonal_operators_share_a_frame():
    reg, metric, dxx, dyy = _toy_operators()
    assert commutator(dxx, dyy).is_zero()
    verdicts = eigenform_test([dxx, dyy], metric, [(1, 2), (3, 5)], seed=2)
    assert [v.verdict for v in verdicts] == [COMMON, COMMON]


def test_mixed_operator_breaks_the_frame():
    reg, metric, dxx, _ = _toy_operators()
    verdicts = eigenform_test([dxx, DiffOp.partial(reg, 0, 1)], metric, [(1, 2)], seed=2)
    assert verdicts[0].verdict == NO_COMMON
