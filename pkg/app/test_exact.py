from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix

from app.errors import AnsatzError, BoundaryError, RegistryMismatchError
from app.exact import linalg, polys
from app.exact.ratfunc import RatFunc
from app.exact.registry import Registry, bindings, registry
from app.exact.serialize import parse_poly, poly_to_text, ratfunc_to_text

REG = registry(("x", "y", "z"), ("d",))
small = st.fractions(min_value=-9, max_value=9, max_denominator=5)


def test_registry_is_cached():
    assert registry(("x", "y", "z"), ("d",)) is REG
    assert REG.variables == ("x", "y", "z")
    assert REG.index("d") == 3


def test_registry_rejects_clashing_names():
    with pytest.raises(RegistryMismatchError):
        Registry(("x", "d"), ("d",))


def test_unknown_name():
    with pytest.raises(RegistryMismatchError):
        REG.index("w")


def test_monomial_counts():
    assert len(polys.monomials(6, 3)) == comb(9, 6)
    assert len(polys.monomials(6, 3, min_degree=3)) == comb(8, 5)


def test_compose_substitutes_images():
    x, y, z = REG.vars()
    target = registry(("u", "v"))
    u, v = target.vars()
    p = x * y + z**2
    out = polys.compose(p, REG, target, {"x": u + v, "y": u - v, "z": v, "d": 0})
    assert out == u**2


def test_evaluate_requires_bindings():
    x, y, _ = REG.vars()
    with pytest.raises(RegistryMismatchError):
        polys.evaluate(x * y, REG, bindings(REG, {"x": 1}))
    assert polys.evaluate(x * y, REG, bindings(REG, {"x": 2, "y": Fraction(1, 4)})) == REG.scalar(Fraction(1, 2))


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_text_parses_back(seed):
    p = polys.random_poly(REG, np.random.default_rng(seed), 3)
    assert parse_poly(poly_to_text(p, REG), REG) == p


def test_text_is_graded_lex():
    x, y, _ = REG.vars()
    assert poly_to_text(x + y**2 - 3, REG) == "y**2 + x - 3"


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(small, min_size=4, max_size=4), min_size=4, max_size=4))
def test_laplace_det_matches_sympy(rows):
    expected = Matrix(rows).det()
    assert linalg.laplace_det(rows, Fraction(0), Fraction(1)) == Fraction(int(expected.p), int(expected.q))


def test_solve_returns_kernel():
    K = REG.domain
    rows = [[K(1), K(1), K(0)], [K(0), K(1), K(1)]]
    solution, kernel = linalg.solve(rows, [K(2), K(3)], K)
    for r, b in zip(rows, [K(2), K(3)]):
        assert sum((a * s for a, s in zip(r, solution)), K.zero) == b
    assert len(kernel) == 1


def test_solve_names_inconsistent_equation():
    K = REG.domain
    rows = [[K(1), K(0)], [K(0), K(1)], [K(1), K(1)]]
    with pytest.raises(AnsatzError) as exc:
        linalg.solve(rows, [K(1), K(1), K(5)], K, labels=["a", "b", "c"])
    assert exc.value.witness == "c"


def test_ratfunc_cancels_and_compares():
    x, y, _ = REG.vars()
    f = RatFunc.over(REG, x * y + y**2, x + y)
    assert f.is_polynomial()
    assert f == RatFunc.from_poly(REG, y)


def test_ratfunc_quotient_rule():
    x, y, _ = REG.vars()
    f = RatFunc.over(REG, x, y)
    assert f.diff(REG.index("y")) == RatFunc.over(REG, -x, y, 2)
    assert f.diff(REG.index("x")) == RatFunc.over(REG, REG.ring.one, y)


def test_ratfunc_boundary():
    x, y, _ = REG.vars()
    f = RatFunc.over(REG, x, y - 1)
    with pytest.raises(BoundaryError):
        f.evaluate(bindings(REG, {"x": 2, "y": 1}))
    assert f.evaluate(bindings(REG, {"x": 2, "y": 3})) == REG.scalar(1)


def test_ratfunc_text():
    x, y, _ = REG.vars()
    assert ratfunc_to_text(RatFunc.over(REG, x, y, 2)) == "(x)/((y)**2)"
