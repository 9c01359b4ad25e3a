import logging
from typing import List, Mapping, Tuple

from sympy.polys.rings import PolyElement

from app.diffop.operator import DiffOp
from app.exact import polys
from app.exact.ratfunc import RatFunc
from app.exact.registry import Registry
from app.schemas.reports import ResidualReport

"""
CHANGE OF VARIABLES
A candidate operator in target variables y_k = phi_k(x) is certified against a
source operator in x, never derived. Two methods:
- direct: src(m o phi) == (tgt m) o phi for every target monomial m up to a degree
- chain: the carre-du-champ G^{kl} = 1/2 [src(phi_k phi_l) - phi_k src(phi_l) - phi_l src(phi_k)]
  and B^k = src(phi_k) must equal the target coefficients composed with phi
"""

logger = logging.getLogger(__name__)

Map = Mapping[str, PolyElement]


def _pull_back(f: RatFunc, into: Registry, phi: Map) -> RatFunc:
    return f.compose(into, phi)


def induced_operator(src: DiffOp, target: Registry, phi: Map) -> Tuple[List[List[RatFunc]], List[RatFunc]]:
    """(G, B) in source variables: metric matrix and drift seen by the target variables."""
    reg = src.reg
    if src.order > 2:
        raise ValueError("induced_operator handles order <= 2")
    kinetic = src - DiffOp.multiplication(reg, src.potential())
    images = [RatFunc.from_poly(reg, phi[name]) for name in target.variables]
    drift = [kinetic.apply(f) for f in images]
    half = reg.scalar(1) / reg.scalar(2)
    n = target.nvars
    matrix = [[RatFunc.zero(reg) for _ in range(n)] for _ in range(n)]
    for k in range(n):
        for l in range(k, n):
            g = kinetic.apply(images[k] * images[l]) - images[k] * drift[l] - images[l] * drift[k]
            g = g.scale(half)
            matrix[k][l] = g
            matrix[l][k] = g
    return matrix, drift


def pushforward_check(
    src: DiffOp,
    phi: Map,
    tgt: DiffOp,
    degree_bound: int = 3,
    method: str = "direct",
    name: str = "pushforward",
) -> ResidualReport:
    if method == "chain":
        return _chain_check(src, phi, tgt, name)
    if method != "direct":
        raise ValueError(f"unknown pushforward method {method!r}")
    target = tgt.reg
    failures: List[str] = []
    checked = 0
    for exps in polys.monomials(target.nvars, degree_bound, min_degree=1):
        full = exps + (0,) * len(target.parameters)
        m = polys.monomial_poly(target, full)
        lhs = src.apply(polys.compose(m, target, src.reg, phi))
        rhs = _pull_back(tgt.apply(m), src.reg, phi)
        checked += 1
        if lhs != rhs:
            residual = lhs - rhs
            failures.append(f"{m.as_expr()}: {residual.as_expr()}")
            logger.debug("[VERIFY] pushforward residual at %s", m.as_expr())
    logger.info("[VERIFY] %s: %d monomials, %d residuals", name, checked, len(failures))
    return ResidualReport(name=name, passed=not failures, checked=checked, failures=failures)


def _chain_check(src: DiffOp, phi: Map, tgt: DiffOp, name: str) -> ResidualReport:
    target = tgt.reg
    matrix, drift = induced_operator(src, target, phi)
    two = src.reg.scalar(2)
    failures: List[str] = []
    checked = 0
    n = target.nvars
    for k in range(n):
        for l in range(k, n):
            expected = matrix[k][l] if k == l else matrix[k][l].scale(two)
            got = _pull_back(tgt.coeff(k, l), src.reg, phi)
            checked += 1
            if got != expected:
                failures.append(f"d[{target.variables[k]},{target.variables[l]}]: {(got - expected).as_expr()}")
        got = _pull_back(tgt.coeff(k), src.reg, phi)
        checked += 1
        if got != drift[k]:
            failures.append(f"d[{target.variables[k]}]: {(got - drift[k]).as_expr()}")
    logger.info("[VERIFY] %s (chain): %d coefficients, %d residuals", name, checked, len(failures))
    return ResidualReport(name=name, passed=not failures, checked=checked, failures=failures)
