import logging
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.rings import PolyElement

from app.config import DEFAULT_ORACLE_TRIALS, DEFAULT_SEED
from app.diffop.operator import DiffOp
from app.exact import polys
from app.exact.ratfunc import RatFunc
from app.exact.registry import Registry, registry
from app.schemas.reports import ResidualReport

"""
CARTESIAN ORACLE
A radial operator on squared distances rho_ij is checked against
sum_i 1/(2 m_i) Laplacian_{x_i} acting on f(rho(x)) with
rho_ij = sum_a (x_{i,a} - x_{j,a})**2, for random polynomial f.
"""

logger = logging.getLogger(__name__)


def pair_of(name: str) -> Tuple[int, int]:
    """'rho12' -> (1, 2)."""
    tail = name[-2:]
    if not tail.isdigit():
        raise ValueError(f"{name!r} is not a pair variable")
    return int(tail[0]), int(tail[1])


def cartesian_registry(n: int, d: int, parameters: Sequence[str] = ()) -> Registry:
    names = tuple(f"x{i}_{a}" for i in range(1, n + 1) for a in range(1, d + 1))
    return registry(names, tuple(parameters))


def distance_map(reg: Registry, cart: Registry, n: int, d: int) -> Dict[str, PolyElement]:
    images = {}
    for name in reg.variables:
        i, j = pair_of(name)
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"{name} refers to particles outside 1..{n}")
        images[name] = sum(
            ((cart.gen(f"x{i}_{a}") - cart.gen(f"x{j}_{a}")) ** 2 for a in range(1, d + 1)),
            cart.ring.zero,
        )
    return images


def flat_laplacian(p: PolyElement, cart: Registry, n: int, d: int, masses: Sequence[Fraction]) -> PolyElement:
    out = cart.ring.zero
    for i in range(1, n + 1):
        weight = cart.scalar(Fraction(1, 2) / masses[i - 1])
        part = cart.ring.zero
        for a in range(1, d + 1):
            gen = cart.gen(f"x{i}_{a}")
            part = part + p.diff(gen).diff(gen)
        out = out + part.mul_ground(weight)
    return out


def _bind(op: DiffOp, d: int, masses: Sequence[Fraction]) -> DiffOp:
    values = {}
    if "d" in op.reg.parameters:
        values["d"] = d
    for k, m in enumerate(masses, start=1):
        if f"m{k}" in op.reg.parameters:
            values[f"m{k}"] = m
    return op.bind(values) if values else op


def cartesian_oracle(
    op: DiffOp,
    d: int,
    masses: Optional[Sequence] = None,
    trials: int = DEFAULT_ORACLE_TRIALS,
    seed: int = DEFAULT_SEED,
    n: Optional[int] = None,
    degree: int = 3,
) -> ResidualReport:
    """Compare op f with the mass-weighted flat Laplacian on f(rho(x)).

    Linear test functions (each variable) come first, then `trials` random
    polynomials of degree <= `degree`.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if n is None:
        n = max(max(pair_of(v)) for v in op.reg.variables)
    masses = [Fraction(m) for m in (masses or [1] * n)]
    if len(masses) != n or any(m <= 0 for m in masses):
        raise ValueError("need one positive mass per particle")
    bound = _bind(op, d, masses)
    reg = bound.reg
    leftover = [p for p in reg.parameters if p not in ("d",) + tuple(f"m{k}" for k in range(1, n + 1))]
    cart = cartesian_registry(n, d, reg.parameters)
    phi = distance_map(reg, cart, n, d)
    rng = np.random.default_rng(seed)

    tests: List[PolyElement] = [reg.var(i) for i in range(reg.nvars)]
    tests += [polys.random_poly(reg, rng, degree) for _ in range(trials)]
    failures: List[str] = []
    for f in tests:
        lifted = polys.compose(f, reg, cart, phi)
        lhs = RatFunc.from_poly(cart, flat_laplacian(lifted, cart, n, d, masses))
        rhs = bound.apply(f).compose(cart, phi)
        if lhs != rhs:
            failures.append(str(f.as_expr()))
    name = f"cartesian oracle d={d} masses={','.join(map(str, masses))}"
    if leftover:
        name += f" (formal {','.join(leftover)})"
    logger.info("[VERIFY] %s: %d/%d functions agree", name, len(tests) - len(failures), len(tests))
    return ResidualReport(name=name, passed=not failures, checked=len(tests), failures=failures)


def pairs(n: int) -> List[Tuple[int, int]]:
    return list(combinations(range(1, n + 1), 2))
