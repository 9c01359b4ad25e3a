import logging
from dataclasses import dataclass, field
from typing import List, Tuple

from sympy.polys.rings import PolyElement

from app.diffop.operator import DiffOp, unit
from app.exact.registry import Registry, Scalar

"""
AFFINE GENERATORS
Words in J-_i = d_i, J0_ij = x_i d_j, J0(N) = sum x_k d_k - N and
J+_i(N) = x_i J0(N) over any registry (b7 on the six rho, b3 on xi).
Indices are 1-based as printed. Products are expanded left to right by
operator composition, so the word order matters.
"""

logger = logging.getLogger(__name__)

N_PARAM = "N"

# adjacent edges (sharing a particle) of each rho slot, 1-based
ADJACENT = {
    1: (2, 3, 4, 5),
    2: (1, 3, 4, 6),
    3: (1, 2, 5, 6),
    4: (1, 2, 5, 6),
    5: (1, 3, 4, 6),
    6: (2, 3, 4, 5),
}

# J0_ij J-_k, one per pair of edges sharing a particle; i is the edge closing the triangle
TRIANGLE_WORDS = (
    (1, 2, 4), (1, 3, 5), (2, 1, 4), (2, 3, 6), (3, 1, 5), (3, 2, 6),
    (4, 1, 2), (4, 5, 6), (5, 4, 6), (6, 2, 3), (6, 4, 5), (5, 1, 3),
)


@dataclass(frozen=True)
class Gen:
    kind: str  # "-", "0", "0N", "+N"
    i: int = 0
    j: int = 0

    def __str__(self) -> str:
        if self.kind == "-":
            return f"J-_{self.i}"
        if self.kind == "0":
            return f"J0_{self.i}{self.j}"
        if self.kind == "0N":
            return "J0(N)"
        return f"J+_{self.i}(N)"


def Jm(i: int) -> Gen:
    return Gen("-", i)


def J0(i: int, j: int) -> Gen:
    return Gen("0", i, j)


def J0N() -> Gen:
    return Gen("0N")


def Jp(i: int) -> Gen:
    return Gen("+N", i)


@dataclass
class GeneratorExpr:
    """Formal sum of coefficient * product of generators."""

    terms: List[Tuple[Scalar, Tuple[Gen, ...]]] = field(default_factory=list)

    def add(self, coeff, *word: Gen) -> "GeneratorExpr":
        self.terms.append((coeff, tuple(word)))
        return self

    def __add__(self, other: "GeneratorExpr") -> "GeneratorExpr":
        return GeneratorExpr(self.terms + other.terms)

    def scaled(self, factor) -> "GeneratorExpr":
        return GeneratorExpr([(factor * c, w) for c, w in self.terms])

    def uses_n(self) -> bool:
        return any(g.kind in ("0N", "+N") for _, w in self.terms for g in w)

    def __str__(self) -> str:
        return " + ".join(f"({c})*" + "*".join(map(str, w)) for c, w in self.terms)


def realize(gen: Gen, reg: Registry) -> DiffOp:
    n = reg.nvars
    if gen.kind == "-":
        return DiffOp.partial(reg, gen.i - 1)
    if gen.kind == "0":
        return DiffOp(reg, {unit(n, gen.j - 1): reg.var(gen.i - 1)})
    euler = {unit(n, k): reg.var(k) for k in range(n)}
    euler[(0,) * n] = -reg.param(N_PARAM)
    j0n = DiffOp(reg, euler)
    if gen.kind == "0N":
        return j0n
    if gen.kind == "+N":
        return j0n * reg.var(gen.i - 1)
    raise ValueError(f"unknown generator kind {gen.kind!r}")


def expand_generators(expr: GeneratorExpr, reg: Registry) -> DiffOp:
    """Substitute the differential realizations and normal-order into a DiffOp."""
    if expr.uses_n() and N_PARAM not in reg.parameters:
        raise ValueError("J0(N) and J+(N) need the parameter N in the registry")
    cache = {}
    out = DiffOp.zero(reg)
    for coeff, word in expr.terms:
        op = DiffOp.multiplication(reg, 1)
        for g in reversed(word):
            if g not in cache:
                cache[g] = realize(g, reg)
            op = cache[g].compose(op)
        out = out + op * _lift(reg, coeff)
    return out


def _lift(reg: Registry, coeff):
    if isinstance(coeff, PolyElement):
        return coeff
    return reg.const(coeff)


# -- b7 words on rho --------------------------------------------------------


def _second_order_body(sign, triangle_coeff) -> GeneratorExpr:
    expr = GeneratorExpr()
    for i in range(1, 7):
        expr.add(sign * 2, J0(i, i), Jm(i))
    for i, adj in ADJACENT.items():
        for k in adj:
            expr.add(sign, J0(i, i), Jm(k))
    for i, j, k in TRIANGLE_WORDS:
        expr.add(triangle_coeff, J0(i, j), Jm(k))
    return expr


def half_radial_word(reg: Registry, triangle_coeff: Scalar = -1) -> GeneratorExpr:
    """1/2 Delta_radial(rho) in b7 generators; the printed transcript uses -2."""
    expr = _second_order_body(1, triangle_coeff)
    d = reg.param("d")
    for i in range(1, 7):
        expr.add(d, Jm(i))
    return expr


def half_qes_word(reg: Registry, triangle_coeff: Scalar = 1) -> GeneratorExpr:
    """1/2 h^(qes) in b7 generators with J+(N); the printed transcript uses +2."""
    expr = _second_order_body(-1, triangle_coeff)
    gamma, omega, A = reg.param("gamma"), reg.param("omega"), reg.param("A")
    for i in range(1, 7):
        expr.add(-(3 + 2 * gamma), Jm(i))
        expr.add(8 * A, Jp(i))
        expr.add(8 * omega, J0(i, i))
    return expr


# -- b3 word on xi ----------------------------------------------------------


def xi_laplacian_word() -> GeneratorExpr:
    """Delta_LB(xi) of the d=1 relative motion in b3 generators."""
    return (
        GeneratorExpr()
        .add(6, Jm(1), Jm(1))
        .add(3, J0(1, 2), J0(1, 2))
        .add(-1, J0(2, 2), Jm(2))
        .add(1, J0(2, 3), J0(2, 3))
        .add(-1, J0(3, 3), J0(1, 3))
        .add(8, J0(1, 1), Jm(2))
        .add(4, J0(2, 1), Jm(3))
        .add(3, J0(2, 3), J0(1, 2))
        .add(-3, J0(3, 2), Jm(3))
        .add(3, Jm(2))
        .add(1, J0(1, 3))
    )

