import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Basic, Integer, sympify
from sympy.polys.domains import QQ

from app.catalog.operators import RHO, delta_radial_rho
from app.diffop.operator import DiffOp, commutator, unit
from app.errors import InvarianceError, NotAnEigenvectorError
from app.exact import linalg
from app.exact.polys import evaluate
from app.exact.registry import SQRT_M6, Registry, registry
from app.exact.serialize import parse_poly
from app.geometry import tetra
from app.schemas.configs import RHO_NAMES
from app.symmetry.surd import Surd

"""
SYMMETRIES OF THE RADIAL LAPLACIAN
- first order: the family L(a, b, c) and the so(3) basis built from it
- second order with linear coefficients (D1): derived as a nullspace, then
  split under so(3) into the Laplacian (l = 0) and a quintet (l = 2)
Elements with radical coefficients are carried as Surd-tagged operators over
QQ(sqrt(-6)); every bracket and ladder step stays exact.
"""

logger = logging.getLogger(__name__)

EXT = registry(RHO_NAMES, ("d",), True)
FORMAL_L = tetra.rho_registry(("d", "a", "b", "c"))


@dataclass
class SymmetryElement:
    op: DiffOp
    tag: Surd = Surd()
    label: Optional[Tuple[int, int]] = None

    def scaled(self, value) -> "SymmetryElement":
        return SymmetryElement(self.op.scale(value), self.tag, self.label)

    def _same_tag(self, other: "SymmetryElement") -> None:
        if self.tag != other.tag:
            raise ValueError(f"cannot add elements tagged {self.tag} and {other.tag}")

    def __add__(self, other: "SymmetryElement") -> "SymmetryElement":
        self._same_tag(other)
        return SymmetryElement(self.op + other.op, self.tag)

    def __sub__(self, other: "SymmetryElement") -> "SymmetryElement":
        self._same_tag(other)
        return SymmetryElement(self.op - other.op, self.tag)

    def __matmul__(self, other: "SymmetryElement") -> "SymmetryElement":
        coeff, tag = self.tag * other.tag
        return SymmetryElement(self.op.compose(other.op).scale(coeff), tag)

    def bracket(self, other: "SymmetryElement") -> "SymmetryElement":
        coeff, tag = self.tag * other.tag
        return SymmetryElement(commutator(self.op, other.op).scale(coeff), tag)

    def times_i(self) -> "SymmetryElement":
        coeff, tag = Surd(True, 1) * self.tag
        return SymmetryElement(self.op.scale(coeff), tag, self.label)

    def divided_by_sqrt(self, k: int) -> "SymmetryElement":
        outer, root = Surd.sqrt_of(k)
        inv, _ = root.inverse()
        coeff, tag = self.tag * root
        return SymmetryElement(self.op.scale(coeff * inv / outer), tag)

    def is_zero(self) -> bool:
        return self.op.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymmetryElement):
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.tag == other.tag and self.op == other.op

    __hash__ = None

    def commutes_with(self, op: DiffOp) -> bool:
        return commutator(op, self.op).is_zero()


def certify(element: SymmetryElement) -> SymmetryElement:
    """Raise InvarianceError unless the element commutes with Delta_radial exactly."""
    delta = delta_radial_rho(element.op.reg)
    if not element.commutes_with(delta):
        raise InvarianceError(f"element {element.label or ''} does not commute with Delta_radial", witness=element.label)
    return element


# -- first-order symmetries -------------------------------------------------------


def L_family(a=None, b=None, c=None, reg: Optional[Registry] = None) -> DiffOp:
    """L(a, b, c); parameters left as None become the formal a, b, c."""
    if a is None or b is None or c is None:
        reg = FORMAL_L
        a, b, c = reg.param("a"), reg.param("b"), reg.param("c")
    else:
        reg = reg or RHO
        a, b, c = (reg.const(Fraction(v) if not isinstance(v, Basic) else v) for v in (a, b, c))
    r = {name: reg.gen(name) for name in RHO_NAMES}
    h = reg.const(Fraction(1, 2))
    p, q = 3 * h * a + 7 * h * b + 3 * c, 3 * h * a + 3 * h * b + c
    s, t = h * a - h * b - c, 3 * h * a + 5 * h * b + 3 * c
    u, w = a + 3 * b + 3 * c, 2 * a + 3 * b + 3 * c
    x, y = h * a + 5 * h * b + 2 * c, 3 * h * a + 3 * h * b + 2 * c
    coeffs = {
        "rho12": a * r["rho13"] + b * r["rho14"] - a * r["rho23"] - b * r["rho24"],
        "rho13": p * r["rho14"] - q * r["rho12"] + q * r["rho23"] - p * r["rho34"],
        "rho23": s * r["rho12"] - s * r["rho13"] + t * r["rho24"] - t * r["rho34"],
        "rho14": c * r["rho12"] - u * r["rho13"] - c * r["rho24"] + u * r["rho34"],
        "rho24": (a + 2 * b + c) * (r["rho12"] - r["rho14"]) - w * r["rho23"] + w * r["rho34"],
        "rho34": x * r["rho13"] - x * r["rho14"] + y * r["rho23"] - y * r["rho24"],
    }
    return DiffOp(reg, {unit(reg.nvars, reg.index(name)): coeff for name, coeff in coeffs.items()})


# A1, A2, K3 are the rational parts: J1 = sqrt(35) A1, J2 = sqrt(210) A2, J3 = sqrt(6) K3
A1_PARAMS = (Fraction(2, 35), Fraction(0), Fraction(-3, 35))
A2_PARAMS = (Fraction(-17, 420), Fraction(35, 420), Fraction(-27, 420))
K3_PARAMS = (Fraction(5, 12), Fraction(1, 12), Fraction(-1, 4))


def rational_parts(reg: Registry = RHO) -> Tuple[DiffOp, DiffOp, DiffOp]:
    return L_family(*A1_PARAMS, reg=reg), L_family(*A2_PARAMS, reg=reg), L_family(*K3_PARAMS, reg=reg)


def tagged(op: DiffOp, imag: bool, radicand: int) -> SymmetryElement:
    coeff, tag = Surd.of(imag, radicand)
    return SymmetryElement(op.scale(coeff), tag)


def so3_basis() -> Tuple[SymmetryElement, SymmetryElement, SymmetryElement]:
    A1, A2, K3 = rational_parts(EXT)
    return tagged(A1, False, 35), tagged(A2, False, 210), tagged(K3, False, 6)


def complex_basis() -> Tuple[SymmetryElement, SymmetryElement, SymmetryElement]:
    """(J0, J+, J-) with J0 = i J3, J+ = -J2 + i J1, J- = J2 + i J1."""
    J1, J2, J3 = so3_basis()
    iJ1 = J1.times_i()
    return J3.times_i(), iJ1 - J2, iJ1 + J2


def so3_relations() -> Dict[str, bool]:
    J1, J2, J3 = so3_basis()
    return {
        "[J1,J2]=J3": J1.bracket(J2) == J3,
        "[J2,J3]=J1": J2.bracket(J3) == J1,
        "[J3,J1]=J2": J3.bracket(J1) == J2,
    }


def casimir() -> SymmetryElement:
    J1, J2, J3 = so3_basis()
    return J1 @ J1 + J2 @ J2 + J3 @ J3


def first_order_rank(ops: Sequence[DiffOp]) -> int:
    """Rank over QQ of the coefficient vectors of first-order operators."""
    rows = []
    for op in ops:
        row = []
        for i in range(op.reg.nvars):
            poly = op.coeff(i).as_poly()
            row.extend(poly.coeff(op.reg.var(k)) for k in range(op.reg.nvars))
        rows.append(row)
    return linalg.rank(rows, len(rows[0]), op.reg.domain)


# -- second-order symmetries with linear coefficients -----------------------------

_SLOTS = [(a, b, k) for a in range(6) for b in range(a, 6) for k in range(6)]


def _elementary(reg: Registry, a: int, b: int, k: int) -> DiffOp:
    return DiffOp(reg, {unit(reg.nvars, a, b): reg.var(k)})


def _coordinates(op: DiffOp) -> List:
    """Second-order coefficient vector over the (pair, linear monomial) slots."""
    reg = op.reg
    out = []
    for a, b, k in _SLOTS:
        poly = op.coeff(a, b).as_poly()
        out.append(poly.coeff(reg.var(k)))
    return out


def with_divergence_drift(second: DiffOp) -> DiffOp:
    """Attach the first-order part (d/4) * sum_a d_a r^{ab} to a pure second-order operator."""
    reg = second.reg
    n = reg.nvars
    quarter = reg.param("d").mul_ground(reg.scalar(Fraction(1, 4)))
    half = reg.scalar(Fraction(1, 2))
    terms = dict(second.terms)
    for b in range(n):
        div = reg.ring.zero
        for a in range(n):
            entry = second.coeff(a, b).as_poly()
            if a != b:
                entry = entry.mul_ground(half)
            div += entry.diff(reg.var(a))
        if div:
            terms[unit(n, b)] = quarter * div
    return DiffOp(reg, terms)


@lru_cache(maxsize=None)
def d1_basis() -> Tuple[DiffOp, ...]:
    """Basis of the second-order symmetries whose second-order coefficients are linear in rho."""
    reg = RHO
    delta = delta_radial_rho(reg)
    elementary = [_elementary(reg, a, b, k) for a, b, k in _SLOTS]
    equations: Dict[Tuple, Dict[int, object]] = {}
    for j, e in enumerate(elementary):
        third = commutator(delta, e).part(3)
        for alpha, coeff in third.terms.items():
            for monom, c in coeff.as_poly().items():
                equations.setdefault((alpha, monom), {})[j] = c
    rows = [[row.get(j, QQ.zero) for j in range(len(elementary))] for row in equations.values()]
    vectors = linalg.nullspace(rows, len(elementary), QQ)
    logger.info("[VERIFY] D1 nullspace: %d equations, dimension %d", len(rows), len(vectors))
    basis = []
    for v in vectors:
        second = DiffOp(reg, {})
        for j, coeff in enumerate(v):
            if coeff:
                second = second + elementary[j] * reg.ring.ground_new(coeff)
        element = with_divergence_drift(second)
        if not commutator(delta, element).is_zero():
            raise InvarianceError("D1 candidate does not commute with Delta_radial", witness=repr(element))
        basis.append(element)
    if len(basis) != 6:
        raise InvarianceError(f"expected a 6-dimensional D1, found {len(basis)}", witness=len(basis))
    return tuple(basis)


def pairwise_commuting(ops: Sequence[DiffOp]) -> List[Tuple[int, int]]:
    """Index pairs whose commutator is not zero."""
    return [(i, j) for i in range(len(ops)) for j in range(i + 1, len(ops)) if not commutator(ops[i], ops[j]).is_zero()]


def symbol_jacobian_rank(ops: Sequence[DiffOp], point: Sequence[Fraction], momenta: Sequence[Fraction]) -> int:
    """Rank of the (rho, p)-gradients of the principal symbols sum g^{ab} p_a p_b at one phase point."""
    reg = ops[0].reg
    n = reg.nvars
    values = {i: reg.scalar(Fraction(v)) for i, v in enumerate(point)}
    values.update({reg.index(name): reg.domain.zero for name in reg.parameters})
    p = [reg.scalar(Fraction(v)) for v in momenta]
    half = reg.scalar(Fraction(1, 2))
    rows = []
    for op in ops:
        g = [[None] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                entry = op.coeff(a, b).as_poly()
                g[a][b] = entry if a == b else entry.mul_ground(half)
        grad_rho = []
        for k in range(n):
            total = reg.domain.zero
            for a in range(n):
                for b in range(n):
                    deriv = g[a][b].diff(reg.var(k))
                    if deriv:
                        total += evaluate(deriv, reg, values) * p[a] * p[b]
            grad_rho.append(total)
        grad_p = []
        for a in range(n):
            total = reg.domain.zero
            for b in range(n):
                if g[a][b]:
                    total += 2 * evaluate(g[a][b], reg, values) * p[b]
            grad_p.append(total)
        rows.append(grad_rho + grad_p)
    return linalg.rank(rows, 2 * n, reg.domain)


def ad_matrix(first: DiffOp, basis: Sequence[DiffOp]) -> List[List]:
    """Matrix of X -> [first, X] on span(basis); column j holds the image of basis[j]."""
    reg = basis[0].reg
    columns = [_coordinates(b) for b in basis]
    rows = [[columns[j][i] for j in range(len(basis))] for i in range(len(_SLOTS))]
    out = []
    for b in basis:
        image = commutator(first, b)
        coords, _ = linalg.solve(rows, _coordinates(image), reg.domain)
        out.append(coords)
    return [[out[j][i] for j in range(len(basis))] for i in range(len(basis))]


def _to_ext(value) -> object:
    return EXT.domain.convert_from(value, QQ)


def highest_weight_quintet() -> SymmetryElement:
    """The l = 2, m = 2 element of D1: [J0, f] = 2 f, scaled so rho13 d^2_{rho13} has coefficient -2."""
    basis = d1_basis()
    K3 = rational_parts(RHO)[2]
    M = ad_matrix(K3, basis)
    K = EXT.domain
    # ad J0 = sqrt(-6) ad K3, weight 2 <=> K3-eigenvalue -sqrt(-6)/3
    lam = K.from_sympy(-SQRT_M6 / 3)
    shifted = [[_to_ext(M[i][j]) - (lam if i == j else K.zero) for j in range(6)] for i in range(6)]
    kernel = linalg.nullspace(shifted, 6, K)
    if len(kernel) != 1:
        raise NotAnEigenvectorError(f"weight-2 eigenspace has dimension {len(kernel)}", witness=len(kernel))
    v = kernel[0]
    f = DiffOp(EXT, {})
    for coeff, b in zip(v, basis):
        if coeff:
            f = f + b.convert(EXT) * EXT.ring.ground_new(coeff)
    idx = EXT.index("rho13")
    pivot = f.coeff(idx, idx).as_poly().coeff(EXT.gen("rho13"))
    if not pivot:
        raise NotAnEigenvectorError("highest-weight element has no rho13 d^2_{rho13} term")
    scale = K.quo(K.from_sympy(Integer(-2)), pivot)
    return SymmetryElement(f * EXT.ring.ground_new(scale), Surd(), (2, 2))


def ladder_generate(seed: SymmetryElement, ell: int) -> List[SymmetryElement]:
    """f_{m-1} = [J-, f_m] / sqrt((l + m)(l - m + 1)), starting from the highest weight."""
    J0, Jplus, Jminus = complex_basis()
    if J0.bracket(seed) != seed.scaled(Integer(ell)):
        raise NotAnEigenvectorError(f"seed is not a weight-{ell} vector of ad J0")
    current = SymmetryElement(seed.op, seed.tag, (ell, ell))
    multiplet = [current]
    for m in range(ell, -ell, -1):
        lowered = Jminus.bracket(current).divided_by_sqrt((ell + m) * (ell - m + 1))
        current = certify(SymmetryElement(lowered.op, lowered.tag, (ell, m - 1)))
        multiplet.append(current)
    logger.info("[VERIFY] ladder from l=%d produced %d elements", ell, len(multiplet))
    return multiplet


def weight_of(element: SymmetryElement) -> Optional[int]:
    J0 = complex_basis()[0]
    image = J0.bracket(element)
    for m in range(-4, 5):
        if image == element.scaled(Integer(m)):
            return m
    return None


# -- printed quintet element ---------------------------------------------------------

# (coefficient with s = sqrt(-6), derivative variables, linear form)
PRINTED_F2 = (
    ("-2", ("rho13", "rho13"), "rho13"),
    ("1", ("rho34", "rho13"), "rho13 + rho34 - rho14"),
    ("-(63 + 46*s)/33", ("rho23", "rho23"), "rho23"),
    ("-(3 - 2*s)/6", ("rho12",), "d"),
    ("(5 + 4*s)/11", ("rho13", "rho12"), "rho13 + rho12 - rho23"),
    ("-(13 + 6*s)/11", ("rho14", "rho14"), "rho14"),
    ("(5 + 4*s)/11", ("rho34", "rho12"), "rho13 - rho14 - rho23 + rho24"),
    ("(13 + 6*s)/11", ("rho24", "rho14"), "rho12 - rho14 - rho24"),
    ("1", ("rho23", "rho14"), "rho12 - rho13 - rho24 + rho34"),
    ("-1", ("rho14", "rho13"), "rho13 + rho14 - rho34"),
    ("-(63 + 46*s)/66", ("rho23",), "d"),
    ("(4 + s)/3", ("rho24", "rho13"), "rho12 - rho14 - rho23 + rho34"),
    ("(3 - 2*s)/3", ("rho12", "rho12"), "rho12"),
    ("-1", ("rho13",), "d"),
    ("-(3 - 2*s)/11", ("rho34", "rho24"), "rho23 - rho34 - rho24"),
    ("(27 + 4*s)/11", ("rho23", "rho13"), "rho12 - rho13 - rho23"),
    ("-(15 + 34*s)/33", ("rho24", "rho23"), "rho23 + rho24 - rho34"),
    ("-(13 + 6*s)/11", ("rho34", "rho34"), "rho34"),
    ("2*(1 + 3*s)/11", ("rho34", "rho14"), "rho13 - rho14 - rho34"),
    ("(3 - 2*s)/3", ("rho24", "rho12"), "rho12 - rho14 + rho24"),
    ("-(3 + 20*s)/33", ("rho24",), "d"),
    ("-4*(4 + s)/11", ("rho34", "rho23"), "rho23 + rho34 - rho24"),
    ("-(13 + 6*s)/22", ("rho34",), "d"),
    ("-2*(3 + 20*s)/33", ("rho24", "rho24"), "rho24"),
    ("2*(9 - 17*s)/33", ("rho23", "rho12"), "rho12 - rho13 + rho23"),
    ("(13 + 6*s)/22", ("rho14",), "d"),
)


def printed_quintet_element() -> SymmetryElement:
    reg = EXT
    op = DiffOp(reg, {})
    for coeff_text, names, form in PRINTED_F2:
        coeff = sympify(coeff_text, locals={"s": SQRT_M6})
        alpha = unit(reg.nvars, *[reg.index(n) for n in names])
        poly = parse_poly(form, reg).mul_ground(reg.scalar(coeff))
        op = op + DiffOp(reg, {alpha: poly})
    return SymmetryElement(op, Surd(), (2, 2))


def printed_residual() -> Dict[str, object]:
    """How far the printed quintet element is from a symmetry and from the derived one."""
    printed = printed_quintet_element()
    delta = delta_radial_rho(EXT)
    residual = commutator(delta, printed.op)
    derived = highest_weight_quintet()
    difference = printed.op - derived.op
    return {
        "commutator_terms": len(residual.terms),
        "commutes": residual.is_zero(),
        "weight": weight_of(printed),
        "differs_from_derived": len(difference.terms),
    }


def casimir_commutes() -> Dict[str, bool]:
    C = casimir()
    return {f"[C,J{k}]=0": C.bracket(J).is_zero() for k, J in enumerate(so3_basis(), start=1)}


def d1_split() -> Dict[str, object]:
    """D1 = span(Delta_radial) + l=2 quintet: weights of the ladder and total rank."""
    quintet = ladder_generate(highest_weight_quintet(), 2)
    weights = [weight_of(f) for f in quintet]
    return {"weights": weights, "size": len(quintet)}
