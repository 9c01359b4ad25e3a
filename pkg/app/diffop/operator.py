import logging
from math import comb
from typing import Dict, Mapping, Optional, Tuple, Union

from sympy.polys.rings import PolyElement

from app.errors import RegistryMismatchError
from app.exact import polys
from app.exact.ratfunc import RatFunc
from app.exact.registry import Registry, Scalar, bindings

"""
DIFFERENTIAL OPERATORS
sum_alpha c_alpha(x) d^alpha with RatFunc coefficients. Multi-indices run over
the registry variables only; parameters are constants for differentiation.
The coefficient of a mixed second derivative d_a d_b (a != b) is the operator
coefficient, i.e. 2 g^{ab} in metric language.
"""

logger = logging.getLogger(__name__)

MultiIndex = Tuple[int, ...]
Coefficient = Union[RatFunc, PolyElement, int]


def unit(n: int, *positions: int) -> MultiIndex:
    alpha = [0] * n
    for p in positions:
        alpha[p] += 1
    return tuple(alpha)


def _sub(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a - b for a, b in zip(alpha, beta))


def _add(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def _sub_indices(alpha: MultiIndex):
    """All gamma <= alpha with the multinomial weight prod C(alpha_i, gamma_i)."""
    out = [((), 1)]
    for a in alpha:
        out = [(g + (k,), w * comb(a, k)) for g, w in out for k in range(a + 1)]
    return out


class DiffOp:
    __slots__ = ("reg", "terms")

    def __init__(self, reg: Registry, terms: Optional[Mapping[MultiIndex, Coefficient]] = None):
        self.reg = reg
        clean: Dict[MultiIndex, RatFunc] = {}
        for alpha, coeff in (terms or {}).items():
            if len(alpha) != reg.nvars:
                raise RegistryMismatchError(f"multi-index {alpha} does not fit {reg!r}")
            coeff = RatFunc.lift(reg, coeff)
            if not coeff.is_zero():
                clean[alpha] = coeff
        self.terms = clean

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls, reg: Registry) -> "DiffOp":
        return cls(reg)

    @classmethod
    def multiplication(cls, reg: Registry, f: Coefficient) -> "DiffOp":
        return cls(reg, {(0,) * reg.nvars: f})

    @classmethod
    def partial(cls, reg: Registry, *positions: int) -> "DiffOp":
        return cls(reg, {unit(reg.nvars, *positions): 1})

    # -- structure --------------------------------------------------------

    @property
    def order(self) -> int:
        return max((sum(alpha) for alpha in self.terms), default=0)

    def coeff(self, *positions: int) -> RatFunc:
        return self.terms.get(unit(self.reg.nvars, *positions), RatFunc.zero(self.reg))

    def is_zero(self) -> bool:
        return not self.terms

    def part(self, order: int) -> "DiffOp":
        return DiffOp(self.reg, {a: c for a, c in self.terms.items() if sum(a) == order})

    def potential(self) -> RatFunc:
        return self.coeff()

    def is_polynomial(self) -> bool:
        return all(c.is_polynomial() for c in self.terms.values())

    # -- linear structure -------------------------------------------------

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self.reg.check(other.reg)
        terms = dict(self.terms)
        for alpha, c in other.terms.items():
            terms[alpha] = terms[alpha] + c if alpha in terms else c
        return DiffOp(self.reg, terms)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.reg, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __mul__(self, factor: Coefficient) -> "DiffOp":
        """Left multiplication by a function (not composition)."""
        factor = RatFunc.lift(self.reg, factor)
        return DiffOp(self.reg, {a: factor * c for a, c in self.terms.items()})

    __rmul__ = __mul__

    def scale(self, value: Scalar) -> "DiffOp":
        return self * self.reg.const(value)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffOp) or self.reg != other.reg:
            return False
        return (self - other).is_zero()

    __hash__ = None

    # -- action -----------------------------------------------------------

    def apply(self, f: Coefficient) -> RatFunc:
        f = RatFunc.lift(self.reg, f)
        cache: Dict[MultiIndex, RatFunc] = {(0,) * self.reg.nvars: f}

        def derivative(alpha: MultiIndex) -> RatFunc:
            if alpha not in cache:
                i = next(k for k, a in enumerate(alpha) if a)
                lower = list(alpha)
                lower[i] -= 1
                cache[alpha] = derivative(tuple(lower)).diff(i)
            return cache[alpha]

        result = RatFunc.zero(self.reg)
        for alpha in sorted(self.terms, key=sum):
            result = result + self.terms[alpha] * derivative(alpha)
        return result

    def compose(self, other: "DiffOp") -> "DiffOp":
        """self o other via the Leibniz rule."""
        self.reg.check(other.reg)
        terms: Dict[MultiIndex, RatFunc] = {}
        for alpha, a in self.terms.items():
            splits = _sub_indices(alpha)
            for beta, b in other.terms.items():
                for gamma, weight in splits:
                    db = _derivative(b, gamma)
                    if db.is_zero():
                        continue
                    target = _add(_sub(alpha, gamma), beta)
                    contribution = (a * db).scale(self.reg.scalar(weight))
                    terms[target] = terms[target] + contribution if target in terms else contribution
        return DiffOp(self.reg, terms)

    def __matmul__(self, other: "DiffOp") -> "DiffOp":
        return self.compose(other)

    def power(self, k: int) -> "DiffOp":
        out = DiffOp.multiplication(self.reg, 1)
        for _ in range(k):
            out = self.compose(out)
        return out

    # -- coefficient maps -------------------------------------------------

    def map_coefficients(self, fn) -> "DiffOp":
        return DiffOp(self.reg, {a: fn(c) for a, c in self.terms.items()})

    def bind(self, values: Mapping[str, Scalar]) -> "DiffOp":
        """Specialize named parameters (or variables) to exact constants."""
        idx = bindings(self.reg, values)
        return self.map_coefficients(lambda c: c.substitute(idx))

    def convert(self, target: Registry) -> "DiffOp":
        """Same variables, registry with more parameters or the sqrt(-6) extension."""
        if target.variables != self.reg.variables:
            raise RegistryMismatchError("convert keeps the variable list; use a pushforward instead")
        return DiffOp(target, {a: c.convert(target) for a, c in self.terms.items()})

    def restrict(self, target: Registry, images: Mapping[str, Scalar]) -> "DiffOp":
        """Drop the derivatives in variables absent from `target` and set those
        variables (and any bound parameters) to constants in the coefficients."""
        keep = [self.reg.variables.index(v) for v in target.variables]
        dropped = [i for i in range(self.reg.nvars) if i not in keep]
        consts = {name: target.const(value) for name, value in images.items()}
        terms = {}
        for alpha, c in self.terms.items():
            if any(alpha[i] for i in dropped):
                continue
            terms[tuple(alpha[i] for i in keep)] = c.compose(target, consts)
        return DiffOp(target, terms)

    def relabel(self, permutation) -> "DiffOp":
        """Rename variables: variable i becomes variable permutation[i]."""
        n = self.reg.nvars
        gens = self.reg.ring.gens
        images = {self.reg.variables[i]: gens[permutation[i]] for i in range(n)}
        terms = {}
        for alpha, c in self.terms.items():
            new_alpha = [0] * n
            for i, k in enumerate(alpha):
                new_alpha[permutation[i]] += k
            terms[tuple(new_alpha)] = c.compose(self.reg, images)
        return DiffOp(self.reg, terms)

    def __repr__(self) -> str:
        from app.exact.serialize import diffop_to_text

        return diffop_to_text(self)


def _derivative(f: RatFunc, gamma: MultiIndex) -> RatFunc:
    for i, k in enumerate(gamma):
        for _ in range(k):
            f = f.diff(i)
    return f


def commutator(a: DiffOp, b: DiffOp) -> DiffOp:
    return a.compose(b) - b.compose(a)


def from_metric(reg: Registry, matrix, drift, potential: Coefficient = 0) -> DiffOp:
    """g^{mu nu} d_mu d_nu + b^mu d_mu + V with the symmetric matrix summed over ordered pairs."""
    n = reg.nvars
    terms: Dict[MultiIndex, RatFunc] = {}
    for mu in range(n):
        for nu in range(mu, n):
            g = RatFunc.lift(reg, matrix[mu][nu])
            if g.is_zero():
                continue
            terms[unit(n, mu, nu)] = g if mu == nu else g.scale(reg.scalar(2))
    for mu in range(n):
        b = RatFunc.lift(reg, drift[mu])
        if not b.is_zero():
            terms[unit(n, mu)] = b
    terms[(0,) * n] = RatFunc.lift(reg, potential)
    return DiffOp(reg, terms)
