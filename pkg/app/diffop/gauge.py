import logging
from typing import Dict, Iterable, List, Optional, Tuple

from sympy.polys.rings import PolyElement

from app.diffop.operator import DiffOp, MultiIndex, unit
from app.exact.ratfunc import RatFunc
from app.exact.registry import Registry, Scalar

"""
GAUGE FACTORS
Gamma = prod base_k ** e_k * exp(q). Only log-derivatives are ever needed,
and those are rational: d_i log Gamma = sum e_k d_i base_k / base_k + d_i q.
"""

logger = logging.getLogger(__name__)


class GaugeFactor:
    def __init__(
        self,
        reg: Registry,
        factors: Iterable[Tuple[PolyElement, Scalar]] = (),
        exponential: Optional[PolyElement] = None,
    ):
        self.reg = reg
        self.factors: List[Tuple[PolyElement, PolyElement]] = []
        for base, exponent in factors:
            if not base:
                raise ValueError("gauge base must be non-zero")
            if not isinstance(exponent, PolyElement):
                exponent = reg.const(exponent)
            self.factors.append((base, exponent))
        self.exponential = exponential if exponential is not None else reg.ring.zero

    def log_derivative(self, i: int) -> RatFunc:
        gen = self.reg.ring.gens[i]
        total = RatFunc.from_poly(self.reg, self.exponential.diff(gen))
        for base, exponent in self.factors:
            db = base.diff(gen)
            if db:
                total = total + RatFunc.over(self.reg, exponent * db, base)
        return total

    def inverse(self) -> "GaugeFactor":
        return GaugeFactor(self.reg, [(b, -e) for b, e in self.factors], -self.exponential)

    def __mul__(self, other: "GaugeFactor") -> "GaugeFactor":
        self.reg.check(other.reg)
        return GaugeFactor(self.reg, self.factors + other.factors, self.exponential + other.exponential)

    def ratio_of_laplacian(self, op: DiffOp) -> RatFunc:
        """(op Gamma)/Gamma: the potential part of Gamma^-1 op Gamma."""
        return gauge_conjugate(op, self).potential()

    def __repr__(self) -> str:
        parts = [f"({b.as_expr()})**({e.as_expr()})" for b, e in self.factors]
        if self.exponential:
            parts.append(f"exp({self.exponential.as_expr()})")
        return "Gamma[" + " * ".join(parts or ["1"]) + "]"


def gauge_conjugate(op: DiffOp, gamma: GaugeFactor) -> DiffOp:
    """Gamma^-1 op Gamma by d_i -> d_i + d_i log Gamma.

    The shifted partials commute because the shifts form a gradient, so
    d^alpha maps to the ordered product of (d_i + L_i)^{alpha_i}.
    """
    reg = op.reg
    reg.check(gamma.reg)
    n = reg.nvars
    shifted = [
        DiffOp(reg, {unit(n, i): 1, (0,) * n: gamma.log_derivative(i)})
        for i in range(n)
    ]
    powers: Dict[MultiIndex, DiffOp] = {(0,) * n: DiffOp.multiplication(reg, 1)}

    def image(alpha: MultiIndex) -> DiffOp:
        if alpha not in powers:
            i = next(k for k, a in enumerate(alpha) if a)
            lower = list(alpha)
            lower[i] -= 1
            powers[alpha] = shifted[i].compose(image(tuple(lower)))
        return powers[alpha]

    out = DiffOp.zero(reg)
    for alpha, c in op.terms.items():
        out = out + image(alpha) * c
    logger.debug("[GAUGE] conjugated order-%d operator by %r", op.order, gamma)
    return out
