import logging
from typing import Iterable, List, Mapping, Optional, Tuple, Union

from sympy import Basic, Mul, Pow
from sympy.polys.rings import PolyElement

from app.errors import BoundaryError, RegistryMismatchError
from app.exact import polys
from app.exact.registry import Registry

"""
RATIONAL FUNCTIONS
numerator / prod(base_k ** e_k) with monic, non-constant bases.
- No multivariate gcd: sums use the lcm over identical bases
- Equality is by cross-multiplication (a - b has zero numerator)
- cancel() strips base factors that divide the numerator exactly
"""

logger = logging.getLogger(__name__)

Factor = Tuple[PolyElement, int]


def _normalize_base(base: PolyElement) -> Tuple[Optional[PolyElement], object]:
    """Split a polynomial into (monic base, leading coefficient); constants give (None, c)."""
    if not base:
        raise BoundaryError("zero denominator")
    if base.is_ground:
        return None, base.LC
    lc = base.LC
    return base.monic(), lc


class RatFunc:
    __slots__ = ("reg", "num", "den")

    def __init__(self, reg: Registry, num: PolyElement, den: Iterable[Factor] = ()):
        self.reg = reg
        self.num = num
        merged: List[Factor] = []
        for base, exp in den:
            if exp == 0:
                continue
            for i, (b, e) in enumerate(merged):
                if b == base:
                    merged[i] = (b, e + exp)
                    break
            else:
                merged.append((base, exp))
        self.den: Tuple[Factor, ...] = tuple(merged) if num else ()

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_poly(cls, reg: Registry, p: PolyElement) -> "RatFunc":
        return cls(reg, p)

    @classmethod
    def const(cls, reg: Registry, value) -> "RatFunc":
        return cls(reg, reg.const(value))

    @classmethod
    def zero(cls, reg: Registry) -> "RatFunc":
        return cls(reg, reg.ring.zero)

    @classmethod
    def one(cls, reg: Registry) -> "RatFunc":
        return cls(reg, reg.ring.one)

    @classmethod
    def over(cls, reg: Registry, num: PolyElement, base: PolyElement, exp: int = 1) -> "RatFunc":
        """num / base**exp with the base normalized to monic form."""
        monic, lc = _normalize_base(base)
        num = num.quo_ground(lc ** exp)
        if monic is None:
            return cls(reg, num)
        return cls(reg, num, [(monic, exp)])

    @classmethod
    def lift(cls, reg: Registry, value: Union["RatFunc", PolyElement, int]) -> "RatFunc":
        if isinstance(value, RatFunc):
            reg.check(value.reg)
            return value
        if isinstance(value, PolyElement):
            if value.ring != reg.ring:
                raise RegistryMismatchError("polynomial from a different ring")
            return cls(reg, value)
        return cls.const(reg, value)

    # -- structure --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_polynomial(self) -> bool:
        return not self.cancel().den

    def as_poly(self) -> PolyElement:
        reduced = self.cancel()
        if reduced.den:
            raise ValueError("rational function is not a polynomial")
        return reduced.num

    def denominator(self) -> PolyElement:
        out = self.reg.ring.one
        for base, exp in self.den:
            out = out * base ** exp
        return out

    def has_base(self, base: PolyElement) -> bool:
        monic, _ = _normalize_base(base)
        return any(b == monic for b, _ in self.cancel().den)

    def cancel(self) -> "RatFunc":
        if not self.den:
            return self
        num = self.num
        kept: List[Factor] = []
        for base, exp in self.den:
            left = exp
            while left:
                (q,), r = num.div([base])
                if r:
                    break
                num = q
                left -= 1
            if left:
                kept.append((base, left))
        return RatFunc(self.reg, num, kept)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "RatFunc":
        return RatFunc.lift(self.reg, other)

    def __add__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if not other.num:
            return self
        if not self.num:
            return other
        common: List[Factor] = list(self.den)
        for base, exp in other.den:
            for i, (b, e) in enumerate(common):
                if b == base:
                    common[i] = (b, max(e, exp))
                    break
            else:
                common.append((base, exp))
        num = self._scaled_num(common) + other._scaled_num(common)
        return RatFunc(self.reg, num, common).cancel()

    __radd__ = __add__

    def _scaled_num(self, common: List[Factor]) -> PolyElement:
        num = self.num
        for base, exp in common:
            mine = next((e for b, e in self.den if b == base), 0)
            if exp > mine:
                num = num * base ** (exp - mine)
        return num

    def __neg__(self) -> "RatFunc":
        return RatFunc(self.reg, -self.num, self.den)

    def __sub__(self, other) -> "RatFunc":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RatFunc":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if not self.num or not other.num:
            return RatFunc.zero(self.reg)
        return RatFunc(self.reg, self.num * other.num, self.den + other.den).cancel()

    __rmul__ = __mul__

    def scale(self, c) -> "RatFunc":
        """Multiply by a domain element."""
        return RatFunc(self.reg, self.num.mul_ground(c), self.den)

    def __truediv__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if not other.num:
            raise BoundaryError("division by the zero rational function")
        inverse = RatFunc.over(self.reg, other.denominator(), other.num)
        return self * inverse

    def __pow__(self, n: int) -> "RatFunc":
        if n < 0:
            return RatFunc.one(self.reg) / self ** (-n)
        return RatFunc(self.reg, self.num ** n, [(b, e * n) for b, e in self.den])

    def __eq__(self, other) -> bool:
        try:
            other = self._coerce(other)
        except RegistryMismatchError:
            return False
        return (self - other).is_zero()

    def __ne__(self, other) -> bool:
        return not self.__eq__(other)

    __hash__ = None

    # -- calculus ---------------------------------------------------------

    def diff(self, i: int) -> "RatFunc":
        """Partial derivative in generator i (quotient rule over the factored denominator)."""
        result = RatFunc(self.reg, self.num.diff(self.reg.ring.gens[i]), self.den)
        for k, (base, exp) in enumerate(self.den):
            db = base.diff(self.reg.ring.gens[i])
            if not db:
                continue
            den = list(self.den)
            den[k] = (base, exp + 1)
            result = result + RatFunc(self.reg, (-exp * self.num) * db, den)
        return result

    # -- evaluation and substitution --------------------------------------

    def evaluate(self, values: Mapping[int, object]):
        value = polys.evaluate(self.num, self.reg, values)
        for base, exp in self.den:
            b = polys.evaluate(base, self.reg, values)
            if not b:
                raise BoundaryError("denominator vanishes at the evaluation point", witness=str(base.as_expr()))
            value = value / b ** exp
        return value

    def substitute(self, values: Mapping[int, object]) -> "RatFunc":
        """Bind generators to constants; the result stays in the same registry."""
        num = polys.substitute(self.num, self.reg, values)
        out = RatFunc(self.reg, num)
        for base, exp in self.den:
            b = polys.substitute(base, self.reg, values)
            out = out * RatFunc.over(self.reg, self.reg.ring.one, b, exp)
        return out

    def compose(self, target: Registry, images: Mapping[str, PolyElement]) -> "RatFunc":
        num = polys.compose(self.num, self.reg, target, images)
        out = RatFunc(target, num)
        for base, exp in self.den:
            b = polys.compose(base, self.reg, target, images)
            out = out * RatFunc.over(target, target.ring.one, b, exp)
        return out

    def convert(self, target: Registry) -> "RatFunc":
        num = polys.convert(self.num, self.reg, target)
        return RatFunc(target, num, [(polys.convert(b, self.reg, target), e) for b, e in self.den])

    # -- display ----------------------------------------------------------

    def as_expr(self) -> Basic:
        expr = self.num.as_expr()
        if self.den:
            expr = expr * Mul(*[Pow(b.as_expr(), -e) for b, e in self.den])
        return expr

    def __repr__(self) -> str:
        from app.exact.serialize import ratfunc_to_text

        return f"RatFunc({ratfunc_to_text(self)})"
