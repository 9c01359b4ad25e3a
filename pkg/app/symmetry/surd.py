"""
Radical tags for symmetry elements. A tagged element is tag * op where op has
coefficients in QQ(sqrt(-6)) and tag = i**imag * sqrt(radicand) with a
squarefree radicand not divisible by 6 (a factor 6 is folded into the field by
i*sqrt(6) = sqrt(-6)). Products of tags reduce exactly; sums need equal tags.
"""

from dataclasses import dataclass
from math import gcd
from typing import Tuple

from sympy import Basic, I, Integer, Rational, factorint, sqrt

from app.exact.registry import SQRT_M6


def _squarefree_split(k: int) -> Tuple[int, int]:
    """k = s**2 * r with r squarefree."""
    if k <= 0:
        raise ValueError("radicand must be positive")
    s, r = 1, 1
    for p, e in factorint(k).items():
        s *= p ** (e // 2)
        r *= p ** (e % 2)
    return s, r


@dataclass(frozen=True)
class Surd:
    imag: bool = False
    radicand: int = 1

    def __post_init__(self):
        if self.radicand % 6 == 0:
            raise ValueError("use Surd.of() so that sqrt(6) folds into the coefficient field")

    @classmethod
    def of(cls, imag: bool, radicand: int) -> Tuple[Basic, "Surd"]:
        """(field coefficient, tag) with i**imag * sqrt(radicand) = coefficient * tag."""
        s, r = _squarefree_split(radicand)
        coeff: Basic = Integer(s)
        if r % 6 == 0:
            r //= 6
            # sqrt(6) = -i sqrt(-6); i sqrt(6) = sqrt(-6)
            if imag:
                coeff, imag = coeff * SQRT_M6, False
            else:
                coeff, imag = -coeff * SQRT_M6, True
        return coeff, cls(imag, r)

    @classmethod
    def sqrt_of(cls, k: int) -> Tuple[Basic, "Surd"]:
        return cls.of(False, k)

    def __mul__(self, other: "Surd") -> Tuple[Basic, "Surd"]:
        g = gcd(self.radicand, other.radicand)
        coeff: Basic = Integer(g)
        if self.imag and other.imag:
            coeff, imag = -coeff, False
        else:
            imag = self.imag or other.imag
        inner, tag = Surd.of(imag, (self.radicand // g) * (other.radicand // g))
        return coeff * inner, tag

    def inverse(self) -> Tuple[Basic, "Surd"]:
        """1/tag = coefficient * tag."""
        sign = -1 if self.imag else 1
        return Rational(sign, self.radicand), self

    @property
    def trivial(self) -> bool:
        return not self.imag and self.radicand == 1

    def value(self) -> Basic:
        return (I if self.imag else 1) * sqrt(self.radicand)

    def __str__(self) -> str:
        if self.trivial:
            return "1"
        parts = (["i"] if self.imag else []) + ([f"sqrt({self.radicand})"] if self.radicand != 1 else [])
        return "*".join(parts)

