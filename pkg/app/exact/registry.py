import logging
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

from sympy import Basic, Rational, sqrt, sympify
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement, PolyRing

from app.errors import RegistryMismatchError

"""
VARIABLE REGISTRY
One sympy polynomial ring per computation context. The first generators are
the differentiation variables, the remaining ones are formal parameters
(d, gamma, omega, A, N, masses, a, b, c). Coefficients live in QQ or, for the
symmetry module, in QQ(sqrt(-6)).
"""

logger = logging.getLogger(__name__)

Scalar = Union[int, Fraction, Basic]

SQRT_M6 = sqrt(-6)


class Registry:
    def __init__(
        self,
        variables: Sequence[str],
        parameters: Sequence[str] = (),
        extension: bool = False,
    ):
        clash = set(variables) & set(parameters)
        if clash:
            raise RegistryMismatchError(f"names used as both variable and parameter: {sorted(clash)}")
        self.variables: Tuple[str, ...] = tuple(variables)
        self.parameters: Tuple[str, ...] = tuple(parameters)
        self.extension = extension
        self.domain = QQ.algebraic_field(SQRT_M6) if extension else QQ
        self.ring = PolyRing(list(self.variables) + list(self.parameters), self.domain)
        self.names: Tuple[str, ...] = self.variables + self.parameters
        self._index: Dict[str, int] = {name: i for i, name in enumerate(self.names)}

    # -- identity ---------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Registry)
            and self.names == other.names
            and self.nvars == other.nvars
            and self.extension == other.extension
        )

    def __hash__(self) -> int:
        return hash((self.names, self.nvars, self.extension))

    def __repr__(self) -> str:
        ext = ", ext=sqrt(-6)" if self.extension else ""
        return f"Registry(vars={list(self.variables)}, params={list(self.parameters)}{ext})"

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise RegistryMismatchError(f"{name!r} is not in {self!r}") from None

    def gen(self, name: str) -> PolyElement:
        return self.ring.gens[self.index(name)]

    def var(self, i: int) -> PolyElement:
        return self.ring.gens[i]

    def vars(self) -> Tuple[PolyElement, ...]:
        return self.ring.gens[: self.nvars]

    def param(self, name: str) -> PolyElement:
        if name not in self.parameters:
            raise RegistryMismatchError(f"{name!r} is not a parameter of {self!r}")
        return self.gen(name)

    def check(self, other: "Registry") -> None:
        if self != other:
            raise RegistryMismatchError(f"registry mismatch: {self!r} vs {other!r}")

    # -- derived registries -----------------------------------------------

    def with_parameters(self, extra: Iterable[str]) -> "Registry":
        params = list(self.parameters) + [p for p in extra if p not in self.parameters]
        return Registry(self.variables, params, self.extension)

    def extended(self) -> "Registry":
        return Registry(self.variables, self.parameters, extension=True)

    # -- coefficients -----------------------------------------------------

    def scalar(self, value: Scalar):
        """Domain element for an int, Fraction, sympy number or radical expression."""
        if isinstance(value, Fraction):
            q = QQ(value.numerator, value.denominator)
            return q if not self.extension else self.domain.convert_from(q, QQ)
        if isinstance(value, int):
            return self.domain(value) if not self.extension else self.domain.convert_from(QQ(value), QQ)
        value = sympify(value)
        if value.is_Rational:
            return self.scalar(Fraction(int(value.p), int(value.q)))
        return self.domain.from_sympy(value)

    def const(self, value: Scalar) -> PolyElement:
        return self.ring.ground_new(self.scalar(value))

    @property
    def sqrt_m6(self):
        if not self.extension:
            raise RegistryMismatchError("sqrt(-6) requires an extended registry")
        return self.domain.from_sympy(SQRT_M6)

    def coerce(self, coeff, source: "Registry"):
        """Move a coefficient from another registry's domain into this one."""
        if source.domain == self.domain:
            return coeff
        if source.extension and not self.extension:
            value = source.domain.to_sympy(coeff)
            if not value.is_Rational:
                raise RegistryMismatchError(f"coefficient {value} needs the sqrt(-6) extension")
            return self.scalar(value)
        return self.domain.convert_from(coeff, source.domain)

    def to_sympy(self, coeff) -> Basic:
        return self.domain.to_sympy(coeff)

    def to_fraction(self, coeff) -> Fraction:
        value = self.domain.to_sympy(coeff)
        if not isinstance(value, Rational):
            raise RegistryMismatchError(f"{value} is not rational")
        return Fraction(int(value.p), int(value.q))


@lru_cache(maxsize=None)
def registry(variables: Tuple[str, ...], parameters: Tuple[str, ...] = (), extension: bool = False) -> Registry:
    """Cached constructor; equal arguments give the same Registry object."""
    return Registry(variables, parameters, extension)


def bindings(reg: Registry, values: Mapping[str, Scalar]) -> Dict[int, object]:
    """Generator index -> domain element for the named bindings."""
    return {reg.index(name): reg.scalar(value) for name, value in values.items()}
