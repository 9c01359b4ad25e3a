"""
Sparse polynomial helpers on top of sympy's PolyElement: cross-registry
composition, exact point evaluation, monomial enumeration.
"""

from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.rings import PolyElement

from app.errors import RegistryMismatchError
from app.exact.registry import Registry

Monomial = Tuple[int, ...]


def accumulate(reg: Registry, pieces: Iterable[Tuple[Monomial, object]]) -> PolyElement:
    """Sum (monomial, coefficient) pairs into one polynomial, pruning zeros."""
    acc: Dict[Monomial, object] = {}
    for monom, coeff in pieces:
        if monom in acc:
            acc[monom] = acc[monom] + coeff
        else:
            acc[monom] = coeff
    poly = reg.ring.zero
    for monom, coeff in acc.items():
        if coeff:
            poly[monom] = coeff
    return poly


def compose(
    p: PolyElement,
    source: Registry,
    target: Registry,
    images: Optional[Mapping[str, PolyElement]] = None,
) -> PolyElement:
    """Substitute every generator of `source` by a polynomial of `target`.

    Generators without an explicit image map to the target generator of the
    same name; a name missing from both raises RegistryMismatchError.
    """
    images = dict(images or {})
    gen_images: List[PolyElement] = []
    for name in source.names:
        if name in images:
            image = images[name]
            if not isinstance(image, PolyElement):
                image = target.const(image)
            gen_images.append(image)
        elif name in target.names:
            gen_images.append(target.gen(name))
        else:
            raise RegistryMismatchError(f"no image for {name!r} in {target!r}")

    powers: List[Dict[int, PolyElement]] = [{1: g} for g in gen_images]

    def power(i: int, e: int) -> PolyElement:
        cache = powers[i]
        if e not in cache:
            half = power(i, e // 2)
            cache[e] = half * half if e % 2 == 0 else half * half * gen_images[i]
        return cache[e]

    pieces = []
    one = target.ring.one
    for monom, coeff in p.items():
        term = one
        for i, e in enumerate(monom):
            if e:
                term = term * power(i, e)
        c = target.coerce(coeff, source)
        pieces.extend((m, c * v) for m, v in term.items())
    return accumulate(target, pieces)


def convert(p: PolyElement, source: Registry, target: Registry) -> PolyElement:
    """Re-home a polynomial into a registry that names all of its generators."""
    if source == target:
        return p
    positions = [target.index(name) for name in source.names]
    pieces = []
    zero = [0] * len(target.names)
    for monom, coeff in p.items():
        exps = list(zero)
        for pos, e in zip(positions, monom):
            exps[pos] = e
        pieces.append((tuple(exps), target.coerce(coeff, source)))
    return accumulate(target, pieces)


def substitute(p: PolyElement, reg: Registry, values: Mapping[int, object]) -> PolyElement:
    """Replace the indexed generators by domain constants, keeping the ring."""
    pieces = []
    cache: Dict[Tuple[int, int], object] = {}
    for monom, coeff in p.items():
        exps = list(monom)
        c = coeff
        for i, value in values.items():
            e = exps[i]
            if e:
                key = (i, e)
                if key not in cache:
                    cache[key] = value ** e
                c = c * cache[key]
                exps[i] = 0
        pieces.append((tuple(exps), c))
    return accumulate(reg, pieces)


def evaluate(p: PolyElement, reg: Registry, values: Mapping[int, object]):
    """Exact value; every generator occurring in p must be bound."""
    total = reg.domain.zero
    cache: Dict[Tuple[int, int], object] = {}
    for monom, coeff in p.items():
        c = coeff
        for i, e in enumerate(monom):
            if not e:
                continue
            if i not in values:
                raise RegistryMismatchError(f"unbound generator {reg.names[i]!r}")
            key = (i, e)
            if key not in cache:
                cache[key] = values[i] ** e
            c = c * cache[key]
        total += c
    return total


def total_degree(p: PolyElement, indices: Optional[Sequence[int]] = None) -> int:
    if not p:
        return -1
    if indices is None:
        return max(sum(m) for m in p.keys())
    return max(sum(m[i] for i in indices) for m in p.keys())


def variable_degree(p: PolyElement, reg: Registry) -> int:
    return total_degree(p, range(reg.nvars))


def monomials(nvars: int, max_degree: int, min_degree: int = 0) -> List[Monomial]:
    """Exponent vectors of total degree in [min_degree, max_degree], ascending degree."""
    out: List[Monomial] = []
    for deg in range(min_degree, max_degree + 1):
        layer = []
        for combo in combinations_with_replacement(range(nvars), deg):
            exps = [0] * nvars
            for i in combo:
                exps[i] += 1
            layer.append(tuple(exps))
        layer.sort(reverse=True)
        out.extend(layer)
    return out


def monomial_poly(reg: Registry, exps: Monomial) -> PolyElement:
    poly = reg.ring.one
    for i, e in enumerate(exps):
        if e:
            poly = poly * reg.var(i) ** e
    return poly


def random_poly(
    reg: Registry,
    rng: np.random.Generator,
    max_degree: int,
    terms: int = 6,
    coeff_bound: int = 9,
) -> PolyElement:
    """Random rational polynomial in the registry variables (parameters untouched)."""
    basis = monomials(reg.nvars, max_degree)
    picks = rng.choice(len(basis), size=min(terms, len(basis)), replace=False)
    poly = reg.ring.zero
    for k in picks:
        num = int(rng.integers(-coeff_bound, coeff_bound + 1)) or 1
        den = int(rng.integers(1, 4))
        exps = basis[int(k)] + (0,) * len(reg.parameters)
        poly = poly + reg.ring.term_new(exps, reg.scalar(num) / reg.scalar(den))
    return poly
