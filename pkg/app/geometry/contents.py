"""
Squared contents of simplices from pairwise squared distances. For a simplex
with K vertices, content**2 = (-1)**K * CM / (2**(K-1) * ((K-1)!)**2) where CM is
the bordered Cayley-Menger determinant.
"""

from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import List, Sequence

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement

from app.exact.linalg import laplace_det
from app.exact.registry import Registry, registry

MIN_POINTS = 2
MAX_POINTS = 6


def content_factor(vertices: int) -> Fraction:
    return Fraction((-1) ** vertices, 2 ** (vertices - 1) * factorial(vertices - 1) ** 2)


def _check_range(n: int, k: int) -> None:
    if not MIN_POINTS <= n <= MAX_POINTS:
        raise ValueError(f"n={n} outside the supported range {MIN_POINTS}..{MAX_POINTS}")
    if not 1 <= k <= n - 1:
        raise ValueError(f"face dimension k={k} must lie in 1..{n - 1}")


def _bordered(dist, subset: Sequence[int], zero, one) -> List[List]:
    rows = [[zero] + [one] * len(subset)]
    for i in subset:
        rows.append([one] + [zero if i == j else dist[i][j] for j in subset])
    return rows


def nbody_contents(dist: Sequence[Sequence], k: int) -> Fraction:
    """Sum of squared k-dimensional contents over all (k+1)-point subsets (exact)."""
    n = len(dist)
    _check_range(n, k)
    factor = content_factor(k + 1)
    total = Fraction(0)
    for subset in combinations(range(n), k + 1):
        rows = _bordered(dist, subset, Fraction(0), Fraction(1))
        total += factor * laplace_det(rows, Fraction(0), Fraction(1))
    return total


def pair_registry(n: int, parameters: Sequence[str] = ()) -> Registry:
    names = tuple(f"rho{i}{j}" for i, j in combinations(range(1, n + 1), 2))
    return registry(names, tuple(parameters))


def symbolic_distances(reg: Registry, n: int) -> List[List]:
    zero = reg.ring.zero
    dist = [[zero] * n for _ in range(n)]
    for i, j in combinations(range(n), 2):
        g = reg.gen(f"rho{i + 1}{j + 1}")
        dist[i][j] = g
        dist[j][i] = g
    return dist


def content_sum(reg: Registry, n: int, vertices: int) -> PolyElement:
    """V_K: sum of squared contents of all K-vertex subsets, as a polynomial.

    V_1 = 1 by convention (and V_0 = 0 is handled by callers).
    """
    if vertices == 1:
        return reg.ring.one
    _check_range(n, vertices - 1)
    dist = symbolic_distances(reg, n)
    factor = content_factor(vertices)
    scale = reg.domain.convert_from(QQ(factor.numerator, factor.denominator), QQ)
    total = reg.ring.zero
    zero, one = reg.ring.zero, reg.ring.one
    for subset in combinations(range(n), vertices):
        total = total + laplace_det(_bordered(dist, subset, zero, one), zero, one)
    return total.mul_ground(scale)
