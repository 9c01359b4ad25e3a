import logging
import time
from enum import Enum
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import Matrix, Rational
from sympy.polys.domains import QQ
from sympy.polys.rings import PolyElement

from app.exact.registry import Registry, registry
from app.schemas.configs import RHO_NAMES, MassWeights, RhoPoint
from app.schemas.reports import GeometryReport

"""
TETRAHEDRON OF INTERACTION
Every quantity is written once over generic +,-,* so it serves both modes:
- symbolic: pass a Registry holding rho12..rho34, get a PolyElement
- numeric: pass a RhoPoint, get an exact Fraction
"""

logger = logging.getLogger(__name__)

PAIRS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
FACES = ((2, 3, 4), (1, 3, 4), (1, 2, 4), (1, 2, 3))  # face k is opposite particle k+1
OPPOSITE_EDGES = (((1, 2), (3, 4)), ((1, 3), (2, 4)), ((1, 4), (2, 3)))

# 288 * V**2 = determinant of the bordered 5x5 distance matrix
CAYLEY_MENGER_CONSTANT = 288

Rho = Union[Registry, RhoPoint, None]


class Region(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def rho_name(i: int, j: int) -> str:
    i, j = min(i, j), max(i, j)
    return f"rho{i}{j}"


def rho_registry(parameters: Sequence[str] = ()) -> Registry:
    return registry(RHO_NAMES, tuple(parameters))


def _edges(rho: Rho) -> Dict[Tuple[int, int], object]:
    if rho is None:
        rho = rho_registry()
    if isinstance(rho, Registry):
        return {p: rho.gen(rho_name(*p)) for p in PAIRS}
    return dict(zip(PAIRS, rho.values()))


def _e(edges, i: int, j: int):
    return edges[(min(i, j), max(i, j))]


def _times(value, q: Fraction):
    if isinstance(value, PolyElement):
        return value.mul_ground(value.ring.domain.convert_from(QQ(q.numerator, q.denominator), QQ))
    return Fraction(value) * q


def heron_sq(a, b, c):
    """16 * area**2 of a triangle with squared sides a, b, c."""
    return 2 * (a * b + a * c + b * c) - (a * a + b * b + c * c)


def face_heron(rho: Rho = None) -> List:
    """16 * area**2 of the four faces, face k opposite particle k+1."""
    e = _edges(rho)
    return [heron_sq(_e(e, i, j), _e(e, i, k), _e(e, j, k)) for i, j, k in FACES]


def _cm_bracket(e):
    """144 * V**2: opposite-edge products minus face triple products."""
    total = 0
    for (i, j), (k, l) in OPPOSITE_EDGES:
        a, b = _e(e, i, j), _e(e, k, l)
        others = sum((e[p] for p in PAIRS if p not in ((i, j), (k, l))), 0)
        total = total + a * b * (others - a - b)
    for i, j, k in FACES:
        total = total - _e(e, i, j) * _e(e, i, k) * _e(e, j, k)
    return total


def volume_sq(rho: Rho = None):
    """Squared volume of the tetrahedron; this is F1."""
    return _times(_cm_bracket(_edges(rho)), Fraction(1, 144))


F1 = volume_sq


def faces_S(rho: Rho = None):
    return _times(sum(face_heron(rho), 0), Fraction(1, 16))


def edges_P(rho: Rho = None):
    e = _edges(rho)
    return sum((e[p] for p in PAIRS), 0)


def F2(rho: Rho = None):
    """P*S - 36 V**2, nonnegative on the configuration space."""
    return edges_P(rho) * faces_S(rho) - 36 * volume_sq(rho)


def F2_printed(rho: Rho = None):
    """The printed sign convention 36 V**2 - P*S."""
    return -F2(rho)


def u_vars(rho: Rho = None) -> Tuple:
    """Sums of squared opposite edges (rho12+rho34, rho13+rho24, rho23+rho14)."""
    e = _edges(rho)
    return (e[(1, 2)] + e[(3, 4)], e[(1, 3)] + e[(2, 4)], e[(2, 3)] + e[(1, 4)])


def volume_vars(rho: Rho = None) -> Tuple:
    return volume_sq(rho), faces_S(rho), edges_P(rho)


def mass_volume_vars(rho: Rho, weights: MassWeights) -> Tuple:
    """(V**2, S~, P~) with P~ = sum m_i m_j rho_ij, S~ = sum area_k**2 / m_k."""
    e = _edges(rho)
    m = weights.masses()
    p_tilde = sum((_times(e[(i, j)], m[i - 1] * m[j - 1]) for i, j in PAIRS), 0)
    heron = face_heron(rho)
    s_tilde = sum((_times(h, Fraction(1, 16) / m[k]) for k, h in enumerate(heron)), 0)
    return volume_sq(rho), s_tilde, p_tilde


# -- configuration space ---------------------------------------------------


def config_space_test(point: RhoPoint) -> Tuple[Region, Dict[str, object]]:
    heron = face_heron(point)
    vol = volume_sq(point)
    diagnostics = {
        "face_heron": [str(h) for h in heron],
        "volume_sq": str(vol),
        "F2": str(F2(point)),
    }
    if any(h < 0 for h in heron) or vol < 0:
        region = Region.OUTSIDE
    elif any(h == 0 for h in heron) or vol == 0:
        region = Region.BOUNDARY
    else:
        region = Region.INTERIOR
    return region, diagnostics


# -- oracles ---------------------------------------------------------------


def distance_matrix(point: RhoPoint) -> List[List[Fraction]]:
    e = _edges(point)
    return [[Fraction(0) if i == j else _e(e, i, j) for j in range(1, 5)] for i in range(1, 5)]


def cayley_menger_det(dist: Sequence[Sequence]) -> Rational:
    """Determinant of the distance matrix bordered by a row and column of ones."""
    k = len(dist)
    rows = [[0] + [1] * k]
    for i in range(k):
        rows.append([1] + [Rational(dist[i][j]) for j in range(k)])
    return Matrix(rows).det(method="bareiss")


def cayley_menger_volume_sq(point: RhoPoint) -> Fraction:
    det = cayley_menger_det(distance_matrix(point))
    return Fraction(int(det.p), int(det.q)) / CAYLEY_MENGER_CONSTANT


def gram_volume_sq(rows: Sequence[Sequence]) -> Fraction:
    """V**2 from coordinates: det(E E^T) / 36 with E the edge vectors from point 1."""
    pts = [[Rational(Fraction(x)) for x in row] for row in rows]
    edges = Matrix([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]])
    det = (edges * edges.T).det(method="bareiss") / 36
    return Fraction(int(det.p), int(det.q))


# -- S4 relabeling ---------------------------------------------------------


def relabel_permutation(perm: Sequence[int]) -> List[int]:
    """Particle permutation (perm[i-1] = new label of i) as a map on the six rho slots."""
    index = {p: k for k, p in enumerate(PAIRS)}
    out = []
    for i, j in PAIRS:
        a, b = perm[i - 1], perm[j - 1]
        out.append(index[(min(a, b), max(a, b))])
    return out


def relabel_point(point: RhoPoint, perm: Sequence[int]) -> RhoPoint:
    slots = relabel_permutation(perm)
    values = [Fraction(0)] * 6
    for k, v in enumerate(point.values()):
        values[slots[k]] = v
    return RhoPoint.from_values(values)


def s4() -> List[Tuple[int, ...]]:
    return list(permutations((1, 2, 3, 4)))


# -- sampling --------------------------------------------------------------


def random_embedding(rng: np.random.Generator, dim: int = 3, bound: int = 9, den: int = 4) -> List[List[Fraction]]:
    return [
        [Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, den + 1))) for _ in range(dim)]
        for _ in range(4)
    ]


def sample_interior(rng: np.random.Generator, count: int, max_tries: Optional[int] = None) -> List[RhoPoint]:
    """Random interior points from rational embeddings in R^3."""
    out: List[RhoPoint] = []
    tries = 0
    max_tries = max_tries or 50 * count
    while len(out) < count and tries < max_tries:
        tries += 1
        point = RhoPoint.from_coordinates(random_embedding(rng))
        if config_space_test(point)[0] is Region.INTERIOR:
            out.append(point)
    logger.debug("[EXACT] sampled %d interior points in %d tries", len(out), tries)
    return out


# -- reports ---------------------------------------------------------------


def geometry_report(point: RhoPoint, weights: Optional[MassWeights] = None) -> GeometryReport:
    start = time.perf_counter()
    region, diagnostics = config_space_test(point)
    V, S, P = volume_vars(point)
    masses = None
    if weights is not None:
        _, s_tilde, p_tilde = mass_volume_vars(point, weights)
        masses = {"S_tilde": str(s_tilde), "P_tilde": str(p_tilde)}
    return GeometryReport(
        volume_sq=str(V),
        S=str(S),
        P=str(P),
        F1=str(V),
        F2=diagnostics["F2"],
        F2_printed=str(F2_printed(point)),
        u=[str(u) for u in u_vars(point)],
        classification=region.value,
        face_heron=diagnostics["face_heron"],
        masses=masses,
        elapsed_ms=round((time.perf_counter() - start) * 1000, 2),
    )
