import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy import linalg as sla

from app.config import EIGENFORM_TOLERANCE
from app.diffop.operator import DiffOp
from app.schemas.configs import RhoPoint
from app.schemas.reports import EigenformVerdict

"""
EIGENFORM SEPARABILITY TEST
At a point, a second-order symmetry with coefficient matrix R and the metric g
give the pencil (R - lambda g) w = 0. Separable coordinates need one frame of
eigenforms shared by every symmetry. The frame is taken from a random linear
combination of the symmetries (generic eigenvalues), then every symmetry is
checked for having each of those vectors as an eigenform.
"""

logger = logging.getLogger(__name__)

COMMON = "common frame"
NO_COMMON = "no common frame"
SKIPPED = "skipped"

Point = Union[RhoPoint, Sequence[Fraction]]


def coefficient_matrix(op: DiffOp, values: Sequence[Fraction]) -> np.ndarray:
    """Symmetric matrix of the second-order part (mixed operator coefficients halved)."""
    reg = op.reg
    n = reg.nvars
    bound = {i: reg.scalar(Fraction(v)) for i, v in enumerate(values)}
    bound.update({reg.index(name): reg.domain.zero for name in reg.parameters})
    out = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(a, n):
            c = op.coeff(a, b)
            if c.is_zero():
                continue
            value = complex(reg.to_sympy(c.evaluate(bound)))
            if a == b:
                out[a, a] = value
            else:
                out[a, b] = out[b, a] = value / 2
    return out


def _values(point: Point) -> Sequence[Fraction]:
    return point.values() if isinstance(point, RhoPoint) else tuple(Fraction(v) for v in point)


def parallel_residual(R: np.ndarray, g: np.ndarray, w: np.ndarray) -> float:
    """Distance of R w from the line through g w, relative to |R w| + |g w|."""
    gw, Rw = g @ w, R @ w
    mu = np.vdot(gw, Rw) / np.vdot(gw, gw)
    scale = np.linalg.norm(Rw) + np.linalg.norm(gw)
    return float(np.linalg.norm(Rw - mu * gw) / scale) if scale else 0.0


def eigenform_verdict(
    symmetries: Sequence[DiffOp],
    metric: DiffOp,
    point: Point,
    rng: np.random.Generator,
    tol: float = EIGENFORM_TOLERANCE,
) -> EigenformVerdict:
    values = _values(point)
    label = [str(v) for v in values]
    g = coefficient_matrix(metric, values)
    if abs(np.linalg.det(g)) < tol:
        return EigenformVerdict(point=label, verdict=SKIPPED, detail="metric is singular at this point")
    mats = [coefficient_matrix(op, values) for op in symmetries]
    probe = sum(rng.uniform(0.5, 1.5) * R for R in mats)
    eigvals, frame = sla.eig(probe, g)
    if not np.all(np.isfinite(eigvals)):
        return EigenformVerdict(point=label, verdict=SKIPPED, detail="degenerate pencil")
    worst = 0.0
    for R in mats:
        for k in range(frame.shape[1]):
            worst = max(worst, parallel_residual(R, g, frame[:, k]))
    verdict = COMMON if worst < tol else NO_COMMON
    return EigenformVerdict(point=label, verdict=verdict, max_residual=worst)


def eigenform_test(
    symmetries: Sequence[DiffOp],
    metric: DiffOp,
    points: Sequence[Point],
    seed: int = 0,
    tol: Optional[float] = None,
) -> List[EigenformVerdict]:
    rng = np.random.default_rng(seed)
    tol = EIGENFORM_TOLERANCE if tol is None else tol
    verdicts = [eigenform_verdict(symmetries, metric, p, rng, tol) for p in points]
    counts = {v: sum(1 for x in verdicts if x.verdict == v) for v in (COMMON, NO_COMMON, SKIPPED)}
    logger.info("[VERIFY] eigenform test over %d points: %s", len(points), counts)
    return verdicts
