import logging
import time
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
from sympy import lambdify
from sympy.polys.rings import PolyElement

from app.config import MC_BATCH_SIZE
from app.errors import ConvergenceError
from app.exact.registry import Registry
from app.geometry import tetra
from app.schemas.configs import QESConfig
from app.schemas.reports import OrthogonalityReport
from app.spectral.qes import QES, eigenpolynomial

"""
MONTE CARLO GRAM MATRIX
<p, q> = integral of p q Psi0^2 over the configuration space with the
Laplace-Beltrami measure. At A = 0 the integrand weight is
F1^(gamma - 1/2) exp(-2 omega P): each rho is drawn from Exp(2 omega) and
the F1 power is the importance weight; points outside the configuration
space are rejected.
"""

logger = logging.getLogger(__name__)


def _numeric(reg: Registry, poly: PolyElement):
    symbols = reg.ring.symbols[: reg.nvars]
    fn = lambdify(symbols, poly.as_expr(), "numpy")
    return lambda cols, size: np.broadcast_to(np.asarray(fn(*cols), dtype=float), (size,))


def gram_matrix(
    polynomials: Sequence[PolyElement],
    omega: Fraction,
    gamma: Fraction,
    samples: int,
    seed: int = 0,
    labels: Optional[Sequence[str]] = None,
    levels: Optional[Sequence[int]] = None,
    batch_size: int = MC_BATCH_SIZE,
    reg: Registry = QES,
) -> OrthogonalityReport:
    start = time.perf_counter()
    if omega <= 0:
        raise ValueError("the exponential proposal needs omega > 0")
    rng = np.random.default_rng(seed)
    fns = [_numeric(reg, p) for p in polynomials]
    volume = _numeric(reg, tetra.volume_sq(reg))
    faces = [_numeric(reg, h) for h in tetra.face_heron(reg)]
    k = len(fns)
    gram = np.zeros((k, k))
    accepted = 0
    drawn = 0
    exponent = float(gamma) - 0.5
    while drawn < samples:
        size = min(batch_size, samples - drawn)
        drawn += size
        rho = rng.exponential(scale=1.0 / (2 * float(omega)), size=(size, reg.nvars))
        cols = [rho[:, i] for i in range(reg.nvars)]
        f1 = volume(cols, size)
        inside = f1 > 0
        for face in faces:
            inside &= face(cols, size) > 0
        if not inside.any():
            continue
        kept = [c[inside] for c in cols]
        n = int(inside.sum())
        accepted += n
        weight = f1[inside] ** exponent
        values = np.stack([fn(kept, n) for fn in fns])
        gram += (values * weight) @ values.T
    if not accepted:
        raise ConvergenceError("no sample landed inside the configuration space", witness=samples)
    gram /= accepted
    ratio = None
    if levels is not None:
        ratios = [
            abs(gram[i, j]) / np.sqrt(gram[i, i] * gram[j, j])
            for i in range(k)
            for j in range(k)
            if levels[i] != levels[j] and gram[i, i] > 0 and gram[j, j] > 0
        ]
        ratio = float(max(ratios)) if ratios else None
    logger.info("[MC] Gram matrix from %d/%d accepted samples, cross-level ratio %s", accepted, samples, ratio)
    return OrthogonalityReport(
        samples=samples,
        accepted=accepted,
        labels=list(labels or [f"p{i}" for i in range(k)]),
        gram=gram.tolist(),
        max_cross_level_ratio=ratio,
        elapsed_ms=round((time.perf_counter() - start) * 1000, 2),
    )


def level_polynomials(omega: Fraction, gamma: Fraction, max_level: int) -> List[PolyElement]:
    """One eigenpolynomial per level 0..max_level, each led by a power of rho12."""
    config = QESConfig(gamma=gamma, omega=omega, A=0, N=max_level)
    out = [QES.ring.one]
    for level in range(1, max_level + 1):
        top = [0] * QES.nvars
        top[0] = level
        out.append(eigenpolynomial(config, top))
    return out
