import logging
import time
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from sympy.polys.rings import PolyElement

from app.catalog.generators import expand_generators, half_qes_word
from app.catalog.identities import rho_pair
from app.catalog.operators import delta_radial_rho
from app.config import DEFAULT_PRECISION_BITS, REALITY_TOLERANCE
from app.diffop.gauge import GaugeFactor, gauge_conjugate
from app.diffop.metric import laplace_beltrami, metric_of
from app.diffop.operator import DiffOp, unit
from app.errors import BoundaryError, ConvergenceError, InvarianceError, RegistryMismatchError
from app.exact import linalg, polys
from app.exact.ratfunc import RatFunc
from app.exact.registry import Registry
from app.exact.serialize import ratfunc_to_text
from app.geometry import tetra
from app.schemas.configs import QESConfig, RhoPoint
from app.schemas.reports import PotentialsReport, SpectrumLevel, SpectrumReport

"""
QUASI-EXACTLY-SOLVABLE SECTOR
- Psi0 = F2^(1/4) F1^(gamma/2) exp(-omega P - A P^2 / 2)
- V0 and E0 from the gauge rotation of -Delta_LB, compared with the closed form
- h^(qes) on polynomials of degree <= N: matrix, spectrum, eigenpolynomials
- V_N, V_es, V_relative, V_harmonic and the anisotropic harmonic family
"""

logger = logging.getLogger(__name__)

QES = tetra.rho_registry(("d", "gamma", "omega", "A", "N"))
PRINTED_SPACING = 12


def _params(reg: Registry) -> Tuple[PolyElement, ...]:
    return reg.param("gamma"), reg.param("omega"), reg.param("A"), reg.param("N")


def _half(reg: Registry):
    return reg.scalar(Fraction(1, 2))


def _bindings(config: QESConfig) -> Dict[str, Fraction]:
    values = {"gamma": config.gamma, "omega": config.omega, "A": config.A, "N": Fraction(config.N)}
    if config.d is not None:
        values["d"] = Fraction(config.d)
    return values


# -- ground state ---------------------------------------------------------------


def psi0(reg: Registry = QES) -> GaugeFactor:
    gamma, omega, A, _ = _params(reg)
    F1, F2, P = tetra.volume_sq(reg), tetra.F2(reg), tetra.edges_P(reg)
    exponent = -omega * P - (A * P**2).mul_ground(_half(reg))
    return GaugeFactor(reg, [(F2, Fraction(1, 4)), (F1, gamma.mul_ground(_half(reg)))], exponent)


@lru_cache(maxsize=None)
def lb_operator(reg: Registry = QES) -> DiffOp:
    """Delta_LB(rho) with the certified det g = 36864 F1 F2."""
    metric = metric_of(delta_radial_rho(reg))
    metric.certify([(tetra.volume_sq(reg), 1), (tetra.F2(reg), 1)], 36864)
    return laplace_beltrami(metric)


def ground_energy(reg: Registry = QES) -> PolyElement:
    gamma, omega, _, _ = _params(reg)
    return 12 * omega * (3 + 2 * gamma)


def ground_potential(reg: Registry = QES) -> Tuple[RatFunc, PolyElement]:
    """(V0, E0) read off Psi0^-1 (-Delta_LB) Psi0 = h + 16 A N P - (V0 - E0)."""
    conjugated = gauge_conjugate(-lb_operator(reg), psi0(reg))
    E0 = ground_energy(reg)
    return RatFunc.lift(reg, E0) - conjugated.potential(), E0


def _singular_part(reg: Registry) -> RatFunc:
    gamma = reg.param("gamma")
    S, P = tetra.faces_S(reg), tetra.edges_P(reg)
    F1, F2 = tetra.volume_sq(reg), tetra.F2(reg)
    f2_term = RatFunc.over(reg, (3 * P**2 + 112 * S).mul_ground(reg.scalar(Fraction(1, 32))), F2)
    f1_term = RatFunc.over(reg, (gamma * (gamma - 1) * S).mul_ground(reg.scalar(Fraction(1, 18))), F1)
    return f2_term + f1_term


def ground_potential_closed(reg: Registry = QES) -> RatFunc:
    gamma, omega, A, _ = _params(reg)
    P = tetra.edges_P(reg)
    smooth = 8 * omega**2 * P + 4 * A * P * (4 * omega * P - 6 * gamma - 11) + 8 * A**2 * P**3
    return _singular_part(reg) + RatFunc.from_poly(reg, smooth)


# -- the algebraic operator ----------------------------------------------------------


def h_qes(reg: Registry = QES) -> DiffOp:
    """-(second-order part of Delta_radial) - 2(2gamma+3) sum d + 16 omega sum rho d + 16 A P (sum rho d - N)."""
    gamma, omega, A, N = _params(reg)
    n = reg.nvars
    P = tetra.edges_P(reg)
    terms = {(0,) * n: -16 * A * N * P}
    for i in range(n):
        x = reg.var(i)
        terms[unit(n, i)] = -2 * (2 * gamma + 3) + 16 * omega * x + 16 * A * P * x
    return DiffOp(reg, terms) - delta_radial_rho(reg).part(2)


def gauge_identity(reg: Registry = QES) -> bool:
    """Psi0^-1 (-Delta_LB + V0 - E0) Psi0 == h^(qes) + 16 A N P, using the closed-form V0."""
    _, _, A, N = _params(reg)
    V0 = ground_potential_closed(reg)
    E0 = ground_energy(reg)
    hamiltonian = -lb_operator(reg) + DiffOp.multiplication(reg, V0 - RatFunc.lift(reg, E0))
    conjugated = gauge_conjugate(hamiltonian, psi0(reg))
    return conjugated == h_qes(reg) + DiffOp.multiplication(reg, 16 * A * N * tetra.edges_P(reg))


def lie_form_matches(reg: Registry = QES, triangle_coeff=1) -> bool:
    word = expand_generators(half_qes_word(reg, triangle_coeff), reg)
    return word == h_qes(reg).scale(Fraction(1, 2))


# -- matrix on polynomials of degree <= N --------------------------------------------


@dataclass
class QESMatrix:
    config: QESConfig
    basis: List[Tuple[int, ...]]
    entries: List[List[Fraction]]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def degree(self, k: int) -> int:
        return sum(self.basis[k])

    def is_triangular(self) -> bool:
        """No entry maps a monomial to a different monomial of equal or higher degree."""
        for col in range(self.dimension):
            for row in range(self.dimension):
                if row != col and self.entries[row][col] and self.degree(row) >= self.degree(col):
                    return False
        return True

    def diagonal(self) -> List[Fraction]:
        return [self.entries[k][k] for k in range(self.dimension)]


def qes_matrix(config: QESConfig, reg: Registry = QES) -> QESMatrix:
    op = h_qes(reg).bind(_bindings(config))
    n = reg.nvars
    basis = polys.monomials(n, config.N)
    position = {m: k for k, m in enumerate(basis)}
    entries = [[Fraction(0)] * len(basis) for _ in basis]
    for col, exps in enumerate(basis):
        image = op.apply(polys.monomial_poly(reg, exps)).as_poly()
        for monom, coeff in image.items():
            key = tuple(monom[:n])
            if key not in position:
                raise InvarianceError(
                    f"h^(qes) maps rho^{exps} outside degree <= {config.N}",
                    witness={"source": list(exps), "image": list(key)},
                )
            entries[position[key]][col] += reg.to_fraction(coeff)
    logger.info("[QES] assembled %dx%d matrix for N=%d", len(basis), len(basis), config.N)
    return QESMatrix(config, basis, entries)


def _numeric_eigenvalues(matrix: QESMatrix, bits: int) -> List[complex]:
    with mpmath.workprec(bits):
        M = mpmath.matrix([[mpmath.mpf(e.numerator) / e.denominator for e in row] for row in matrix.entries])
        try:
            values = mpmath.eig(M, left=False, right=False)
        except (ZeroDivisionError, ValueError) as exc:
            raise ConvergenceError(f"eigen-solver failed: {exc}") from exc
        return [complex(v) for v in values]


def crosscheck_gap(matrix: QESMatrix, numeric: Sequence[complex]) -> float:
    """Largest distance between the high-precision eigenvalues and numpy's double-precision ones."""
    doubles = np.linalg.eigvals(np.array([[float(e) for e in row] for row in matrix.entries]))
    doubles = sorted(doubles, key=lambda z: (z.real, z.imag))
    gap = max((abs(a - b) for a, b in zip(numeric, doubles)), default=0.0)
    if gap > 1e-6 * max(1.0, max((abs(z) for z in numeric), default=1.0)):
        logger.warning("[QES] double-precision eigenvalues differ from the mpmath ones by %.3e", gap)
    return float(gap)


def imaginary_ratio(numeric: Sequence[complex]) -> float:
    """max|Im z| / max|z| over the numeric eigenvalues."""
    scale = max((abs(z) for z in numeric), default=0.0)
    return float(max((abs(z.imag) for z in numeric), default=0.0) / scale) if scale else 0.0


def qes_spectrum(matrix: QESMatrix, bits: int = DEFAULT_PRECISION_BITS) -> SpectrumReport:
    """Energies E0 + lambda; for A = 0 the triangular diagonal is authoritative."""
    start = time.perf_counter()
    cfg = matrix.config
    E0 = 12 * cfg.omega * (3 + 2 * cfg.gamma)
    triangular = matrix.is_triangular()
    numeric = sorted(_numeric_eigenvalues(matrix, bits), key=lambda z: (z.real, z.imag))
    gap = crosscheck_gap(matrix, numeric)
    imaginary = imaginary_ratio(numeric)
    levels: List[SpectrumLevel] = []
    measured = None
    if cfg.A == 0 and triangular:
        counts = Counter(matrix.diagonal())
        for k, value in enumerate(sorted(counts)):
            energy = E0 + value
            levels.append(
                SpectrumLevel(level=k, eigenvalue_exact=str(energy), eigenvalue=float(energy), multiplicity=counts[value])
            )
        if len(counts) > 1:
            ordered = sorted(counts)
            measured = str(ordered[1] - ordered[0])
    else:
        if imaginary > REALITY_TOLERANCE:
            raise ConvergenceError(
                f"eigenvalues are not real (relative imaginary part {imaginary:.3e})", witness=imaginary
            )
        for k, value in enumerate(numeric):
            levels.append(SpectrumLevel(level=k, eigenvalue=float(E0) + value.real, multiplicity=1))
    return SpectrumReport(
        gamma=str(cfg.gamma),
        omega=str(cfg.omega),
        A=str(cfg.A),
        N=cfg.N,
        dimension=matrix.dimension,
        ground_energy=str(E0),
        levels=levels,
        triangular=triangular,
        measured_spacing=measured,
        printed_spacing=str(PRINTED_SPACING * cfg.omega),
        eigenvalues=[float(E0) + z.real for z in numeric],
        crosscheck_gap=gap,
        max_imaginary_ratio=imaginary,
        elapsed_ms=round((time.perf_counter() - start) * 1000, 2),
    )


def level_multiplicity(k: int) -> int:
    """Monomials of degree exactly k in six variables."""
    return comb(k + 5, 5)


def es_spectrum_check(omega: Fraction, gamma: Fraction, n_max: int) -> Tuple[bool, str, Optional[str]]:
    """Triangularity, exact levels 16 omega k and multiplicities C(k+5,5) for N = 0..n_max."""
    measured = None
    for N in range(n_max + 1):
        matrix = qes_matrix(QESConfig(gamma=gamma, omega=omega, A=0, N=N))
        if not matrix.is_triangular():
            return False, f"A=0 matrix is not triangular at N={N}", None
        counts = Counter(matrix.diagonal())
        for k in range(N + 1):
            value = 16 * Fraction(omega) * k
            if counts.get(value) != level_multiplicity(k):
                return False, f"level {k} at N={N} has multiplicity {counts.get(value)}", None
        if N >= 1:
            measured = str(16 * Fraction(omega))
    return True, f"levels 16*omega*k with multiplicity C(k+5,5) up to N={n_max}", measured


# -- eigenpolynomials -------------------------------------------------------------


def level_one_eigenpolynomial(i: int, reg: Registry = QES) -> PolyElement:
    """rho_i - (2 gamma + 3) / (8 omega), kept with formal gamma and omega as numerator over 8 omega."""
    gamma, omega, _, _ = _params(reg)
    return 8 * omega * reg.var(i) - (2 * gamma + 3)


def eigenpolynomial(config: QESConfig, top: Sequence[int], reg: Registry = QES) -> PolyElement:
    """Eigenpolynomial with leading monomial `top` by triangular back-substitution (A = 0)."""
    if config.A != 0:
        raise ValueError("back-substitution needs A = 0")
    top = tuple(top)
    k = sum(top)
    matrix = qes_matrix(config.model_copy(update={"N": max(config.N, k)}), reg)
    col = matrix.basis.index(top)
    lam = matrix.entries[col][col]
    lower = [j for j, m in enumerate(matrix.basis) if sum(m) < k]
    poly = polys.monomial_poly(reg, top)
    if not lower:
        return poly
    rows = [[reg.scalar(matrix.entries[r][c] - (lam if r == c else 0)) for c in lower] for r in lower]
    rhs = [reg.scalar(-matrix.entries[r][col]) for r in lower]
    solution, _ = linalg.solve(rows, rhs, reg.domain)
    for c, value in zip(lower, solution):
        if value:
            poly += polys.monomial_poly(reg, matrix.basis[c]).mul_ground(value)
    return poly


def is_eigenpolynomial(config: QESConfig, poly: PolyElement, reg: Registry = QES) -> Optional[Fraction]:
    """The eigenvalue when h^(qes) p = lambda p, else None."""
    if not poly:
        return None
    image = h_qes(reg).bind(_bindings(config)).apply(poly)
    monom, coeff = next(iter(poly.items()))
    lam = image.as_poly().coeff(polys.monomial_poly(reg, monom[: reg.nvars])) / coeff
    if image != RatFunc.from_poly(reg, poly).scale(lam):
        return None
    return reg.to_fraction(lam)


# -- potentials -------------------------------------------------------------------


def qes_potential(reg: Registry = QES) -> RatFunc:
    _, _, A, N = _params(reg)
    return ground_potential_closed(reg) - RatFunc.from_poly(reg, 16 * A * N * tetra.edges_P(reg))


def relative_potential_closed(reg: Registry = QES) -> RatFunc:
    gamma, omega, A, N = _params(reg)
    d = reg.param("d")
    S, P, F1 = tetra.faces_S(reg), tetra.edges_P(reg), tetra.volume_sq(reg)
    numerator = (4 * gamma * (gamma - 1) - (d - 5) * (d - 3)) * S
    singular = RatFunc.over(reg, numerator.mul_ground(reg.scalar(Fraction(1, 72))), F1)
    smooth = 8 * omega**2 * P + 4 * A * P * (4 * omega * P - 6 * gamma - 11 - 4 * N) + 8 * A**2 * P**3
    return singular + RatFunc.from_poly(reg, smooth)


def effective_potential(reg: Registry = QES) -> RatFunc:
    return rho_pair().potential.convert(reg)


def potentials(config: Optional[QESConfig] = None, reg: Registry = QES) -> Dict[str, RatFunc]:
    omega = reg.param("omega")
    out = {
        "V_qes": qes_potential(reg),
        "V_es": ground_potential_closed(reg).substitute({reg.index("A"): reg.domain.zero}),
        "V_relative": relative_potential_closed(reg),
        "V_harmonic": RatFunc.from_poly(reg, 8 * omega**2 * tetra.edges_P(reg)),
        "Delta_V_N": RatFunc.from_poly(reg, 16 * reg.param("A") * reg.param("N") * tetra.edges_P(reg)),
    }
    if config is not None:
        idx = {reg.index(k): reg.scalar(v) for k, v in _bindings(config).items()}
        out = {name: f.substitute(idx) for name, f in out.items()}
    return out


def relative_identity(reg: Registry = QES) -> bool:
    return qes_potential(reg) - effective_potential(reg) == relative_potential_closed(reg)


def free_of_F2(f: RatFunc) -> bool:
    F2 = tetra.F2(f.reg)
    return not f.cancel().has_base(F2)


def _values_at(forms: Dict[str, RatFunc], point: RhoPoint, reg: Registry) -> Dict[str, Optional[str]]:
    """Exact values at a rho point; None where a parameter is unbound or a denominator vanishes."""
    bound = {reg.index(name): reg.scalar(v) for name, v in point.as_mapping().items()}
    out: Dict[str, Optional[str]] = {}
    for name, f in forms.items():
        try:
            out[name] = str(reg.to_fraction(f.evaluate(bound)))
        except (BoundaryError, RegistryMismatchError) as exc:
            logger.info("[QES] %s not evaluated: %s", name, exc)
            out[name] = None
    return out


def potentials_report(config: QESConfig, point: Optional[RhoPoint] = None) -> PotentialsReport:
    start = time.perf_counter()
    forms = potentials(config)
    return PotentialsReport(
        potentials={name: ratfunc_to_text(f) for name, f in forms.items()},
        values=_values_at(forms, point, QES) if point is not None else {},
        relative_identity=relative_identity(),
        relative_free_of_F2=free_of_F2(relative_potential_closed()),
        elapsed_ms=round((time.perf_counter() - start) * 1000, 2),
    )


# -- anisotropic harmonic family ----------------------------------------------------
# exp(-sum w_k rho_k) conjugates -Delta_radial + sum g^{ab} w_a w_b into
# -Delta_radial + 2 sum g^{ab} w_b d_a + 2 d sum w_k, which keeps every P_N.


def anisotropic_potential(omegas: Sequence[Fraction], reg: Registry = QES) -> PolyElement:
    """sum_{a,b} g^{ab} w_a w_b, linear in rho."""
    if len(omegas) != reg.nvars:
        raise ValueError("one frequency per edge")
    metric = metric_of(delta_radial_rho(reg))
    w = [reg.scalar(Fraction(x)) for x in omegas]
    total = reg.ring.zero
    for a in range(reg.nvars):
        for b in range(reg.nvars):
            if w[a] and w[b]:
                total += metric.entry(a, b).as_poly().mul_ground(w[a] * w[b])
    return total


def anisotropic_energy(omegas: Sequence[Fraction], reg: Registry = QES) -> PolyElement:
    return 2 * reg.param("d") * reg.const(sum(Fraction(x) for x in omegas))


def anisotropic_operator(omegas: Sequence[Fraction], reg: Registry = QES) -> DiffOp:
    exponent = reg.ring.zero
    for i, x in enumerate(omegas):
        exponent -= reg.var(i).mul_ground(reg.scalar(Fraction(x)))
    hamiltonian = -delta_radial_rho(reg) + DiffOp.multiplication(reg, anisotropic_potential(omegas, reg))
    return gauge_conjugate(hamiltonian, GaugeFactor(reg, (), exponent))


def preserves_flag(op: DiffOp) -> bool:
    """Every coefficient of d^alpha is a polynomial of degree <= |alpha| in the variables."""
    for alpha, c in op.terms.items():
        if not c.is_polynomial():
            return False
        if polys.variable_degree(c.as_poly(), op.reg) > sum(alpha):
            return False
    return True
