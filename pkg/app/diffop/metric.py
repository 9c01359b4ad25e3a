import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from sympy.polys.rings import PolyElement

from app.diffop.operator import DiffOp, from_metric
from app.errors import DegenerateMetricError, FactorizationError
from app.exact.linalg import laplace_det
from app.exact.ratfunc import RatFunc
from app.exact.registry import Registry, Scalar

logger = logging.getLogger(__name__)


@dataclass
class FactorizationCertificate:
    """determinant = constant * prod factor**multiplicity, checked by exact division."""

    factors: List[Tuple[PolyElement, int]]
    constant: object
    expected_constant: Optional[object] = None

    @property
    def constant_matches(self) -> Optional[bool]:
        if self.expected_constant is None:
            return None
        return self.constant == self.expected_constant


@dataclass
class MetricBundle:
    reg: Registry
    matrix: List[List[RatFunc]]
    drift: List[RatFunc]
    determinant: RatFunc
    certificate: Optional[FactorizationCertificate] = None
    potential: Optional[RatFunc] = None

    def entry(self, mu: int, nu: int) -> RatFunc:
        return self.matrix[mu][nu]

    def is_symmetric(self) -> bool:
        n = len(self.matrix)
        return all(self.matrix[i][j] == self.matrix[j][i] for i in range(n) for j in range(i + 1, n))

    def scaled(self, factor) -> "MetricBundle":
        """The bundle of factor * operator (determinant scales by factor**n)."""
        factor = RatFunc.lift(self.reg, factor)
        n = len(self.matrix)
        matrix = [[factor * e for e in row] for row in self.matrix]
        return MetricBundle(
            self.reg,
            matrix,
            [factor * b for b in self.drift],
            self.determinant * factor ** n,
        )

    def log_det_derivative(self, i: int) -> RatFunc:
        if self.certificate is not None:
            total = RatFunc.zero(self.reg)
            gen = self.reg.ring.gens[i]
            for f, mult in self.certificate.factors:
                df = f.diff(gen)
                if df:
                    total = total + RatFunc.over(self.reg, df * mult, f)
            return total
        return self.determinant.diff(i) / self.determinant

    def certify(
        self,
        factors: Sequence[Tuple[PolyElement, int]],
        expected_constant: Optional[Scalar] = None,
    ) -> FactorizationCertificate:
        self.certificate = certify_factorization(self.reg, self.determinant, factors, expected_constant)
        return self.certificate

    def operator(self) -> DiffOp:
        return from_metric(self.reg, self.matrix, self.drift, self.potential or 0)


def metric_of(op: DiffOp) -> MetricBundle:
    """Split an order-2 operator into g^{mu nu}, b^mu, potential and det g."""
    reg = op.reg
    n = reg.nvars
    half = reg.scalar(1) / reg.scalar(2)
    matrix = [[RatFunc.zero(reg) for _ in range(n)] for _ in range(n)]
    for mu in range(n):
        matrix[mu][mu] = op.coeff(mu, mu)
        for nu in range(mu + 1, n):
            g = op.coeff(mu, nu).scale(half)
            matrix[mu][nu] = g
            matrix[nu][mu] = g
    drift = [op.coeff(mu) for mu in range(n)]
    return MetricBundle(reg, matrix, drift, determinant(reg, matrix), potential=op.potential())


def determinant(reg: Registry, matrix: Sequence[Sequence[RatFunc]]) -> RatFunc:
    return laplace_det(matrix, RatFunc.zero(reg), RatFunc.one(reg), is_zero=lambda f: f.is_zero())


def certify_factorization(
    reg: Registry,
    det: RatFunc,
    factors: Sequence[Tuple[PolyElement, int]],
    expected_constant: Optional[Scalar] = None,
) -> FactorizationCertificate:
    remaining = det.as_poly()
    for f, mult in factors:
        for _ in range(mult):
            (q,), r = remaining.div([f])
            if r:
                raise FactorizationError(
                    f"factor {f.as_expr()} leaves a remainder",
                    witness=str(r.as_expr()),
                )
            remaining = q
    if not remaining.is_ground:
        raise FactorizationError("quotient is not constant", witness=str(remaining.as_expr()))
    constant = remaining.LC if remaining else reg.domain.zero
    expected = reg.scalar(expected_constant) if expected_constant is not None else None
    certificate = FactorizationCertificate(list(factors), constant, expected)
    logger.info("[GAUGE] determinant factorization certified, constant %s", reg.to_sympy(constant))
    return certificate


def laplace_beltrami(metric: MetricBundle) -> DiffOp:
    """sqrt(D) d_mu D^-1/2 g^{mu nu} d_nu with D = det of the contravariant matrix."""
    reg = metric.reg
    if metric.determinant.is_zero():
        raise DegenerateMetricError("metric determinant vanishes identically")
    n = reg.nvars
    half = reg.scalar(1) / reg.scalar(2)
    logd = [metric.log_det_derivative(mu) for mu in range(n)]
    drift = []
    for nu in range(n):
        b = RatFunc.zero(reg)
        for mu in range(n):
            g = metric.matrix[mu][nu]
            if g.is_zero():
                continue
            b = b + g.diff(mu) - (g * logd[mu]).scale(half)
        drift.append(b)
    return from_metric(reg, metric.matrix, drift)


def lb_drift_residual(op: DiffOp, metric: Optional[MetricBundle] = None) -> List[RatFunc]:
    """b^mu - (sum d_nu g^{nu mu} - 1/2 g^{nu mu} d_nu D / D) per component."""
    metric = metric or metric_of(op)
    lb = laplace_beltrami(metric)
    return [op.coeff(mu) - lb.coeff(mu) for mu in range(op.reg.nvars)]


def schrodinger_split(conjugated: DiffOp, metric: MetricBundle) -> Tuple[bool, RatFunc]:
    """For Gamma^-1 op Gamma = Delta_LB - V_eff, report (LB part matches, V_eff)."""
    lb = laplace_beltrami(metric)
    kinetic = conjugated - DiffOp.multiplication(conjugated.reg, conjugated.potential())
    return kinetic == lb, -conjugated.potential()
