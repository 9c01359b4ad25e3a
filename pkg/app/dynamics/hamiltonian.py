import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from sympy import Basic, Rational, diff, lambdify, nsimplify, symbols, sympify

from app.catalog.identities import GaugePair, hyper_pair, rho_pair, volume_pair
from app.diffop.metric import metric_of
from app.errors import BoundaryError, ConfigError
from app.schemas.configs import TrajectoryConfig
from app.spectral.qes import potentials

"""
CLASSICAL HAMILTONIANS
H = g^{mu nu}(q) p_mu p_nu + V(q) + V_eff(q) on rho-space, volume space
(V, S, P) or P alone. g and V_eff come from the catalog gauge pairs; the
derivatives of H are taken symbolically and evaluated through numpy.
"""

logger = logging.getLogger(__name__)

PAIRS = {"rho": rho_pair, "volume": volume_pair, "P": hyper_pair}


def _es_text(space: str) -> Optional[str]:
    if space == "rho":
        return None
    if space == "volume":
        return "(3*P**2 + 112*S)/(32*(P*S - 36*V)) + gamma*(gamma - 1)*S/(18*V) + 8*omega**2*P"
    raise ConfigError("the exactly-solvable potential needs (V, S, P); use space 'rho' or 'volume'")


@dataclass
class Hamiltonian:
    space: str
    names: List[str]
    energy: Callable
    dq: Callable
    dp: Callable
    metric: Callable
    barriers: List[Callable]
    expression: Basic

    @property
    def dim(self) -> int:
        return len(self.names)

    def __call__(self, q: np.ndarray, p: np.ndarray) -> float:
        return float(self.energy(*q, *p))

    def velocity(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        return np.asarray(self.dq(*q, *p), dtype=float).reshape(-1)

    def force(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        """-dH/dq."""
        return -np.asarray(self.dp(*q, *p), dtype=float).reshape(-1)

    def matrix(self, q: np.ndarray) -> np.ndarray:
        return np.asarray(self.metric(*q), dtype=float)

    def barrier_values(self, q: np.ndarray) -> np.ndarray:
        return np.array([float(b(*q)) for b in self.barriers])


def _potential_expr(config: TrajectoryConfig, pair: GaugePair, names: Sequence[Basic]) -> Basic:
    local = {str(s): s for s in names}
    omega, gamma = nsimplify(config.omega), nsimplify(config.gamma)
    P = sum(names) if config.space == "rho" else local["P"]
    if config.potential == "none":
        return Rational(0)
    if config.potential == "harmonic":
        return 8 * omega**2 * P
    if config.potential == "custom":
        try:
            return sympify(config.custom_potential, locals=local)
        except (SyntaxError, TypeError, ValueError) as exc:
            raise ConfigError(f"cannot parse potential {config.custom_potential!r}: {exc}") from exc
    text = _es_text(config.space)
    if text is None:
        expr = potentials()["V_es"].as_expr()
        bind = {**local, "gamma": gamma, "omega": omega}
        return expr.subs({s: bind[str(s)] for s in expr.free_symbols if str(s) in bind})
    return sympify(text, locals={**local, "gamma": gamma, "omega": omega})


def build_hamiltonian(config: TrajectoryConfig) -> Hamiltonian:
    pair = PAIRS[config.space]()
    reg = pair.operator.reg
    q = list(reg.ring.symbols[: reg.nvars])
    p = list(symbols(" ".join(f"p_{s}" for s in q), seq=True))
    d = reg.ring.symbols[reg.index("d")]
    metric = metric_of(pair.operator)
    g = [[metric.entry(a, b).as_expr().subs(d, config.d) for b in range(reg.nvars)] for a in range(reg.nvars)]
    kinetic = sum(g[a][b] * p[a] * p[b] for a in range(reg.nvars) for b in range(reg.nvars))
    potential = _potential_expr(config, pair, q)
    if config.include_effective:
        potential = potential + pair.potential.as_expr().subs(d, config.d)
    H = kinetic + potential
    args = q + p
    dq = [diff(H, s) for s in p]
    dp = [diff(H, s) for s in q]
    barriers = [lambdify(q, f.as_expr(), "numpy") for f, _ in pair.factors]
    logger.info("[DYN] Hamiltonian on %s space, potential %s", config.space, config.potential)
    return Hamiltonian(
        space=config.space,
        names=[str(s) for s in q],
        energy=lambdify(args, H, "numpy"),
        dq=lambdify(args, dq, "numpy"),
        dp=lambdify(args, dp, "numpy"),
        metric=lambdify(q, g, "numpy"),
        barriers=barriers,
        expression=H,
    )


def hamiltonian_eval(config: TrajectoryConfig, q: Sequence[float], p: Sequence[float]) -> float:
    system = build_hamiltonian(config)
    q, p = np.asarray(q, dtype=float), np.asarray(p, dtype=float)
    if np.linalg.det(system.matrix(q)) <= 0:
        raise BoundaryError("metric determinant is not positive at this point", witness=list(q))
    return system(q, p)


def gradient_check(system: Hamiltonian, q: np.ndarray, p: np.ndarray, h: float = 1e-6) -> float:
    """Largest relative gap between symbolic dH/dq and a central difference."""
    analytic = -system.force(q, p)
    worst = 0.0
    for k in range(system.dim):
        step = np.zeros(system.dim)
        step[k] = h * max(1.0, abs(q[k]))
        numeric = (system(q + step, p) - system(q - step, p)) / (2 * step[k])
        scale = max(abs(analytic[k]), abs(numeric), 1e-12)
        worst = max(worst, abs(analytic[k] - numeric) / scale)
    return worst


def regular_critical_scale(omega: float, d: int) -> float:
    """rho_ij = s* for all pairs is a critical point of 8 omega^2 P + V_eff on rho-space."""
    v_eff_unit = 1.5 + 0.75 * (d - 5) * (d - 3)
    if omega <= 0 or v_eff_unit <= 0:
        raise ConfigError("no regular critical point for these omega and d", witness={"omega": omega, "d": d})
    return float(np.sqrt(v_eff_unit / (48 * omega**2)))
