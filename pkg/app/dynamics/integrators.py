import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from app.dynamics.hamiltonian import Hamiltonian, build_hamiltonian
from app.errors import BoundaryError, ConvergenceError, EnergyDriftError
from app.schemas.configs import PhasePoint, TrajectoryConfig
from app.schemas.reports import TrajectorySummary

"""
TRAJECTORY INTEGRATION
- RK4 on the first-order system (dH/dp, -dH/dq)
- Generalized Stormer-Verlet for the non-separable H: two implicit
  half-steps solved by fixed-point iteration, one explicit
- A run stops at the first step where any boundary factor changes sign
- Per-step relative energy change above drift_bound raises EnergyDriftError
"""

logger = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-14
FIXED_POINT_ITERATIONS = 50

Stepper = Callable[[Hamiltonian, np.ndarray, np.ndarray, float], Tuple[np.ndarray, np.ndarray]]


def rk4_step(system: Hamiltonian, q: np.ndarray, p: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    k1q, k1p = system.velocity(q, p), system.force(q, p)
    q2, p2 = q + 0.5 * dt * k1q, p + 0.5 * dt * k1p
    k2q, k2p = system.velocity(q2, p2), system.force(q2, p2)
    q3, p3 = q + 0.5 * dt * k2q, p + 0.5 * dt * k2p
    k3q, k3p = system.velocity(q3, p3), system.force(q3, p3)
    q4, p4 = q + dt * k3q, p + dt * k3p
    k4q, k4p = system.velocity(q4, p4), system.force(q4, p4)
    q_next = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
    p_next = p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
    return q_next, p_next


def _fixed_point(update: Callable[[np.ndarray], np.ndarray], start: np.ndarray, what: str) -> np.ndarray:
    current = start
    for _ in range(FIXED_POINT_ITERATIONS):
        nxt = update(current)
        if not np.all(np.isfinite(nxt)):
            break
        if np.max(np.abs(nxt - current)) <= FIXED_POINT_TOL * max(1.0, float(np.max(np.abs(nxt)))):
            return nxt
        current = nxt
    raise ConvergenceError(f"fixed-point iteration for {what} did not converge", witness=current.tolist())


def stormer_verlet_step(system: Hamiltonian, q: np.ndarray, p: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    half = 0.5 * dt
    p_half = _fixed_point(lambda x: p + half * system.force(q, x), p, "the momentum half-step")
    v0 = system.velocity(q, p_half)
    q_next = _fixed_point(lambda x: q + half * (v0 + system.velocity(x, p_half)), q + dt * v0, "the position step")
    p_next = p_half + half * system.force(q_next, p_half)
    return q_next, p_next


STEPPERS: Dict[str, Stepper] = {"rk4": rk4_step, "stormer-verlet": stormer_verlet_step}


@dataclass
class Trajectory:
    names: List[str]
    times: List[float] = field(default_factory=list)
    positions: List[np.ndarray] = field(default_factory=list)
    momenta: List[np.ndarray] = field(default_factory=list)
    energies: List[float] = field(default_factory=list)
    determinants: List[float] = field(default_factory=list)
    terminated_at_boundary: bool = False
    elapsed_ms: Optional[float] = None

    def append(self, system: Hamiltonian, t: float, q: np.ndarray, p: np.ndarray) -> None:
        self.times.append(t)
        self.positions.append(q)
        self.momenta.append(p)
        self.energies.append(system(q, p))
        self.determinants.append(float(np.linalg.det(system.matrix(q))))

    @property
    def steps_taken(self) -> int:
        return len(self.times) - 1

    @property
    def max_relative_drift(self) -> float:
        h0 = self.energies[0]
        scale = abs(h0) if h0 else 1.0
        return max(abs(h - h0) for h in self.energies) / scale

    def summary(self, csv_path: Optional[Path] = None) -> TrajectorySummary:
        return TrajectorySummary(
            steps_taken=self.steps_taken,
            terminated_at_boundary=self.terminated_at_boundary,
            max_relative_drift=self.max_relative_drift,
            final_time=self.times[-1],
            csv_path=str(csv_path) if csv_path else None,
            elapsed_ms=self.elapsed_ms,
        )

    def write_csv(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = ["t"] + self.names + [f"p_{n}" for n in self.names] + ["H", "D"]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in zip(self.times, self.positions, self.momenta, self.energies, self.determinants):
                t, q, p, h, det = row
                writer.writerow([repr(t), *map(repr, q.tolist()), *map(repr, p.tolist()), repr(h), repr(det)])
        logger.info("[DYN] wrote %d rows to %s", len(self.times), path)
        return path


def _check_interior(system: Hamiltonian, q: np.ndarray) -> np.ndarray:
    signs = np.sign(system.barrier_values(q))
    if np.any(signs == 0) or np.linalg.det(system.matrix(q)) <= 0:
        raise BoundaryError("initial point is not interior to the configuration space", witness=q.tolist())
    return signs


def integrate(config: TrajectoryConfig, system: Optional[Hamiltonian] = None) -> Trajectory:
    start = time.perf_counter()
    system = system or build_hamiltonian(config)
    step = STEPPERS[config.method]
    q = np.asarray(config.initial.position, dtype=float)
    p = np.asarray(config.initial.momenta, dtype=float)
    signs = _check_interior(system, q)
    out = Trajectory(names=system.names)
    t = config.initial.time
    out.append(system, t, q, p)
    h0 = out.energies[0]
    scale = abs(h0) if h0 else 1.0
    for k in range(1, config.steps + 1):
        q_next, p_next = step(system, q, p, config.dt)
        if not (np.all(np.isfinite(q_next)) and np.all(np.isfinite(p_next))):
            out.terminated_at_boundary = True
            break
        if np.any(np.sign(system.barrier_values(q_next)) != signs):
            out.terminated_at_boundary = True
            logger.info("[DYN] boundary reached at step %d, t=%.6g", k, t + config.dt)
            break
        q, p, t = q_next, p_next, t + config.dt
        previous = out.energies[-1]
        out.append(system, t, q, p)
        drift = abs(out.energies[-1] - previous) / scale
        if config.drift_bound is not None and drift > config.drift_bound:
            raise EnergyDriftError(f"energy drift {drift:.3e} at step {k} exceeds {config.drift_bound:.1e}", k, drift)
    out.elapsed_ms = round((time.perf_counter() - start) * 1000, 2)
    logger.info(
        "[DYN] %s: %d steps, max relative drift %.3e, boundary=%s",
        config.method,
        out.steps_taken,
        out.max_relative_drift,
        out.terminated_at_boundary,
    )
    return out


def time_reversal_error(config: TrajectoryConfig) -> float:
    """Relative position error after integrating forward, flipping momenta and integrating back."""
    system = build_hamiltonian(config)
    forward = integrate(config, system)
    if forward.terminated_at_boundary:
        raise BoundaryError("forward run hit the boundary; choose a shorter run", witness=forward.steps_taken)
    back = config.model_copy(
        update={
            "initial": PhasePoint(
                position=forward.positions[-1].tolist(),
                momenta=(-forward.momenta[-1]).tolist(),
            )
        }
    )
    returned = integrate(back, system).positions[-1]
    q0 = forward.positions[0]
    return float(np.linalg.norm(returned - q0) / np.linalg.norm(q0))


def convergence_order(config: TrajectoryConfig) -> float:
    """log2 of the ratio of maximal energy errors at dt and dt/2 over the same time span."""
    system = build_hamiltonian(config)
    coarse = config.model_copy(update={"drift_bound": None})
    fine = config.model_copy(update={"dt": config.dt / 2, "steps": config.steps * 2, "drift_bound": None})
    errors = []
    for run in (coarse, fine):
        traj = integrate(run, system)
        if traj.terminated_at_boundary:
            raise BoundaryError("convergence run hit the boundary", witness=run.dt)
        h0 = traj.energies[0]
        errors.append(max(abs(h - h0) for h in traj.energies))
    if errors[1] == 0:
        raise ConvergenceError("energy error vanished at dt/2; increase dt", witness=errors)
    return math.log2(errors[0] / errors[1])
