import math

import numpy as np
import pytest

from app.dynamics.hamiltonian import build_hamiltonian, gradient_check, hamiltonian_eval, regular_critical_scale
from app.dynamics.integrators import convergence_order, integrate, time_reversal_error
from app.errors import BoundaryError, ConfigError, EnergyDriftError
from app.schemas.configs import PhasePoint, TrajectoryConfig

OMEGA = 0.1


def _rho(steps=100, momenta=0.01, method="rk4", scale=None):
    s = scale or regular_critical_scale(OMEGA, 3)
    return TrajectoryConfig(
        space="rho",
        omega=OMEGA,
        initial=PhasePoint(position=[s * (1 + 0.01 * k) for k in range(6)], momenta=[momenta] * 6),
        dt=1e-3,
        steps=steps,
        method=method,
        drift_bound=None,
    )


def _line(**overrides):
    values = dict(space="P", omega=1.0, initial=PhasePoint(position=[2.0], momenta=[0.1]), dt=0.01, steps=50)
    values.update(overrides)
    return TrajectoryConfig(**values)


def test_regular_critical_scale():
    assert regular_critical_scale(OMEGA, 3) == pytest.approx(math.sqrt(3.125))
    with pytest.raises(ConfigError):
        regular_critical_scale(0.0, 3)


def test_forces_match_finite_differences():
    config = _rho(momenta=0.3)
    system = build_hamiltonian(config)
    q, p = np.asarray(config.initial.position), np.asarray(config.initial.momenta)
    assert gradient_check(system, q, p) < 1e-5


def test_regular_point_is_stationary():
    s = regular_critical_scale(OMEGA, 3)
    config = TrajectoryConfig(space="rho", omega=OMEGA, initial=PhasePoint(position=[s] * 6, momenta=[0.0] * 6), steps=50)
    traj = integrate(config)
    assert np.max(np.abs(traj.positions[-1] - traj.positions[0])) / s < 1e-8


def test_rk4_conserves_energy():
    traj = integrate(_rho(steps=200))
    assert not traj.terminated_at_boundary
    assert traj.steps_taken == 200
    assert traj.max_relative_drift < 1e-8


def test_stormer_verlet_runs():
    traj = integrate(_line(method="stormer-verlet"))
    assert traj.steps_taken == 50
    assert traj.max_relative_drift < 1e-3


def test_time_reversal():
    assert time_reversal_error(_rho(steps=50, momenta=0.05)) < 1e-6


@pytest.mark.slow
def test_rk4_convergence_order():
    assert convergence_order(_line(steps=400)) >= 3.5


def test_drift_bound_is_enforced():
    with pytest.raises(EnergyDriftError) as exc:
        integrate(_line(dt=0.1, steps=10, drift_bound=1e-12))
    assert exc.value.step == 1


def test_exactly_solvable_potential_needs_volume_variables():
    with pytest.raises(ConfigError):
        build_hamiltonian(_line(potential="es"))


def test_exactly_solvable_potential_on_volume_space():
    config = TrajectoryConfig(
        space="volume",
        potential="es",
        omega=0.5,
        initial=PhasePoint(position=[1 / 72, 0.75, 6.0], momenta=[0.0, 0.0, 0.0]),
    )
    assert math.isfinite(hamiltonian_eval(config, config.initial.position, config.initial.momenta))


def test_custom_potential():
    config = _line(potential="custom", custom_potential="P**2")
    system = build_hamiltonian(config)
    assert system(np.array([2.0]), np.array([0.0])) == pytest.approx(4.0 + 24 / 2.0)
    with pytest.raises(ConfigError):
        build_hamiltonian(_line(potential="custom", custom_potential="P +* 2"))


def test_boundary_initial_point():
    planar = TrajectoryConfig(space="rho", initial=PhasePoint(position=[1, 1, 2, 2, 1, 1], momenta=[0] * 6))
    with pytest.raises(BoundaryError):
        integrate(planar)


def test_config_dimension_is_checked():
    with pytest.raises(ValueError):
        TrajectoryConfig(space="volume", initial=PhasePoint(position=[1.0], momenta=[0.0]))
    with pytest.raises(ValueError):
        PhasePoint(position=[1.0, 2.0], momenta=[0.0])


def test_trajectory_csv(tmp_path):
    traj = integrate(_line(steps=5))
    path = traj.write_csv(tmp_path / "run.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,P,p_P,H,D"
    assert len(lines) == 7
    summary = traj.summary(path)
    assert summary.steps_taken == 5
    assert summary.csv_path == str(path)
