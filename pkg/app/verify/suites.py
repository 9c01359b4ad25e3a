import logging
import math
import time
from fractions import Fraction
from typing import Callable, Dict, List

import numpy as np
from sympy import Matrix

from app.catalog import operators as ops
from app.catalog.identities import CATALOG_CHECKS, GAUGE_CHECKS
from app.config import GRAM_RATIO_BOUND
from app.diffop.cartesian import cartesian_oracle
from app.diffop.operator import DiffOp, commutator
from app.dynamics.hamiltonian import build_hamiltonian, gradient_check, regular_critical_scale
from app.dynamics.integrators import convergence_order, integrate, time_reversal_error
from app.errors import ConfigError
from app.exact import linalg, polys
from app.exact.serialize import parse_poly, poly_to_text
from app.geometry import tetra
from app.geometry.contents import content_sum, pair_registry
from app.nbody.volume import as_volume_operator, derive_coefficients, nbody_radial, printed_slots
from app.schemas.configs import PhasePoint, QESConfig, RhoPoint, TrajectoryConfig
from app.schemas.reports import SuiteReport
from app.spectral import orthogonality, qes
from app.symmetry import algebra
from app.symmetry.eigenforms import NO_COMMON, eigenform_test
from app.verify.runner import Check, SuiteContext, run_checks

"""
VERIFICATION SUITES
Each suite is a name -> check mapping run through the identity runner.
`all` runs every suite in order and merges results and findings.
"""

logger = logging.getLogger(__name__)

FAST_QES_DEGREE = 3
FULL_QES_DEGREE = 8
FAST_MC_SAMPLES = 200_000
FAST_DRIFT_STEPS = 1_000
FULL_DRIFT_STEPS = 10_000


# -- exact -----------------------------------------------------------------------


def serialize_roundtrip(ctx: SuiteContext) -> tuple:
    reg = ops.RHO
    rng = np.random.default_rng(ctx.seed)
    bad = []
    for _ in range(ctx.oracle_trials):
        p = polys.random_poly(reg, rng, 3)
        if parse_poly(poly_to_text(p, reg), reg) != p:
            bad.append(poly_to_text(p, reg))
    return not bad, f"{ctx.oracle_trials} random polynomials", bad[:3] or None


def laplace_determinant(ctx: SuiteContext) -> tuple:
    rng = np.random.default_rng(ctx.seed)
    bad = 0
    for _ in range(ctx.oracle_trials):
        rows = [[Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 5))) for _ in range(5)] for _ in range(5)]
        expected = Matrix(rows).det()
        if linalg.laplace_det(rows, Fraction(0), Fraction(1)) != Fraction(int(expected.p), int(expected.q)):
            bad += 1
    return not bad, f"{ctx.oracle_trials} random 5x5 rational matrices, {bad} mismatches"


def linear_solve(ctx: SuiteContext) -> bool:
    reg = ops.RHO
    K = reg.domain
    rows = [[K(1), K(2), K(3)], [K(2), K(4), K(6)], [K(1), K(0), K(1)]]
    rhs = [K(6), K(12), K(2)]
    solution, kernel = linalg.solve(rows, rhs, K)
    residual = [sum((a * x for a, x in zip(r, solution)), K.zero) - b for r, b in zip(rows, rhs)]
    return all(v == K.zero for v in residual) and len(kernel) == 1


EXACT_CHECKS: Dict[str, Check] = {
    "exact.serialize_roundtrip": serialize_roundtrip,
    "exact.laplace_det": laplace_determinant,
    "exact.linear_solve": linear_solve,
}


# -- diffop ----------------------------------------------------------------------


def weyl_relation(ctx: SuiteContext) -> bool:
    reg = ops.RHO
    ok = True
    for i in range(reg.nvars):
        bracket = commutator(DiffOp.partial(reg, i), DiffOp.multiplication(reg, reg.var(i)))
        ok &= bracket == DiffOp.multiplication(reg, 1)
    return ok


def jacobi_identity(ctx: SuiteContext) -> bool:
    J1, J2, J3 = algebra.rational_parts(ops.RHO)
    total = (
        commutator(J1, commutator(J2, J3)) + commutator(J2, commutator(J3, J1)) + commutator(J3, commutator(J1, J2))
    )
    return total.is_zero()


DIFFOP_CHECKS: Dict[str, Check] = {
    "diffop.weyl_relation": weyl_relation,
    "diffop.jacobi_identity": jacobi_identity,
    **GAUGE_CHECKS,
}


# -- geometry --------------------------------------------------------------------


def cayley_menger(ctx: SuiteContext) -> tuple:
    rng = np.random.default_rng(ctx.seed)
    bad = []
    for _ in range(ctx.oracle_trials):
        coords = tetra.random_embedding(rng)
        point = RhoPoint.from_coordinates(coords)
        v = tetra.volume_sq(point)
        if v != tetra.cayley_menger_volume_sq(point) or v != tetra.gram_volume_sq(coords):
            bad.append(str(v))
    return not bad, f"{ctx.oracle_trials} random embeddings", bad[:3] or None


def f2_sign(ctx: SuiteContext) -> tuple:
    reg = ops.RHO
    symbolic = tetra.F2_printed(reg) == -tetra.F2(reg)
    points = tetra.sample_interior(np.random.default_rng(ctx.seed), ctx.eigenform_points)
    negative = [str(p.values()) for p in points if tetra.F2(p) <= 0]
    return symbolic and not negative, f"F2_printed = -F2; F2 > 0 at {len(points)} interior points", negative or None


def content_sums(ctx: SuiteContext) -> bool:
    reg = pair_registry(4)
    return (
        content_sum(reg, 4, 2) == tetra.edges_P(reg)
        and content_sum(reg, 4, 3) == tetra.faces_S(reg)
        and content_sum(reg, 4, 4) == tetra.volume_sq(reg)
    )


def relabel_invariants(ctx: SuiteContext) -> tuple:
    rng = np.random.default_rng(ctx.seed)
    point = tetra.sample_interior(rng, 1)[0]
    base = tetra.volume_vars(point)
    broken = [p for p in tetra.s4() if tetra.volume_vars(tetra.relabel_point(point, p)) != base]
    return not broken, "(V, S, P) under the 24 relabelings", broken or None


GEOMETRY_CHECKS: Dict[str, Check] = {
    "geometry.cayley_menger": cayley_menger,
    "geometry.f2_sign": f2_sign,
    "geometry.content_sums": content_sums,
    "geometry.relabel_invariants": relabel_invariants,
}


# -- symmetry --------------------------------------------------------------------


def l_family(ctx: SuiteContext) -> bool:
    return commutator(ops.delta_radial_rho(algebra.FORMAL_L), algebra.L_family()).is_zero()


def so3(ctx: SuiteContext) -> tuple:
    relations = algebra.so3_relations()
    return all(relations.values()), str(relations)


def casimir(ctx: SuiteContext) -> tuple:
    relations = algebra.casimir_commutes()
    return all(relations.values()), str(relations)


def d1_dimension(ctx: SuiteContext) -> tuple:
    basis = algebra.d1_basis()
    pairs = algebra.pairwise_commuting(basis)
    detail = f"D1 has dimension {len(basis)}, non-commuting pairs: {pairs or 'none'}"
    return len(basis) == 6 and not pairs, detail, pairs or None


def d1_independence(ctx: SuiteContext) -> tuple:
    point = tetra.sample_interior(np.random.default_rng(ctx.seed), 1)[0].values()
    momenta = [Fraction(k + 1, 7) for k in range(6)]
    rank = algebra.symbol_jacobian_rank(algebra.d1_basis(), point, momenta)
    return rank == 6, f"principal-symbol Jacobian rank {rank}"


def quintet(ctx: SuiteContext) -> tuple:
    split = algebra.d1_split()
    return split["weights"] == [2, 1, 0, -1, -2], f"ladder weights {split['weights']}"


def printed_quintet(ctx: SuiteContext) -> tuple:
    report = algebra.printed_residual()
    ctx.finding(
        "printed l=2 highest-weight element commutes with Delta_radial",
        report["commutes"],
        True,
        note=f"{report['commutator_terms']} commutator terms, weight {report['weight']}, "
        f"{report['differs_from_derived']} terms differ from the derived element",
    )
    passed = not report["commutes"] and report["commutator_terms"] > 0 and report["differs_from_derived"] > 0
    return passed, f"printed element leaves {report['commutator_terms']} commutator terms"


def eigenforms(ctx: SuiteContext) -> tuple:
    points = tetra.sample_interior(np.random.default_rng(ctx.seed), ctx.eigenform_points)
    verdicts = eigenform_test(algebra.d1_basis(), ops.delta_radial_rho(), points, seed=ctx.seed)
    counts = {v: sum(1 for x in verdicts if x.verdict == v) for v in {x.verdict for x in verdicts}}
    separable = counts.get(NO_COMMON) != len(points)
    alone = eigenform_test([ops.delta_radial_rho()], ops.delta_radial_rho(), points[:2], seed=ctx.seed)
    passed = not separable and all(v.verdict != NO_COMMON for v in alone)
    return passed, f"D1: {counts}; Delta_radial alone: {[v.verdict for v in alone]}"


SYMMETRY_CHECKS: Dict[str, Check] = {
    "symmetry.l_family": l_family,
    "symmetry.so3": so3,
    "symmetry.casimir": casimir,
    "symmetry.d1_dimension": d1_dimension,
    "symmetry.d1_independence": d1_independence,
    "symmetry.quintet": quintet,
    "symmetry.printed_quintet": printed_quintet,
    "symmetry.eigenforms": eigenforms,
}


# -- qes -------------------------------------------------------------------------


def ground_state(ctx: SuiteContext) -> tuple:
    derived, _ = qes.ground_potential()
    return derived == qes.ground_potential_closed(), "V0 from the gauge rotation equals the closed form"


def gauge_identity(ctx: SuiteContext) -> bool:
    return qes.gauge_identity()


def lie_form(ctx: SuiteContext) -> bool:
    printed = qes.lie_form_matches(triangle_coeff=2)
    ctx.finding("h^(qes) Lie word: triangle coefficient", 1, 2, note=f"printed word expands correctly: {printed}")
    return qes.lie_form_matches()


INVARIANCE_DRAWS = 3


def _qes_parameters(rng: np.random.Generator) -> tuple:
    gamma = Fraction(int(rng.integers(-2, 7)), 2)
    omega = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5)))
    A = Fraction(int(rng.integers(0, 9)), int(rng.integers(1, 5)))
    return gamma, omega, A


def invariance(ctx: SuiteContext) -> tuple:
    top = FAST_QES_DEGREE if ctx.fast else FULL_QES_DEGREE
    rng = np.random.default_rng(ctx.seed)
    draws = [_qes_parameters(rng) for _ in range(INVARIANCE_DRAWS)]
    for gamma, omega, A in draws:
        qes.qes_matrix(QESConfig(gamma=gamma, omega=omega, A=A, N=top))
    shown = ", ".join(f"({g}, {w}, {a})" for g, w, a in draws)
    return True, f"P_{top} preserved at (gamma, omega, A) = {shown}"


def es_levels(ctx: SuiteContext) -> tuple:
    passed, detail, measured = qes.es_spectrum_check(Fraction(1), Fraction(0), 3)
    ctx.finding("ES level spacing at omega = 1", measured, qes.PRINTED_SPACING)
    return passed, detail


def ground_energy(ctx: SuiteContext) -> tuple:
    report = qes.qes_spectrum(qes.qes_matrix(QESConfig(gamma=0, omega=1, A=0, N=0)), ctx.precision_bits)
    return report.ground_energy == "36", f"E0 = {report.ground_energy}"


def level_one(ctx: SuiteContext) -> tuple:
    config = QESConfig(gamma=0, omega=1, A=0, N=1)
    values = []
    for i in range(6):
        top = [0] * 6
        top[i] = 1
        values.append(qes.is_eigenpolynomial(config, qes.eigenpolynomial(config, top)))
    return all(v == 16 for v in values), f"eigenvalues {values}"


def relative(ctx: SuiteContext) -> bool:
    return qes.relative_identity() and qes.free_of_F2(qes.relative_potential_closed())


def anisotropic(ctx: SuiteContext) -> tuple:
    omegas = [Fraction(k) for k in (1, 2, 3, 1, 2, 3)]
    op = qes.anisotropic_operator(omegas)
    energy = op.potential().as_poly()
    passed = qes.preserves_flag(op) and energy == qes.anisotropic_energy(omegas)
    return passed, f"ground energy {poly_to_text(energy, op.reg)}"


def gram(ctx: SuiteContext) -> tuple:
    samples = FAST_MC_SAMPLES if ctx.fast else ctx.mc_samples
    omega, gamma = Fraction(1), Fraction(1)
    basis = orthogonality.level_polynomials(omega, gamma, 2)
    report = orthogonality.gram_matrix(basis, omega, gamma, samples, ctx.seed, levels=[0, 1, 2])
    bound = max(GRAM_RATIO_BOUND, 10 / math.sqrt(report.accepted)) if ctx.fast else GRAM_RATIO_BOUND
    ratio = report.max_cross_level_ratio
    return ratio is not None and ratio < bound, f"cross-level ratio {ratio} (bound {bound:.2e}, {report.accepted} samples)"


QES_CHECKS: Dict[str, Check] = {
    "qes.ground_state": ground_state,
    "qes.gauge_identity": gauge_identity,
    "qes.lie_form": lie_form,
    "qes.invariance": invariance,
    "qes.es_levels": es_levels,
    "qes.ground_energy": ground_energy,
    "qes.level_one": level_one,
    "qes.relative": relative,
    "qes.anisotropic": anisotropic,
    "qes.orthogonality": gram,
}


# -- dynamics --------------------------------------------------------------------

DYNAMICS_OMEGA = 0.1


def _rho_config(ctx: SuiteContext, steps: int, momenta: float = 0.01) -> TrajectoryConfig:
    s = regular_critical_scale(DYNAMICS_OMEGA, 3)
    position = [s * (1 + 0.01 * k) for k in range(6)]
    return TrajectoryConfig(
        space="rho",
        omega=DYNAMICS_OMEGA,
        initial=PhasePoint(position=position, momenta=[momenta] * 6),
        dt=1e-3,
        steps=steps,
        drift_bound=None,
    )


def _line_config(dt: float, steps: int) -> TrajectoryConfig:
    return TrajectoryConfig(space="P", omega=1.0, initial=PhasePoint(position=[2.0], momenta=[0.1]), dt=dt, steps=steps)


def drift(ctx: SuiteContext) -> tuple:
    steps = FAST_DRIFT_STEPS if ctx.fast else FULL_DRIFT_STEPS
    traj = integrate(_rho_config(ctx, steps))
    return traj.max_relative_drift < 1e-8, f"max relative drift {traj.max_relative_drift:.3e} over {traj.steps_taken} steps"


def order(ctx: SuiteContext) -> tuple:
    measured = convergence_order(_line_config(0.01, 400))
    return measured >= 3.5, f"measured order {measured:.2f}"


def forces(ctx: SuiteContext) -> tuple:
    config = _rho_config(ctx, 1, momenta=0.3)
    system = build_hamiltonian(config)
    gap = gradient_check(system, np.asarray(config.initial.position), np.asarray(config.initial.momenta))
    return gap < 1e-5, f"largest relative gap {gap:.2e}"


def reversal(ctx: SuiteContext) -> tuple:
    error = time_reversal_error(_rho_config(ctx, 200, momenta=0.05))
    return error < 1e-6, f"relative position error {error:.2e}"


def stationary(ctx: SuiteContext) -> tuple:
    s = regular_critical_scale(DYNAMICS_OMEGA, 3)
    config = TrajectoryConfig(
        space="rho", omega=DYNAMICS_OMEGA, initial=PhasePoint(position=[s] * 6, momenta=[0.0] * 6), steps=100
    )
    traj = integrate(config)
    moved = float(np.max(np.abs(traj.positions[-1] - traj.positions[0]))) / s
    return moved < 1e-8, f"relative displacement {moved:.2e} after {traj.steps_taken} steps"


DYNAMICS_CHECKS: Dict[str, Check] = {
    "dynamics.drift": drift,
    "dynamics.order": order,
    "dynamics.forces": forces,
    "dynamics.reversal": reversal,
    "dynamics.stationary": stationary,
}


# -- nbody -----------------------------------------------------------------------


def radial_n4(ctx: SuiteContext) -> bool:
    return nbody_radial(4) == ops.delta_radial_rho()


def oracle_n3(ctx: SuiteContext):
    return cartesian_oracle(nbody_radial(3), 3, trials=ctx.oracle_trials, seed=ctx.seed)


def oracle_n5_masses(ctx: SuiteContext):
    masses = [1, 2, 3, 5, 1]
    return cartesian_oracle(nbody_radial(5, masses), 4, masses=masses, trials=min(ctx.oracle_trials, 5), seed=ctx.seed)


def _derive(n: int) -> Check:
    def check(ctx: SuiteContext) -> tuple:
        tpl, certified = derive_coefficients(n)
        wrong = [k for k, v in printed_slots(n).items() if tpl.values.get(k) != v]
        passed = certified and not wrong and not tpl.undetermined
        if n == 4:
            passed = passed and as_volume_operator(tpl.operator(), ops.VOLUME) == ops.delta_g()
        slots = ", ".join(f"{k}={v}" for k, v in tpl.values.items())
        return passed, slots, wrong or tpl.undetermined or None

    return check


def nbody_checks(ctx: SuiteContext) -> Dict[str, Check]:
    checks: Dict[str, Check] = {
        "nbody.radial_n4": radial_n4,
        "nbody.oracle_n3": oracle_n3,
        "nbody.derive_n3": _derive(3),
        "nbody.derive_n4": _derive(4),
    }
    if not ctx.fast:
        checks["nbody.oracle_n5_masses"] = oracle_n5_masses
        checks["nbody.derive_n5"] = _derive(5)
    return checks


# -- registry --------------------------------------------------------------------

SUITES: Dict[str, Callable[[SuiteContext], Dict[str, Check]]] = {
    "exact": lambda ctx: EXACT_CHECKS,
    "diffop": lambda ctx: DIFFOP_CHECKS,
    "geometry": lambda ctx: GEOMETRY_CHECKS,
    "catalog": lambda ctx: CATALOG_CHECKS,
    "symmetry": lambda ctx: SYMMETRY_CHECKS,
    "qes": lambda ctx: QES_CHECKS,
    "dynamics": lambda ctx: DYNAMICS_CHECKS,
    "nbody": nbody_checks,
}


def suite_names() -> List[str]:
    return list(SUITES) + ["all"]


def run_suite(name: str, ctx: SuiteContext) -> SuiteReport:
    if name not in SUITES and name != "all":
        raise ConfigError(f"unknown suite {name!r}", witness=suite_names())
    start = time.perf_counter()
    names = list(SUITES) if name == "all" else [name]
    results = []
    for suite in names:
        logger.info("[VERIFY] suite %s", suite)
        results.extend(run_checks(SUITES[suite](ctx), ctx))
    report = SuiteReport(
        suite=name,
        seed=ctx.seed,
        results=results,
        findings=list(ctx.findings),
        elapsed_ms=round((time.perf_counter() - start) * 1000, 2),
    )
    logger.info("[VERIFY] suite %s: %d/%d passed", name, sum(r.passed for r in results), len(results))
    return report
