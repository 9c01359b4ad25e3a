from fractions import Fraction
from math import comb

import pytest

from app.config import DEFAULT_MC_SAMPLES, GRAM_RATIO_BOUND
from app.errors import ConvergenceError
from app.exact.ratfunc import RatFunc
from app.schemas.configs import QESConfig, RhoPoint
from app.spectral import orthogonality, qes

REGULAR = RhoPoint.from_values([1] * 6)


def test_gauge_identity():
    assert qes.gauge_identity()


def test_ground_potential_matches_closed_form():
    derived, E0 = qes.ground_potential()
    assert derived == qes.ground_potential_closed()
    assert E0 == qes.ground_energy()


def test_lie_form():
    assert qes.lie_form_matches()
    assert not qes.lie_form_matches(triangle_coeff=2)


def test_ground_energy():
    report = qes.qes_spectrum(qes.qes_matrix(QESConfig(gamma=0, omega=1, A=0, N=0)))
    assert report.ground_energy == "36"
    assert report.dimension == 1
    assert report.levels[0].eigenvalue_exact == "36"


def test_exactly_solvable_levels():
    report = qes.qes_spectrum(qes.qes_matrix(QESConfig(gamma=0, omega=1, A=0, N=3)))
    assert report.triangular
    assert report.dimension == 84
    assert [level.multiplicity for level in report.levels] == [1, 6, 21, 56]
    assert [level.eigenvalue_exact for level in report.levels] == ["36", "52", "68", "84"]
    assert report.measured_spacing == "16"
    assert report.printed_spacing == "12"
    assert report.crosscheck_gap < 1e-6


def test_level_multiplicity():
    assert [qes.level_multiplicity(k) for k in range(4)] == [1, 6, 21, 56]


def test_es_spectrum_check():
    passed, detail, measured = qes.es_spectrum_check(Fraction(2), Fraction(1, 2), 2)
    assert passed, detail
    assert measured == "32"


@pytest.mark.parametrize("N", [0, 1, 2])
def test_quartic_sector_keeps_degree(N):
    matrix = qes.qes_matrix(QESConfig(gamma=Fraction(1, 2), omega=1, A=1, N=N))
    assert matrix.dimension == comb(N + 6, 6)
    report = qes.qes_spectrum(matrix, bits=128)
    assert len(report.eigenvalues) == matrix.dimension
    assert all(level.eigenvalue_exact is None for level in report.levels)
    assert report.max_imaginary_ratio < 1e-12


def test_complex_spectrum_is_rejected():
    basis = [(1, 0, 0, 0, 0, 0), (0, 1, 0, 0, 0, 0)]
    rotation = [[Fraction(0), Fraction(-1)], [Fraction(1), Fraction(0)]]
    matrix = qes.QESMatrix(QESConfig(gamma=0, omega=1, A=1, N=1), basis, rotation)
    with pytest.raises(ConvergenceError):
        qes.qes_spectrum(matrix, bits=64)
    assert qes.imaginary_ratio([complex(2, 0), complex(0, 1)]) == 0.5


def test_level_one_eigenpolynomials():
    config = QESConfig(gamma=0, omega=1, A=0, N=1)
    for i in range(6):
        top = [0] * 6
        top[i] = 1
        poly = qes.eigenpolynomial(config, top)
        assert qes.is_eigenpolynomial(config, poly) == 16


def test_closed_form_level_one_eigenpolynomial():
    reg = qes.QES
    config = QESConfig(gamma=1, omega=2, A=0, N=1)
    formal = RatFunc.from_poly(reg, qes.level_one_eigenpolynomial(0, reg))
    bound = formal.substitute({reg.index("gamma"): reg.scalar(1), reg.index("omega"): reg.scalar(2)}).as_poly()
    assert bound == 16 * reg.var(0) - 5
    assert qes.is_eigenpolynomial(config, bound) == 32


def test_not_an_eigenpolynomial():
    config = QESConfig(gamma=0, omega=1, A=0, N=1)
    assert qes.is_eigenpolynomial(config, qes.QES.var(0) + qes.QES.var(1) ** 2) is None
    with pytest.raises(ValueError):
        qes.eigenpolynomial(config.model_copy(update={"A": Fraction(1)}), [1, 0, 0, 0, 0, 0])


def test_relative_potential():
    assert qes.relative_identity()
    assert qes.free_of_F2(qes.relative_potential_closed())
    assert not qes.free_of_F2(qes.ground_potential_closed())


def test_anisotropic_family_keeps_flag():
    omegas = [Fraction(k) for k in (1, 2, 3, 1, 2, 3)]
    assert qes.preserves_flag(qes.anisotropic_operator(omegas))
    energy = qes.anisotropic_operator(omegas).potential().as_poly()
    assert energy == qes.anisotropic_energy(omegas) == 24 * qes.QES.param("d")
    with pytest.raises(ValueError):
        qes.anisotropic_potential([1, 2])


def test_potentials_at_regular_point():
    report = qes.potentials_report(QESConfig(gamma=0, omega=1, A=0, N=0, d=3), REGULAR)
    assert report.values["V_harmonic"] == "48"
    assert report.values["V_qes"] == "99/2"
    assert report.values["V_es"] == "99/2"
    assert report.values["V_relative"] == "48"
    assert report.values["Delta_V_N"] == "0"
    assert report.relative_identity and report.relative_free_of_F2


def test_potentials_leave_unbound_dimension_unevaluated():
    report = qes.potentials_report(QESConfig(), REGULAR)
    assert report.values["V_relative"] is None
    assert report.values["V_harmonic"] == "48"


def test_potentials_on_the_boundary():
    planar = RhoPoint.from_values([1, 1, 2, 2, 1, 1])
    report = qes.potentials_report(QESConfig(gamma=2, d=3), planar)
    assert report.values["V_harmonic"] == "64"
    assert report.values["V_qes"] is None


def test_config_validation():
    with pytest.raises(ValueError):
        QESConfig(omega=0, A=0)
    with pytest.raises(ValueError):
        QESConfig(omega=-1)


def test_gram_matrix_small_sample():
    basis = orthogonality.level_polynomials(Fraction(1), Fraction(1), 1)
    report = orthogonality.gram_matrix(basis, Fraction(1), Fraction(1), 20_000, seed=3, levels=[0, 1])
    assert report.accepted > 0
    assert len(report.gram) == 2
    assert report.gram[0][0] > 0
    assert report.max_cross_level_ratio is not None


def test_gram_matrix_rejects_zero_frequency():
    with pytest.raises(ValueError):
        orthogonality.gram_matrix([qes.QES.ring.one], Fraction(0), Fraction(1), 10)


@pytest.mark.slow
def test_eigenpolynomials_are_orthogonal():
    basis = orthogonality.level_polynomials(Fraction(1), Fraction(1), 2)
    report = orthogonality.gram_matrix(basis, Fraction(1), Fraction(1), DEFAULT_MC_SAMPLES, seed=7, levels=[0, 1, 2])
    assert report.max_cross_level_ratio < GRAM_RATIO_BOUND
