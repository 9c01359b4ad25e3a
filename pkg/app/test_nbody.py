from fractions import Fraction as F

import pytest

from app.catalog import operators as ops
from app.diffop.cartesian import cartesian_oracle
from app.errors import ConfigError
from app.nbody.volume import (
    as_volume_operator,
    derive_coefficients,
    nbody_radial,
    nbody_table,
    printed_slots,
    template,
)

N3 = {"a2": F(1, 2), "b2": F(6), "b3": F(24), "e0": F(6), "e1": F(1, 4)}
N4 = {
    "a3": F(2, 9), "a2": F(2), "b2": F(8), "b3": F(32), "b4": F(48),
    "c11": F(54), "f11": F(1, 2), "e0": F(12), "e1": F(1, 2), "e2": F(1, 9),
}
N5 = {
    "a4": F(1, 8), "a3": F(8, 9), "a2": F(3),
    "b2": F(10), "b3": F(40), "b4": F(60), "b5": F(80),
    "c11": F(8, 3), "f11": F(2, 9), "c12": F(320), "f12": F(2), "c22": F(135, 2), "f22": F(1, 2),
    "e0": F(20), "e1": F(3, 4), "e2": F(2, 9), "e3": F(1, 16),
}


def test_four_body_operator_is_the_radial_operator():
    assert nbody_radial(4) == ops.delta_radial_rho()


def test_three_body_oracle():
    assert cartesian_oracle(nbody_radial(3), 3, trials=3, seed=1).passed


def test_radial_range():
    with pytest.raises(ConfigError):
        nbody_radial(7)
    with pytest.raises(ConfigError):
        nbody_radial(3, masses=[1, 2])
    with pytest.raises(ConfigError):
        template(6)


def test_template_slots():
    labels = [slot.label for slot in template(4).slots]
    assert labels == ["a2", "a3", "b2", "b3", "b4", "e0", "e1", "e2", "c11", "f11"]


def test_printed_slots():
    assert printed_slots(4) == {"a3": F(2, 9), "b2": F(8), "e0": F(12), "e1": F(1, 2), "e2": F(1, 9)}


@pytest.mark.parametrize("n, expected", [(3, N3), (4, N4)])
def test_derived_slots(n, expected):
    tpl, certified = derive_coefficients(n)
    assert certified
    assert not tpl.undetermined
    assert tpl.values == expected


def test_four_body_volume_operator():
    tpl, _ = derive_coefficients(4)
    assert as_volume_operator(tpl.operator(), ops.VOLUME) == ops.delta_g()
    with pytest.raises(ConfigError):
        as_volume_operator(derive_coefficients(3)[0].operator(), ops.VOLUME)


def test_table():
    table = nbody_table(3)
    assert table.variables == ["V2", "V3"]
    assert table.slots["b3"] == "24"
    assert all(table.known_slots_match.values())
    assert table.residual_zero


@pytest.mark.slow
def test_five_body_slots():
    tpl, certified = derive_coefficients(5)
    assert certified
    assert tpl.values == N5
