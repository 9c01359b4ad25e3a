import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from app.errors import ConfigError
from app.geometry import tetra
from app.geometry.contents import content_sum, nbody_contents, pair_registry
from app.geometry.io import load_points
from app.schemas.configs import MassWeights, RhoPoint

REGULAR = RhoPoint.from_values([1] * 6)
SQUARE = RhoPoint.from_coordinates([[0, 0], [1, 0], [1, 1], [0, 1]])


def test_regular_tetrahedron_invariants():
    V, S, P = tetra.volume_vars(REGULAR)
    assert V == Fraction(1, 72)
    assert S == Fraction(3, 4)
    assert P == 6
    assert tetra.F2(REGULAR) == 4
    assert tetra.F2_printed(REGULAR) == -4
    assert tetra.u_vars(REGULAR) == (2, 2, 2)


def test_heron():
    assert tetra.heron_sq(1, 1, 1) == 3
    # 3-4-5 right triangle, area 6
    assert tetra.heron_sq(9, 16, 25) == 16 * 36


@pytest.mark.parametrize(
    "point, region",
    [
        (REGULAR, tetra.Region.INTERIOR),
        (SQUARE, tetra.Region.BOUNDARY),
        (RhoPoint.from_values([100, 1, 1, 1, 1, 1]), tetra.Region.OUTSIDE),
    ],
)
def test_config_space_regions(point, region):
    assert tetra.config_space_test(point)[0] is region


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_volume_oracles_agree(seed):
    coords = tetra.random_embedding(np.random.default_rng(seed))
    point = RhoPoint.from_coordinates(coords)
    v = tetra.volume_sq(point)
    assert v == tetra.cayley_menger_volume_sq(point)
    assert v == tetra.gram_volume_sq(coords)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations([1, 2, 3, 4]))
def test_relabeling_keeps_invariants(seed, perm):
    points = tetra.sample_interior(np.random.default_rng(seed), 1)
    if not points:
        return
    point = points[0]
    moved = tetra.relabel_point(point, perm)
    assert tetra.volume_vars(moved) == tetra.volume_vars(point)
    assert sorted(tetra.u_vars(moved)) == sorted(tetra.u_vars(point))


def test_f2_symbolic_sign():
    reg = tetra.rho_registry()
    assert tetra.F2_printed(reg) == -tetra.F2(reg)


def test_sampled_points_are_interior():
    for point in tetra.sample_interior(np.random.default_rng(3), 5):
        assert tetra.config_space_test(point)[0] is tetra.Region.INTERIOR
        assert tetra.F2(point) > 0


def test_content_sums_match_tetrahedron():
    reg = pair_registry(4)
    assert content_sum(reg, 4, 2) == tetra.edges_P(reg)
    assert content_sum(reg, 4, 3) == tetra.faces_S(reg)
    assert content_sum(reg, 4, 4) == tetra.volume_sq(reg)


def test_numeric_contents_of_a_triangle():
    dist = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    dist = [[Fraction(v) for v in row] for row in dist]
    assert nbody_contents(dist, 1) == 3
    assert nbody_contents(dist, 2) == Fraction(3, 16)


def test_contents_range():
    with pytest.raises(ValueError):
        content_sum(pair_registry(3), 3, 4)


def test_equal_masses_give_plain_variables():
    _, s_tilde, p_tilde = tetra.mass_volume_vars(REGULAR, MassWeights())
    assert (s_tilde, p_tilde) == (Fraction(3, 4), 6)


def test_geometry_report():
    report = tetra.geometry_report(REGULAR, MassWeights.parse("1,2,3,5"))
    assert report.classification == "interior"
    assert report.volume_sq == "1/72"
    assert report.F2 == "4"
    assert set(report.masses) == {"S_tilde", "P_tilde"}


def test_rho_point_validation():
    with pytest.raises(ValidationError):
        RhoPoint.from_values([-1, 1, 1, 1, 1, 1])
    with pytest.raises(ValidationError):
        MassWeights(m1=0)
    assert RhoPoint.from_values(["3/2", 1, 1, 1, 1, 1]).rho12 == Fraction(3, 2)


def test_load_points_json_and_csv(tmp_path):
    js = tmp_path / "points.json"
    js.write_text(json.dumps([{"coordinates": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]}, REGULAR.model_dump()]))
    points = load_points(js)
    assert len(points) == 2
    assert tetra.volume_sq(points[0]) == Fraction(1, 36)
    assert points[1] == REGULAR

    cs = tmp_path / "points.csv"
    cs.write_text("rho12,rho13,rho14,rho23,rho24,rho34\n1,1,1,1,1,1\n2,2,2,2,2,2\n")
    assert [p.rho12 for p in load_points(cs)] == [1, 2]


def test_load_points_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_points(tmp_path / "nope.json")
