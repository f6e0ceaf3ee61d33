import math

import pytest

from weylbec.correspondence import (
    HomologyVector,
    VerifyOptions,
    bulk_homology_vector,
    choose_basis,
    default_radius,
    edge_homology_vector,
    fermi_homology_vector,
    verify_bec,
)
from weylbec.errors import ConfigError, NoAdmissibleBasePoint
from weylbec.expr import SurfacePair
from weylbec.fermiarc import extract_fermi_arcs
from weylbec.weyl import WeylSet, detect_weyl_points

PI = math.pi


def _basis(preset, **kw):
    w = detect_weyl_points(preset.pair)
    kw.setdefault("base", preset.base)
    kw.setdefault("order", preset.order)
    return choose_basis(preset.pair, w, **kw), w


def test_homology_vector_round_trip():
    v = HomologyVector.from_sequence([1, 0, -1, 1])
    assert v.as_tuple() == (1, 0, -1, 1) and len(v) == 4 and list(v) == [1, 0, -1, 1]


def test_example1_basis(ex1):
    b, _ = _basis(ex1)
    assert b.base == (0.0, 0.0)
    assert b.n == 2 and len(b.circles) == 1
    assert b.points[1] == pytest.approx((3 * PI / 2, PI))
    assert b.radii == [0.3, 0.3]


def test_empty_weyl_set_basis():
    pair = SurfacePair.parse("3", "sin(ky)")
    b = choose_basis(pair, WeylSet([]), base=(1.0, 1.0))
    assert b.n == 0 and b.circles == []
    assert edge_homology_vector(pair, b).as_tuple() == (0, 0)
    assert bulk_homology_vector(pair, b).as_tuple() == (0, 0)
    assert fermi_homology_vector([], b).as_tuple() == (0, 0)


def test_example2_basis(ex2):
    b, _ = _basis(ex2)
    assert len(b.circles) == 3
    assert b.base == pytest.approx((PI / 4, 7 * PI / 4))


def test_bad_overrides(ex2):
    w = detect_weyl_points(ex2.pair)
    with pytest.raises(NoAdmissibleBasePoint):
        choose_basis(ex2.pair, w, base=(PI / 2, 1.0))
    with pytest.raises(ConfigError):
        choose_basis(ex2.pair, w, base=ex2.base, order=[(0.1, 0.1)])
    with pytest.raises(ConfigError):
        choose_basis(ex2.pair, w, base=ex2.base, order=list(ex2.order)[:3])


def test_default_radius():
    assert default_radius([(0.0, 0.0)]) == 0.3
    assert default_radius([(0.0, 0.0), (0.4, 0.0)]) == pytest.approx(0.2)


@pytest.mark.parametrize("name,expected", [
    ("example1", (0, 0, 1)),
    ("example1-alt", (1, 0, 1)),
    ("example2", (1, 0, -1, 1, -1)),
    ("example3", (0, 0, 0, 1)),
])
def test_three_vectors(name, expected):
    from weylbec.presets import get_preset
    preset = get_preset(name)
    b, _ = _basis(preset)
    comps = extract_fermi_arcs(preset.pair)
    assert edge_homology_vector(preset.pair, b).as_tuple() == expected
    assert edge_homology_vector(preset.pair, b, "analytic").as_tuple() == expected
    assert bulk_homology_vector(preset.model(), b).as_tuple() == expected
    assert fermi_homology_vector(comps, b).as_tuple() == expected


def test_disc_radius_halving(ex2):
    b, _ = _basis(ex2)
    half = b.scaled(0.5)
    comps = extract_fermi_arcs(ex2.pair)
    expected = (1, 0, -1, 1, -1)
    assert edge_homology_vector(ex2.pair, half, "analytic").as_tuple() == expected
    assert bulk_homology_vector(ex2.model(), half).as_tuple() == expected
    assert fermi_homology_vector(comps, half).as_tuple() == expected


def test_bulk_vector_grid_doubling(ex3):
    b, _ = _basis(ex3)
    assert bulk_homology_vector(ex3.model(), b, 400).as_tuple() == (0, 0, 0, 1)


def test_unknown_flow_method(ex1):
    b, _ = _basis(ex1)
    with pytest.raises(ConfigError):
        edge_homology_vector(ex1.pair, b, "bogus")


def test_verify_example1(ex1):
    r = verify_bec(ex1.pair, VerifyOptions(base=ex1.base, order=ex1.order), "example1")
    assert r.passed
    assert r.edge.as_tuple() == r.bulk.as_tuple() == r.fermi.as_tuple() == (0, 0, 1)
    d = r.as_dict()
    assert d["diagnostics"]["arc_recovery"]["passed"]
    assert d["diagnostics"]["charges"]["total"] == 0


def test_verify_gapped_model():
    r = verify_bec(SurfacePair.parse("3", "sin(ky)"))
    assert r.passed and r.components == []
    assert r.edge.as_tuple() == (0, 0)


def test_verify_auto_basis_example2(ex2):
    # Automatic base point and lexicographic order: the vectors differ from the
    # preset vector but must still agree with each other.
    r = verify_bec(ex2.pair, VerifyOptions(flow_method="analytic"))
    assert r.passed


def test_verify_non_contractible_circle():
    pair = SurfacePair.parse("0.5 + cos(ky) + 0.2 * cos(kx)", "sin(ky)")
    r = verify_bec(pair)
    assert r.passed
    assert r.edge.as_tuple() == (1, 0)


def test_verify_contractible_circle():
    r = verify_bec(SurfacePair.parse("0", "cos(kx) + cos(ky) - 1"))
    assert r.passed and r.edge.as_tuple() == (0, 0)
