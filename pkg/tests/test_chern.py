import math

import numpy as np
import pytest

from weylbec.chern import ClosedSurfaceGrid, chern_sphere, chern_tube, fhs_chern, fhs_chern_detail
from weylbec.correspondence import weyl_charges
from weylbec.errors import GapClosed, NonIntegerResidual
from weylbec.model import GenericModel, Hermitian2, LocalFormModel, qwz_model
from weylbec.weyl import detect_weyl_points

PI = math.pi


def _torus(model, n=100):
    return ClosedSurfaceGrid.torus(model, n=n)


def test_qwz_unit():
    assert fhs_chern(_torus(qwz_model(1, 1.0))) == 1


def test_qwz_negative_winding():
    assert fhs_chern(_torus(qwz_model(-2, 1.5))) == -2


@pytest.mark.parametrize("u,expected", [(-1.0, -1), (3.0, 0), (-3.0, 0)])
def test_qwz_phase_diagram(u, expected):
    assert fhs_chern(_torus(qwz_model(1, u))) == expected


def test_constant_hamiltonian_is_trivial():
    const = GenericModel(lambda kx, ky, kz: Hermitian2(np.ones_like(kx), 0.0 * kx, 0.0 * kx))
    assert fhs_chern(_torus(const, 32)) == 0


def test_gap_closing_is_reported():
    with pytest.raises(GapClosed):
        fhs_chern(_torus(qwz_model(1, 0.0), 64))


def test_plaquette_sum_is_exactly_integer_on_closed_grids():
    r = fhs_chern_detail(_torus(qwz_model(3, 1.5), 6))
    assert r.residual < 1e-12


def test_open_surface_reports_non_integer():
    # Half a torus (kx in [0, pi], not glued) carries a fractional Berry flux.
    base = _torus(qwz_model(1, 1.0), 64)
    half = ClosedSurfaceGrid("strip", base.model, base.embed, np.linspace(0, PI, 33), base.v,
                             periodic_u=False)
    with pytest.raises(NonIntegerResidual):
        fhs_chern(half)


def test_result_detail_residual_small():
    r = fhs_chern_detail(_torus(qwz_model(1, 1.0), 100))
    assert r.residual < 1e-6 and r.min_gap > 0


def test_example1_tubes(ex1):
    m = ex1.model()
    assert chern_tube(m, (3 * PI / 2, PI), 0.3) == -1
    assert chern_tube(m, (PI / 2, PI), 0.3) == 1
    assert chern_tube(m, (0.0, 0.0), 0.3) == 0


def test_example2_tube(ex2):
    assert chern_tube(ex2.model(), (PI / 2, PI), 0.3) == -1


def test_tube_stable_under_radius_halving_and_grid_doubling(ex1):
    m = ex1.model()
    assert chern_tube(m, (3 * PI / 2, PI), 0.15) == chern_tube(m, (3 * PI / 2, PI), 0.3)
    assert chern_tube(m, (3 * PI / 2, PI), 0.3, grid_n=400) == -1


def test_example1_charges_cancel(ex1):
    m = ex1.model()
    w = detect_weyl_points(ex1.pair)
    charges = [chern_sphere(m, p, 0.2) for p in w]
    assert sorted(charges) == [-1, 1]
    assert all(p.charge in (-1, 1) for p in w)


def test_sphere_around_gapped_point(ex1):
    assert chern_sphere(ex1.model(), (0.0, 0.0, 0.0), 0.2) == 0


def test_example2_charges_cancel(ex2):
    w = detect_weyl_points(ex2.pair)
    charges = weyl_charges(ex2.model(), w)
    assert sum(charges) == 0 and all(abs(c) == 1 for c in charges)


def test_charge_equals_sign_of_det_j(ex1):
    # Local-form models: the chirality of a nondegenerate point is fixed by det J.
    w = detect_weyl_points(ex1.pair)
    for p in w:
        chern_sphere(ex1.model(), p, 0.2)
        assert abs(p.charge) == 1
    assert sorted(int(np.sign(p.det_j)) * p.charge for p in w) in ([1, 1], [-1, -1])


def test_slices_of_local_model(ex1):
    m = LocalFormModel(ex1.pair)
    assert fhs_chern(ClosedSurfaceGrid.slice_x(m, 0.0)) == 0
    assert fhs_chern(ClosedSurfaceGrid.slice_y(m, 0.0)) == 0
    assert fhs_chern(ClosedSurfaceGrid.slice_x(m, PI)) == 1
