"""Acceptance criteria 1-8, each at its stated tolerance.

Every test records one PASS/FAIL line; the lines are printed by the
``pytest_terminal_summary`` hook in ``conftest.py`` (and to stdout with -s).
"""

import math
import time

import numpy as np
import pytest

from weylbec.chern import ClosedSurfaceGrid, fhs_chern, fhs_chern_detail
from weylbec.correspondence import VerifyOptions, verify_bec, weyl_charges
from weylbec.edge import Loop, midgap_states, spectral_flow_analytic, spectral_flow_numeric
from weylbec.errors import GapViolation, NonTransversalCrossing, TangentialCrossing
from weylbec.fermiarc import crossings, extract_fermi_arcs, hausdorff_to_fermi, intersection_number
from weylbec.model import essential_spectrum_bands, local_hamiltonian, qwz_model
from weylbec.presets import get_preset
from weylbec.weyl import detect_weyl_points, torus_distance

PI = math.pi
RESULTS = {}


def record(number, ok, detail):
    line = f"acceptance {number}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def _verify(preset, **kw):
    opts = VerifyOptions(base=preset.base, order=list(preset.order) if preset.order else None, **kw)
    return verify_bec(preset.pair, opts, preset.name)


def test_criterion_1_example1():
    t0 = time.perf_counter()
    r = _verify(get_preset("example1"))
    alt = _verify(get_preset("example1-alt"))
    elapsed = time.perf_counter() - t0
    vecs = (r.bulk.as_tuple(), r.edge.as_tuple(), r.fermi.as_tuple())
    ok = (r.passed and all(v == (0, 0, 1) for v in vecs) and alt.edge.as_tuple() == (1, 0, 1)
          and elapsed < 60)
    record(1, ok, f"vectors {vecs[0]}/{vecs[1]}/{vecs[2]}, alternate edge {alt.edge.as_tuple()}, "
                  f"{elapsed:.1f} s")


def test_criterion_2_example2():
    r = _verify(get_preset("example2"))
    vecs = (r.bulk.as_tuple(), r.edge.as_tuple(), r.fermi.as_tuple())
    ok = all(v == (1, 0, -1, 1, -1) for v in vecs)
    record(2, ok, f"vectors {vecs[0]}/{vecs[1]}/{vecs[2]}")


def test_criterion_3_example3():
    r = _verify(get_preset("example3"))
    vecs = (r.bulk.as_tuple(), r.edge.as_tuple(), r.fermi.as_tuple())
    arcs = r.components
    expected_points = [(PI / 2, PI), (PI, 3 * PI / 2), (3 * PI / 2, PI)]
    meet = (PI, 3 * PI / 2)
    ends = [p for c in arcs for p in c.endpoints()]
    ends_ok = all(min(torus_distance(p, q) for q in expected_points) < 0.05 for p in ends)
    covered = all(any(torus_distance(p, q) < 0.05 for p in ends) for q in expected_points)
    meet_ok = all(any(torus_distance(p, meet) < 0.05 for p in c.endpoints()) for c in arcs)
    ok = (all(v == (0, 0, 0, 1) for v in vecs) and len(arcs) == 2 and all(c.is_arc for c in arcs)
          and [c.epsilon for c in arcs] == [-1, -1] and ends_ok and covered and meet_ok)
    record(3, ok, f"vectors {vecs[0]}/{vecs[1]}/{vecs[2]}, {len(arcs)} arcs, "
                  f"eps {[c.epsilon for c in arcs]}, endpoints near w-bar {ends_ok and covered}")


def test_criterion_4_qwz_sweep():
    t0 = time.perf_counter()
    bad = []
    for n in range(-3, 4):
        preset = get_preset(f"qwz:{n}:1.5")
        c1 = fhs_chern(ClosedSurfaceGrid.torus(qwz_model(n, 1.5), n=200))
        loop = Loop.horizontal(0.0)
        sf_a = spectral_flow_analytic(preset.pair, loop)
        sf_n = spectral_flow_numeric(preset.pair, loop)
        if (c1, sf_a, sf_n) != (n, -n, -n):
            bad.append((n, c1, sf_a, sf_n))
    elapsed = time.perf_counter() - t0
    record(4, not bad and elapsed < 120, f"n=-3..3 mismatches {bad}, {elapsed:.1f} s")


def test_criterion_5_truncation():
    rng = np.random.default_rng(20240501)
    worst_energy = 0.0
    worst_ratio = 0.0
    problems = []
    for _ in range(20):
        a = rng.uniform(-0.9, 0.9)
        b = rng.uniform(-1.0, 1.0)
        left, _, _ = midgap_states(a, b, 64)
        if len(left) != 1:
            problems.append((a, b, f"{len(left)} left states"))
            continue
        err = abs(left[0].energy - b)
        v = left[0].vector
        cells = np.hypot(v[0::2], v[1::2])
        ratio_err = float(np.max(np.abs(cells[6:21] / cells[5:20] - abs(a))))
        worst_energy = max(worst_energy, err)
        worst_ratio = max(worst_ratio, ratio_err)
        if err >= 1e-6 or ratio_err >= 5e-2:
            problems.append((a, b, err, ratio_err))
    record(5, not problems, f"max |lambda-b| {worst_energy:.2e}, max ratio error {worst_ratio:.2e}, "
                            f"violations {problems}")


def test_criterion_6_bands():
    rng = np.random.default_rng(6)
    theta = 2 * PI * np.arange(10_000) / 10_000
    worst = 0.0
    for _ in range(100):
        a = rng.uniform(-3, 3)
        b = rng.uniform(-2, 2)
        lam = local_hamiltonian(a, b, theta).norm()
        bands = essential_spectrum_bands(a, b)
        brute = (-lam.max(), -lam.min(), lam.min(), lam.max())
        worst = max(worst, max(abs(x - y) for x, y in zip(bands.lower + bands.upper, brute)))
    record(6, worst < 1e-9, f"max band-edge deviation {worst:.2e}")


def _random_loops(pair, projected, components, count, rng):
    loops = []
    while len(loops) < count:
        c = rng.uniform(0, 2 * PI, 2)
        r = rng.uniform(0.2, 1.2)
        if projected and min(abs(torus_distance(c, p) - r) for p in projected) <= 0.15:
            continue
        loop = Loop.circle(c, r)
        try:
            spectral_flow_analytic(pair, loop)
            pts = [p for comp in components for p, _ in crossings(comp.polyline, loop.polyline())]
        except (GapViolation, NonTransversalCrossing, TangentialCrossing):
            continue
        if any(abs(float(pair.det_j(*p))) <= 1e-6 for p in pts):
            continue
        loops.append(loop)
    return loops


def test_criterion_7_oracle_equivalence():
    rng = np.random.default_rng(7)
    violations = []
    for name in ("example1", "example2", "example3"):
        preset = get_preset(name)
        weyl = detect_weyl_points(preset.pair)
        comps = extract_fermi_arcs(preset.pair, weyl=weyl)
        for loop in _random_loops(preset.pair, weyl.projected, comps, 50, rng):
            sf_a = spectral_flow_analytic(preset.pair, loop)
            sf_n = spectral_flow_numeric(preset.pair, loop, 64)
            weighted = sum(f.epsilon * intersection_number(f, loop) for f in comps)
            if not sf_a == sf_n == weighted:
                violations.append((name, loop.label, sf_a, sf_n, weighted))
        model = preset.model()
        charges = weyl_charges(model, weyl)
        if sum(charges) != 0:
            violations.append((name, "charge sum", sum(charges)))
        for group in weyl.projected_groups:
            tube = fhs_chern_detail(ClosedSurfaceGrid.tube(model, group[0].projected, 0.3, 200)).value
            fiber = sum(p.charge for p in group)
            if fiber != tube:
                violations.append((name, "fiber", group[0].projected, fiber, tube))
    record(7, not violations, f"3 x 50 loops, violations {violations}")


def test_criterion_8_arc_recovery():
    bound = 2 * (2 * PI / 512)
    dists = {}
    for name in ("example1", "example2", "example3"):
        pair = get_preset(name).pair
        weyl = detect_weyl_points(pair, 512)
        comps = extract_fermi_arcs(pair, 512, weyl=weyl)
        dists[name] = hausdorff_to_fermi(pair, comps, weyl.projected)
    worst = max(dists.values())
    record(8, worst < bound, f"Hausdorff {', '.join(f'{k} {v:.2e}' for k, v in dists.items())} "
                             f"(bound {bound:.2e})")


@pytest.fixture(scope="module", autouse=True)
def _expose_results(request):
    request.config._acceptance_results = RESULTS
    yield
