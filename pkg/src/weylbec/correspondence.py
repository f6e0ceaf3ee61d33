"""The three coefficient vectors in H_1(T^2, pi(W)) and their comparison.

With a base point (kx0, ky0) and an ordering w_0, ..., w_{n-1} of pi(W), a
class is described by n + 1 integers (q_x, q_y, q_1, ..., q_{n-1}). Every
coefficient is a pairing with one of the loops LoopX, LoopY or the circle
around w_i, so the reference paths themselves are never built. The signs
used by each construction live in ``weylbec.conventions``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import conventions as cv
from .chern import DEFAULT_SPHERE_GRID, DEFAULT_SURFACE_GRID, ClosedSurfaceGrid, chern_sphere, fhs_chern_detail
from .edge import DEFAULT_SAMPLES, DEFAULT_SITES, Loop, spectral_flow_analytic, spectral_flow_numeric
from .errors import ConfigError, NoAdmissibleBasePoint, TangentialCrossing
from .expr import SurfacePair
from .fermiarc import hausdorff_to_fermi, intersection_number
from .model import LocalFormModel
from .weyl import (
    DEFAULT_GRID,
    WeylSet,
    base_point_violations,
    check_assumptions,
    choose_base_point,
    line_crossings,
    torus_distance,
)

TWO_PI = 2.0 * math.pi
MAX_DISC_RADIUS = 0.3
MAX_SPHERE_RADIUS = 0.2
JITTERS = (0.005, -0.005, 0.01, -0.01, 0.02)
FLOW_METHODS = ("analytic", "numeric")


@dataclass
class BasisChoice:
    base: tuple[float, float]
    points: list[tuple[float, float]]
    radii: list[float]
    n_samples: int = DEFAULT_SAMPLES

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def loop_x(self) -> Loop:
        return Loop.horizontal(self.base[1], self.n_samples)

    @property
    def loop_y(self) -> Loop:
        return Loop.vertical(self.base[0], self.n_samples)

    def circle(self, i: int, radius: float | None = None) -> Loop:
        r = self.radii[i] if radius is None else radius
        return Loop.circle(self.points[i], r, self.n_samples)

    @property
    def circles(self) -> list[Loop]:
        return [self.circle(i) for i in range(1, self.n)]

    def scaled(self, factor: float) -> "BasisChoice":
        return BasisChoice(self.base, list(self.points), [r * factor for r in self.radii], self.n_samples)

    def as_dict(self):
        return {
            "base_point": [float(self.base[0]), float(self.base[1])],
            "points": [[float(x), float(y)] for x, y in self.points],
            "radii": [float(r) for r in self.radii],
            "loop_samples": self.n_samples,
        }


@dataclass(frozen=True)
class HomologyVector:
    q_x: int
    q_y: int
    q: tuple[int, ...] = ()

    def as_tuple(self) -> tuple[int, ...]:
        return (self.q_x, self.q_y) + tuple(self.q)

    def __len__(self):
        return 2 + len(self.q)

    def __iter__(self):
        return iter(self.as_tuple())

    @classmethod
    def from_sequence(cls, values) -> "HomologyVector":
        values = [int(v) for v in values]
        return cls(values[0], values[1], tuple(values[2:]))


def _match_order(order, projected, tol=1e-3):
    out = []
    for p in order:
        dists = [torus_distance(p, q) for q in projected]
        k = int(np.argmin(dists)) if dists else -1
        if k < 0 or dists[k] > tol:
            raise ConfigError(f"ordering point {tuple(p)} is not a projected Weyl point")
        out.append(projected[k])
    if len(set(out)) != len(projected) or len(out) != len(projected):
        raise ConfigError("ordering must list every projected Weyl point exactly once")
    return out


def default_radius(points) -> float:
    if len(points) < 2:
        return MAX_DISC_RADIUS
    dmin = min(torus_distance(p, q) for i, p in enumerate(points) for q in points[i + 1:])
    return min(MAX_DISC_RADIUS, 0.5 * dmin)


def choose_basis(pair: SurfacePair, weyl: WeylSet, base=None, order=None, radius=None,
                 n_samples: int = DEFAULT_SAMPLES) -> BasisChoice:
    """Base point, ordering of pi(W) and disc radii.

    The base point is user supplied or found by grid search; it must keep
    both base lines 0.1 away from pi(W) and cross the arcs only where
    det J != 0. Without an override pi(W) is ordered lexicographically.
    """
    projected = weyl.projected
    if base is None:
        base, _ = choose_base_point(pair, weyl)
    base = (float(base[0]), float(base[1]))
    bad = base_point_violations(pair, weyl, base)
    if bad:
        raise NoAdmissibleBasePoint(bad[0], f"base point {base} is not admissible")
    points = _match_order(order, projected) if order is not None else sorted(projected)
    r = default_radius(points) if radius is None else float(radius)
    if r <= 0:
        raise ConfigError("disc radius must be positive")
    return BasisChoice(base, points, [r] * len(points), n_samples)


def _flow(method, pair, loop, n_sites):
    if method == "analytic":
        return spectral_flow_analytic(pair, loop)
    if method == "numeric":
        return spectral_flow_numeric(pair, loop, n_sites)
    raise ConfigError(f"flow method must be one of {FLOW_METHODS}, got {method!r}")


def edge_homology_vector(pair: SurfacePair, basis: BasisChoice, flow_method: str = "numeric",
                         n_sites: int = DEFAULT_SITES, diagnostics: dict | None = None) -> HomologyVector:
    """Coefficients from spectral flows of the edge family along the basis loops."""
    sf_y = _flow(flow_method, pair, basis.loop_y, n_sites)
    sf_x = _flow(flow_method, pair, basis.loop_x, n_sites)
    sf_i = [_flow(flow_method, pair, c, n_sites) for c in basis.circles]
    if diagnostics is not None:
        diagnostics.update({"sf_loop_y": sf_y, "sf_loop_x": sf_x, "sf_circles": sf_i,
                            "method": flow_method})
    s = cv.EDGE_SIGNS
    return HomologyVector(s["x"] * sf_y, s["y"] * sf_x, tuple(s["disc"] * v for v in sf_i))


def bulk_homology_vector(model, basis: BasisChoice, grid_n: int = DEFAULT_SURFACE_GRID,
                         diagnostics: dict | None = None) -> HomologyVector:
    """Coefficients from lattice Chern numbers of slices and tubes."""
    if isinstance(model, SurfacePair):
        model = LocalFormModel(model)
    cx = fhs_chern_detail(ClosedSurfaceGrid.slice_x(model, basis.base[0], grid_n))
    cy = fhs_chern_detail(ClosedSurfaceGrid.slice_y(model, basis.base[1], grid_n))
    tubes = [fhs_chern_detail(ClosedSurfaceGrid.tube(model, basis.points[i], basis.radii[i], grid_n))
             for i in range(1, basis.n)]
    if diagnostics is not None:
        diagnostics.update({
            "c1_slice_x": cx.value, "c1_slice_y": cy.value, "c1_tubes": [t.value for t in tubes],
            "max_residual": max([cx.residual, cy.residual] + [t.residual for t in tubes]),
            "min_gap": min([cx.min_gap, cy.min_gap] + [t.min_gap for t in tubes]),
        })
    s = cv.BULK_SIGNS
    return HomologyVector(s["x"] * cx.value, s["y"] * cy.value,
                          tuple(s["disc"] * t.value for t in tubes))


def _jittered(kind, basis, i, delta):
    if kind == "y":
        return Loop.vertical(basis.base[0] + delta, basis.n_samples)
    if kind == "x":
        return Loop.horizontal(basis.base[1] + delta, basis.n_samples)
    return basis.circle(i, basis.radii[i] + delta)


def _robust_intersection(comp, kind, basis, i=0):
    """Intersection number, retrying with slightly moved loops on tangential contact."""
    if kind == "y":
        loop = basis.loop_y
    elif kind == "x":
        loop = basis.loop_x
    else:
        loop = basis.circle(i)
    try:
        return intersection_number(comp, loop)
    except TangentialCrossing as first:
        for delta in JITTERS:
            try:
                return intersection_number(comp, _jittered(kind, basis, i, delta))
            except TangentialCrossing:
                continue
        raise first


def fermi_homology_vector(components, basis: BasisChoice, diagnostics: dict | None = None) -> HomologyVector:
    """Coefficients of the Fermi cycle sum_f (-epsilon_f) f from intersection numbers."""
    s = cv.FERMI_SIGNS
    qx = qy = 0
    q = [0] * max(basis.n - 1, 0)
    table = []
    for comp in components:
        weight = cv.FERMI_WEIGHT * comp.epsilon
        iy = _robust_intersection(comp, "y", basis)
        ix = _robust_intersection(comp, "x", basis)
        ii = [_robust_intersection(comp, "disc", basis, i) for i in range(1, basis.n)]
        qx += weight * s["x"] * iy
        qy += weight * s["y"] * ix
        for k, v in enumerate(ii):
            q[k] += weight * s["disc"] * v
        table.append({"epsilon": comp.epsilon, "I_loop_y": iy, "I_loop_x": ix, "I_circles": ii})
    if diagnostics is not None:
        diagnostics["components"] = table
    return HomologyVector(qx, qy, tuple(q))


@dataclass
class VerifyOptions:
    grid_n: int = DEFAULT_GRID
    n_sites: int = DEFAULT_SITES
    n_samples: int = DEFAULT_SAMPLES
    chern_grid: int = DEFAULT_SURFACE_GRID
    sphere_grid: tuple[int, int] = DEFAULT_SPHERE_GRID
    base: tuple[float, float] | None = None
    order: list | None = None
    radius: float | None = None
    flow_method: str = "numeric"
    check_arcs: bool = True


@dataclass
class BecReport:
    model: str
    pair: SurfacePair
    basis: BasisChoice
    bulk: HomologyVector
    edge: HomologyVector
    fermi: HomologyVector
    weyl: WeylSet
    components: list
    assumptions: object
    diagnostics: dict = field(default_factory=dict)

    @property
    def verdicts(self) -> dict:
        b, e, f = self.bulk.as_tuple(), self.edge.as_tuple(), self.fermi.as_tuple()
        return {"bulk_eq_edge": b == e, "edge_eq_fermi": e == f, "bulk_eq_fermi": b == f}

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def as_dict(self) -> dict:
        return {
            "model": {"name": self.model, "a": str(self.pair.a), "b": str(self.pair.b)},
            "basis": self.basis.as_dict(),
            "vectors": {
                "bulk": list(self.bulk.as_tuple()),
                "edge": list(self.edge.as_tuple()),
                "fermi": list(self.fermi.as_tuple()),
            },
            "verdicts": self.verdicts,
            "passed": self.passed,
            "weyl_points": [p.as_dict() for p in self.weyl],
            "assumptions": self.assumptions.as_dict(),
            "diagnostics": self.diagnostics,
            "arcs": [c.as_dict() for c in self.components],
        }


def sphere_radius(weyl: WeylSet) -> float:
    pts = [(p.kx, p.ky, p.kz) for p in weyl]
    if len(pts) < 2:
        return MAX_SPHERE_RADIUS
    def d3(p, q):
        return math.sqrt(sum(((a - b + math.pi) % TWO_PI - math.pi) ** 2 for a, b in zip(p, q)))
    dmin = min(d3(p, q) for i, p in enumerate(pts) for q in pts[i + 1:])
    return min(MAX_SPHERE_RADIUS, 0.4 * dmin)


def weyl_charges(model, weyl: WeylSet, grid=DEFAULT_SPHERE_GRID, radius: float | None = None):
    """Fill in each point's chirality; returns the list of charges."""
    rho = sphere_radius(weyl) if radius is None else radius
    return [chern_sphere(model, w, rho, grid) for w in weyl]


def verify_bec(pair: SurfacePair, options: VerifyOptions | None = None, name: str = "model") -> BecReport:
    """Full pipeline: assumptions, Weyl points, basis, three vectors, arc recovery."""
    opt = options or VerifyOptions()
    model = LocalFormModel(pair, name)
    report = check_assumptions(pair, opt.grid_n, base=opt.base)
    report.raise_if_failed()
    weyl = report.weyl
    components = report.components
    basis = choose_basis(pair, weyl, base=report.base_point, order=opt.order, radius=opt.radius,
                         n_samples=opt.n_samples)
    diag: dict = {"edge": {}, "bulk": {}, "fermi": {}}
    edge = edge_homology_vector(pair, basis, opt.flow_method, opt.n_sites, diag["edge"])
    bulk = bulk_homology_vector(model, basis, opt.chern_grid, diag["bulk"])
    fermi = fermi_homology_vector(components, basis, diag["fermi"])

    charges = weyl_charges(model, weyl, opt.sphere_grid)
    order_idx = [weyl.projected.index(p) for p in basis.points]
    groups = weyl.projected_groups
    fiber = []
    for i, gi in enumerate(order_idx):
        group_sum = sum(p.charge for p in groups[gi])
        tube = fhs_chern_detail(ClosedSurfaceGrid.tube(model, basis.points[i], basis.radii[i],
                                                       opt.chern_grid)).value
        fiber.append({"point": [float(v) for v in basis.points[i]], "charge_sum": group_sum,
                      "tube_c1": tube})
    diag["charges"] = {"values": charges, "total": int(sum(charges)), "fiber_sums": fiber,
                       "sphere_radius": sphere_radius(weyl)}
    loops = [basis.loop_x, basis.loop_y] + basis.circles
    diag["min_loop_gap"] = float(min(np.min(lp.sample(pair).gap) for lp in loops)) if loops else None
    if opt.check_arcs:
        dist = hausdorff_to_fermi(pair, components, weyl.projected)
        bound = 2.0 * TWO_PI / opt.grid_n
        diag["arc_recovery"] = {"hausdorff": dist, "bound": bound, "passed": bool(dist < bound)}
    diag["base_line_crossings"] = {
        "loop_y": [list(p) for p in line_crossings(pair, "x", basis.base[0])],
        "loop_x": [list(p) for p in line_crossings(pair, "y", basis.base[1])],
    }
    return BecReport(name, pair, basis, bulk, edge, fermi, weyl, components, report, diag)
