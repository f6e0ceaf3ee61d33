"""Weyl points of local-form models and numerical checks of the model assumptions.

For a local-form model the gap closes exactly where ``a = +1, b = 0`` (at
``kz = pi``) or ``a = -1, b = 0`` (at ``kz = 0``). The projected set on the
surface torus is therefore the common zero set of ``(a -+ 1, b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._roots import bracket_root
from .errors import AssumptionViolated, DanglingEndpoint, NewtonDiverged, NoAdmissibleBasePoint
from .expr import SurfacePair

TWO_PI = 2.0 * math.pi

DEFAULT_GRID = 512
NEWTON_TOL = 1e-12
DEDUP_TOL = 1e-6
REGULARITY_TOL = 1e-8
DEFAULT_REGION_RADIUS = 0.3
BASE_MARGIN = 0.1


def wrap_angle(x):
    """Reduce to [0, 2 pi), mapping values within 1e-12 of 2 pi to 0."""
    y = np.mod(np.asarray(x, dtype=float), TWO_PI)
    y = np.where(TWO_PI - y < 1e-12, 0.0, y)
    return float(y) if np.ndim(y) == 0 else y


def torus_delta(x, y):
    """Signed shortest displacement from y to x on the circle, in (-pi, pi]."""
    d = np.mod(np.asarray(x, dtype=float) - np.asarray(y, dtype=float) + math.pi, TWO_PI) - math.pi
    return d


def torus_distance(p, q) -> float:
    dx = torus_delta(p[0], q[0])
    dy = torus_delta(p[1], q[1])
    return float(np.hypot(dx, dy))


@dataclass
class WeylPoint:
    kx: float
    ky: float
    kz: float
    residual: float = 0.0
    det_j: float = float("nan")
    charge: int | None = None

    @property
    def projected(self) -> tuple[float, float]:
        return (self.kx, self.ky)

    @property
    def degenerate(self) -> bool:
        """True when det J vanishes at the point (a non-generic gap closing)."""
        return abs(self.det_j) <= REGULARITY_TOL

    def as_dict(self) -> dict:
        return {
            "kx": self.kx,
            "ky": self.ky,
            "kz": self.kz,
            "charge": self.charge,
            "det_j": self.det_j,
            "degenerate": self.degenerate,
            "residual": self.residual,
        }


@dataclass
class WeylSet:
    points: list[WeylPoint] = field(default_factory=list)
    snap_tol: float = DEDUP_TOL

    @property
    def projected_groups(self) -> list[list[WeylPoint]]:
        groups: list[list[WeylPoint]] = []
        for p in self.points:
            for g in groups:
                if torus_distance(g[0].projected, p.projected) < self.snap_tol:
                    g.append(p)
                    break
            else:
                groups.append([p])
        return groups

    @property
    def projected(self) -> list[tuple[float, float]]:
        """pi(W), in the order of first appearance."""
        return [g[0].projected for g in self.projected_groups]

    @property
    def multiplicities(self) -> list[int]:
        return [len(g) for g in self.projected_groups]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


# -- detection -------------------------------------------------------------------

def _cell_candidates(f, g):
    """Cells (i, j) of a periodic grid where both f and g take both signs (zeros count)."""
    def spans(v):
        corners = np.stack([v, np.roll(v, -1, 0), np.roll(v, -1, 1), np.roll(np.roll(v, -1, 0), -1, 1)])
        return (corners.min(axis=0) <= 0) & (corners.max(axis=0) >= 0)
    return np.argwhere(spans(f) & spans(g))


def _newton(pair: SurfacePair, target: float, x0: np.ndarray, max_iter: int = 200):
    x = np.array(x0, dtype=float)

    def resid(p):
        a, b = pair.values(p[0], p[1])
        return np.array([a - target, b])

    r = resid(x)
    for _ in range(max_iter):
        nr = float(np.linalg.norm(r))
        if nr < 1e-15:
            break
        jac = pair.jacobian(x[0], x[1])
        step = np.linalg.lstsq(jac, -r, rcond=None)[0]
        t = 1.0
        while True:
            trial = x + t * step
            rt = resid(trial)
            if np.linalg.norm(rt) < nr or t < 1e-8:
                break
            t *= 0.5
        x, r = trial, rt
        if np.linalg.norm(t * step) < 1e-15:
            break
    return x, float(np.max(np.abs(r)))


def detect_weyl_points(pair: SurfacePair, grid_n: int = DEFAULT_GRID) -> WeylSet:
    """Locate W by sign-change cells of (a -+ 1, b) and Newton refinement.

    Cells are visited in row-major order (kx index, then ky index) and the
    +1 level before the -1 level, so the output order is deterministic.
    Duplicates within torus distance 1e-6 keep the smallest residual.
    """
    if grid_n < 64:
        raise ValueError("grid_n must be at least 64")
    h = TWO_PI / grid_n
    k = np.arange(grid_n) * h
    kx, ky = np.meshgrid(k, k, indexing="ij")
    a, b = pair.values(kx, ky)
    found: list[WeylPoint] = []
    for target, kz in ((1.0, math.pi), (-1.0, 0.0)):
        for i, j in _cell_candidates(a - target, b):
            x0 = np.array([(i + 0.5) * h, (j + 0.5) * h])
            x, res = _newton(pair, target, x0)
            if res >= NEWTON_TOL:
                x, res = _retry_refined(pair, target, i, j, h)
                if x is None:
                    continue
            px, py = wrap_angle(x[0]), wrap_angle(x[1])
            point = WeylPoint(px, py, kz, res, float(pair.det_j(px, py)))
            for m, q in enumerate(found):
                if q.kz == kz and torus_distance(q.projected, point.projected) < DEDUP_TOL:
                    if point.residual < q.residual:
                        found[m] = point
                    break
            else:
                found.append(point)
    return WeylSet(found)


def _retry_refined(pair, target, i, j, h, sub=8):
    """Second chance for a cell whose centre did not converge.

    The cell is split into sub x sub pieces; if none of them still brackets a
    common zero the candidate was spurious (two level sets passing through
    one cell without meeting) and is dropped. Otherwise Newton restarts from
    each flagged piece; persistent failure raises NewtonDiverged.
    """
    t = (np.arange(sub + 1) / sub) * h
    gx, gy = np.meshgrid(i * h + t, j * h + t, indexing="ij")
    a, b = pair.values(gx, gy)
    f, g = a - target, b

    def spans(v):
        c = np.stack([v[:-1, :-1], v[1:, :-1], v[:-1, 1:], v[1:, 1:]])
        return (c.min(0) <= 0) & (c.max(0) >= 0)

    flagged = np.argwhere(spans(f) & spans(g))
    if len(flagged) == 0:
        return None, None
    for p, q in flagged:
        x0 = np.array([i * h + (p + 0.5) * h / sub, j * h + (q + 0.5) * h / sub])
        x, res = _newton(pair, target, x0)
        if res < NEWTON_TOL:
            return x, res
    raise NewtonDiverged((int(i), int(j)))


# -- assumption checks -------------------------------------------------------------

@dataclass
class ClauseResult:
    passed: bool
    witnesses: list = field(default_factory=list)
    detail: str = ""

    def as_dict(self):
        return {"passed": self.passed, "witnesses": [list(map(float, w)) for w in self.witnesses],
                "detail": self.detail}


@dataclass
class AssumptionReport:
    clauses: dict[str, ClauseResult]
    weyl: WeylSet
    base_point: tuple[float, float] | None
    grid_n: int
    region_radius: float
    components: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    def raise_if_failed(self):
        for name, c in self.clauses.items():
            if not c.passed:
                witness = c.witnesses[0] if c.witnesses else None
                if name == "d":
                    raise NoAdmissibleBasePoint(witness, c.detail)
                raise AssumptionViolated(name, witness, c.detail)

    def as_dict(self):
        return {
            "passed": self.passed,
            "grid_n": self.grid_n,
            "region_radius": self.region_radius,
            "base_point": None if self.base_point is None else [float(v) for v in self.base_point],
            "clauses": {k: v.as_dict() for k, v in self.clauses.items()},
            "note": "checks are sampled at grid resolution, not proofs",
        }


def line_crossings(pair: SurfacePair, axis: str, value: float, n: int = 2048):
    """Points of a^-1((-1,1)) cap b^-1(0) on the line kx = value (axis 'x') or ky = value ('y')."""
    t = np.arange(n + 1) * (TWO_PI / n)

    def pt(s):
        return (value, s) if axis == "x" else (s, value)

    def b_of(s):
        return float(pair.b(*pt(s)))

    bv = pair.b(*pt(t)) if axis == "x" else pair.b(t, np.full_like(t, value))
    bv = np.broadcast_to(bv, t.shape)
    out = []
    pos = bv >= 0
    for m in np.nonzero(pos[:-1] != pos[1:])[0]:
        if bv[m + 1] == 0.0:
            continue  # picked up as the left end of the next bracket
        s = t[m] if bv[m] == 0.0 else bracket_root(b_of, t[m], t[m + 1])
        p = pt(s)
        if abs(float(pair.a(*p))) < 1.0:
            out.append((wrap_angle(p[0]), wrap_angle(p[1])))
    return out


def _line_scores(pair: SurfacePair, coords: np.ndarray, values: np.ndarray, axis: str, n: int = 1024):
    """Score of each candidate line: min(distance to pi(W), min |det J| at arc crossings)."""
    t = np.arange(n) * (TWO_PI / n)
    if axis == "x":
        X, Y = np.meshgrid(values, t, indexing="ij")
    else:
        Y, X = np.meshgrid(values, t, indexing="ij")
    a, b = pair.values(X, Y)
    det = pair.det_j(X, Y)
    nb = np.roll(b, -1, axis=1)
    na = np.roll(a, -1, axis=1)
    nd = np.roll(det, -1, axis=1)
    change = (b >= 0) != (nb >= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(change, b / (b - nb), 0.0)
    a_cross = a + w * (na - a)
    d_cross = np.abs(det + w * (nd - det))
    relevant = change & (np.abs(a_cross) < 1.0)
    det_score = np.where(relevant, d_cross, np.inf).min(axis=1)
    if len(coords):
        dist = np.abs(torus_delta(values[:, None], np.asarray(coords)[None, :])).min(axis=1)
    else:
        dist = np.full(len(values), np.inf)
    return np.minimum(dist, det_score)


def choose_base_point(pair: SurfacePair, weyl: WeylSet, n_candidates: int = 256):
    """Grid search over base points; the score of a line is min(distance to pi(W),
    min |det J| at its arc crossings). Ties go to the smallest coordinate."""
    values = np.arange(n_candidates) * (TWO_PI / n_candidates)
    proj = weyl.projected
    sx = _line_scores(pair, [p[0] for p in proj], values, "x")
    sy = _line_scores(pair, [p[1] for p in proj], values, "y")
    ix, iy = int(np.argmax(sx)), int(np.argmax(sy))
    return (float(values[ix]), float(values[iy])), (float(sx[ix]), float(sy[iy]))


def base_point_violations(pair: SurfacePair, weyl: WeylSet, base, margin: float = BASE_MARGIN):
    """Witnesses showing (kx0, ky0) is not admissible; empty when it is."""
    kx0, ky0 = float(base[0]), float(base[1])
    bad = []
    for p in weyl.projected:
        if abs(torus_delta(p[0], kx0)) < margin or abs(torus_delta(p[1], ky0)) < margin:
            bad.append(p)
    for p in line_crossings(pair, "x", kx0) + line_crossings(pair, "y", ky0):
        if abs(float(pair.det_j(*p))) <= REGULARITY_TOL:
            bad.append(p)
    return bad


def check_assumptions(pair: SurfacePair, grid_n: int = DEFAULT_GRID, base=None,
                      region_radius: float = DEFAULT_REGION_RADIUS, weyl: WeylSet | None = None,
                      components=None) -> AssumptionReport:
    """Best-effort numerical check of clauses (a)-(d) at grid resolution.

    ``components`` (Fermi-arc components) are extracted here unless supplied.
    A degenerate root (det J = 0 at a point of pi(W)) is recorded in the
    clause (b) detail but does not fail the clause, which only constrains
    det J off the point.
    """
    from .fermiarc import extract_fermi_arcs  # local import: fermiarc depends on this module

    clauses: dict[str, ClauseResult] = {}
    if weyl is None:
        weyl = detect_weyl_points(pair, grid_n)
    proj = weyl.projected
    close = [(p, q) for i, p in enumerate(proj) for q in proj[i + 1:] if torus_distance(p, q) < 1e-3]
    clauses["a"] = ClauseResult(not close, [p for p, _ in close],
                                f"{len(proj)} isolated points found")

    comps_error = None
    if components is None:
        try:
            components = extract_fermi_arcs(pair, grid_n, weyl=weyl)
        except DanglingEndpoint as exc:
            comps_error = exc
            components = []

    bad_b = []
    degenerate = [p.projected for p in weyl if p.degenerate]
    for w in proj:
        for comp in components:
            pts = comp.interior_points()
            if len(pts) == 0:
                continue
            d = np.hypot(torus_delta(pts[:, 0], w[0]), torus_delta(pts[:, 1], w[1]))
            near = pts[(d < region_radius) & (d > 1e-9)]
            if len(near):
                dets = np.abs(pair.det_j(near[:, 0], near[:, 1]))
                if dets.min() <= REGULARITY_TOL:
                    bad_b.append(tuple(near[int(np.argmin(dets))]))
    detail_b = f"|det J| > {REGULARITY_TOL:g} on the arc within radius {region_radius:g} of each point"
    if degenerate:
        detail_b += f"; det J vanishes at {len(degenerate)} projected point(s) themselves"
    clauses["b"] = ClauseResult(not bad_b, bad_b, detail_b)

    bad_c = []
    if comps_error is not None:
        bad_c.append(tuple(comps_error.witness))
    for comp in components:
        pts = comp.interior_points()
        if len(pts):
            bx, by = pair.grad_b(pts[:, 0], pts[:, 1])
            g = np.hypot(bx, by)
            if g.min() <= REGULARITY_TOL:
                bad_c.append(tuple(pts[int(np.argmin(g))]))
    clauses["c"] = ClauseResult(not bad_c, bad_c,
                                f"{len(components)} components; |grad b| > {REGULARITY_TOL:g} on each"
                                if comps_error is None else str(comps_error))

    if base is None:
        base, scores = choose_base_point(pair, weyl)
        detail_d = f"auto-selected, line scores {scores[0]:.4g}, {scores[1]:.4g}"
    else:
        base = (float(base[0]), float(base[1]))
        detail_d = "user-supplied"
    bad_d = base_point_violations(pair, weyl, base)
    clauses["d"] = ClauseResult(not bad_d, bad_d or [], detail_d)
    if bad_d:
        detail_d += "; base point lines meet pi(W) or a degenerate arc crossing"
        clauses["d"].detail = detail_d
    return AssumptionReport(clauses, weyl, base, grid_n, region_radius, list(components))
