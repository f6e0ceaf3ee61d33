"""Fermi-arc extraction, orientation signs and intersection numbers.

The arc set is ``F = a^-1([-1, 1]) cap b^-1(0)``. Away from the projected Weyl
points it is a union of embedded intervals and circles (the level set of a
regular value), which we trace by periodic marching squares. Polylines are
stored *unwrapped*: consecutive points differ by less than a grid cell, and
coordinates may leave [0, 2 pi) when a component crosses the torus seam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._roots import bracket_root
from .errors import DanglingEndpoint, SignInconsistent, TangentialCrossing
from .expr import SurfacePair
from .weyl import DEFAULT_GRID, WeylSet, detect_weyl_points, torus_delta, wrap_angle

TWO_PI = 2.0 * math.pi

EXCLUSION_CELLS = 1.5
SNAP_CELLS = 3.0
MIN_CROSSING_ANGLE = 1e-3


@dataclass
class FermiArcComponent:
    """An oriented component of F.

    ``kind`` is ``"arc"`` (both ends at projected Weyl points, whose indices
    into ``WeylSet.projected`` are ``start``/``end``) or ``"circle"`` (closed;
    the polyline repeats its first point at the end).
    """

    kind: str
    polyline: np.ndarray
    epsilon: int = 0
    start: int | None = None
    end: int | None = None

    @property
    def is_arc(self) -> bool:
        return self.kind == "arc"

    def interior_points(self) -> np.ndarray:
        return self.polyline[1:-1] if self.is_arc else self.polyline[:-1]

    def reversed(self) -> "FermiArcComponent":
        return FermiArcComponent(self.kind, self.polyline[::-1].copy(), -self.epsilon,
                                 self.end, self.start)

    def endpoints(self):
        return tuple(self.polyline[0]), tuple(self.polyline[-1])

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "epsilon": self.epsilon,
            "start": self.start,
            "end": self.end,
            "polyline": [[float(x), float(y)] for x, y in self.polyline],
        }


@dataclass
class FermiCycle:
    """The 1-cycle sum_j (-epsilon_j) f_j."""

    components: list[FermiArcComponent] = field(default_factory=list)

    @property
    def multiplicities(self) -> list[int]:
        return [-c.epsilon for c in self.components]


# -- marching squares ------------------------------------------------------------

def _edge_points(b, h):
    """Zero crossings on grid edges. Keys ('h', i, j): node (i,j)-(i+1,j); ('v', i, j): (i,j)-(i,j+1)."""
    n = b.shape[0]
    pos = b >= 0
    points = {}
    for kind, axis in (("h", 0), ("v", 1)):
        nb = np.roll(b, -1, axis=axis)
        npos = np.roll(pos, -1, axis=axis)
        for i, j in np.argwhere(pos != npos):
            b0, b1 = b[i, j], nb[i, j]
            t = b0 / (b0 - b1)
            if kind == "h":
                points[(kind, i, j)] = ((i + t) * h, j * h)
            else:
                points[(kind, i, j)] = (i * h, (j + t) * h)
    return points, n


def _cell_segments(b, pair, h, points):
    """Pairs of edge keys joined inside each cell, saddles resolved by the centre value."""
    n = b.shape[0]
    pos = b >= 0
    c0 = pos
    c1 = np.roll(pos, -1, 0)
    c2 = np.roll(np.roll(pos, -1, 0), -1, 1)
    c3 = np.roll(pos, -1, 1)
    mixed = ~((c0 == c1) & (c1 == c2) & (c2 == c3))
    segments = []
    for i, j in np.argwhere(mixed):
        ip, jp = (i + 1) % n, (j + 1) % n
        bottom, top = ("h", i, j), ("h", i, jp)
        left, right = ("v", i, j), ("v", ip, j)
        present = [e for e in (bottom, right, top, left) if e in points]
        if len(present) == 2:
            segments.append(tuple(present))
        elif len(present) == 4:
            centre_pos = pair.b((i + 0.5) * h, (j + 0.5) * h) >= 0
            if centre_pos == c0[i, j]:
                segments.append((bottom, right))
                segments.append((top, left))
            else:
                segments.append((bottom, left))
                segments.append((top, right))
    return segments


def _chain(segments):
    """Join segments sharing edge keys into ordered chains; returns (chain, closed) pairs."""
    adjacency: dict = {}
    for k, (p, q) in enumerate(segments):
        adjacency.setdefault(p, []).append(k)
        adjacency.setdefault(q, []).append(k)
    used = [False] * len(segments)
    chains = []

    def walk(start_key, seg):
        keys = [start_key]
        key = start_key
        while seg is not None and not used[seg]:
            used[seg] = True
            p, q = segments[seg]
            key = q if p == key else p
            keys.append(key)
            nxt = [s for s in adjacency[key] if not used[s]]
            seg = nxt[0] if nxt else None
        return keys

    # Open chains first, from keys of degree one, in deterministic order.
    for key in sorted(k for k, v in adjacency.items() if len(v) == 1):
        seg = adjacency[key][0]
        if not used[seg]:
            chains.append((walk(key, seg), False))
    for k in range(len(segments)):
        if not used[k]:
            keys = walk(segments[k][0], k)
            chains.append((keys, keys[0] == keys[-1]))
    return chains


def _unwrap(points):
    pts = np.array(points, dtype=float)
    if len(pts) > 1:
        steps = torus_delta(pts[1:], pts[:-1])
        pts = np.vstack([pts[:1], pts[0] + np.cumsum(steps, axis=0)])
    return pts


def _drop_repeats(pts, tol=1e-12):
    """Remove consecutive coincident vertices (a contour through a grid node
    yields the same crossing on two edges)."""
    if len(pts) < 2:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.hypot(*(pts[1:] - pts[:-1]).T) > tol
    return pts[keep]


def _nearest_projected(p, projected):
    if not projected:
        return None, math.inf
    proj = np.array(projected)
    d = np.hypot(torus_delta(proj[:, 0], p[0]), torus_delta(proj[:, 1], p[1]))
    k = int(np.argmin(d))
    return k, float(d[k])


def _image_near(q, p):
    """The lift of torus point q closest to the unwrapped point p."""
    return np.array([p[0] + torus_delta(q[0], p[0]), p[1] + torus_delta(q[1], p[1])])


def extract_fermi_arcs(pair: SurfacePair, grid_n: int = DEFAULT_GRID,
                       weyl: WeylSet | None = None) -> list[FermiArcComponent]:
    """Trace the components of F by periodic marching squares on a grid_n^2 grid.

    Segments are kept where |a| < 1 at both ends and both ends are farther
    than 1.5 cells from pi(W). The open ends of each chain are then joined to
    the nearest projected Weyl point within 3 cells (DanglingEndpoint
    otherwise). Arcs run from the lower to the higher index of
    ``weyl.projected``; circles start at their lexicographically smallest
    vertex. Each component gets its orientation sign epsilon.
    """
    if weyl is None:
        weyl = detect_weyl_points(pair, grid_n)
    projected = weyl.projected
    h = TWO_PI / grid_n
    k = np.arange(grid_n) * h
    KX, KY = np.meshgrid(k, k, indexing="ij")
    b = pair.b(KX, KY)
    points, _ = _edge_points(b, h)
    if not points:
        return []
    keys = list(points)
    xy = np.array([points[key] for key in keys])
    a_vals = pair.a(xy[:, 0], xy[:, 1])
    keep = np.abs(a_vals) < 1.0
    for w in projected:
        d = np.hypot(torus_delta(xy[:, 0], w[0]), torus_delta(xy[:, 1], w[1]))
        keep &= d > EXCLUSION_CELLS * h
    good = {key for key, ok in zip(keys, keep) if ok}
    segments = [s for s in _cell_segments(b, pair, h, points) if s[0] in good and s[1] in good]

    components = []
    for chain, closed in _chain(segments):
        pts = _drop_repeats(_unwrap([points[key] for key in chain]))
        if closed:
            comp = FermiArcComponent("circle", pts)
        else:
            ends = []
            for p in (pts[0], pts[-1]):
                idx, dist = _nearest_projected(wrap_angle(p), projected)
                if dist > SNAP_CELLS * h:
                    raise DanglingEndpoint((float(wrap_angle(p[0])), float(wrap_angle(p[1]))))
                ends.append(idx)
            first = _image_near(projected[ends[0]], pts[0])
            last = _image_near(projected[ends[1]], pts[-1])
            pts = np.vstack([first, pts, last])
            comp = FermiArcComponent("arc", pts, start=ends[0], end=ends[1])
        components.append(_canonical(comp))
    for comp in components:
        comp.epsilon = component_sign(pair, comp)
    components.sort(key=_sort_key)
    return components


def _canonical(comp: FermiArcComponent) -> FermiArcComponent:
    pts = comp.polyline
    if comp.is_arc:
        if comp.start > comp.end or (comp.start == comp.end and tuple(pts[0]) > tuple(pts[-1])):
            comp = comp.reversed()
        shift = np.floor(comp.polyline[0] / TWO_PI) * TWO_PI
        comp.polyline = comp.polyline - shift
        return comp
    gap = np.hypot(torus_delta(pts[-1, 0], pts[0, 0]), torus_delta(pts[-1, 1], pts[0, 1]))
    ring = pts[:-1] if gap < 1e-12 else pts
    wrapped = wrap_angle(ring)
    m = min(range(len(ring)), key=lambda r: (wrapped[r, 0], wrapped[r, 1]))
    ring = np.roll(ring, -m, axis=0)
    ring = _unwrap(wrap_angle(ring))
    closing = _image_near(wrap_angle(ring[0]), ring[-1])
    comp.polyline = np.vstack([ring, closing])
    return comp


def _sort_key(comp: FermiArcComponent):
    p = wrap_angle(comp.polyline[0])
    if comp.is_arc:
        return (0, comp.start, comp.end, float(p[0]), float(p[1]))
    return (1, -1, -1, float(p[0]), float(p[1]))


# -- orientation sign --------------------------------------------------------------

def polyline_tangents(pts: np.ndarray) -> np.ndarray:
    """Central-difference tangents at interior vertices (one fewer at each end)."""
    return (pts[2:] - pts[:-2]) / 2.0


def c_f_values(pair: SurfacePair, comp: FermiArcComponent):
    """The function c_f = (-b_x f_y' + b_y f_x') / |grad b|^2 at interior vertices,
    using the polyline vertex index as the curve parameter."""
    pts = comp.polyline
    if not comp.is_arc:
        # Prepend the last ring vertex, translated by the closing offset (a
        # multiple of 2 pi for non-contractible circles), so every vertex is interior.
        pts = np.vstack([pts[-2:-1] - (pts[-1] - pts[0]), pts])
    tang = polyline_tangents(pts)
    mid = pts[1:-1]
    bx, by = pair.grad_b(mid[:, 0], mid[:, 1])
    return (-bx * tang[:, 1] + by * tang[:, 0]) / (bx * bx + by * by), mid, tang


def component_sign(pair: SurfacePair, comp: FermiArcComponent) -> int:
    """Common sign of c_f along the component (SignInconsistent if it varies)."""
    values, _, _ = c_f_values(pair, comp)
    if len(values) == 0:
        raise SignInconsistent([])
    signs = np.sign(values)
    if not (np.all(signs > 0) or np.all(signs < 0)):
        raise SignInconsistent(values.tolist())
    return int(signs[0])


def sign_identity_residuals(pair: SurfacePair, comp: FermiArcComponent):
    """Residuals of the two identities linking det J, c_f and d(a o f)/dt.

    Returns ``(general, natural)`` at the interior vertices:

    * ``general``: d(a o f)/dt - c_f det J with the tangent normalised to unit
      speed; this form holds for every parametrisation of the arc;
    * ``natural``: det J - c_f d(a o f)/dt with the tangent rescaled to speed
      |grad b|, the parametrisation in which the product form holds.
    """
    c_f, mid, tang = c_f_values(pair, comp)
    ax, ay = pair.grad_a(mid[:, 0], mid[:, 1])
    bx, by = pair.grad_b(mid[:, 0], mid[:, 1])
    det = pair.det_j(mid[:, 0], mid[:, 1])
    speed = np.hypot(tang[:, 0], tang[:, 1])
    da_dt = ax * tang[:, 0] + ay * tang[:, 1]
    general = (da_dt - c_f * det) / speed
    factor = np.hypot(bx, by) / speed
    natural = det - (c_f * factor) * (da_dt * factor)
    return general, natural


# -- intersection numbers ----------------------------------------------------------

def _segments(pts):
    return pts[:-1], pts[1:]


def _ring(poly):
    """Split a polyline into (vertices, end-vertex index array, closure translation).

    For a closed polyline (last vertex equal to the first on the torus) the
    final segment ends at vertex 0 shifted by the exact lattice translation,
    so the shared vertex is represented by one set of coordinates.
    """
    poly = np.asarray(poly, dtype=float)
    close = poly[-1] - poly[0]
    lattice = TWO_PI * np.round(close / TWO_PI)
    closed = len(poly) > 2 and np.all(np.abs(close - lattice) < 1e-9)
    n_seg = len(poly) - 1
    if closed:
        verts = poly[:-1]
        end_idx = (np.arange(n_seg) + 1) % n_seg
        end_shift = np.zeros((n_seg, 2))
        end_shift[-1] = lattice
    else:
        verts = poly
        end_idx = np.arange(n_seg) + 1
        end_shift = np.zeros((n_seg, 2))
    return verts, np.arange(n_seg), end_idx, end_shift


def crossings(poly_f: np.ndarray, poly_g: np.ndarray):
    """Transversal crossings of two polylines on the torus.

    Returns a list of (point, sign) where sign is +1 when the frame
    (tangent of f, tangent of g) is positively oriented in (kx, ky).

    Segments cross when each one's endpoints lie on opposite sides of the
    other's supporting line, a point exactly on a line counting as the
    positive side. A shared vertex gets the same side value in both of its
    segments, so a crossing through a vertex is counted exactly once and a
    touching vertex contributes a cancelling pair.
    """
    if len(poly_f) < 2 or len(poly_g) < 2:
        return []
    vf, sf, ef, tf = _ring(poly_f)
    vg, sg, eg, tg = _ring(poly_g)
    p0, p1 = vf[sf], vf[ef] + tf
    q0, q1 = vg[sg], vg[eg] + tg
    # Prefilter on nearest images of segment midpoints.
    pc = 0.5 * (p0 + p1)
    qc = 0.5 * (q0 + q1)
    pr = 0.5 * np.hypot(*(p1 - p0).T)
    qr = 0.5 * np.hypot(*(q1 - q0).T)
    dx = torus_delta(qc[None, :, 0], pc[:, None, 0])
    dy = torus_delta(qc[None, :, 1], pc[:, None, 1])
    near = np.hypot(dx, dy) <= (pr[:, None] + qr[None, :]) * 1.0001 + 1e-12
    ii, jj = np.nonzero(near)
    if len(ii) == 0:
        return []
    # Exact multiples of 2 pi: the loop image is moved next to the f segment.
    shift = TWO_PI * np.round((pc[ii] - qc[jj]) / TWO_PI)
    a0 = vf[sf[ii]]
    a1 = vf[ef[ii]]
    a1_frame = shift - tf[ii]          # loop shift seen from the end vertex's own frame
    c0 = vg[sg[jj]]
    c1 = vg[eg[jj]]
    c1_frame = shift + tg[jj]
    r = (a1 + tf[ii]) - a0
    s = (c1 + tg[jj]) - c0

    def cross(u, v):
        return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]

    # Each side value is computed from one vertex and one segment start, in an
    # image frame that agrees between the two segments sharing the vertex.
    side_a0 = cross(s, a0 - (c0 + shift)) >= 0
    side_a1 = cross(s, a1 - (c0 + a1_frame)) >= 0
    side_c0 = cross(r, (c0 + shift) - a0) >= 0
    side_c1 = cross(r, (c1 + c1_frame) - a0) >= 0
    denom = cross(r, s)
    hit = (side_a0 != side_a1) & (side_c0 != side_c1)
    out = []
    for m in np.nonzero(hit)[0]:
        if denom[m] == 0.0:
            raise TangentialCrossing((float(a0[m, 0]), float(a0[m, 1])))
        sin_angle = denom[m] / (np.hypot(*r[m]) * np.hypot(*s[m]))
        d = (c0[m] + shift[m]) - a0[m]
        t = (d[0] * s[m, 1] - d[1] * s[m, 0]) / denom[m]
        point = a0[m] + min(max(t, 0.0), 1.0) * r[m]
        if abs(sin_angle) < math.sin(MIN_CROSSING_ANGLE):
            raise TangentialCrossing((float(point[0]), float(point[1])))
        out.append(((float(point[0]), float(point[1])), 1 if denom[m] > 0 else -1))
    # Collinear overlap is tangential contact.
    off = cross(s, a0 - (c0 + shift))
    col = (denom == 0) & (np.abs(off) < 1e-14)
    if np.any(col):
        m = np.nonzero(col)[0]
        ss = np.einsum("ij,ij->i", s[m], s[m])
        e0 = np.einsum("ij,ij->i", a0[m] - (c0[m] + shift[m]), s[m])
        e1 = np.einsum("ij,ij->i", a0[m] + r[m] - (c0[m] + shift[m]), s[m])
        overlap = (np.maximum(e0, e1) >= 0) & (np.minimum(e0, e1) <= ss)
        if np.any(overlap):
            k = m[int(np.argmax(overlap))]
            raise TangentialCrossing((float(a0[k, 0]), float(a0[k, 1])))
    return out


def intersection_number(comp: FermiArcComponent, loop) -> int:
    """Signed count of crossings, positive when (comp tangent, loop tangent)
    is positively oriented."""
    poly_g = loop.polyline() if hasattr(loop, "polyline") else np.asarray(loop)
    return sum(sign for _, sign in crossings(comp.polyline, poly_g))


def fermi_cycle(components) -> FermiCycle:
    return FermiCycle(list(components))


# -- dense sampling of F and Hausdorff distance ------------------------------------

def dense_fermi_samples(pair: SurfacePair, n_lines: int = 2048, n_samples: int = 4096) -> np.ndarray:
    """Points of F found by 1D root finding of b along lines kx = const and ky = const."""
    # Offset grids keep sample nodes off the exact zeros that trig models tend
    # to have at multiples of pi/2, so every root falls strictly inside a bracket.
    t = ((np.arange(n_samples + 1) + 0.5) / n_samples) * TWO_PI
    lines = (np.arange(n_lines) + 0.25) * (TWO_PI / n_lines)
    out = []
    for axis in ("x", "y"):
        if axis == "x":
            X, Y = np.meshgrid(lines, t, indexing="ij")
        else:
            Y, X = np.meshgrid(lines, t, indexing="ij")
        b = pair.b(X, Y)
        pos = b >= 0
        li, mi = np.nonzero(pos[:, :-1] != pos[:, 1:])
        for l, m in zip(li, mi):
            c = lines[l]
            if axis == "x":
                root = bracket_root(lambda s: pair.b(c, s), t[m], t[m + 1], xtol=1e-13)
                p = (c, root)
            else:
                root = bracket_root(lambda s: pair.b(s, c), t[m], t[m + 1], xtol=1e-13)
                p = (root, c)
            if abs(pair.a(*p)) <= 1.0:
                out.append(p)
    if not out:
        return np.empty((0, 2))
    return wrap_angle(np.array(out))


def densify(poly: np.ndarray, spacing: float) -> np.ndarray:
    pts = [poly[:1]]
    for p, q in zip(poly[:-1], poly[1:]):
        m = max(1, int(math.ceil(np.hypot(*(q - p)) / spacing)))
        s = (np.arange(1, m + 1) / m)[:, None]
        pts.append(p + s * (q - p))
    return np.vstack(pts)


def hausdorff_to_fermi(pair: SurfacePair, components, projected, grid_samples=None,
                       spacing: float = 1e-3) -> float:
    """Torus Hausdorff distance between (union of polylines) cup pi(W) and a dense sample of F."""
    dense = dense_fermi_samples(pair) if grid_samples is None else grid_samples
    pieces = [densify(c.polyline, spacing) for c in components]
    pieces.append(np.asarray(projected, dtype=float).reshape(-1, 2))
    recon = np.vstack(pieces) if pieces else np.empty((0, 2))
    if len(dense) == 0 and len(recon) == 0:
        return 0.0
    if len(dense) == 0 or len(recon) == 0:
        return math.inf
    recon_w = wrap_angle(recon)
    dense_w = wrap_angle(dense)
    t1 = cKDTree(recon_w, boxsize=TWO_PI)
    t2 = cKDTree(dense_w, boxsize=TWO_PI)
    d1 = t1.query(dense_w)[0].max()
    d2 = t2.query(recon_w)[0].max()
    return float(max(d1, d2))


def arc_rows(components):
    """CSV rows (component_id, kind, epsilon, kx, ky); coordinates unwrapped."""
    rows = []
    for cid, comp in enumerate(components):
        for x, y in comp.polyline:
            rows.append((cid, comp.kind, comp.epsilon, float(x), float(y)))
    return rows
